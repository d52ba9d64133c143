"""Command-line surface: single gap evaluations, scaling sweeps, and the
identity-verification suite.

Configuration is an INI file (key/value grouped in sections) merged with
command-line flags; flags win.  Exit codes: 0 success, 1 configuration
error, 2 numerical failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from .records import append_jsonl, emit_csv, emit_gnuplot, fit_scaling
from .scenarios import compute_record, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

_SCENARIOS = ("homogeneous", "impurity", "disorder")
_METHODS = ("direct", "pencil", "wigner")


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _parse_int_list(text: str, field: str) -> list:
    try:
        vals = [int(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(field, f"not an integer list: {text!r}") from exc
    if not vals:
        raise ConfigError(field, "empty list")
    return vals


def load_config(path: str | None) -> dict:
    """Flat {"section.key": value} view of the INI file."""
    flat: dict = {}
    if path is None:
        return flat
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError("config", f"cannot read {path}")
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[f"{section}.{key}"] = value
    return flat


def _setting(cfg: dict, flags: argparse.Namespace, flag_name: str, cfg_key: str,
             default=None, cast=str):
    value = getattr(flags, flag_name, None)
    if value is None:
        raw = cfg.get(cfg_key)
        if raw is None:
            return default
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(cfg_key, f"bad value {raw!r}") from exc
    return value


def _network_params(cfg, args, scenario: str) -> dict:
    params: dict = {}
    getf = lambda flag, key, default: _setting(cfg, args, flag, key, default, float)
    if scenario == "homogeneous":
        params["eta"] = getf("eta", "network.eta", 1.0)
        params["xi"] = getf("xi", "network.xi", 1.0)
        params["mass"] = getf("mass", "network.mass", 1.0)
    elif scenario == "impurity":
        params["eta_bulk"] = getf("eta_bulk", "network.eta_bulk", 10.0)
        params["eta_center"] = getf("eta_center", "network.eta_center", 5.0)
        params["xi"] = getf("xi", "network.xi", 1.0)
        params["mass"] = getf("mass", "network.mass", 1.0)
    else:
        target = _setting(cfg, args, "disorder_target", "network.disorder_target",
                          "pinning")
        if target not in ("pinning", "mass", "interaction"):
            raise ConfigError("network.disorder_target", f"unknown target {target!r}")
        params["target"] = target
        params["base"] = getf("disorder_base", "network.disorder_base", 1.0)
        params["strength"] = getf("disorder_strength", "network.disorder_strength", 1.0)
    tag = _setting(cfg, args, "friction", "network.friction", "terminal_ends")
    if not tag:
        raise ConfigError("network.friction", "missing friction preset")
    params["friction_tag"] = tag
    params["gamma"] = getf("gamma", "network.gamma", 1.0)
    params["temperature"] = getf("temperature", "network.temperature", 1.0)
    return params


def cmd_gap(args) -> int:
    cfg = load_config(args.config)
    scenario = _setting(cfg, args, "scenario", "network.scenario", "homogeneous")
    if scenario not in _SCENARIOS:
        raise ConfigError("network.scenario", f"unknown scenario {scenario!r}")
    method = _setting(cfg, args, "method", "run.method", "direct")
    if method not in _METHODS:
        raise ConfigError("run.method", f"unknown method {method!r}")
    d = _setting(cfg, args, "dim", "network.dim", 1, int)
    n = _setting(cfg, args, "n", "network.n", None, int)
    if n is None:
        raise ConfigError("network.n", "missing system size")
    seed = _setting(cfg, args, "seed", "run.seed", 0, int)
    out = _setting(cfg, args, "out", "run.out", "gap_records.jsonl")
    params = _network_params(cfg, args, scenario)

    record = compute_record(scenario, d, n, seed, method, params)
    if record.failed:
        print(f"gap computation failed: {record.flags}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"scenario={scenario} d={d} n={n} seed={seed} method={method} "
          f"gap={record.gap:.15g} attaining={record.re:.15g}{record.im:+.15g}i")
    append_jsonl(record, out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    scenario = _setting(cfg, args, "scenario", "network.scenario", "homogeneous")
    if scenario not in _SCENARIOS:
        raise ConfigError("network.scenario", f"unknown scenario {scenario!r}")
    method = _setting(cfg, args, "method", "run.method", "direct")
    if method not in _METHODS:
        raise ConfigError("run.method", f"unknown method {method!r}")
    d = _setting(cfg, args, "dim", "network.dim", 1, int)
    n_text = _setting(cfg, args, "n_list", "sweep.n_list", None)
    if n_text is None:
        raise ConfigError("sweep.n_list", "missing sweep sizes")
    n_list = _parse_int_list(n_text, "sweep.n_list") if isinstance(n_text, str) else n_text
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("sweep.n_list", "sizes must be strictly increasing")
    seeds_text = _setting(cfg, args, "seeds", "sweep.seeds", "0")
    seeds = _parse_int_list(seeds_text, "sweep.seeds") if isinstance(seeds_text, str) else seeds_text
    out_csv = Path(_setting(cfg, args, "out", "sweep.out_csv", "sweep.csv"))
    model = _setting(cfg, args, "fit", "sweep.fit", None)
    min_n_fit = _setting(cfg, args, "min_n_fit", "sweep.min_n_fit", None, int)
    params = _network_params(cfg, args, scenario)
    workers = _setting(cfg, args, "workers", "run.workers", None, int)

    records = run_sweep(scenario, n_list, seeds=seeds, method=method, d=d,
                        params=params, workers=workers)
    emit_csv(records, out_csv)
    n_failed = sum(r.failed for r in records)
    print(f"wrote {len(records)} records to {out_csv} ({n_failed} failures)")

    fit = None
    if model:
        try:
            fit = fit_scaling(records, model, min_n=min_n_fit)
            label = "slope" if model == "power-law" else "rate"
            print(f"{model} fit: {label}={fit.rate:.4f} R^2={fit.r_squared:.5f} "
                  f"n={fit.n_range[0]}..{fit.n_range[1]} ({fit.n_points} points)")
        except ValueError as exc:
            print(f"fit skipped: {exc}", file=sys.stderr)
    emit_gnuplot(out_csv.name, fit, out_csv.with_suffix(".gp"))
    if n_failed == len(records):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(_args) -> int:
    from .verify import run_verification
    results = run_verification()
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: observed={r.observed:.3e} bound={r.bound:.3e}"
              + (f"  ({r.detail})" if r.detail else ""))
    if failed:
        print(f"{len(failed)} checks failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaplab",
        description="Spectral gaps of damped harmonic oscillator networks")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--dim", type=int, help="lattice dimension")
    common.add_argument("--scenario", choices=_SCENARIOS)
    common.add_argument("--method", choices=_METHODS)
    common.add_argument("--friction", help="friction preset tag")
    common.add_argument("--gamma", type=float, help="friction strength")
    common.add_argument("--eta", type=float, help="pinning strength")
    common.add_argument("--xi", type=float, help="interaction strength")
    common.add_argument("--mass", type=float, help="particle mass")
    common.add_argument("--eta-bulk", dest="eta_bulk", type=float)
    common.add_argument("--eta-center", dest="eta_center", type=float)
    common.add_argument("--disorder-target", dest="disorder_target",
                        choices=("pinning", "mass", "interaction"))
    common.add_argument("--disorder-base", dest="disorder_base", type=float)
    common.add_argument("--disorder-strength", dest="disorder_strength", type=float)
    common.add_argument("--temperature", type=float)
    common.add_argument("--workers", type=int)

    p_gap = sub.add_parser("gap", parents=[common], help="one gap evaluation")
    p_gap.add_argument("--n", type=int, help="side length (or half width)")
    p_gap.add_argument("--seed", type=int)
    p_gap.add_argument("--out", help="JSON-lines record store")
    p_gap.set_defaults(func=cmd_gap)

    p_sweep = sub.add_parser("sweep", parents=[common], help="gap sweep over sizes")
    p_sweep.add_argument("--n-list", dest="n_list", help="comma-separated sizes")
    p_sweep.add_argument("--seeds", help="comma-separated seeds")
    p_sweep.add_argument("--out", help="output CSV path")
    p_sweep.add_argument("--fit", choices=("power-law", "exponential"))
    p_sweep.add_argument("--min-n-fit", dest="min_n_fit", type=int)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the identity suite")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
