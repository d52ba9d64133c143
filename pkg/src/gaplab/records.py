"""Sweep rows, scaling fits, and the on-disk formats (CSV, JSON lines,
gnuplot scripts)."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

CSV_HEADER = ["scenario", "d", "n", "seed", "method", "gap", "re", "im", "wall_ms", "flags"]
RECORD_SCHEMA_VERSION = 1


def round_sig(x: float, digits: int = 15) -> float:
    """Round through a fixed-width decimal representation.

    Records store gaps already rounded this way, so emitting and parsing
    the CSV is exact.
    """
    if not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


@dataclass(frozen=True)
class SweepRecord:
    scenario: str
    d: int
    n: int
    seed: int
    method: str
    gap: float
    re: float
    im: float
    wall_ms: float
    flags: str = ""

    @property
    def failed(self) -> bool:
        return self.flags.startswith("error:")

    @property
    def noise_floored(self) -> bool:
        return "noise-floor" in self.flags


def emit_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([r.scenario, r.d, r.n, r.seed, r.method,
                             f"{r.gap:.15g}", f"{r.re:.15g}", f"{r.im:.15g}",
                             f"{r.wall_ms:.3f}", r.flags])


def parse_csv(path) -> list:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        for row in reader:
            out.append(SweepRecord(scenario=row[0], d=int(row[1]), n=int(row[2]),
                                   seed=int(row[3]), method=row[4], gap=float(row[5]),
                                   re=float(row[6]), im=float(row[7]),
                                   wall_ms=float(row[8]), flags=row[9]))
    return out


def append_jsonl(record: SweepRecord, path) -> None:
    payload = {"v": RECORD_SCHEMA_VERSION, **asdict(record)}
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")


def read_jsonl(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                obj.pop("v", None)
                out.append(SweepRecord(**obj))
    return out


@dataclass(frozen=True)
class ScalingFit:
    model: str                 # 'power-law' or 'exponential'
    rate: float                # slope in log N (power law) or in N (exponential)
    intercept: float
    r_squared: float
    n_range: tuple
    n_points: int


def fit_scaling(records, model: str, min_n: int | None = None,
                min_gap: float = 0.0) -> ScalingFit:
    """Least-squares scaling law through sweep records.

    Power law regresses log(gap) on log(n); exponential regresses
    log(gap) on n and by default drops rows below n = 16, where small
    systems have not reached the asymptotic regime.  Rows with
    nonpositive or noise-floored gaps are excluded with a warning.
    """
    if model not in ("power-law", "exponential"):
        raise ValueError(f"unknown scaling model {model!r}")
    if min_n is None:
        min_n = 16 if model == "exponential" else 0

    pts = []
    dropped = 0
    for r in records:
        if r.failed or r.noise_floored or r.gap <= min_gap or r.gap <= 0.0:
            dropped += 1
            continue
        if r.n < min_n:
            continue
        x = math.log(r.n) if model == "power-law" else float(r.n)
        pts.append((x, math.log(r.gap), r.n))
    if dropped:
        warnings.warn(f"fit_scaling: excluded {dropped} nonpositive/floored rows",
                      stacklevel=2)
    if len(pts) < 4:
        raise ValueError(f"scaling fit needs at least 4 usable rows, got {len(pts)}")

    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    A = np.vstack([x, np.ones(len(x))]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 0.0
    ns = [p[2] for p in pts]
    return ScalingFit(model=model, rate=float(slope), intercept=float(intercept),
                      r_squared=r2, n_range=(min(ns), max(ns)), n_points=len(pts))


def emit_gnuplot(csv_name: str, fit: ScalingFit | None, path) -> None:
    """Plain-text plot script referencing the CSV by its bare file name."""
    lines = [
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'n'",
        "set ylabel 'spectral gap'",
    ]
    if fit is not None and fit.model == "power-law":
        lines.append("set logscale x")
        lines.append(f"fitline(x) = exp({fit.intercept}) * x**({fit.rate})")
    elif fit is not None:
        lines.append(f"fitline(x) = exp({fit.intercept}) * exp({fit.rate}*x)")
    plot = f"plot '{csv_name}' using 3:6 skip 1 with points title 'gap'"
    if fit is not None:
        plot += ", fitline(x) with lines title 'fit'"
    lines.append(plot)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
