"""Self-contained identity checks bundling the cross-method guarantees.

Each check returns observed-versus-expected data so the command line can
print a verdict per identity and the test suite can assert the same
bounds.  The checks run on explicit bundles, which lets negative
controls (deliberately broken matrices) exercise the failure paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import OperatorBundle, build_generator
from .scenarios import scenario_homogeneous
from .spectra import (pencil_eigenpairs, pencil_matrices, friction_identity_check,
                      spectral_gap_direct, spectral_gap_pencil, transfer_matrix_bound)
from .wigner import (RoucheBall, argument_principle_count,
                     determinant_identity_gap, scalar_fg, wigner_context,
                     a_matrices)

TOL_DET_IDENTITY = 1e-8
TOL_TRACE = 1e-8
TOL_SPECTRUM_MATCH = 1e-7
TOL_FRICTION = 1e-8
TOL_CROSS_METHOD = 1e-7


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    observed: float
    bound: float
    detail: str = ""


def check_trace_identity(bundle: OperatorBundle) -> CheckResult:
    """trace(M) must equal the summed friction weights exactly."""
    expected = float(np.sum(np.asarray(bundle.spec.friction.gammas)))
    observed = float(np.trace(bundle.M))
    err = abs(observed - expected)
    return CheckResult("trace-identity", err <= TOL_TRACE, err, TOL_TRACE,
                       f"tr(M)={observed:.12g} vs sum(gamma)={expected:.12g}")


def check_spectrum_match(bundle: OperatorBundle) -> CheckResult:
    """Direct and pencil spectra agree as multisets."""
    from .spectra import companion_matrix, spectrum_pairing_distance
    direct = np.linalg.eigvals(bundle.M)
    pencil = np.linalg.eigvals(companion_matrix(*pencil_matrices(bundle)))
    err = spectrum_pairing_distance(direct, pencil)
    return CheckResult("pencil-direct-spectrum", err <= TOL_SPECTRUM_MATCH,
                       err, TOL_SPECTRUM_MATCH)


def check_friction_identity(bundle: OperatorBundle) -> CheckResult:
    """Damping identity on every complex pencil eigenpair."""
    vals, us = pencil_eigenpairs(*pencil_matrices(bundle))
    worst = 0.0
    used = 0
    for lam, u in zip(vals, us.T):
        resid = friction_identity_check(bundle, complex(lam), u)
        if resid is None:
            continue
        worst = max(worst, resid)
        used += 1
    return CheckResult("friction-identity", worst <= TOL_FRICTION, worst,
                       TOL_FRICTION, f"{used} complex eigenpairs")


def check_determinant_identity(bundle: OperatorBundle, n_samples: int = 4,
                               seed: int = 0) -> CheckResult:
    """Sylvester factorization of det(lam - A) at random off-spectrum points."""
    ctx = wigner_context(bundle)
    A, _ = a_matrices(ctx)
    rng = np.random.default_rng(seed)
    scale = float(ctx.values.max())
    worst = 0.0
    for _ in range(n_samples):
        lam = complex(rng.uniform(-1.5, 1.5) * scale, rng.uniform(0.2, 1.0) * scale)
        worst = max(worst, determinant_identity_gap(ctx, A, lam))
    return CheckResult("determinant-identity", worst <= TOL_DET_IDENTITY, worst,
                       TOL_DET_IDENTITY, f"{n_samples} sample points")


def check_cross_method(bundle: OperatorBundle) -> CheckResult:
    """Direct against pencil gap on one bundle.

    Gaps that have closed below the eigensolver floor are noise in both
    routes, so the comparison is relative above that floor and absolute
    below it.
    """
    gd = spectral_gap_direct(bundle)
    gp = spectral_gap_pencil(*pencil_matrices(bundle))
    floor = 64.0 * np.finfo(float).eps * float(np.abs(bundle.M).max())
    err = abs(gd.gap - gp.gap)
    bound = max(1e-6 * gd.gap, floor)
    return CheckResult("gap-direct-vs-pencil", err <= bound, err, bound,
                       f"direct={gd.gap:.9e} pencil={gp.gap:.9e}")


def check_transfer_bound(bundle: OperatorBundle) -> CheckResult:
    """Exponential-floor certificate at the gap-attaining pencil eigenpair."""
    vals, us = pencil_eigenpairs(*pencil_matrices(bundle))
    k = int(np.argmin(vals.real))
    report = transfer_matrix_bound(bundle.spec, complex(vals[k]), us[:, k])
    if report.degenerate:
        return CheckResult("transfer-floor", True, 0.0, 1.0, "degenerate first component")
    return CheckResult("transfer-floor", report.certified, report.implied_floor,
                       float(vals[k].real),
                       f"C={report.growth_constant:.3g} replay={report.replay_error:.2e}")


def check_uniform_friction_gap(gamma: float = 1.0, n_list=(4, 8, 16, 32, 64, 128)) -> CheckResult:
    """Friction at every site keeps the gap level in the particle number."""
    from .lattice import build_shape, friction_preset
    from .operators import NetworkSpec
    gaps = []
    for n in n_list:
        shape = build_shape(1, n)
        friction = friction_preset(shape, "custom", gamma,
                                   sites=tuple(range(1, n + 1)))
        spec = NetworkSpec(shape=shape, masses=1.0, pinning=1.0, interaction=1.0,
                           friction=friction, temperatures=1.0)
        gaps.append(spectral_gap_direct(build_generator(spec)).gap)
    gaps = np.asarray(gaps)
    spread = float(gaps.max() / gaps.min() - 1.0)
    # with unit parameters every pencil root is complex, so gamma/2 is exact
    floor_ok = bool((gaps >= gamma / 2.0 - 1e-12).all())
    return CheckResult("uniform-friction-level-gap", spread <= 0.05 and floor_ok,
                       spread, 0.05, f"gaps={np.round(gaps, 6).tolist()}")


def check_wigner_equivalence(bundle: OperatorBundle) -> CheckResult:
    """Global friction-site-reduction gap against the direct eigensolve."""
    from .wigner import gap_scan
    res = gap_scan(wigner_context(bundle))
    gd = spectral_gap_direct(bundle)
    err = abs(res.gap - gd.gap) / max(gd.gap, 1e-30)
    return CheckResult("wigner-gap-equivalence", err <= TOL_CROSS_METHOD, err,
                       TOL_CROSS_METHOD, f"wigner={res.gap:.9e} direct={gd.gap:.9e}")


def check_rouche_homotopy(n: int = 9) -> CheckResult:
    """Root count of f + t*g constant along the homotopy in the search ball."""
    spec = scenario_homogeneous(1, n)
    bundle = build_generator(spec)
    ctx = wigner_context(bundle, lambda_ref="top")
    from .wigner import reference_amplitude
    radius = 4.0 * reference_amplitude(ctx)
    ball = RoucheBall(center=0.0, radius=radius)
    counts = []
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        def F(z, t=t):
            f, g = scalar_fg(ctx, +1, z)
            return f + t * g
        counts.append(argument_principle_count(F, ball))
    ok = all(c == counts[0] for c in counts) and counts[0] == 1
    return CheckResult("rouche-homotopy", ok, float(counts[-1]), 1.0,
                       f"counts={counts}")


def run_verification(n_cases: int = 24) -> list:
    """The full identity suite on fixed fixtures; one result per check.

    Per check the worst case over the fixtures is reported (any failing
    case outranks all passing ones).
    """
    from .scenarios import identity_suite

    results = []
    worst: dict = {}

    def fold(res: CheckResult):
        prev = worst.get(res.name)
        if prev is None or (not res.passed and prev.passed) or \
                (res.passed == prev.passed and res.observed > prev.observed):
            worst[res.name] = res

    for case in identity_suite(count=n_cases):
        bundle = build_generator(case.spec)
        fold(check_trace_identity(bundle))
        fold(check_spectrum_match(bundle))
        fold(check_friction_identity(bundle))
        fold(check_cross_method(bundle))
        if "uniform-mass" in case.tags:
            fold(check_determinant_identity(bundle, seed=case.index))
        if case.spec.shape.dim == 1 and 1 in case.spec.friction.sites:
            fold(check_transfer_bound(bundle))
        if "uniform-mass" in case.tags and "mild" in case.tags and \
                case.spec.shape.size <= 256 and len(case.spec.friction) <= 4:
            fold(check_wigner_equivalence(bundle))
    results.extend(worst.values())
    results.append(check_uniform_friction_gap())
    results.append(check_rouche_homotopy())
    return results
