"""Low-rank reduction of the drift eigenproblem to friction sites.

With uniform masses the drift matrix Omega conjugates to
A = A0 + i*(Gamma ⊕ 0) where A0 is built from H = sqrt(B/m) and is
normal.  Sylvester's identity collapses the 2n-dimensional eigenproblem
onto the |I|x|I| rational matrix function

    R(lam) = A_I^* (lam - A0)^{-1} A_I,
    det(lam - A) = det(lam - A0) * det(Id - i R(lam)),

so eigenvalues of A are the roots of D(lam) = det(Id - i R(lam)) away
from the poles of R.  Spectral-gap search then happens inside small
balls around a reference eigenvalue of H (argument-principle count,
moment seeding, secant refinement), or globally by recursive disk
subdivision for arbitrary friction strengths.

Sign convention: at an eigenvalue, R(lam) u = -i u.  The determinant
form above is the one checked verbatim by the identity suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .operators import OperatorBundle
from .spectra import SpectralGapResult, eig_symmetric

POLE_PROXIMITY_TOL = 1e-12
DET_FLOOR = 1e-13
COUNT_INT_TOL = 1e-6


class PoleProximityError(ValueError):
    pass


class ContourDegenerateError(RuntimeError):
    def __init__(self, point, detval):
        super().__init__(f"near-zero determinant {detval:.3e} on contour at {point}")
        self.point = point


class BallCountError(RuntimeError):
    """Raised when the search ball does not isolate exactly one root."""

    def __init__(self, count, attempts):
        super().__init__(f"argument-principle count {count} in ball (attempts: {attempts})")
        self.count = count
        self.attempts = attempts


@dataclass(frozen=True)
class WignerContext:
    """Eigenpairs of H = sqrt(B/m) plus friction data for evaluating R.

    Requires uniform masses; the reduction is exact only when the
    off-diagonal drift blocks are symmetric.  lambda_ref is the
    rescaling reference (an eigenvalue of H, typically the top one for
    homogeneous networks and the bottom one for impurity or disorder).
    """

    values: np.ndarray          # ascending eigenvalues of H
    vectors: np.ndarray         # matching orthonormal columns
    sites: tuple                # 1-based flat friction sites
    gammas: np.ndarray
    lambda_ref: float
    coupling: np.ndarray = field(init=False)   # |I| x n, sqrt(gamma_a) v_j(a)

    def __post_init__(self):
        rows = self.vectors[[s - 1 for s in self.sites], :]
        G = np.sqrt(self.gammas)[:, None] * rows
        G.flags.writeable = False
        object.__setattr__(self, "coupling", G)

    @property
    def n_sites(self) -> int:
        return self.values.size

    @property
    def rank(self) -> int:
        return len(self.sites)

    def signed_poles(self) -> np.ndarray:
        """Poles of the resolvent of A0: +/- every eigenvalue of H."""
        return np.concatenate([self.values, -self.values])

    def distinct_poles(self, tol: float = POLE_PROXIMITY_TOL):
        """Clustered pole list with multiplicities (ascending)."""
        poles = np.sort(self.signed_poles())
        scale = max(1.0, float(np.abs(poles).max()))
        out, mult = [poles[0]], [1]
        for p in poles[1:]:
            if abs(p - out[-1]) <= tol * scale:
                mult[-1] += 1
            else:
                out.append(p)
                mult.append(1)
        return np.asarray(out), np.asarray(mult)

    def guard_poles(self, lam) -> None:
        lam = np.atleast_1d(np.asarray(lam, complex))
        poles = self.signed_poles()
        scale = max(1.0, float(np.abs(poles).max()))
        d = np.abs(lam[:, None] - poles[None, :]).min(axis=1)
        if (d < POLE_PROXIMITY_TOL * scale).any():
            bad = lam[np.argmin(d)]
            raise PoleProximityError(f"{bad} is within {POLE_PROXIMITY_TOL} of a resolvent pole")


def wigner_context(bundle: OperatorBundle, lambda_ref="top") -> WignerContext:
    """Context from an assembled bundle (uniform masses only)."""
    spec = bundle.spec
    if not spec.uniform_masses:
        raise ValueError("the low-rank reduction requires uniform masses")
    m0 = float(spec.masses[0])
    eig = eig_symmetric(bundle.B)
    values = np.sqrt(eig.values / m0)
    if isinstance(lambda_ref, str):
        ref = float(values[-1]) if lambda_ref == "top" else float(values[0])
    else:
        ref = float(lambda_ref)
    return WignerContext(values=values, vectors=eig.vectors,
                         sites=spec.friction.sites,
                         gammas=np.asarray(spec.friction.gammas, float),
                         lambda_ref=ref)


def evaluate_R(ctx: WignerContext, lam) -> np.ndarray:
    """R(lam) at absolute (unshifted) lam, from the eigenexpansion.

    Entry (a, b) is sum_j sqrt(g_a g_b) v_j(a) v_j(b) * lam/(lam^2 - lam_j^2),
    i.e. both resolvent branches of A0 with their half weights.  Symmetric
    for every lam, real for real lam off the poles.
    """
    scalar = np.isscalar(lam) or np.asarray(lam).ndim == 0
    lam = np.atleast_1d(np.asarray(lam, complex))
    ctx.guard_poles(lam)
    v = ctx.values
    c = 0.5 * (1.0 / (lam[:, None] - v[None, :]) + 1.0 / (lam[:, None] + v[None, :]))
    G = ctx.coupling
    R = np.einsum("aj,kj,bj->kab", G, c, G)
    return R[0] if scalar else R


def det_condition(ctx: WignerContext, lam) -> np.ndarray:
    """D(lam) = det(Id - i R(lam)) at absolute lam; zero exactly on Spec(A)."""
    scalar = np.isscalar(lam) or np.asarray(lam).ndim == 0
    R = evaluate_R(ctx, np.atleast_1d(np.asarray(lam, complex)))
    eye = np.eye(ctx.rank)
    D = np.linalg.det(eye[None] - 1j * R)
    return D[0] if scalar else D


def determinant_identity_gap(ctx: WignerContext, A_full: np.ndarray, lam: complex) -> float:
    """|det(lam-A)/det(lam-A0) - D(lam)| for one off-spectrum sample point."""
    n2 = A_full.shape[0]
    sign_a, log_a = np.linalg.slogdet(lam * np.eye(n2) - A_full)
    poles = ctx.signed_poles()
    log_a0 = np.sum(np.log(lam - poles))
    ratio = sign_a * np.exp(log_a - log_a0)
    return float(abs(ratio - det_condition(ctx, lam)))


def a_matrices(ctx: WignerContext):
    """Dense A = A0 + i Gamma ⊕ 0 and Omega = -iA, reconstructed from ctx."""
    H = (ctx.vectors * ctx.values) @ ctx.vectors.T
    n = ctx.n_sites
    A = np.zeros((2 * n, 2 * n), dtype=complex)
    A[:n, n:] = -1j * H
    A[n:, :n] = 1j * H
    for s, g in zip(ctx.sites, ctx.gammas):
        A[s - 1, s - 1] += 1j * g
    return A, -1j * A


# ---------------------------------------------------------------------------
# scalar reduction for the homogeneous chain with friction at both ends

def _sector_data(ctx: WignerContext, parity: int):
    if ctx.rank not in (1, 2):
        raise ValueError("scalar reduction needs friction at one or two sites")
    j = np.arange(1, ctx.n_sites + 1)
    signs = (-1.0) ** (j - 1)
    if ctx.rank == 1:
        in_sector = np.ones_like(signs, dtype=bool)
    else:
        a, b = ctx.sites
        va = ctx.vectors[a - 1, :]
        vb = ctx.vectors[b - 1, :]
        rel = np.sign(va * vb)
        if not np.allclose(np.abs(va), np.abs(vb), rtol=1e-9, atol=1e-12):
            raise ValueError("scalar reduction needs the end-to-end parity symmetry")
        in_sector = rel == parity
    gbar = float(ctx.gammas.sum())
    amp = ctx.vectors[ctx.sites[0] - 1, :] ** 2
    weights = gbar * amp
    return in_sector, weights


def scalar_fg(ctx: WignerContext, parity: int, lam) -> tuple:
    """Exact linear/remainder split of the parity-sector root condition.

    In the sector of modes with v_j(1) = parity * v_j(n), the eigenvalue
    condition R(lam)u = -iu reduces to a scalar equation; multiplying by
    2*lam and expanding every resolvent term by the exact geometric
    identity 1/(lam-mu) = -1/mu - lam/mu^2 - lam^2/(mu^2 (mu-lam)) yields
    f(lam) + g(lam) with f(lam) = nu*lam linear and
    g(0) = (gamma_1 + gamma_n)|v_top(1)|^2 when the top mode lies in the
    sector.  Roots of f + g inside the search ball are exactly rescaled
    eigenvalues of A.  The split is exact for equal end frictions.
    """
    scalar = np.isscalar(lam) or np.asarray(lam).ndim == 0
    lam = np.atleast_1d(np.asarray(lam, complex))
    in_sector, weights = _sector_data(ctx, parity)
    mu_near = ctx.values - ctx.lambda_ref
    mu_far = -ctx.values - ctx.lambda_ref

    scale = max(1.0, float(ctx.values.max()))
    is_center = np.abs(mu_near) <= POLE_PROXIMITY_TOL * scale
    # the factored-out center pole is analytic here; guard the others only
    others = np.concatenate([mu_near[~is_center], mu_far])
    d = np.abs(lam[:, None] - others[None, :]).min(axis=1)
    if (d < POLE_PROXIMITY_TOL * scale).any():
        raise PoleProximityError(f"{lam[np.argmin(d)]} is within "
                                 f"{POLE_PROXIMITY_TOL} of a resolvent pole")

    nu = 2j + 0j
    f = nu * lam
    g = np.zeros_like(lam)
    for j in np.nonzero(in_sector)[0]:
        q = weights[j]
        for mu, center in ((mu_near[j], is_center[j]), (mu_far[j], False)):
            if center:
                g += q  # lam * q/(lam - 0) contributes the constant term
            else:
                f += -q / mu * lam
                g += -q * lam**2 / mu**2 - q * lam**3 / (mu**2 * (mu - lam))
    return (f[0], g[0]) if scalar else (f, g)


def scalar_fg_derivative(ctx: WignerContext, parity: int, lam: complex) -> complex:
    """Analytic derivative of f + g, for Newton refinement."""
    in_sector, weights = _sector_data(ctx, parity)
    mu_near = ctx.values - ctx.lambda_ref
    mu_far = -ctx.values - ctx.lambda_ref
    scale = max(1.0, float(ctx.values.max()))
    is_center = np.abs(mu_near) <= POLE_PROXIMITY_TOL * scale
    # f + g = 2i lam + sum_j q_j lam [1/(lam-mu_near) + 1/(lam-mu_far)]
    total = 2j + 0j
    for j in np.nonzero(in_sector)[0]:
        q = weights[j]
        for mu, center in ((mu_near[j], is_center[j]), (mu_far[j], False)):
            if center:
                continue  # constant term, derivative zero
            total += q * (1.0 / (lam - mu) - lam / (lam - mu) ** 2)
    return total


# ---------------------------------------------------------------------------
# argument principle machinery

@dataclass(frozen=True)
class RoucheBall:
    center: complex
    radius: float
    n_points: int = 512

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    def contour(self, n_points=None) -> np.ndarray:
        k = n_points or self.n_points
        th = np.linspace(0.0, 2.0 * np.pi, k, endpoint=False)
        return self.center + self.radius * np.exp(1j * th)


class _DetEvaluator:
    """Phase and log-magnitude of det F along a contour, overflow-free."""

    def __init__(self, F):
        self.F = F

    def phase_mag(self, points: np.ndarray):
        try:
            vals = np.asarray(self.F(points))
            if vals.shape != points.shape:
                raise TypeError  # matrix-valued: needs per-point determinants
            vals = vals.astype(complex)
            mag = np.abs(vals)
            if (mag == 0).any():
                raise ContourDegenerateError(points[int(np.argmin(mag))], 0.0)
            with np.errstate(divide="ignore"):
                return vals / mag, np.log(mag)
        except (TypeError, ValueError):
            pass
        phases = np.empty(points.shape, dtype=complex)
        logmag = np.empty(points.shape, dtype=float)
        for k, z in enumerate(points):
            A = np.atleast_2d(np.asarray(self.F(z), dtype=complex))
            sign, logdet = np.linalg.slogdet(A)
            if sign == 0 or not np.isfinite(logdet):
                raise ContourDegenerateError(z, 0.0)
            phases[k], logmag[k] = sign, logdet
        return phases, logmag


def _winding_of_closed_path(ev, points: np.ndarray, max_depth: int = 14):
    """Total phase increment / 2pi along the closed polyline, adaptively refined."""
    phases, logmag = ev.phase_mag(points)
    # a zero essentially on a sample point shows as a deep local magnitude dip
    neighbor = np.maximum(np.roll(logmag, 1), np.roll(logmag, -1))
    dips = logmag - neighbor
    if dips.min() < math.log(DET_FLOOR):
        raise ContourDegenerateError(points[int(np.argmin(dips))],
                                     float(np.exp(dips.min())))
    total = 0.0
    m = len(points)
    for k in range(m):
        z0, z1 = points[k], points[(k + 1) % m]
        u0, u1 = phases[k], phases[(k + 1) % m]
        total += _arc_phase(ev, z0, z1, u0, u1, max_depth)
    return total / (2.0 * np.pi), logmag


def _arc_phase(ev, z0, z1, u0, u1, depth):
    d = np.angle(u1 / u0)
    if abs(d) <= 0.5 * np.pi:
        return d
    if depth == 0:
        raise ContourDegenerateError(0.5 * (z0 + z1), math.nan)
    um = ev.phase_mag(np.array([0.5 * (z0 + z1)]))[0][0]
    return (_arc_phase(ev, z0, 0.5 * (z0 + z1), u0, um, depth - 1)
            + _arc_phase(ev, 0.5 * (z0 + z1), z1, um, u1, depth - 1))


def _count_zeros(ev, ball: RoucheBall) -> int:
    counts = []
    for k in (ball.n_points, 2 * ball.n_points):
        w, _ = _winding_of_closed_path(ev, ball.contour(k))
        if abs(w - round(w)) > COUNT_INT_TOL:
            raise ArithmeticError(f"winding number {w} is not close to an integer")
        counts.append(int(round(w)))
    if counts[0] != counts[1]:
        raise ArithmeticError(f"winding count unstable under refinement: {counts}")
    return counts[0]


def argument_principle_count(F, ball: RoucheBall) -> int:
    """Winding number of det F around 0 along the ball boundary.

    F maps complex points to square matrices (or scalars) and must be
    holomorphic and nonsingular on the contour.  The phase is accumulated
    with adaptive unwrapping (a jump that refinement cannot resolve, or a
    determinant dip below 1e-13 of its neighbors, reports a degenerate
    contour) and the count is cross-checked at doubled resolution.
    """
    return _count_zeros(_DetEvaluator(F), ball)


# ---------------------------------------------------------------------------
# gap search

@dataclass(frozen=True)
class BallPolicy:
    """Search-ball schedule: radius alpha/2 * (friction-weighted amplitude
    of the reference mode), doubling alpha on an empty ball."""

    alpha: float = 8.0
    max_doublings: int = 3
    n_points: int = 512
    radius: float | None = None    # explicit override


def reference_amplitude(ctx: WignerContext) -> float:
    """Friction-weighted squared amplitude of the reference mode at I."""
    j = int(np.argmin(np.abs(ctx.values - ctx.lambda_ref)))
    v = ctx.vectors[:, j]
    amps = np.array([v[s - 1] ** 2 for s in ctx.sites])
    return float((ctx.gammas * amps).sum() / ctx.gammas.sum())


class _ClearedEvaluator:
    """Determinant condition with known resolvent poles cleared.

    Evaluates H(z) = D(shift + z) * prod_p (z - (p - shift))^m_p, which
    is analytic wherever the cleared set covers the poles.  Phase and
    log magnitude are tracked separately so disks clearing hundreds of
    poles cannot overflow.
    """

    def __init__(self, ctx: WignerContext, shift: float, poles: np.ndarray,
                 mult: np.ndarray):
        self.ctx = ctx
        self.shift = shift
        self.rel = np.asarray(poles, float) - shift
        self.mult = np.asarray(mult, int)

    def phase_mag(self, points: np.ndarray):
        D = det_condition(self.ctx, points + self.shift)
        mag = np.abs(D)
        if (mag == 0).any():
            raise ContourDegenerateError(points[int(np.argmin(mag))], 0.0)
        phases = D / mag
        logmag = np.log(mag)
        for p, m in zip(self.rel, self.mult):
            w = points - p
            wm = np.abs(w)
            if (wm == 0).any():
                raise ContourDegenerateError(p, 0.0)
            phases = phases * (w / wm) ** int(m)
            logmag = logmag + m * np.log(wm)
        return phases, logmag

    def value(self, points):
        points = np.atleast_1d(np.asarray(points, complex))
        out = det_condition(self.ctx, points + self.shift)
        for p, m in zip(self.rel, self.mult):
            out = out * (points - p) ** int(m)
        return out


def _poles_in_disk(ctx, center: complex, radius: float):
    poles, mult = ctx.distinct_poles()
    inside = np.abs(poles - center) <= radius * (1.0 + 1e-12)
    return poles[inside], mult[inside]


def _first_moment(ev, ball: RoucheBall) -> complex:
    """(1/2pi i) oint z dlog H: the sum of zeros of H inside the ball."""
    pts = np.concatenate([ball.contour(), ball.contour()[:1]])
    phases, logmag = ev.phase_mag(pts)
    dlog = np.diff(logmag) + 1j * np.diff(np.unwrap(np.angle(phases)))
    zmid = 0.5 * (pts[1:] + pts[:-1])
    return complex(np.sum(zmid * dlog) / (2j * np.pi))


def _secant(Hf, x0: complex, x1: complex, tol_scale: float, max_iter: int = 80) -> complex:
    f0 = Hf(np.array([x0]))[0]
    for _ in range(max_iter):
        f1 = Hf(np.array([x1]))[0]
        if f1 == 0:
            return x1
        denom = f1 - f0
        if denom == 0:
            break
        step = f1 * (x1 - x0) / denom
        x0, f0 = x1, f1
        x1 = x1 - step
        if abs(step) <= 1e-16 * max(tol_scale, abs(x1)):
            break
    return x1


def omega_min_singular(ctx: WignerContext, omega_eig: complex) -> float:
    """sigma_min(Omega - omega Id) / ||Omega||, the validation residual."""
    _, omega = a_matrices(ctx)
    n2 = omega.shape[0]
    sv = np.linalg.svd(omega - omega_eig * np.eye(n2), compute_uv=False)
    return float(sv[-1] / sv[0])


def find_gap_wigner(ctx: WignerContext, policy: BallPolicy | None = None,
                    validate: bool = True) -> SpectralGapResult:
    """Locate the drift eigenvalue nearest the reference mode and report its gap.

    Searches the ball of radius alpha/2 times the friction-weighted
    reference amplitude around the rescaled origin, demanding an
    argument-principle count of exactly one after clearing the known
    resolvent poles.  An empty ball grows by doubling alpha a bounded
    number of times (each attempt recorded); a count above one is
    reported as a degenerate cluster, never silently absorbed.
    """
    policy = policy or BallPolicy()
    base = policy.radius if policy.radius is not None else \
        0.5 * policy.alpha * reference_amplitude(ctx)
    if base <= 0:
        raise ValueError("search ball has zero radius: reference mode uncoupled")

    attempts = []
    count = 0
    ball = None
    ev = None
    for k in range(policy.max_doublings + 1):
        radius = base * 2.0**k
        cleared, mult = _poles_in_disk(ctx, ctx.lambda_ref, radius)
        ball = RoucheBall(center=0.0, radius=radius, n_points=policy.n_points)
        _guard_contour(ctx, ball)
        ev = _ClearedEvaluator(ctx, ctx.lambda_ref, cleared, mult)
        count = _count_zeros(ev, ball)
        attempts.append({"alpha": policy.alpha * 2.0**k, "radius": radius, "count": count})
        if count != 0:
            break
    if count == 0:
        raise BallCountError(0, attempts)
    if count > 1:
        raise BallCountError(count, attempts)

    z = _first_moment(ev, ball)
    z = _secant(ev.value, z * (1 + 1e-7) + 1e-13j * ball.radius, z, ball.radius)
    a_eig = z + ctx.lambda_ref
    omega_eig = -1j * a_eig
    residual = omega_min_singular(ctx, omega_eig) if validate else math.nan
    if validate and residual > 1e-6:
        raise ArithmeticError(f"refined root failed validation: residual {residual:.3e}")
    return SpectralGapResult(gap=float(a_eig.imag), attaining_eigenvalue=complex(omega_eig),
                             method="wigner", residual=residual,
                             info={"count": count, "attempts": attempts,
                                   "radius": ball.radius, "lambda_ref": ctx.lambda_ref})


def _guard_contour(ctx: WignerContext, ball: RoucheBall) -> None:
    poles = ctx.signed_poles() - ctx.lambda_ref
    d = np.abs(np.abs(poles - ball.center) - ball.radius)
    if d.min() < 10 * POLE_PROXIMITY_TOL * max(1.0, float(np.abs(poles).max())):
        raise PoleProximityError("a resolvent pole lies on the search contour")


def gap_scan(ctx: WignerContext, policy: BallPolicy | None = None,
             validate: bool = True) -> SpectralGapResult:
    """Global gap search: recursive disk subdivision over the spectral region.

    Every drift eigenvalue lies in |lam| <= max|pole| + max gamma with
    nonnegative imaginary part.  Disks are counted by the argument
    principle on the pole-cleared determinant condition, split while they
    hold several roots, and refined by first-moment seeding plus secant
    iteration.  Disks whose lower edge cannot beat the best root found
    are pruned, so the search homes in on the minimal imaginary part,
    which is the spectral gap.
    """
    policy = policy or BallPolicy()
    vmax = float(ctx.values.max())
    gmax = float(ctx.gammas.max())
    tr_gamma = float(ctx.gammas.sum())
    R0 = 1.02 * (vmax + gmax) + 0.1
    top = min(tr_gamma, R0) + 0.05
    scale = R0

    # eigenvalues come in mirror pairs z, -conj(z) with equal imaginary part,
    # so covering the right half strip {0 <= Re <= R0, 0 <= Im <= top} finds
    # every imaginary part once
    root = RoucheBall(center=0.5 * R0 + 0.5j * top,
                      radius=math.hypot(0.55 * R0, 0.6 * top) + 0.05,
                      n_points=policy.n_points)

    def disk_count(ball: RoucheBall):
        # the cleared set covers every pole inside the (jiggled) disk, so the
        # cleared condition is analytic there and its winding counts exactly
        # the drift eigenvalues in the disk
        cleared, mult = _poles_in_disk(ctx, complex(ball.center), 1.4 * ball.radius)
        ev = _ClearedEvaluator(ctx, 0.0, cleared, mult)
        for jiggle in (1.0, 1.031, 1.074, 1.118):
            b = RoucheBall(ball.center, ball.radius * jiggle, ball.n_points)
            try:
                return _count_zeros(ev, b), b, ev
            except (ContourDegenerateError, ArithmeticError):
                continue
        raise ContourDegenerateError(ball.center, 0.0)

    def split(ball: RoucheBall):
        r = ball.radius
        for off in (0.5 * r * (1 + 1j), 0.5 * r * (1 - 1j),
                    0.5 * r * (-1 + 1j), 0.5 * r * (-1 - 1j)):
            work.append(RoucheBall(ball.center + off, 0.75 * r, ball.n_points))

    found: list[complex] = []
    dedupe = 1e-9 * scale
    best_im = math.inf

    def record_root(z: complex) -> None:
        nonlocal best_im
        for cand in (complex(z), complex(-z.conjugate())):
            if all(abs(cand - f) > dedupe for f in found):
                found.append(cand)
                best_im = min(best_im, cand.imag)

    _preseed_pole_zeros(ctx, record_root, dedupe)
    work = [root]
    guard = 0
    while work:
        guard += 1
        if guard > 20000:
            raise RuntimeError("disk subdivision failed to terminate")
        work.sort(key=lambda b: b.center.imag - b.radius)
        ball = work.pop(0)
        if found and ball.center.imag - ball.radius > best_im:
            break
        try:
            cnt, ball, ev = disk_count(ball)
        except ContourDegenerateError:
            split(ball)  # contour unlucky at every jiggle
            continue
        # deflate roots already located inside this disk
        inside = [f for f in found if abs(f - ball.center) <= ball.radius]
        cnt -= len(inside)
        if cnt <= 0:
            continue
        if cnt == 1:
            z = _refine_single(ctx, ev, ball, inside, dedupe)
            if z is None:
                if ball.radius < 1e-10 * scale:
                    record_root(_first_moment(ev, ball) - sum(inside))
                else:
                    split(ball)  # refinement escaped or collided; isolate further
                continue
            if _near_pole(ctx, z) and omega_min_singular(ctx, -1j * z) > 1e-6:
                continue  # cleared-pole artifact, not an eigenvalue
            record_root(z)
        elif ball.radius < 1e-8 * scale:
            record_root((_first_moment(ev, ball) - sum(inside)) / cnt)
        else:
            split(ball)

    for z in sorted(found, key=lambda c: c.imag):
        result = _package_root(ctx, z, validate)
        if result is not None:
            return replace(result, info={"scan": True, "roots_found": len(found)})
    raise BallCountError(0, [{"scan": "no roots survived validation"}])


def _confirmed_zero(ev, z: complex, h: float) -> bool:
    """A converged iterate counts as a zero only on a deep local dip."""
    val = abs(ev.value(z)[0])
    ref = max(abs(ev.value(z + dz)[0]) for dz in (h, -h, 1j * h, -1j * h))
    return ref > 0 and val <= 1e-8 * ref


def _preseed_pole_zeros(ctx, record_root, dedupe: float, n_points: int = 384) -> None:
    """Locate the drift eigenvalues that stay near their parent pole.

    For weak-to-moderate friction each resolvent pole releases one
    eigenvalue into a neighborhood of half the local pole spacing; a
    counting ball around every nonnegative pole (the mirror image covers
    the rest) isolates and polishes those, so the global subdivision only
    has to chase eigenvalues that wandered between or far from the poles.
    """
    poles, mult = ctx.distinct_poles()
    for k in range(len(poles)):
        p, m = float(poles[k]), int(mult[k])
        if p < -dedupe or m != 1:
            continue
        others = np.abs(np.delete(poles, k) - p)
        local = 0.45 * float(others.min()) if len(poles) > 1 else 1.0
        if local <= 0:
            continue
        cleared, cmult = _poles_in_disk(ctx, p, 1.4 * local)
        ev = _ClearedEvaluator(ctx, 0.0, cleared, cmult)
        for jiggle in (1.0, 1.07, 0.93):
            ball = RoucheBall(p, local * jiggle, n_points)
            try:
                cnt = _count_zeros(ev, ball)
            except (ContourDegenerateError, ArithmeticError):
                continue
            if cnt == 1:
                z = _refine_single(ctx, ev, ball, [], dedupe)
                if z is not None and _confirmed_zero(
                        ev, z, min(ball.radius, max(abs(z - p), 1e-6 * ball.radius))):
                    record_root(complex(z))
            break


def _refine_single(ctx, ev, ball, inside, dedupe):
    """Polish the unique unfound zero of a count-one disk, or None on failure.

    Seeds come from the contour first moment and, when a cleared pole sits
    in the disk, from first-order perturbation theory (pole plus i times
    half the friction-weighted mode weight); the latter rescues zeros
    exponentially close to their parent pole, where the cleared condition
    is numerically flat seen from the disk scale.
    """
    seeds = [_first_moment(ev, ball) - sum(inside)]
    for p, m in zip(ev.rel, ev.mult):
        if abs(p - ball.center) <= ball.radius and m == 1:
            j = int(np.argmin(np.abs(ctx.signed_poles() - (p + ev.shift))))
            jj = j % ctx.n_sites
            v = ctx.vectors[:, jj]
            w = 0.5 * sum(g * v[s - 1] ** 2 for s, g in zip(ctx.sites, ctx.gammas))
            seeds.append(p + 1j * w)
    best = None
    for seed in seeds:
        z = _secant(ev.value, seed + ball.radius * 1e-6 * (1 + 1j), seed, ball.radius)
        if abs(z - ball.center) > 1.3 * ball.radius:
            continue
        if any(abs(z - f) <= dedupe for f in inside):
            continue
        resid = abs(ev.value(z)[0])
        if best is None or resid < best[1]:
            best = (complex(z), resid)
    return None if best is None else best[0]


def _near_pole(ctx, z, rel=1e-10) -> bool:
    poles = ctx.signed_poles()
    scale = max(1.0, float(np.abs(poles).max()))
    return bool(np.abs(poles - z).min() < rel * scale)


def _package_root(ctx, z, validate):
    a_eig = complex(z)
    if a_eig.imag < -1e-9 * max(1.0, abs(a_eig)):
        return None
    residual = math.nan
    if validate:
        residual = omega_min_singular(ctx, -1j * a_eig)
        if residual > 1e-6:
            return None
    return SpectralGapResult(gap=max(float(a_eig.imag), 0.0),
                             attaining_eigenvalue=complex(-1j * a_eig),
                             method="wigner", residual=residual, info=None)


# ---------------------------------------------------------------------------
# the boundary-mode coupling matrix

@dataclass(frozen=True)
class ThetaReport:
    side: int
    norm: float
    entry_max: float
    row_sum_bound: float


def theta_matrix(mode_at_sites: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """Coupling matrix of one reference mode restricted to the friction set.

    Entry (a, b) is sqrt(gamma_a gamma_b) v(a) v(b); the two resolvent
    branches contribute half each, summing to the plain product.
    """
    w = np.sqrt(np.asarray(gammas, float)) * np.asarray(mode_at_sites, float)
    return np.outer(w, w)


def theta_norm(ctx: WignerContext) -> ThetaReport:
    """Spectral norm of the reference-mode coupling matrix on the friction set."""
    j = int(np.argmin(np.abs(ctx.values - ctx.lambda_ref)))
    v = ctx.vectors[:, j]
    amp = np.array([v[s - 1] for s in ctx.sites])
    theta = theta_matrix(amp, ctx.gammas)
    norm = float(np.linalg.norm(theta, 2))
    inf_norm = float(np.abs(theta).sum(axis=1).max())
    side = int(round(math.sqrt(ctx.n_sites)))
    return ThetaReport(side=side, norm=norm, entry_max=float(np.abs(theta).max()),
                       row_sum_bound=math.sqrt(theta.shape[0]) * inf_norm)
