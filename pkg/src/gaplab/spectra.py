"""Eigensolvers and the two reference routes to the spectral gap.

The gap is the smallest real part over the spectrum of the drift matrix
M (equivalently Omega).  The direct route diagonalizes M itself; the
pencil route solves det(lambda^2 - lambda*Gamma + m^{-1}B) = 0 through a
companion linearization.  Both routes must agree, which the test suite
enforces; they serve as mutual oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import NetworkSpec, OperatorBundle

SYM_TOL = 1e-14          # absolute entrywise symmetry tolerance
NEGATIVE_GAP_TOL = 1e-10  # stability slack for min Re of the spectrum


class EigenConvergenceError(RuntimeError):
    pass


class AssemblyError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with orthonormal column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False
        self.vectors.flags.writeable = False


@dataclass(frozen=True)
class SpectralGapResult:
    gap: float
    attaining_eigenvalue: complex
    method: str
    residual: float
    info: dict | None = None


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: first nonzero component positive."""
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        nz = np.nonzero(np.abs(col) > 1e-12 * np.abs(col).max())[0]
        if nz.size and col[nz[0]] < 0:
            V[:, k] = -col
    return V


def eig_symmetric(B: np.ndarray) -> EigenSystem:
    """Full symmetric eigendecomposition with the frozen sign convention."""
    asym = np.abs(B - B.T).max()
    if asym > SYM_TOL * max(1.0, np.abs(B).max()):
        raise AssemblyError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    try:
        w, V = np.linalg.eigh(B)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    return EigenSystem(values=w, vectors=_fix_signs(V))


def _pick_gap(eigvals: np.ndarray):
    """Minimum real part; ties by smallest |Im|, then positive Im first."""
    order = np.lexsort((-np.sign(eigvals.imag), np.abs(eigvals.imag), eigvals.real))
    return eigvals[order[0]]


def spectrum_pairing_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric nearest-neighbor distance between two eigenvalue multisets.

    Lexicographic sorting is unstable when real parts agree to roundoff,
    so cross-method spectra are compared by matching each eigenvalue to
    the closest one of the other set, in both directions.
    """
    a = np.asarray(a, complex).ravel()
    b = np.asarray(b, complex).ravel()
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _eig_residual(A: np.ndarray, lam: complex) -> float:
    """Relative residual of lam as an eigenvalue of A, via inverse iteration."""
    n = A.shape[0]
    scale = np.linalg.norm(A, ord=np.inf)
    shift = lam + 1e-12 * max(1.0, abs(lam))
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    try:
        for _ in range(2):
            v = np.linalg.solve(A - shift * np.eye(n), v)
            v /= np.linalg.norm(v)
    except np.linalg.LinAlgError:
        return 0.0  # shift hit the eigenvalue exactly
    return float(np.linalg.norm(A @ v - lam * v) / scale)


def spectral_gap_direct(bundle: OperatorBundle) -> SpectralGapResult:
    """Gap from the full nonsymmetric spectrum of M."""
    M = bundle.M
    try:
        eigvals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    scale = np.linalg.norm(M, ord=np.inf)
    lam = _pick_gap(eigvals)
    if lam.real < -NEGATIVE_GAP_TOL * max(1.0, scale):
        raise AssemblyError(f"negative spectral gap {lam.real:.3e}: assembly bug")
    return SpectralGapResult(gap=max(lam.real, 0.0), attaining_eigenvalue=lam,
                             method="direct", residual=_eig_residual(M, lam))


def companion_matrix(gamma: np.ndarray, m_inv_b: np.ndarray) -> np.ndarray:
    """Linearization ((0, I), (-m^{-1}B, Gamma)) acting on (u, lambda*u)."""
    n = gamma.shape[0]
    C = np.zeros((2 * n, 2 * n))
    C[:n, n:] = np.eye(n)
    C[n:, :n] = -m_inv_b
    C[n:, n:] = gamma
    return C


def pencil_matrices(bundle: OperatorBundle):
    gamma = bundle.gamma
    m_inv_b = np.diag(1.0 / bundle.spec.masses) @ bundle.B
    return gamma, m_inv_b


def spectral_gap_pencil(gamma: np.ndarray, m_inv_b: np.ndarray) -> SpectralGapResult:
    """Gap from the quadratic pencil lambda^2 - lambda*Gamma + m^{-1}B."""
    C = companion_matrix(gamma, m_inv_b)
    try:
        eigvals = np.linalg.eigvals(C)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    lam = _pick_gap(eigvals)
    scale = np.linalg.norm(C, ord=np.inf)
    if lam.real < -NEGATIVE_GAP_TOL * max(1.0, scale):
        raise AssemblyError(f"negative spectral gap {lam.real:.3e}: assembly bug")
    return SpectralGapResult(gap=max(lam.real, 0.0), attaining_eigenvalue=lam,
                             method="pencil", residual=_eig_residual(C, lam))


def pencil_eigenpairs(gamma: np.ndarray, m_inv_b: np.ndarray):
    """All pencil eigenvalues with their u-vectors, from the companion form."""
    C = companion_matrix(gamma, m_inv_b)
    vals, vecs = np.linalg.eig(C)
    n = gamma.shape[0]
    us = vecs[:n, :]
    norms = np.linalg.norm(us, axis=0)
    keep = norms > 1e-13
    return vals[keep], us[:, keep] / norms[keep]


def analytic_eigenpairs_homogeneous(dim: int, side: int, xi: float, eta: float) -> EigenSystem:
    """Closed-form eigenpairs of B for uniform pinning and interaction.

    One-dimensional modes are the Neumann cosine vectors with eigenvalues
    4*xi*sin^2(pi*(j-1)/(2n)) + eta; in d dimensions eigenvectors are
    coordinate products and eigenvalues add across axes (plus one pinning
    term per axis).  Output ordering and signs match eig_symmetric.
    """
    n = side
    j = np.arange(1, n + 1)
    vals_1d = 4.0 * xi * np.sin(np.pi * (j - 1) / (2 * n)) ** 2 + eta
    i = np.arange(1, n + 1)
    V1 = np.sqrt(2.0 / n) * np.cos(np.pi * np.outer(i - 0.5, j - 1) / n)
    V1[:, 0] = 1.0 / math.sqrt(n)

    vals = vals_1d
    V = V1
    for _ in range(dim - 1):
        vals = (vals[:, None] + vals_1d[None, :] - eta).ravel()
        V = np.einsum("ik,jl->ijkl", V.reshape(V.shape[0], -1), V1).reshape(
            V.shape[0] * n, -1)
    order = np.argsort(vals, kind="stable")
    return EigenSystem(values=vals[order], vectors=_fix_signs(V[:, order]))


def friction_identity_check(bundle: OperatorBundle, lam: complex, u: np.ndarray):
    """Residual of the damping identity Re(lam) = weighted friction mass.

    For a pencil eigenpair (m^{-1}B + lam^2) u = lam Gamma u with
    Im(lam) != 0, taking imaginary parts of <(B + lam^2 m) u, u> gives
    Re(lam) = sum_i gamma_i m_i |u_i|^2 / (2 sum_i m_i |u_i|^2), which
    reduces to sum_i gamma_i |u_i|^2 / 2 for unit masses and a normalized
    eigenvector.  Real eigenvalues carry no information here and return
    None.
    """
    if abs(lam.imag) < 1e-12 * max(1.0, abs(lam)):
        return None
    m = bundle.spec.masses
    w = m * np.abs(u) ** 2
    g = np.zeros_like(w)
    for s, gam in zip(bundle.spec.friction.sites, bundle.spec.friction.gammas):
        g[s - 1] = gam
    predicted = float((g * w).sum() / (2.0 * w.sum()))
    return abs(lam.real - predicted)


@dataclass(frozen=True)
class TransferBoundReport:
    growth_constant: float
    certified: bool
    implied_floor: float
    replay_error: float
    degenerate: bool


def _transfer_matrix(spec: NetworkSpec, site: int, lam: complex) -> np.ndarray:
    """2x2 step matrix mapping (u_k, u_{k-1}) -> (u_{k+1}, u_k) at k = site."""
    n = spec.shape.size
    eta = spec.pinning[site - 1]
    m = spec.masses[site - 1]
    xi_left = spec.edge_weight(site - 2) if site >= 2 else 0.0
    xi_right = spec.edge_weight(site - 1) if site <= n - 1 else 0.0
    return np.array([
        [(m * lam**2 + eta + xi_left + xi_right) / xi_right, -xi_left / xi_right],
        [1.0, 0.0],
    ], dtype=complex)


def transfer_matrix_bound(spec: NetworkSpec, lam: complex, u: np.ndarray) -> TransferBoundReport:
    """Exponential-floor certificate from the chain's transfer recursion.

    The interior rows of the pencil equation are a three-term recursion,
    so the eigenvector is propagated from its first two components by 2x2
    step matrices.  With C the largest step-matrix norm and gamma_1 the
    damping at the first site, normalization forces
    1 <= 2 C^{2n} lam_S / gamma_1, an explicit floor on the gap.

    For gaps below roundoff the eigensolver's Re(lam) is pure noise, so
    the certificate substitutes the damping-identity value of the same
    quantity, which stays resolvable down to |u_1|^2 scale.
    """
    if spec.shape.dim != 1:
        raise ValueError("transfer-matrix certificate is one-dimensional")
    if 1 not in spec.friction.sites:
        raise ValueError("certificate requires friction at the first site")
    n = spec.shape.size
    u = np.asarray(u, complex)
    u = u / np.linalg.norm(u)
    if abs(u[0]) < 1e-13:
        return TransferBoundReport(math.nan, False, math.nan, math.nan, degenerate=True)

    # replay u_3..u_n from (u_2, u_1) through the friction-free interior rows
    replay = u.copy()
    err = 0.0
    for k in range(2, n):
        A = _transfer_matrix(spec, k, lam)
        nxt = A @ np.array([replay[k - 1], replay[k - 2]])
        replay[k] = nxt[0]
        err = max(err, abs(replay[k] - u[k]))

    C = max(np.linalg.norm(_transfer_matrix(spec, k, lam), 2) for k in range(2, n)) if n > 2 else 1.0
    C = max(C, 1.0)
    gamma_1 = spec.friction.gammas[spec.friction.sites.index(1)]
    floor = gamma_1 / (2.0 * C ** (2 * n))

    lam_s = lam.real
    if abs(lam.imag) > 1e-12 * max(1.0, abs(lam)):
        m = spec.masses
        g = np.zeros(n)
        for s, gam in zip(spec.friction.sites, spec.friction.gammas):
            g[s - 1] = gam
        w = m * np.abs(u) ** 2
        lam_s = max(lam_s, float((g * w).sum() / (2.0 * w.sum())))
    with np.errstate(over="ignore"):
        certified = bool(1.0 <= 2.0 * C ** (2 * n) * lam_s / gamma_1)
    return TransferBoundReport(growth_constant=float(C), certified=certified,
                               implied_floor=float(floor), replay_error=float(err),
                               degenerate=False)
