"""Assembly of the network operators: the lattice Schrodinger matrix B,
its positive square root, and the drift blocks M and Omega.

All matrices are dense; target sizes stay below a few thousand rows, where
dense symmetric and nonsymmetric eigensolvers are the simplest correct
choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import FrictionSet, LatticeShape

SQRT_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class NetworkSpec:
    """Full physical description of one oscillator network.

    masses and pinning are per-site arrays in flat-index order.
    interaction is a scalar coupling for d >= 2; in one dimension a
    per-edge array (length n-1, edge i joining sites i and i+1) is also
    accepted.  temperatures holds one inverse-temperature value per
    friction site; they never enter the drift matrices.
    """

    shape: LatticeShape
    masses: np.ndarray
    pinning: np.ndarray
    interaction: np.ndarray
    friction: FrictionSet
    temperatures: np.ndarray

    def __post_init__(self):
        size = self.shape.size
        masses = np.ascontiguousarray(np.broadcast_to(np.asarray(self.masses, float), size).copy())
        pinning = np.ascontiguousarray(np.broadcast_to(np.asarray(self.pinning, float), size).copy())
        inter = np.atleast_1d(np.asarray(self.interaction, float))
        if inter.size == 1:
            pass
        elif self.shape.dim == 1 and inter.size == max(size - 1, 0):
            pass
        else:
            raise ValueError("per-edge interaction is only supported in one dimension")
        temps = np.ascontiguousarray(
            np.broadcast_to(np.asarray(self.temperatures, float), len(self.friction)).copy())
        if (masses <= 0).any() or (pinning <= 0).any() or (inter <= 0).any():
            raise ValueError("masses, pinning and interaction must be strictly positive")
        if (temps <= 0).any():
            raise ValueError("temperatures must be strictly positive")
        if len(self.friction) == 0:
            raise ValueError("friction set must be nonempty")
        if any(not 1 <= s <= size for s in self.friction.sites):
            raise ValueError("friction site outside the lattice")
        for name, arr in (("masses", masses), ("pinning", pinning),
                          ("interaction", inter), ("temperatures", temps)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def uniform_masses(self) -> bool:
        return bool(np.all(self.masses == self.masses[0]))

    def edge_weight(self, edge_index: int) -> float:
        xi = self.interaction
        return float(xi[0]) if xi.size == 1 else float(xi[edge_index])


@dataclass(frozen=True)
class OperatorBundle:
    """Matrices assembled for one NetworkSpec; immutable after construction."""

    spec: NetworkSpec
    B: np.ndarray
    sqrt_b: np.ndarray
    gamma: np.ndarray      # full size^2 diagonal friction matrix
    M: np.ndarray          # blocks (Gamma, -m^-1; B, 0)
    omega: np.ndarray      # blocks (Gamma, -m^-1/2 B^1/2; B^1/2 m^-1/2, 0)

    def __post_init__(self):
        for arr in (self.B, self.sqrt_b, self.gamma, self.M, self.omega):
            arr.flags.writeable = False


def build_schrodinger(spec: NetworkSpec) -> np.ndarray:
    """Lattice Schrodinger matrix: weighted Neumann Laplacian plus pinning.

    Each nearest-neighbor edge (a, b) with weight xi contributes
    xi * (e_a - e_b)(e_a - e_b)^T; the pinning strengths sit on the
    diagonal.  For a single site there are no edges and B = diag(eta).
    In one dimension this is the familiar tridiagonal form with diagonal
    eta_i plus the incident edge weights.
    """
    n = spec.shape.size
    B = np.diag(spec.pinning.astype(float))
    for k, (a, b) in enumerate(spec.shape.neighbor_pairs()):
        xi = spec.edge_weight(k)
        i, j = a - 1, b - 1
        B[i, i] += xi
        B[j, j] += xi
        B[i, j] -= xi
        B[j, i] -= xi
    return B


def matrix_sqrt_spd(B: np.ndarray) -> np.ndarray:
    """Symmetric positive-definite square root via spectral decomposition."""
    w, V = np.linalg.eigh(B)
    if w[0] <= 0:
        raise ValueError(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    root = (V * np.sqrt(w)) @ V.T
    root = 0.5 * (root + root.T)
    resid = np.linalg.norm(root @ root - B) / np.linalg.norm(B)
    if resid > SQRT_RESIDUAL_TOL:
        raise ArithmeticError(f"square-root residual {resid:.3e} exceeds tolerance")
    return root


def gamma_matrix(spec: NetworkSpec) -> np.ndarray:
    n = spec.shape.size
    G = np.zeros((n, n))
    for s, g in zip(spec.friction.sites, spec.friction.gammas):
        G[s - 1, s - 1] = g
    return G


def build_generator(spec: NetworkSpec) -> OperatorBundle:
    """Assemble the drift matrices of the network's Langevin generator.

    M acts on (p, q); Omega is the same drift after the symmetrizing
    change of variables and has the same spectrum.  Bath temperatures do
    not appear in either matrix.
    """
    n = spec.shape.size
    B = build_schrodinger(spec)
    sqrt_b = matrix_sqrt_spd(B)
    G = gamma_matrix(spec)
    m_inv = np.diag(1.0 / spec.masses)
    m_inv_half = np.diag(1.0 / np.sqrt(spec.masses))

    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = G
    M[:n, n:] = -m_inv
    M[n:, :n] = B

    omega = np.zeros((2 * n, 2 * n))
    omega[:n, :n] = G
    omega[:n, n:] = -(m_inv_half @ sqrt_b)
    omega[n:, :n] = sqrt_b @ m_inv_half

    return OperatorBundle(spec=spec, B=B, sqrt_b=sqrt_b, gamma=G, M=M, omega=omega)
