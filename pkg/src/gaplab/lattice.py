"""Index arithmetic for d-dimensional square lattices and friction-site presets.

Sites are addressed either by 1-based flat indices or by multi-indices.
Two labelings are supported: corner-based (coordinates 1..n per axis) and
centered (coordinates -N..N per axis, n = 2N+1 sites per axis).  Flat
indices enumerate multi-indices in lexicographic order, i.e. the last
coordinate varies fastest.  This ordering is frozen: eigenvector
component comparisons elsewhere depend on it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product

# largest flat index we allow; beyond this dense matrices are hopeless anyway
_MAX_SITES = 2**31


@dataclass(frozen=True)
class LatticeShape:
    """Square lattice [n]^d, optionally with centered coordinates."""

    dim: int
    side: int
    centered: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if self.side < 1:
            raise ValueError(f"side length must be >= 1, got {self.side}")
        if self.dim * math.log2(self.side if self.side > 1 else 2) > math.log2(_MAX_SITES):
            raise ValueError(f"flat index range overflows: {self.side}^{self.dim}")
        if self.centered and self.side % 2 == 0:
            raise ValueError("centered labeling needs an odd side length (2N+1 sites)")
        if self.side == 1:
            warnings.warn("side length 1: single site per axis, no interaction edges",
                          stacklevel=3)

    @property
    def size(self) -> int:
        return self.side**self.dim

    @property
    def half_width(self) -> int:
        """N in the centered labeling [-N..N]; only meaningful if centered."""
        return (self.side - 1) // 2

    def multi(self, flat: int) -> tuple:
        """1-based flat index -> multi-index tuple."""
        if not 1 <= flat <= self.size:
            raise IndexError(f"flat index {flat} out of range 1..{self.size}")
        k = flat - 1
        coords = []
        for _ in range(self.dim):
            coords.append(k % self.side)
            k //= self.side
        coords.reverse()
        off = self.half_width if self.centered else -1
        return tuple(c - off for c in coords) if self.centered else tuple(c + 1 for c in coords)

    def flat(self, idx: tuple) -> int:
        """Multi-index tuple -> 1-based flat index."""
        if len(idx) != self.dim:
            raise IndexError(f"expected {self.dim} coordinates, got {len(idx)}")
        k = 0
        for c in idx:
            c0 = c + self.half_width if self.centered else c - 1
            if not 0 <= c0 < self.side:
                raise IndexError(f"coordinate {c} out of range in {idx}")
            k = k * self.side + c0
        return k + 1

    def sites(self):
        """All multi-indices in flat order."""
        lo = -self.half_width if self.centered else 1
        rng = range(lo, lo + self.side)
        return product(*[rng] * self.dim)

    def neighbor_pairs(self):
        """Nearest-neighbor edges as (flat_a, flat_b) with flat_a < flat_b."""
        for idx in self.sites():
            a = self.flat(idx)
            for axis in range(self.dim):
                nxt = list(idx)
                nxt[axis] += 1
                try:
                    b = self.flat(tuple(nxt))
                except IndexError:
                    continue
                yield a, b


@dataclass(frozen=True)
class SiteSet:
    """Ordered, duplicate-free collection of flat site indices."""

    sites: tuple
    tag: str = "custom"

    def __post_init__(self):
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("duplicate sites in site set")

    def __len__(self):
        return len(self.sites)


def build_shape(dim: int, side: int, centered: bool = False) -> LatticeShape:
    return LatticeShape(dim, side, centered)


def boundary_sites(shape: LatticeShape) -> SiteSet:
    """Sites with some coordinate on the hull.

    Corner labeling: a coordinate equals 1 or n.  Centered labeling:
    sup-norm equals the half width.
    """
    out = []
    for idx in shape.sites():
        if shape.centered:
            on = max(abs(c) for c in idx) == shape.half_width
        else:
            on = min(idx) == 1 or max(idx) == shape.side
        if on:
            out.append(shape.flat(idx))
    out.sort()
    return SiteSet(tuple(out), tag="boundary")


@dataclass(frozen=True)
class FrictionSet:
    """Friction sites with per-site damping weights, in flat-index order."""

    sites: tuple
    gammas: tuple
    tag: str = "custom"

    def __post_init__(self):
        if len(self.sites) != len(self.gammas):
            raise ValueError("one gamma per friction site required")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("duplicate friction sites")
        if any(g <= 0 for g in self.gammas):
            raise ValueError("friction weights must be strictly positive")

    def __len__(self):
        return len(self.sites)


def _corner_pair(shape):
    lo = -shape.half_width if shape.centered else 1
    hi = shape.half_width if shape.centered else shape.side
    return [tuple([lo] * shape.dim), tuple([hi] * shape.dim)]


def friction_preset(shape: LatticeShape, tag: str, gamma: float = 1.0,
                    sites=None) -> FrictionSet:
    """Deterministic friction-site lists for the standard damping layouts.

    tag 'corners': the two diagonal corner sites (any d).
    tag 'edge_centers': midpoints of the two opposing faces x1 = 1 and
        x1 = n (d >= 2).
    tag 'opposite_edges': the full rows x1 = 1 and x1 = n (d = 2).
    tag 'terminal_ends' / 'single_end': chain endpoints (d = 1).
    tag 'custom': explicit multi-index or flat list via `sites`.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d, n = shape.dim, shape.side
    lo = -shape.half_width if shape.centered else 1
    hi = shape.half_width if shape.centered else n

    if tag == "corners":
        multis = _corner_pair(shape)
    elif tag == "terminal_ends":
        if d != 1:
            raise ValueError("terminal_ends preset needs d = 1")
        multis = _corner_pair(shape)
    elif tag == "single_end":
        if d != 1:
            raise ValueError("single_end preset needs d = 1")
        multis = [_corner_pair(shape)[0]]
    elif tag == "edge_centers":
        if d < 2:
            raise ValueError("edge_centers preset needs d >= 2")
        if shape.centered:
            mid = 0
        else:
            mid = (n + 1) // 2  # ceil(n/2)
        multis = [tuple([lo] + [mid] * (d - 1)), tuple([hi] + [mid] * (d - 1))]
    elif tag == "opposite_edges":
        if d != 2:
            raise ValueError("opposite_edges preset needs d = 2")
        rng = range(lo, lo + n)
        multis = [(lo, j) for j in rng] + [(hi, j) for j in rng]
    elif tag == "custom":
        if not sites:
            raise ValueError("custom preset needs an explicit site list")
        multis = [shape.multi(s) if isinstance(s, int) else tuple(s) for s in sites]
    else:
        raise ValueError(f"unknown friction preset {tag!r}")

    flats = sorted(shape.flat(m) for m in multis)
    if len(set(flats)) != len(flats):
        raise ValueError("preset produced duplicate sites")
    return FrictionSet(tuple(flats), tuple([float(gamma)] * len(flats)), tag=tag)
