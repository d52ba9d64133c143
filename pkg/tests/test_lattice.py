import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaplab.lattice import (FrictionSet, build_shape, boundary_sites,
                            friction_preset)


def test_flat_indices_1d():
    shape = build_shape(1, 5)
    assert [shape.flat((i,)) for i in range(1, 6)] == [1, 2, 3, 4, 5]
    assert shape.multi(3) == (3,)


def test_lexicographic_flattening_2d():
    shape = build_shape(2, 3)
    # lexicographic order of multi-indices: (1,1),(1,2),(1,3),(2,1),...
    assert shape.multi(4) == (2, 1)
    assert shape.flat((2, 1)) == 4


def test_centered_labels():
    shape = build_shape(2, 3, centered=True)
    assert shape.size == 9
    labels = set(shape.sites())
    assert labels == set(itertools.product([-1, 0, 1], repeat=2))
    assert shape.flat((-1, -1)) == 1
    assert shape.multi(9) == (1, 1)


@given(st.integers(1, 3), st.integers(2, 6), st.booleans())
@settings(max_examples=60, deadline=None)
def test_flat_multi_roundtrip(d, n, centered):
    if centered and n % 2 == 0:
        n += 1
    shape = build_shape(d, n, centered)
    for k in range(1, shape.size + 1):
        assert shape.flat(shape.multi(k)) == k


def test_centered_site_count_matches_corner():
    for d in (1, 2):
        half = 2
        centered = build_shape(d, 2 * half + 1, centered=True)
        corner = build_shape(d, 2 * half + 1)
        assert centered.size == corner.size == (2 * half + 1) ** d


def test_overflow_rejected():
    with pytest.raises(ValueError):
        build_shape(9, 2000)


def test_single_site_warns():
    with pytest.warns(UserWarning):
        build_shape(1, 1)


def test_boundary_1d():
    shape = build_shape(1, 5)
    assert boundary_sites(shape).sites == (1, 5)


def test_boundary_2d_n3():
    shape = build_shape(2, 3)
    bnd = boundary_sites(shape)
    assert len(bnd) == 8
    assert shape.flat((2, 2)) not in bnd.sites


def test_boundary_2d_n4_brute_force():
    shape = build_shape(2, 4)
    expected = sorted(
        shape.flat(idx)
        for idx in itertools.product(range(1, 5), repeat=2)
        if min(idx) == 1 or max(idx) == 4
    )
    assert list(boundary_sites(shape).sites) == expected
    assert len(expected) == 12


@given(st.integers(1, 3), st.integers(2, 10))
@settings(max_examples=40, deadline=None)
def test_boundary_cardinality(d, n):
    shape = build_shape(d, n)
    assert len(boundary_sites(shape)) == n**d - max(n - 2, 0) ** d


def test_preset_corners_2d():
    shape = build_shape(2, 4)
    fs = friction_preset(shape, "corners", 1.0)
    assert fs.sites == (shape.flat((1, 1)), shape.flat((4, 4)))


def test_preset_opposite_edges():
    shape = build_shape(2, 4)
    fs = friction_preset(shape, "opposite_edges", 0.5)
    assert len(fs) == 8
    rows = {shape.multi(s)[0] for s in fs.sites}
    assert rows == {1, 4}
    assert all(g == 0.5 for g in fs.gammas)


def test_preset_terminal_ends():
    shape = build_shape(1, 7)
    assert friction_preset(shape, "terminal_ends", 2.0).sites == (1, 7)
    assert friction_preset(shape, "single_end", 1.0).sites == (1,)


def test_preset_edge_centers_even_side():
    shape = build_shape(2, 4)
    fs = friction_preset(shape, "edge_centers", 1.0)
    assert fs.sites == (shape.flat((1, 2)), shape.flat((4, 2)))


def test_preset_dimension_mismatch():
    with pytest.raises(ValueError):
        friction_preset(build_shape(1, 6), "edge_centers", 1.0)
    with pytest.raises(ValueError):
        friction_preset(build_shape(2, 4), "terminal_ends", 1.0)


@pytest.mark.parametrize("tag,d,n", [
    ("corners", 2, 5), ("corners", 3, 3), ("edge_centers", 2, 6),
    ("opposite_edges", 2, 4), ("terminal_ends", 1, 9), ("single_end", 1, 5),
])
def test_preset_sites_lie_on_boundary(tag, d, n):
    shape = build_shape(d, n)
    bnd = set(boundary_sites(shape).sites)
    assert set(friction_preset(shape, tag, 1.0).sites) <= bnd


def test_friction_set_validation():
    with pytest.raises(ValueError):
        FrictionSet((1, 1), (1.0, 1.0))
    with pytest.raises(ValueError):
        FrictionSet((1, 2), (1.0, -1.0))
