import numpy as np
import pytest

from gaplab.operators import build_schrodinger
from gaplab.scenarios import (DisorderSpec, impurity_center, localization_fit,
                              min_level_spacing, restricted_eigenvector_check,
                              run_sweep, scenario_disorder, scenario_homogeneous,
                              scenario_impurity, site_uniform)
from gaplab.spectra import eig_symmetric


class TestScenarioBuilders:
    def test_homogeneous_1d_fixture(self):
        spec = scenario_homogeneous(1, 16)
        assert spec.shape.size == 16
        assert spec.friction.sites == (1, 16)
        assert np.all(spec.pinning == 1.0)

    def test_homogeneous_2d_corners(self):
        spec = scenario_homogeneous(2, 8, friction_tag="corners")
        assert len(spec.friction) == 2

    def test_homogeneous_2d_opposite_edges(self):
        spec = scenario_homogeneous(2, 8, friction_tag="opposite_edges")
        assert len(spec.friction) == 16

    def test_impurity_fig_configuration(self):
        spec = scenario_impurity(1, 32, eta_bulk=10.0, eta_center=5.0)
        center = impurity_center(spec.shape)
        assert center == 16
        assert spec.pinning[center - 1] == 5.0
        assert np.sum(spec.pinning == 10.0) == 31

    def test_impurity_needs_even_side(self):
        with pytest.raises(ValueError):
            scenario_impurity(1, 9)

    def test_impurity_margin_warning(self):
        with pytest.warns(UserWarning):
            scenario_impurity(1, 8, eta_bulk=3.0, eta_center=2.0, epsilon=1.0)

    def test_impurity_uniform_spectral_gap_of_b(self):
        # center pinning 5 vs bulk 10 leaves at least the margin between the
        # split-off ground level and the rest of the spectrum, at every size
        eps = 10.0 - 5.0 - 2  # eta_bulk - eta_center - 2d
        for n in (8, 16, 32, 64):
            spec = scenario_impurity(1, n, eta_bulk=10.0, eta_center=5.0)
            w = np.linalg.eigvalsh(build_schrodinger(spec))
            assert w[1] - w[0] >= eps

    def test_disorder_pinning_fixture(self):
        spec = scenario_disorder(1, 8, DisorderSpec(target="pinning", seed=42))
        assert spec.shape.centered and spec.shape.size == 17
        expected = np.array([1.0 + site_uniform(42, "eta", (c,))
                             for c in range(-8, 9)])
        assert np.array_equal(spec.pinning, expected)
        assert (spec.pinning > 1.0).all() and (spec.pinning < 2.0).all()

    def test_disorder_mass_law(self):
        spec = scenario_disorder(1, 6, DisorderSpec(target="mass", seed=3))
        assert (spec.masses > 0.5).all() and (spec.masses < 1.0).all()
        assert np.all(spec.pinning == 1.0)

    def test_disorder_interaction_law(self):
        spec = scenario_disorder(1, 6, DisorderSpec(target="interaction", seed=3))
        assert spec.interaction.shape == (12,)
        assert (spec.interaction > 1.0).all()

    def test_same_seed_byte_identical(self):
        a = scenario_disorder(1, 10, DisorderSpec(target="pinning", seed=7))
        b = scenario_disorder(1, 10, DisorderSpec(target="pinning", seed=7))
        assert a.pinning.tobytes() == b.pinning.tobytes()
        assert a.masses.tobytes() == b.masses.tobytes()
        c = scenario_disorder(1, 10, DisorderSpec(target="pinning", seed=8))
        assert a.pinning.tobytes() != c.pinning.tobytes()

    def test_disorder_bulk_shared_across_sizes(self):
        small = scenario_disorder(1, 4, DisorderSpec(target="pinning", seed=5))
        large = scenario_disorder(1, 9, DisorderSpec(target="pinning", seed=5))
        # centered coordinates -4..4 must carry identical draws in both
        for c in range(-4, 5):
            assert small.pinning[small.shape.flat((c,)) - 1] == \
                large.pinning[large.shape.flat((c,)) - 1]


class TestSpacing:
    def test_diagonal(self):
        from gaplab.lattice import build_shape
        rep = min_level_spacing(np.diag([1.0, 2.0, 3.0]), build_shape(1, 3))
        assert rep.spacing == pytest.approx(1.0, abs=1e-15)
        assert not rep.event

    def test_homogeneous_closed_form(self):
        spec = scenario_homogeneous(1, 16)
        B = build_schrodinger(spec)
        j = np.arange(1, 17)
        w = np.sort(4 * np.sin(np.pi * (j - 1) / 32) ** 2 + 1)
        rep = min_level_spacing(B, spec.shape)
        assert rep.spacing == pytest.approx(np.diff(w).min(), rel=1e-10)

    def test_threshold_uses_centered_half_width(self):
        spec = scenario_disorder(1, 50, DisorderSpec(seed=0))
        rep = min_level_spacing(build_schrodinger(spec), spec.shape)
        assert rep.n == 50
        assert rep.threshold == pytest.approx(50.0**-4)


class TestLocalizationFit:
    def test_synthetic_exponential(self):
        from gaplab.lattice import build_shape
        shape = build_shape(1, 21, centered=True)
        phi = np.array([np.exp(-abs(c)) for c in range(-10, 11)])
        phi /= np.linalg.norm(phi)
        fit = localization_fit(phi, shape, (0,))
        assert fit.rate == pytest.approx(1.0, abs=1e-6)
        assert fit.accepted
        assert 0.0 <= fit.tail_mass <= 1.0

    def test_delocalized_rejected(self):
        spec = scenario_homogeneous(1, 21)
        es = eig_symmetric(build_schrodinger(spec))
        fit = localization_fit(es.vectors[:, 1], spec.shape, (11,))
        assert not fit.accepted

    def test_impurity_ground_state(self):
        spec = scenario_impurity(1, 32, eta_bulk=10.0, eta_center=5.0)
        es = eig_symmetric(build_schrodinger(spec))
        fit = localization_fit(es.vectors[:, 0], spec.shape,
                               spec.shape.multi(impurity_center(spec.shape)))
        assert fit.rate > 0
        assert fit.r_squared >= 0.98

    def test_rate_stable_across_sizes(self):
        rates = []
        for n in (16, 32, 64):
            spec = scenario_impurity(1, n, eta_bulk=10.0, eta_center=5.0)
            es = eig_symmetric(build_schrodinger(spec))
            fit = localization_fit(es.vectors[:, 0], spec.shape,
                                   spec.shape.multi(impurity_center(spec.shape)))
            rates.append(fit.rate)
        mid = rates[1]
        assert all(abs(r - mid) / mid <= 0.2 for r in rates)

    def test_too_few_sites_rejected(self):
        from gaplab.lattice import build_shape
        with pytest.warns(UserWarning):
            shape = build_shape(1, 1)
        with pytest.raises(ValueError):
            localization_fit(np.array([1.0]), shape, (1,))


class TestRestrictedEigenvector:
    def test_impurity_deviations_decrease(self):
        spec = scenario_impurity(1, 128, eta_bulk=10.0, eta_center=5.0)
        B = build_schrodinger(spec)
        es = eig_symmetric(B)
        center = impurity_center(spec.shape) - 1
        out = restricted_eigenvector_check(B, es.vectors[:, 0], float(es.values[0]),
                                           center, (8, 16, 32))
        devs = [o.deviation for o in out if not o.skipped]
        assert len(devs) == 3
        for a, b in zip(devs, devs[1:]):
            assert b <= 1.1 * a

    def test_full_window_recovers_exactly(self):
        spec = scenario_impurity(1, 32, eta_bulk=10.0, eta_center=5.0)
        B = build_schrodinger(spec)
        es = eig_symmetric(B)
        out = restricted_eigenvector_check(B, es.vectors[:, 0], float(es.values[0]),
                                           15, (32,))
        assert out[0].deviation <= 1e-12

    def test_disorder_most_localized_state(self):
        # coupling strength 2 puts the window sizes inside the asymptotic
        # regime of the truncation estimate at this box size
        spec = scenario_disorder(1, 64,
                                 DisorderSpec(target="pinning", seed=7, strength=2.0))
        B = build_schrodinger(spec)
        es = eig_symmetric(B)
        # best-localized state whose peak leaves room for the largest window
        ipr = (es.vectors**4).sum(axis=0)
        order = np.argsort(ipr)[::-1]
        k = next(j for j in order
                 if 16 <= np.argmax(np.abs(es.vectors[:, j])) < 129 - 16)
        center = int(np.argmax(np.abs(es.vectors[:, k])))
        out = restricted_eigenvector_check(B, es.vectors[:, k], float(es.values[k]),
                                           center, (8, 16, 24, 32))
        devs = [o.deviation for o in out if not o.skipped]
        assert len(devs) == 4
        for a, b in zip(devs, devs[1:]):
            assert b <= 1.1 * a


class TestRunSweep:
    def test_records_sorted_and_complete(self):
        recs = run_sweep("homogeneous", (4, 8), seeds=(0, 1), workers=1)
        assert [(r.n, r.seed) for r in recs] == [(4, 0), (4, 1), (8, 0), (8, 1)]
        assert all(r.gap > 0 and not r.failed for r in recs)

    def test_temperature_does_not_change_gaps(self):
        a = run_sweep("homogeneous", (4, 8, 16), params={"temperature": 1.0}, workers=1)
        b = run_sweep("homogeneous", (4, 8, 16), params={"temperature": 7.3}, workers=1)
        assert [r.gap for r in a] == [r.gap for r in b]

    def test_parallel_matches_serial(self):
        a = run_sweep("disorder", (4, 6, 8), seeds=(0, 1), workers=1)
        b = run_sweep("disorder", (4, 6, 8), seeds=(0, 1), workers=4)
        assert [(r.n, r.seed, r.gap) for r in a] == [(r.n, r.seed, r.gap) for r in b]

    def test_failure_captured_in_record(self):
        recs = run_sweep("impurity", (9,), params={}, workers=1)  # odd size: error
        assert len(recs) == 1
        assert recs[0].failed
        assert "ValueError" in recs[0].flags

    def test_disorder_gap_positive_every_realization(self):
        recs = run_sweep("disorder", (6,), seeds=range(12), workers=1)
        assert all(r.gap > 0 for r in recs)

    def test_wigner_method_on_homogeneous(self):
        recs = run_sweep("homogeneous", (9,), method="wigner", workers=1)
        direct = run_sweep("homogeneous", (9,), method="direct", workers=1)
        assert recs[0].gap == pytest.approx(direct[0].gap, rel=1e-8)
