import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dppstats import montecarlo as mc
from dppstats.asymptotics import direct_sum_cov
from dppstats.ensembles import Ensemble
from dppstats.exactdist import exact_cumulant, exact_tail, pmf

G0 = Ensemble.ginibre(0)


class TestRng:
    def test_reproducible(self):
        a = mc.sample_count(G0, 50.0, 25_000, mc.RngSpec(11, 3))
        b = mc.sample_count(G0, 50.0, 25_000, mc.RngSpec(11, 3))
        assert a.tobytes() == b.tobytes()

    def test_streams_differ(self):
        a = mc.sample_count(G0, 50.0, 5000, mc.RngSpec(11, 0))
        b = mc.sample_count(G0, 50.0, 5000, mc.RngSpec(11, 1))
        assert not np.array_equal(a, b)

    @pytest.mark.parametrize("workers", [2, 3, 8])
    def test_parallel_determinism(self, workers):
        serial = mc.sample_count(G0, 30.0, 35_001, mc.RngSpec(5), workers=1)
        parallel = mc.sample_count(G0, 30.0, 35_001, mc.RngSpec(5), workers=workers)
        assert np.array_equal(serial, parallel)

    def test_paths_parallel_determinism(self):
        radii = [20.0, 25.0, 30.0]
        a = mc.sample_path(G0, radii, 21_000, mc.RngSpec(9), workers=1)
        b = mc.sample_path(G0, radii, 21_000, mc.RngSpec(9), workers=4)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("seed,stream", [(-1, 0), (0, -2), (2**64, 0), (1.5, 0)])
    def test_invalid_spec(self, seed, stream):
        with pytest.raises(ValueError):
            mc.RngSpec(seed, stream)


class TestSamplers:
    @pytest.mark.parametrize(
        "e,R",
        [(Ensemble.ginibre(0), 64.0), (Ensemble.ginibre(1), 64.0), (Ensemble.hyperbolic(1), 32.0)],
        ids=["ginibre0", "ginibre1", "hyperbolic1"],
    )
    def test_chi_square_against_exact_law(self, e, R):
        counts = mc.sample_count(e, R, 100_000, mc.RngSpec(2024, 7))
        res = mc.chi_square_vs_pmf(counts, pmf(e, R))
        assert res.dof >= 5
        assert res.p_value > 1e-3

    def test_chi_square_detects_wrong_law(self):
        counts = mc.sample_count(G0, 64.0, 50_000, mc.RngSpec(1))
        assert mc.chi_square_vs_pmf(counts, pmf(G0, 66.0)).p_value < 1e-6

    def test_chi_square_outside_support(self):
        law = pmf(G0, 10.0)
        res = mc.chi_square_vs_pmf(np.array([law.offset - 1]), law)
        assert res.p_value == 0.0

    def test_finite_ensemble_never_exceeds_N(self):
        counts = mc.sample_count(Ensemble.finite(20), 40.0, 5000, mc.RngSpec(3))
        assert counts.max() <= 20

    def test_paths_non_decreasing(self):
        paths = mc.sample_path(G0, [10.0, 12.0, 20.0], 5000, mc.RngSpec(4))
        assert paths.shape == (5000, 3)
        assert np.all(np.diff(paths, axis=1) >= 0)

    def test_path_radii_must_increase(self):
        with pytest.raises(ValueError):
            mc.sample_path(G0, [10.0, 10.0], 10, mc.RngSpec(0))

    def test_path_covariance(self):
        R, dR = 100.0, 10.0
        paths = mc.sample_path(G0, [R, R + dR], 50_000, mc.RngSpec(8))
        cov = mc.covariance_estimate(paths[:, 0], paths[:, 1])
        assert abs(cov.point - direct_sum_cov(G0, R, R + dR)) < 4 * cov.stderr

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            mc.sample_count(G0, 10.0, 0, mc.RngSpec(0))


class TestEstimators:
    def test_tail_estimate_covers_exact(self):
        est = mc.estimate_tail(G0, 100.0, 3.0, 40_000, mc.RngSpec(21))
        exact = exact_tail(G0, 100.0, 3.0)
        assert est.ci95[0] <= exact <= est.ci95[1]
        assert not est.rare and est.note == ""

    def test_rare_event_flag(self):
        est = mc.estimate_tail(G0, 100.0, 12.0, 2000, mc.RngSpec(21))
        assert est.rare and est.note == "use exact_tail"

    def test_minus_infinity(self):
        assert mc.estimate_tail(G0, 10.0, -math.inf, 1000, mc.RngSpec(0)).point == 1.0

    def test_minimum_samples(self):
        with pytest.raises(ValueError):
            mc.estimate_tail(G0, 10.0, 0.0, 999, mc.RngSpec(0))

    @settings(max_examples=50)
    @given(st.integers(0, 500), st.integers(1, 500))
    def test_wilson_interval_contains_point(self, k, extra):
        n = k + extra
        lo, hi = mc.wilson_interval(k, n)
        assert 0.0 <= lo <= k / n <= hi <= 1.0

    def test_moment_estimators(self):
        counts = mc.sample_count(G0, 100.0, 50_000, mc.RngSpec(2))
        m = mc.mean_estimate(counts)
        v = mc.variance_estimate(counts)
        assert abs(m.point - 100.0) < 4 * m.stderr
        assert abs(v.point - exact_cumulant(G0, 100.0, 2)) < 4 * v.stderr
