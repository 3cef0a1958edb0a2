import numpy as np
import pytest

from pagecusum import (REFERENCE_CRITICAL_VALUES, ValidationError, WienerPath,
                       estimate_critical_value, functional_ordinary,
                       functional_page, refine_wiener_path,
                       resolve_critical_value, rng_stream, sample_wiener_path,
                       simulate_functional_values)
from pagecusum.wiener import (CriticalValueEstimate, load_estimate,
                              save_estimate)


class _ZeroRng:
    def standard_normal(self, n):
        return np.zeros(n)


def brute_force_page(values, gamma, side):
    """O(T^2) evaluation of the page functional straight from its definition."""
    T = len(values) - 1
    best = -np.inf
    for j in range(1, T):
        t = j / T
        inner = [((1 - t) / (1 - i / T)) * values[i] for i in range(j + 1)]
        lo, hi = min(inner), max(inner)
        dev = values[j] - lo
        if side == "two_sided":
            dev = max(dev, hi - values[j])
        best = max(best, dev / t ** gamma)
    last = abs(values[T]) if side == "two_sided" else values[T]
    return max(best, last)


class TestPaths:
    def test_zero_increments(self):
        path = sample_wiener_path(2, _ZeroRng())
        assert path.values.tolist() == [0.0, 0.0, 0.0]

    def test_requires_t_at_least_two(self):
        with pytest.raises(ValidationError):
            sample_wiener_path(1, rng_stream(0, 0))

    def test_terminal_variance_and_covariance(self):
        T, n = 8, 100_000
        w_half = np.empty(n)
        w_one = np.empty(n)
        for i in range(n):
            path = sample_wiener_path(T, rng_stream(2024, i))
            w_half[i] = path.values[T // 2]
            w_one[i] = path.values[T]
        assert np.var(w_one) == pytest.approx(1.0, abs=0.02)
        cov = np.mean(w_half * w_one) - w_half.mean() * w_one.mean()
        assert cov == pytest.approx(0.5, abs=0.02)

    def test_refinement_keeps_coarse_values(self):
        path = sample_wiener_path(64, rng_stream(5, 0))
        fine = refine_wiener_path(path, rng_stream(5, 1))
        assert fine.grid_size == 128
        assert np.array_equal(fine.values[0::2], path.values)


class TestFunctionals:
    def test_zero_path_gives_zero(self):
        path = WienerPath(4, np.zeros(5))
        for side in ("one_sided", "two_sided"):
            assert functional_ordinary(path, 0.3, side) == 0.0
            assert functional_page(path, 0.3, side) == 0.0

    def test_ordinary_small_path(self):
        path = WienerPath(2, np.array([0.0, 0.5, 1.0]))
        assert functional_ordinary(path, 0.0) == 1.0
        neg = WienerPath(2, -path.values)
        assert functional_ordinary(neg, 0.0, "two_sided") == 1.0

    def test_page_dominates_ordinary(self):
        for i in range(1000):
            path = sample_wiener_path(64, rng_stream(77, i))
            for gamma in (0.0, 0.45):
                assert functional_page(path, gamma) >= \
                    functional_ordinary(path, gamma) - 1e-12

    @pytest.mark.parametrize("T", [2, 3, 17, 128, 512])
    @pytest.mark.parametrize("side", ["one_sided", "two_sided"])
    def test_linear_page_matches_quadratic_oracle(self, T, side):
        for i in range(3):
            path = sample_wiener_path(T, rng_stream(31, i))
            for gamma in (0.0, 0.25, 0.45):
                fast = functional_page(path, gamma, side)
                slow = brute_force_page(path.values, gamma, side)
                assert fast == pytest.approx(slow, abs=1e-12)

    def test_grid_refinement_never_decreases_functionals(self):
        for i in range(200):
            path = sample_wiener_path(32, rng_stream(99, i))
            fine = refine_wiener_path(path, rng_stream(99, 10_000 + i))
            for gamma in (0.0, 0.25):
                assert functional_ordinary(fine, gamma) >= \
                    functional_ordinary(path, gamma) - 1e-12
                assert functional_page(fine, gamma) >= \
                    functional_page(path, gamma) - 1e-12


class TestEstimates:
    def test_batch_values_match_per_path_evaluation(self):
        reps, T = 40, 64
        vals = simulate_functional_values(0.25, "one_sided", "page", reps, T,
                                          seed=3)
        for i in range(reps):
            path = sample_wiener_path(T, rng_stream(3, i))
            assert vals[i] == functional_page(path, 0.25)

    def test_reflection_principle_anchor(self):
        est = estimate_critical_value(0.0, 0.1, "one_sided", "ordinary",
                                      reps=4000, T=2048, seed=8)
        assert est.c == pytest.approx(1.6449, abs=0.05)

    def test_two_sided_quantile_dominates_one_sided(self):
        one = estimate_critical_value(0.25, 0.1, "one_sided", "ordinary",
                                      reps=2000, T=256, seed=9)
        two = estimate_critical_value(0.25, 0.1, "two_sided", "ordinary",
                                      reps=2000, T=256, seed=9)
        assert two.c >= one.c

    def test_quantile_nondecreasing_in_gamma(self):
        ests = [estimate_critical_value(g, 0.1, "one_sided", "page",
                                        reps=4000, T=1024, seed=10)
                for g in (0.0, 0.25, 0.45)]
        for lo, hi in zip(ests, ests[1:]):
            assert hi.c >= lo.c - 2.0 * (lo.std_err + hi.std_err)

    def test_deterministic_across_thread_counts(self):
        one = estimate_critical_value(0.25, 0.1, "one_sided", "page",
                                      reps=600, T=128, seed=11, threads=1)
        two = estimate_critical_value(0.25, 0.1, "one_sided", "page",
                                      reps=600, T=128, seed=11, threads=2)
        assert one.c == two.c
        assert one.std_err == two.std_err

    def test_validation(self):
        with pytest.raises(ValidationError):
            estimate_critical_value(0.7, 0.1, "one_sided", "page", reps=200,
                                    T=64)
        with pytest.raises(ValidationError):
            estimate_critical_value(0.1, 0.1, "one_sided", "page", reps=50,
                                    T=64)


class TestCache:
    def make_estimate(self, **overrides):
        base = dict(c=1.7012, std_err=0.004, gamma=0.25, alpha=0.1,
                    side="one_sided", detector="page", reps=2000,
                    grid_size=512, seed=4)
        base.update(overrides)
        return CriticalValueEstimate(**base)

    def test_json_fields_exact(self):
        d = self.make_estimate().to_json_dict()
        assert set(d) == {"gamma", "alpha", "side", "detector", "reps",
                          "grid", "seed", "c", "std_err"}

    def test_save_load_roundtrip(self, tmp_path):
        est = self.make_estimate()
        path = tmp_path / "cv.json"
        save_estimate(est, path)
        assert load_estimate(path) == est

    def test_save_requires_enough_reps(self, tmp_path):
        with pytest.raises(ValidationError):
            save_estimate(self.make_estimate(reps=999), tmp_path / "cv.json")

    def test_resolution_order(self, tmp_path):
        est = self.make_estimate(c=9.99)
        save_estimate(est, tmp_path / "cv.json")
        got = resolve_critical_value(0.25, 0.1, "one_sided", "page",
                                     cache_dir=tmp_path)
        assert got == 9.99
        ref = resolve_critical_value(0.25, 0.1, "one_sided", "page")
        assert ref == REFERENCE_CRITICAL_VALUES[(0.25, 0.10, "one_sided",
                                                 "page")]
        with pytest.raises(ValidationError):
            resolve_critical_value(0.33, 0.1, "one_sided", "page")

    def test_reference_values_are_consistent(self):
        # gamma = 0 ordinary entries are normal quantiles
        from scipy.stats import norm
        assert REFERENCE_CRITICAL_VALUES[(0.0, 0.10, "one_sided", "ordinary")] \
            == pytest.approx(norm.ppf(0.95), abs=5e-5)
        assert REFERENCE_CRITICAL_VALUES[(0.0, 0.05, "one_sided", "ordinary")] \
            == pytest.approx(norm.ppf(0.975), abs=5e-5)
        # page dominates ordinary at every gamma
        for g in (0.0, 0.25, 0.45):
            assert REFERENCE_CRITICAL_VALUES[(g, 0.10, "one_sided", "page")] \
                > REFERENCE_CRITICAL_VALUES[(g, 0.10, "one_sided", "ordinary")]
