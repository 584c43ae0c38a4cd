import math

import numpy as np
import pytest

from jacobi_capacity.channel import ChannelRealization, TridiagonalHermitian, gram_tridiagonal, sample_channel
from jacobi_capacity.fading import NonFading, Rayleigh
from jacobi_capacity.logdet import (PivotBreakdownError, capacity_bounds_mc, capacity_mc, hadamard_bound,
                                    ldl_pivots, logdet_dense, logdet_ldl, logdet_recursion)

RAY = Rayleigh()


class TestLogDet:
    def test_two_by_two(self):
        # [[3, 1], [1, 3]] has determinant 8
        G = gram_tridiagonal(ChannelRealization(np.ones((2, 1)), np.ones((2, 1))), 1.0)
        assert logdet_ldl(G) == pytest.approx(math.log(8), abs=1e-14)
        assert logdet_recursion(G) == pytest.approx(math.log(8), abs=1e-14)

    def test_zero_power_is_identity(self, rng):
        G = gram_tridiagonal(sample_channel(RAY, RAY, 50, 2, rng), 0.0)
        assert logdet_ldl(G) == 0.0
        assert logdet_recursion(G) == 0.0

    @pytest.mark.parametrize("M", [1, 3, 10, 40])
    def test_three_routes_agree(self, M):
        ch = sample_channel(RAY, RAY, M, 2, np.random.default_rng(M))
        G = gram_tridiagonal(ch, 3.0)
        ref = logdet_dense(G)
        assert logdet_ldl(G) == pytest.approx(ref, rel=1e-12, abs=1e-12)
        assert logdet_recursion(G) == pytest.approx(ref, rel=1e-12, abs=1e-12)

    def test_pivots_exceed_one(self, rng):
        G = gram_tridiagonal(sample_channel(RAY, RAY, 200, 1, rng), 2.0)
        assert np.all(ldl_pivots(G) > 1)

    def test_hadamard(self, rng):
        G = gram_tridiagonal(sample_channel(RAY, RAY, 200, 3, rng), 5.0)
        assert logdet_ldl(G) <= hadamard_bound(G)

    def test_large_m_no_overflow(self, rng):
        G = gram_tridiagonal(sample_channel(RAY, RAY, 100_000, 1, rng), 1e6)
        v1, v2 = logdet_ldl(G), logdet_recursion(G)
        assert math.isfinite(v1)
        assert v1 == pytest.approx(v2, rel=1e-10)

    def test_batch(self, rng):
        a = RAY.sample(rng, (6, 20, 2))
        b = RAY.sample(rng, (6, 20, 2))
        batch = [logdet_ldl(gram_tridiagonal(ChannelRealization(a[i], b[i]), 1.5)) for i in range(6)]
        from jacobi_capacity.channel import tridiagonal_entries
        np.testing.assert_allclose(logdet_ldl(tridiagonal_entries(a, b, 1.5)), batch, rtol=1e-14)

    def test_indefinite_raises(self):
        bad = TridiagonalHermitian(np.array([1.0, 1.0]), np.array([2.0 + 0j]))
        with pytest.raises(PivotBreakdownError):
            logdet_ldl(bad)
        with pytest.raises(PivotBreakdownError):
            logdet_recursion(bad)


class TestCapacityMC:
    def test_zero_power(self):
        est = capacity_mc(RAY, RAY, 100, 2, 0.0, trials=5)
        assert est.mean_nats == 0.0 and est.std_error == 0.0

    def test_increasing_in_power(self):
        vals = [capacity_mc(RAY, RAY, 200, 2, P, trials=20, seed=4).mean_nats for P in (0.5, 2, 8, 32)]
        assert np.all(np.diff(vals) > 0)

    def test_deterministic_across_workers(self):
        e1 = capacity_mc(RAY, RAY, 100, 2, 3.0, trials=70, seed=11, workers=1)
        e4 = capacity_mc(RAY, RAY, 100, 2, 3.0, trials=70, seed=11, workers=4)
        np.testing.assert_array_equal(e1.samples, e4.samples)
        assert e1.mean_nats == e4.mean_nats

    def test_prefix_stability(self):
        # trial t depends only on (seed, t)
        short = capacity_mc(RAY, RAY, 50, 1, 1.0, trials=10, seed=2).samples
        long = capacity_mc(RAY, RAY, 50, 1, 1.0, trials=40, seed=2).samples
        np.testing.assert_array_equal(short, long[:10])

    def test_tdma_uses_single_user(self):
        est = capacity_mc(NonFading(), NonFading(), 100, 5, 1.0, "TDMA", trials=2)
        assert est.K == 1

    def test_sandwich(self):
        P = 10.0
        bounds = capacity_bounds_mc(RAY, RAY, 2, P, samples=100_000, seed=1)
        est = capacity_mc(RAY, RAY, 500, 2, P, trials=100, seed=1)
        assert bounds["lower"] - 4 * bounds["lower_se"] < est.mean_nats
        assert est.mean_nats < bounds["upper"] + 4 * bounds["upper_se"]

    @pytest.mark.parametrize("kw", [{"trials": 0}, {"P": -1.0}])
    def test_rejects_bad_input(self, kw):
        args = {"model_a": RAY, "model_b": RAY, "M": 10, "K": 1, "P": 1.0, "trials": 3} | kw
        with pytest.raises(ValueError):
            capacity_mc(**args)
