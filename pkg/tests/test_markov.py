import math

import numpy as np
import pytest

from jacobi_capacity import markov as mk
from jacobi_capacity.fading import EULER_GAMMA, NonFading, Rayleigh, ScaledRayleigh
from jacobi_capacity.logdet import capacity_mc

RAY = Rayleigh()


class TestSinSq:
    def test_orthogonal(self):
        assert mk.sin_sq(np.array([1, 0]), np.array([0, 1])) == 1.0

    def test_parallel(self, rng):
        a = RAY.sample(rng, 3)
        assert mk.sin_sq(a, (0.3 - 2j) * a) == pytest.approx(0.0, abs=1e-14)

    def test_scalars_are_parallel(self, rng):
        a, b = RAY.sample(rng, (100, 1)), RAY.sample(rng, (100, 1))
        np.testing.assert_allclose(mk.sin_sq(a, b), 0.0, atol=1e-14)

    def test_range(self, rng):
        s = mk.sin_sq(RAY.sample(rng, (1000, 3)), RAY.sample(rng, (1000, 3)))
        assert np.all((s >= 0) & (s <= 1))

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            mk.sin_sq(np.zeros(2), np.ones(2))


class TestStep:
    def test_from_zero(self):
        a, b = np.array([1.0, 1.0]), np.array([1.0, 0.0])
        assert mk.e_step(0.0, a, b) == pytest.approx(2.0 * 0.5)

    def test_from_infinity(self):
        a, b = np.array([1.0, 1j]), np.array([0.3, 0.0])
        assert mk.e_step(math.inf, a, b) == pytest.approx(2.0)
        assert mk.e_step(math.inf, a, b, delta=0.5) == pytest.approx(2.5)

    def test_unit_chain_example(self):
        assert mk.e_step_unit(0.0, 1.0, 1.0, 1.0) == 0.5

    def test_monotone_in_e(self, rng):
        n = 10_000
        a, b = RAY.sample(rng, (n, 2)), RAY.sample(rng, (n, 2))
        e1 = rng.exponential(size=n)
        e2 = e1 + rng.exponential(size=n)
        delta = rng.uniform(0, 1, size=n)
        assert np.all(mk.e_step(e1, a, b, delta) <= mk.e_step(e2, a, b, delta))


class TestChain:
    def test_zero_steps(self, rng):
        cfg = mk.EChainConfig(2, 0.0, 1.7, RAY, RAY)
        assert mk.run_chain(cfg, 0, rng) == 1.7

    def test_k1_absorbs_at_zero(self, rng):
        cfg = mk.EChainConfig(1, 0.0, mk.ZERO, RAY, RAY)
        _, traj = mk.run_chain(cfg, 500, rng, trajectory=True)
        np.testing.assert_array_equal(traj, 0.0)

    def test_bad_config(self):
        with pytest.raises(ValueError):
            mk.EChainConfig(2, -1.0, mk.ZERO, RAY, RAY)
        with pytest.raises(ValueError):
            mk.EChainConfig(2, 0.0, "middle", RAY, RAY)

    def test_coupled_pathwise_order(self, rng):
        traj = mk.run_coupled(RAY, RAY, 3, 200, rng, inits=(0.0, 0.5, 5.0, math.inf))
        assert np.all(np.diff(traj, axis=0) >= 0)

    def test_coupled_chains_merge(self, rng):
        traj = mk.run_coupled(RAY, RAY, 2, 200, rng)
        assert traj[1, -1] - traj[0, -1] < 1e-8 * traj[1, -1]

    def test_unit_chain_stays_inside(self, rng):
        e = 0.5
        a2, b2 = np.abs(RAY.sample(rng, 10_000)) ** 2, np.abs(RAY.sample(rng, 10_000)) ** 2
        for x, y in zip(a2, b2):
            e = mk.e_step_unit(e, x, y, 0.1)
            assert 0 < e < 1


@pytest.fixture(scope="module")
def ladder():
    return mk.bound_ladder(RAY, RAY, 2, 6, trials=20_000, seed=8)


class TestLadder:
    def test_pathwise_invariants(self, ladder):
        assert np.all(np.diff(ladder.lower_nats) >= 0)
        assert np.all(np.diff(ladder.upper_nats) <= 0)
        assert np.all(ladder.lower_nats <= ladder.upper_nats)

    def test_bits_conversion(self, ladder):
        np.testing.assert_allclose(ladder.l_inf_upper_bits, -ladder.lower_nats / math.log(2))

    def test_rows(self, ladder):
        rows = ladder.rows()
        assert len(rows) == 6 and tuple(rows[0]) == mk.LADDER_CSV_FIELDS
        assert rows[0]["ref_narula"] == pytest.approx(EULER_GAMMA / math.log(2))

    def test_deterministic_across_workers(self):
        l1 = mk.bound_ladder(RAY, RAY, 3, 3, trials=9000, seed=2, workers=1)
        l4 = mk.bound_ladder(RAY, RAY, 3, 3, trials=9000, seed=2, workers=4)
        np.testing.assert_array_equal(l1.lower_nats, l4.lower_nats)
        np.testing.assert_array_equal(l1.upper_se, l4.upper_se)

    def test_more_users_tighter(self):
        gaps = []
        for K in (2, 10):
            lad = mk.bound_ladder(RAY, RAY, K, [2], trials=20_000, seed=1)
            gaps.append(lad.upper_nats[0] - lad.lower_nats[0])
        assert gaps[1] < gaps[0]

    def test_stationary_between_bounds(self):
        lad = mk.bound_ladder(RAY, RAY, 2, [8], trials=20_000, seed=3)
        est, se = mk.stationary_offset(RAY, RAY, 2, burn_in=200, samples=20_000, seed=3, chains=20)
        assert lad.lower_nats[0] - 3 * (se + lad.lower_se[0]) <= est <= lad.upper_nats[0] + 3 * (se + lad.upper_se[0])

    def test_burn_in_insensitive(self):
        a, sa = mk.stationary_offset(RAY, RAY, 2, burn_in=50, samples=20_000, seed=5, chains=20)
        b, sb = mk.stationary_offset(RAY, RAY, 2, burn_in=1000, samples=20_000, seed=5, chains=20)
        assert abs(a - b) < 3 * math.hypot(sa, sb)


class TestTdmaOffset:
    def test_rayleigh(self):
        off = mk.high_snr_offset_tdma(RAY, RAY)
        assert off.offset_nats == pytest.approx(-EULER_GAMMA)
        assert off.l_inf_bits == pytest.approx(0.8327, abs=1e-4)

    def test_attenuated_path_ignored(self):
        assert mk.high_snr_offset_tdma(ScaledRayleigh(0.4), RAY).offset_nats == pytest.approx(-EULER_GAMMA)

    def test_nonfading(self):
        off = mk.high_snr_offset_tdma(NonFading(), NonFading())
        assert off.offset_nats == 0.0 and off.l_inf_db == 0.0

    def test_approached_from_above(self):
        # the finite-SNR gap C(P) - log P is above the limit and decreasing
        gaps = [capacity_mc(RAY, RAY, 2000, 1, P, "TDMA", trials=20, seed=1).mean_nats - math.log(P)
                for P in (1e2, 1e4)]
        assert gaps[0] > gaps[1] > -EULER_GAMMA
