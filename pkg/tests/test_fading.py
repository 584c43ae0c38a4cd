import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from jacobi_capacity.fading import (EULER_GAMMA, Empirical, MaxOrderStat, NonFading, NonFiniteMomentError,
                                    PhaseOnly, Rayleigh, ScaledRayleigh, check_hypotheses, mc_moments,
                                    order_by_h5, parse_model, sample_gain)


class TestRayleigh:
    def test_unit_power(self, rng):
        x = Rayleigh().sample(rng, 200_000)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_fourth_moment(self):
        assert Rayleigh().moments().m4 == 2.0
        assert Rayleigh().moments().kurtosis == 2.0

    def test_log_moment_by_quadrature(self):
        # E log|x| for |x|^2 ~ Exp(1)
        val, _ = integrate.quad(lambda y: 0.5 * math.log(y) * math.exp(-y), 0, math.inf)
        assert Rayleigh().moments().e_log_abs == pytest.approx(val, abs=1e-10)
        assert val == pytest.approx(-EULER_GAMMA / 2, abs=1e-10)

    def test_mc_agrees_with_analytic(self):
        mc = mc_moments(Rayleigh(), 200_000, seed=3)
        ref = Rayleigh().moments()
        assert abs(mc.m2 - ref.m2) < 4 * mc.stderr["m2"]
        assert abs(mc.e_log_abs - ref.e_log_abs) < 4 * mc.stderr["e_log_abs"]


class TestHypotheses:
    def test_nonfading_flags(self):
        h = NonFading().hypotheses()
        assert h.H1 and not h.H2

    def test_rayleigh_satisfies_all(self):
        h = Rayleigh().hypotheses().as_dict()
        assert all(v for k, v in h.items() if k != "H5")

    def test_h5_ordering(self):
        weak, strong = ScaledRayleigh(0.5), Rayleigh()
        assert check_hypotheses(weak, strong).H5 is True
        assert check_hypotheses(strong, weak).H5 is False
        assert order_by_h5(strong, weak) == (weak, strong)

    def test_scaled_rayleigh_range(self):
        with pytest.raises(ValueError):
            ScaledRayleigh(1.5)
        with pytest.raises(ValueError):
            ScaledRayleigh(0.0)


class TestMaxOrderStat:
    @pytest.mark.parametrize("K", [2, 5])
    def test_cdf_is_power_of_base(self, K):
        x = MaxOrderStat(Rayleigh(), K).sample(np.random.default_rng(K), 100_000)
        # |x|^2 of the base is Exp(1); the maximum has CDF (1 - e^-y)^K
        ks = stats.kstest(np.abs(x) ** 2, lambda y: (1 - np.exp(-y)) ** K)
        assert ks.statistic < 0.01

    def test_k1_is_base(self):
        assert MaxOrderStat(Rayleigh(), 1).moments() == Rayleigh().moments()

    def test_analytic_moments_match_mc(self):
        model = MaxOrderStat(Rayleigh(), 4)
        mc = mc_moments(model, 200_000, seed=7)
        ref = model.moments()
        assert abs(mc.m2 - ref.m2) < 4 * mc.stderr["m2"]
        assert abs(mc.e_log_abs - ref.e_log_abs) < 4 * mc.stderr["e_log_abs"]
        # E max of K unit exponentials is the harmonic number
        assert ref.m2 == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4, rel=1e-8)


class TestSampling:
    def test_reproducible(self):
        a = Rayleigh().sample(np.random.default_rng(9), 10)
        b = Rayleigh().sample(np.random.default_rng(9), 10)
        np.testing.assert_array_equal(a, b)

    def test_phase_has_unit_modulus(self, rng):
        np.testing.assert_allclose(np.abs(PhaseOnly().sample(rng, 1000)), 1.0)

    def test_sample_gain_scalar(self, rng):
        assert isinstance(sample_gain(Rayleigh(), rng), complex)


class TestParse:
    @pytest.mark.parametrize("text,cls", [("nonfading", NonFading), ("rayleigh", Rayleigh),
                                          ("phase", PhaseOnly), ("scaled-rayleigh:0.3", ScaledRayleigh),
                                          ("maxk:3:rayleigh", MaxOrderStat)])
    def test_known(self, text, cls):
        assert isinstance(parse_model(text), cls)

    @pytest.mark.parametrize("text", ["bogus", "maxk:3", "rayleigh:2"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_model(text)

    def test_empirical_file(self, tmp_path):
        path = tmp_path / "gains.txt"
        np.savetxt(path, [[1.0, 0.0], [0.0, 2.0], [-1.0, -1.0]])
        model = parse_model(f"empirical:{path}")
        assert isinstance(model, Empirical)
        assert model.moments().m2 == pytest.approx((1 + 4 + 2) / 3)
        assert model.spec() == f"empirical:{path}"


def test_zero_gain_has_infinite_log_moment():
    m = Empirical(np.array([0.0, 1.0])).moments(bootstrap=0)
    assert m.e_log_abs == -math.inf
    assert not m.finite


def test_nonfinite_error_is_value_error():
    assert issubclass(NonFiniteMomentError, ValueError)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=2, max_size=40))
def test_empirical_moment_invariants(pairs):
    z = np.array([complex(r, i) for r, i in pairs])
    m = Empirical(z).moments(bootstrap=0)
    # Jensen and Cauchy-Schwarz
    assert abs(m.m1) ** 2 <= m.m2 * (1 + 1e-12) + 1e-300
    assert m.m2 ** 2 <= m.m4 * (1 + 1e-12) + 1e-300
