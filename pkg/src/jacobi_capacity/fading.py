"""Complex fading-gain distributions.

Each model is an immutable value that can draw i.i.d. gains, summarise its
moments (analytically where a closed form exists, otherwise by Monte Carlo)
and declare which regularity hypotheses of the soft-handoff theory it meets:

H1
    ``E (log|x|)^2 < inf``.
H2
    The law is absolutely continuous on the complex plane.
H3
    The density of ``|x|^2`` is strictly positive on some ``[c, inf)``.
H3'
    The law of ``|x|^2`` is equivalent to Lebesgue measure on some interval.
H4
    Lebesgue measure outside some ball is absolutely continuous w.r.t. the law.
H5
    A comparison between two models: ``E log|x|`` under the first is no larger
    than under the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from ._streams import mean_and_se

EULER_GAMMA = float(np.euler_gamma)

#: Default Monte Carlo sample count for moments without a closed form.
MC_SAMPLES = 1_000_000


class NonFiniteMomentError(ValueError):
    """A moment required by a computation is infinite or undefined."""


@dataclass(frozen=True)
class MomentSummary:
    """Moments of a single complex gain ``x``.

    ``stderr`` is empty for analytic summaries and maps field names to
    standard errors for Monte Carlo or bootstrap ones.
    """

    m1: complex
    m2: float
    m4: float
    e_log_abs: float
    e_log_abs_sq_2nd: float
    stderr: dict = field(default_factory=dict, compare=False)

    @property
    def kurtosis(self) -> float:
        return self.m4 / self.m2**2

    @property
    def finite(self) -> bool:
        vals = (abs(self.m1), self.m2, self.m4, self.e_log_abs, self.e_log_abs_sq_2nd)
        return all(math.isfinite(v) for v in vals)


@dataclass(frozen=True)
class Hypotheses:
    H1: bool
    H2: bool
    H3: bool
    H3p: bool
    H4: bool
    H5: bool | None = None  # only set when compared against another model

    def as_dict(self) -> dict:
        return {"H1": self.H1, "H2": self.H2, "H3": self.H3, "H3'": self.H3p,
                "H4": self.H4, "H5": self.H5}


class FadingModel:
    """Base class. Subclasses implement ``sample``, ``moments`` and ``hypotheses``."""

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        raise NotImplementedError

    def moments(self) -> MomentSummary:
        raise NotImplementedError

    def hypotheses(self) -> Hypotheses:
        raise NotImplementedError

    def spec(self) -> str:
        """The CLI model string that parses back to this model."""
        raise NotImplementedError


def _circular_gaussian(rng: np.random.Generator, size) -> np.ndarray:
    # real and imaginary parts each have variance 1/2, so E|x|^2 = 1
    z = rng.standard_normal(size=(2,) + _as_shape(size))
    out = (z[0] + 1j * z[1]) * math.sqrt(0.5)
    return out if size is not None else complex(out)


def _as_shape(size) -> tuple:
    if size is None:
        return ()
    if isinstance(size, (int, np.integer)):
        return (int(size),)
    return tuple(size)


_RAYLEIGH_HYP = Hypotheses(H1=True, H2=True, H3=True, H3p=True, H4=True)
_SINGULAR_HYP = Hypotheses(H1=True, H2=False, H3=False, H3p=False, H4=False)
# E (log Y)^2 for Y ~ Exp(1)
_LOG_EXP_2ND = EULER_GAMMA**2 + math.pi**2 / 6


@dataclass(frozen=True)
class NonFading(FadingModel):
    """Every gain equals 1."""

    def sample(self, rng, size=None):
        if size is None:
            return 1 + 0j
        return np.ones(_as_shape(size), dtype=complex)

    def moments(self):
        return MomentSummary(1 + 0j, 1.0, 1.0, 0.0, 0.0)

    def hypotheses(self):
        return _SINGULAR_HYP

    def spec(self):
        return "nonfading"


@dataclass(frozen=True)
class Rayleigh(FadingModel):
    """Unit-power circularly symmetric complex Gaussian gain."""

    def sample(self, rng, size=None):
        return _circular_gaussian(rng, size)

    def moments(self):
        return MomentSummary(0j, 1.0, 2.0, -EULER_GAMMA / 2, _LOG_EXP_2ND / 4)

    def hypotheses(self):
        return _RAYLEIGH_HYP

    def spec(self):
        return "rayleigh"


@dataclass(frozen=True)
class ScaledRayleigh(FadingModel):
    """Rayleigh gain attenuated by a real factor ``0 < alpha <= 1``."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    def sample(self, rng, size=None):
        return self.alpha * _circular_gaussian(rng, size)

    def moments(self):
        la = math.log(self.alpha)
        e_log = la - EULER_GAMMA / 2
        e_log_sq = la * la - EULER_GAMMA * la + _LOG_EXP_2ND / 4
        return MomentSummary(0j, self.alpha**2, 2 * self.alpha**4, e_log, e_log_sq)

    def hypotheses(self):
        return _RAYLEIGH_HYP

    def spec(self):
        return f"scaled-rayleigh:{self.alpha!r}"


@dataclass(frozen=True)
class PhaseOnly(FadingModel):
    """Unit modulus with a uniformly distributed phase."""

    def sample(self, rng, size=None):
        theta = rng.uniform(0.0, 2 * math.pi, size=size)
        return np.exp(1j * theta) if size is not None else complex(np.exp(1j * theta))

    def moments(self):
        return MomentSummary(0j, 1.0, 1.0, 0.0, 0.0)

    def hypotheses(self):
        return _SINGULAR_HYP

    def spec(self):
        return "phase"


@dataclass(frozen=True)
class MaxOrderStat(FadingModel):
    """Gain of the strongest of `K` i.i.d. draws from `base` (largest ``|x|^2``).

    This is the law seen by an opportunistic scheduler that serves, in every
    cell, the user with the best fade towards one base station.
    """

    base: FadingModel
    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")

    def sample(self, rng, size=None):
        if self.K == 1:
            return self.base.sample(rng, size)
        shape = _as_shape(size)
        draws = np.asarray(self.base.sample(rng, shape + (self.K,)))
        best = np.argmax(np.abs(draws) ** 2, axis=-1)
        out = np.take_along_axis(draws, best[..., None], axis=-1)[..., 0]
        return out if size is not None else complex(out)

    def moments(self):
        if self.K == 1:
            return self.base.moments()
        if isinstance(self.base, (Rayleigh, ScaledRayleigh)):
            alpha = getattr(self.base, "alpha", 1.0)
            return _max_exponential_moments(self.K, alpha)
        if isinstance(self.base, (NonFading, PhaseOnly)):
            return self.base.moments()
        return mc_moments(self)

    def hypotheses(self):
        return self.base.hypotheses()

    def spec(self):
        return f"maxk:{self.K}:{self.base.spec()}"


def _max_exponential_moments(K: int, alpha: float) -> MomentSummary:
    """Moments of ``alpha * X`` where ``|X|^2`` is the max of K Exp(1) variables.

    The phase of the selected gain stays uniform, so the mean is zero.  The
    maximum of K unit exponentials has mean ``H_K`` and variance
    ``sum 1/k^2``.
    """
    k = np.arange(1, K + 1, dtype=float)
    harmonic = float(np.sum(1.0 / k))
    ey2 = float(np.sum(1.0 / k**2)) + harmonic**2

    def log_density(y):
        # K (1 - e^-y)^(K-1) e^-y
        return math.log(K) + (K - 1) * math.log(-math.expm1(-y)) - y

    def expect(g):
        peak = math.log(K)
        pieces = [(0.0, peak), (peak, peak + 60.0)]
        total = 0.0
        for lo, hi in pieces:
            val, _ = integrate.quad(lambda y: g(y) * math.exp(log_density(y)) if y > 0 else 0.0,
                                    lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
            total += val
        return total

    e_log_y = expect(math.log)
    e_log_y_sq = expect(lambda y: math.log(y) ** 2)
    la = math.log(alpha)
    return MomentSummary(
        m1=0j,
        m2=alpha**2 * harmonic,
        m4=alpha**4 * ey2,
        e_log_abs=la + e_log_y / 2,
        e_log_abs_sq_2nd=la * la + la * e_log_y + e_log_y_sq / 4,
    )


@dataclass(frozen=True, eq=False)
class Empirical(FadingModel):
    """Measured gains; sampling draws uniformly from the stored values."""

    samples: np.ndarray
    source: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex).ravel()
        if arr.size == 0:
            raise ValueError("empirical model needs at least one sample")
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_file(cls, path) -> "Empirical":
        """Read one gain per line as ``re im``."""
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns 're im'")
        return cls(data[:, 0] + 1j * data[:, 1], source=str(path))

    def sample(self, rng, size=None):
        out = rng.choice(self.samples, size=size)
        return out if size is not None else complex(out)

    def moments(self, bootstrap: int = 200, seed: int = 0):
        x = self.samples
        est = _sample_moments(x)
        rng = np.random.default_rng(seed)
        boots = np.array([_sample_moments(x[rng.integers(0, x.size, x.size)]) for _ in range(bootstrap)])
        with np.errstate(invalid="ignore"):
            se = np.nanstd(boots, axis=0, ddof=1) if bootstrap > 1 else np.zeros(len(est))
        names = ("m1_re", "m1_im", "m2", "m4", "e_log_abs", "e_log_abs_sq_2nd")
        return MomentSummary(complex(est[0], est[1]), est[2], est[3], est[4], est[5],
                             stderr=dict(zip(names, map(float, se))))

    def hypotheses(self):
        # a finitely supported law is never absolutely continuous
        finite_logs = bool(np.all(np.abs(self.samples) > 0) and np.all(np.isfinite(self.samples)))
        return Hypotheses(H1=finite_logs, H2=False, H3=False, H3p=False, H4=False)

    def spec(self):
        if self.source is None:
            raise ValueError("in-memory empirical model has no file spec")
        return f"empirical:{self.source}"


def _sample_moments(x: np.ndarray) -> tuple:
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.abs(x) ** 2
        log_abs = np.log(np.abs(x))
        m1 = x.mean()
        return (m1.real, m1.imag, p.mean(), (p * p).mean(), log_abs.mean(), (log_abs**2).mean())


def mc_moments(model: FadingModel, samples: int = MC_SAMPLES, seed: int = 0) -> MomentSummary:
    """Monte Carlo moment summary with standard errors."""
    rng = np.random.default_rng(seed)
    x = np.asarray(model.sample(rng, samples))
    p = np.abs(x) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        log_abs = np.log(np.abs(x))
    m1r, se1r = mean_and_se(x.real)
    m1i, se1i = mean_and_se(x.imag)
    m2, se2 = mean_and_se(p)
    m4, se4 = mean_and_se(p * p)
    el, sel = mean_and_se(log_abs) if np.all(np.isfinite(log_abs)) else (-math.inf, math.inf)
    el2, sel2 = mean_and_se(log_abs**2) if np.all(np.isfinite(log_abs)) else (math.inf, math.inf)
    return MomentSummary(complex(m1r, m1i), m2, m4, el, el2,
                         stderr={"m1_re": se1r, "m1_im": se1i, "m2": se2, "m4": se4,
                                 "e_log_abs": sel, "e_log_abs_sq_2nd": sel2})


def sample_gain(model: FadingModel, rng: np.random.Generator) -> complex:
    """One gain drawn from `model`."""
    return complex(model.sample(rng))


def moments(model: FadingModel) -> MomentSummary:
    return model.moments()


def check_hypotheses(model: FadingModel, other: FadingModel | None = None) -> Hypotheses:
    """Declarative H1-H4 flags for `model`.

    With `other` given, H5 records whether `model` may play the role of the
    weaker path, i.e. ``E log|x|`` under `model` is at most that under `other`.
    """
    flags = model.hypotheses()
    if other is None:
        return flags
    h5 = model.moments().e_log_abs <= other.moments().e_log_abs
    return Hypotheses(flags.H1, flags.H2, flags.H3, flags.H3p, flags.H4, H5=bool(h5))


def order_by_h5(first: FadingModel, second: FadingModel) -> tuple[FadingModel, FadingModel]:
    """Return the pair as ``(pi_a, pi_b)`` so that H5 holds."""
    if first.moments().e_log_abs <= second.moments().e_log_abs:
        return first, second
    return second, first


def parse_model(text: str) -> FadingModel:
    """Parse a CLI model string.

    Grammar: ``nonfading``, ``rayleigh``, ``phase``, ``scaled-rayleigh:<alpha>``,
    ``maxk:<K>:<base>``, ``empirical:<path>``.
    """
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.lower()
    if head == "nonfading" and not rest:
        return NonFading()
    if head == "rayleigh" and not rest:
        return Rayleigh()
    if head == "phase" and not rest:
        return PhaseOnly()
    if head == "scaled-rayleigh" and rest:
        return ScaledRayleigh(float(rest))
    if head == "maxk" and rest:
        k, _, base = rest.partition(":")
        if not base:
            raise ValueError(f"maxk needs a base model: {text!r}")
        return MaxOrderStat(parse_model(base), int(k))
    if head == "empirical" and rest:
        return Empirical.from_file(Path(rest))
    raise ValueError(f"unrecognised fading model {text!r}")
