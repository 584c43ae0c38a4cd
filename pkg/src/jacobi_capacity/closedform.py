"""Closed-form and quadrature reference rates, all in nats per channel use."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _streams
from .channel import inner, sample_channel
from .fading import EULER_GAMMA, FadingModel, NonFiniteMomentError

CSV_FIELDS = ("P", "K", "quantity", "value")
LOG2 = math.log(2.0)


@dataclass(frozen=True)
class SnrCharacterization:
    """Extreme-SNR parameters.

    ``ebno_min`` is linear (not dB); ``l_inf`` is in bits and may be a
    ``(lower, upper)`` interval.
    """

    s0: float | None = None
    ebno_min: float | None = None
    s_inf: float | None = None
    l_inf: float | tuple[float, float] | None = None

    def __post_init__(self):
        if isinstance(self.l_inf, tuple) and self.l_inf[0] > self.l_inf[1]:
            raise ValueError("l_inf interval must satisfy lower <= upper")


def rate_nonfading(P):
    """``log((1 + 2P + sqrt(1 + 4P)) / 2)`` for unit gains."""
    P = np.asarray(P, dtype=float)
    if np.any(P < 0):
        raise ValueError("P must be non-negative")
    r = np.log((1 + 2 * P + np.sqrt(1 + 4 * P)) / 2)
    return float(r) if r.ndim == 0 else r


def nonfading_extreme_snr() -> SnrCharacterization:
    return SnrCharacterization(s0=4 / 3, ebno_min=LOG2 / 2, s_inf=1.0, l_inf=0.0)


# --- exponential integral -------------------------------------------------

_E1_EPS = 1e-16


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _E1_EPS * abs(total):
            break
        k += 1
    return -EULER_GAMMA - math.log(x) - total


def _e1_scaled_cf(x: float) -> float:
    # e^x E1(x) by the modified Lentz continued fraction 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _E1_EPS:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge at x={x}")


def exp_integral_e1(x: float) -> float:
    """``E1(x) = int_x^inf e^-t / t dt`` for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"E1 is defined here for x > 0, got {x}")
    if x <= 1.0:
        return _e1_series(x)
    return _e1_scaled_cf(x) * math.exp(-x)


def exp_integral_e1_scaled(x: float) -> float:
    """``e^x E1(x)``; finite for arbitrarily large x."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"E1 is defined here for x > 0, got {x}")
    if x <= 1.0:
        return math.exp(x) * _e1_series(x)
    return _e1_scaled_cf(x)


# --- Rayleigh TDMA (Narula) -----------------------------------------------

def narula_density(x: float, P: float) -> float:
    """Stationary density of the Cholesky pivots for Rayleigh TDMA, on ``x >= 1``."""
    if P <= 0:
        raise ValueError("P must be positive")
    if x < 1:
        raise ValueError("the pivot density is supported on [1, inf)")
    # log(x) e^{-x/P} / (E1(1/P) P), with e^{-1/P} factored out of both terms
    return math.log(x) * math.exp(-(x - 1) / P) / (P * exp_integral_e1_scaled(1 / P))


def _exp_weighted_integral(g, P: float, tol: float) -> float:
    """``int_0^inf g(s) e^-s ds`` for g growing at most like a polynomial in log."""
    upper = 40.0
    points = sorted({p for p in (1 / P, 10 / P, 1.0) if 0 < p < upper})
    val, _ = integrate.quad(lambda s: g(s) * math.exp(-s), 0.0, upper, points=points,
                            limit=400, epsabs=tol, epsrel=1e-12)
    # tail: on s >= upper, log(1 + P s) <= log(1 + P) + s
    c = math.log1p(P) + upper
    if math.exp(-upper) * (c * c + 2 * c + 2) > tol:
        tail, _ = integrate.quad(lambda s: g(s) * math.exp(-s), upper, math.inf,
                                 limit=200, epsabs=tol, epsrel=1e-12)
        val += tail
    return val


def narula_mass(P: float) -> float:
    """Total mass of :func:`narula_density` by quadrature (1 up to rounding)."""
    norm = exp_integral_e1_scaled(1 / P)
    return _exp_weighted_integral(lambda s: math.log1p(P * s), P, 1e-13) / norm


def rate_tdma_rayleigh(P: float, tol: float = 1e-9) -> float:
    """``E log d`` under the stationary pivot density:
    ``int_1^inf (log x)^2 e^{-x/P} / (E1(1/P) P) dx``.

    Evaluated after the substitution ``x = 1 + P s``.
    """
    if P <= 0:
        raise ValueError("P must be positive")
    norm = exp_integral_e1_scaled(1 / P)
    num = _exp_weighted_integral(lambda s: math.log1p(P * s) ** 2, P, tol * norm * 0.1)
    return num / norm


# --- wideband (WB) scheme -------------------------------------------------

def rate_wb_largeK(P: float, m1: complex, m2: float) -> float:
    """Large-K WB rate
    ``log((1 + 2P m2 + sqrt(1 + 4P m2 + 4P^2(m2^2 - |m1|^4))) / 2)``."""
    if P < 0:
        raise ValueError("P must be non-negative")
    m1_4 = abs(m1) ** 4
    if m2 * m2 < m1_4 - 1e-15:
        raise ValueError("need m2 >= |m1|^2")
    disc = 1 + 4 * P * m2 + 4 * P * P * max(m2 * m2 - m1_4, 0.0)
    return math.log((1 + 2 * P * m2 + math.sqrt(disc)) / 2)


@dataclass(frozen=True)
class DetRecursionParams:
    """Coefficients of ``E det G_m = A E det G_{m-1} - B E det G_{m-2}``.

    ``E det G_m = phi r^m - varphi s^m`` with ``phi = r/(r-s)`` and
    ``varphi = s/(r-s)``, so that ``E det G_1 = A`` and
    ``E det G_2 = A^2 - B``.
    """

    A: float
    B: float
    r: float
    s: float

    @classmethod
    def from_moments(cls, P: float, K: int, m1: complex, m2: float) -> "DetRecursionParams":
        if K < 1:
            raise ValueError("K must be >= 1")
        A = 1 + 2 * P * m2
        B = P * P / K * (m2 * m2 + (K - 1) * abs(m1) ** 4)
        disc = A * A - 4 * B
        if disc < 0:
            raise ValueError(f"complex roots: A^2 - 4B = {disc}")
        root = math.sqrt(disc)
        r = (A + root) / 2
        # s = B / r avoids cancellation in (A - root) / 2
        s = B / r if r > 0 else 0.0
        return cls(A, B, r, s)

    @property
    def phi(self) -> float:
        return self.r / (self.r - self.s)

    @property
    def varphi(self) -> float:
        return self.s / (self.r - self.s)

    def log_expected_det(self, m: int) -> float:
        """``log E det G_m`` from the closed-form solution."""
        r, s = self.r, self.s
        if s == 0:
            return m * math.log(r)
        q = s / r
        if r - s <= 1e-14 * r:
            return m * math.log(r) + math.log(m + 1)
        # (r^{m+1} - s^{m+1}) / (r - s)
        return (m + 1) * math.log(r) + math.log(-math.expm1((m + 1) * math.log(q))) - math.log(r - s)


def rate_wb_upper(P: float, K: int, m1: complex, m2: float) -> float:
    """Jensen upper bound ``log r`` on the finite-K WB rate."""
    if P < 0:
        raise ValueError("P must be non-negative")
    return math.log(DetRecursionParams.from_moments(P, K, m1, m2).r)


def expected_det_sequence(M: int, P: float, K: int, m1: complex, m2: float) -> np.ndarray:
    """``log E det G_m`` for ``m = 1..M`` by the renormalised recursion."""
    if M < 1:
        raise ValueError("M must be >= 1")
    p = DetRecursionParams.from_moments(P, K, m1, m2)
    out = np.empty(M)
    prev, cur, log_scale = 0.0, 1.0, 0.0  # E det G_{-1}, E det G_0
    for m in range(M):
        new = p.A * cur - (p.B * prev if m > 0 else 0.0)
        scale = max(abs(new), abs(cur))
        prev, cur = cur / scale, new / scale
        log_scale += math.log(scale)
        out[m] = log_scale + math.log(cur)
    return out


# --- low-SNR regime -------------------------------------------------------

def extreme_low_snr(model_a: FadingModel, model_b: FadingModel, K: int, mode: str = "analytic",
                    M: int = 5000, seed: int = 0, realizations: int = 20) -> SnrCharacterization:
    """Minimum ``Eb/N0`` (linear) and low-SNR slope ``S0`` of the WB rate.

    ``analytic`` uses the moment formulas, which assume identical laws on
    both paths.  ``empirical`` evaluates ``MK log 2 / tr(H^+H)`` and
    ``(2/M) tr(H^+H)^2 / tr((H^+H)^2)`` with the expectations replaced by
    averages over `realizations` sampled channels of M cells.
    """
    if mode == "analytic":
        if model_a != model_b:
            raise ValueError("analytic low-SNR formulas need identical fading on both paths")
        mom = model_a.moments()
        if not math.isfinite(mom.m4):
            raise NonFiniteMomentError("S0 requires a finite fourth moment")
        m1_4 = abs(mom.m1) ** 4
        s0 = 2 / (mom.kurtosis / (2 * K) + m1_4 / (2 * mom.m2**2) + 1)
        return SnrCharacterization(s0=s0, ebno_min=LOG2 / (2 * mom.m2))
    if mode != "empirical":
        raise ValueError(f"unknown mode {mode!r}")
    tr1 = np.empty(realizations)
    tr2 = np.empty(realizations)
    for t in range(realizations):
        ch = sample_channel(model_a, model_b, M, K, _streams.stream(seed, t))
        diag = np.sum(np.abs(ch.a) ** 2, axis=-1) + np.sum(np.abs(ch.b) ** 2, axis=-1)
        off = inner(ch.a[1:], ch.b[:-1])
        tr1[t] = diag.sum()
        # tr((H H^+)^2) for a Hermitian tridiagonal matrix
        tr2[t] = np.sum(diag**2) + 2 * np.sum(np.abs(off) ** 2)
    e1, e2 = tr1.mean(), tr2.mean()
    if not (math.isfinite(e1) and math.isfinite(e2)):
        raise NonFiniteMomentError("trace moments are not finite")
    return SnrCharacterization(s0=2 / M * e1 * e1 / e2, ebno_min=M * K * LOG2 / e1)


def closed_form_rows(powers, K: int, m1: complex = 0j, m2: float = 1.0) -> list[dict]:
    """Curve export: one row per (P, quantity)."""
    rows = []
    for P in powers:
        vals = {
            "rate_nonfading": rate_nonfading(P),
            "rate_wb_largeK": rate_wb_largeK(P, m1, m2),
            "rate_wb_upper": rate_wb_upper(P, K, m1, m2),
        }
        if P > 0:
            vals["rate_tdma_rayleigh"] = rate_tdma_rayleigh(P)
        rows += [{"P": P, "K": K, "quantity": q, "value": v} for q, v in vals.items()]
    return rows
