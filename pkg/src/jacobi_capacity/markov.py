"""The scalar e-chain behind the high-SNR power offset.

For K users per cell the chain lives on ``[0, inf)``::

    e_{n+1} = delta + |a_n|^2 (e_n + |b_{n-1}|^2 sin^2(a_n, b_{n-1})) / (e_n + |b_{n-1}|^2)

with ``delta = 1/rho`` at finite SNR and ``delta = 0`` in the high-SNR
limit.  The update is increasing in ``e_n``, so chains started at 0 and at
infinity sandwich the stationary law and give a ladder of bounds on
``lim C(P) - log P`` that tightens with the number of steps.

For K = 1 and ``delta > 0`` there is a second, (0, 1)-valued
parameterisation (:func:`e_step_unit`).  It is obtained from the pivots
``d_n`` of the eigenvector recurrence through ``e_n = 1 + |b_{n-1}|^2 / d_n``
whereas the K-user chain uses ``e_n = -d_n - |b_{n-1}|^2``; the two are kept
separate on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _streams
from .fading import FadingModel

LOG2 = math.log(2.0)
LADDER_CSV_FIELDS = ("K", "n", "trials", "lower_Linf_bits", "lower_se", "upper_Linf_bits",
                     "upper_se", "ref_narula", "ref_sqrt_bound", "ref_asymptotic")

ZERO = "zero"
INFINITY = "infinity"


def sin_sq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``1 - |<a;b>|^2 / (|a|^2 |b|^2)`` over the last axis, clipped to [0, 1]."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na = np.sum(np.abs(a) ** 2, axis=-1)
    nb = np.sum(np.abs(b) ** 2, axis=-1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ValueError("sin^2 is undefined for a zero vector")
    if a.shape[-1] == 1:
        # scalars are parallel; avoid rounding residue so that 0 stays absorbing
        out = np.zeros(np.broadcast_shapes(na.shape, nb.shape))
    else:
        cos2 = np.abs(np.sum(np.conj(a) * b, axis=-1)) ** 2 / (na * nb)
        out = np.clip(1.0 - cos2, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _step_terms(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 0:
        a, b = a[None], b[None]
    a2 = np.sum(np.abs(a) ** 2, axis=-1)
    b2 = np.sum(np.abs(b) ** 2, axis=-1)
    return a2, b2, sin_sq(a, b)


def _apply(e, a2, b2, s2, delta):
    e = np.asarray(e, dtype=float)
    inf = np.isinf(e)
    ef = np.where(inf, 0.0, e)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(inf, 1.0, (ef + b2 * s2) / (ef + b2))
    return delta + a2 * frac


def e_step(e, a, b, delta: float = 0.0):
    """One chain step from state `e` (``np.inf`` allowed) with K-vectors `a`, `b`.

    Leading axes of `a`/`b` broadcast against `e`.  From ``e = inf`` the
    step returns ``delta + |a|^2``, the limit of the update as ``e`` grows.
    """
    if np.any(np.asarray(delta) < 0):
        raise ValueError("delta must be non-negative")
    out = _apply(e, *_step_terms(a, b), delta)
    return float(out) if np.ndim(out) == 0 else out


def e_step_unit(e, a_abs2, b_abs2, delta: float):
    """K = 1 chain on (0, 1): ``(delta + |a|^2 e) / (delta + |b|^2 + |a|^2 e)``."""
    num = delta + a_abs2 * np.asarray(e, dtype=float)
    out = num / (num + b_abs2)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class EChainConfig:
    K: int
    delta: float
    init: str | float
    model_a: FadingModel
    model_b: FadingModel

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if isinstance(self.init, str):
            if self.init not in (ZERO, INFINITY):
                raise ValueError(f"init must be 'zero', 'infinity' or a value, got {self.init!r}")
        elif self.init < 0:
            raise ValueError("initial value must be non-negative")

    @property
    def initial_value(self) -> float:
        if self.init == ZERO:
            return 0.0
        if self.init == INFINITY:
            return math.inf
        return float(self.init)


def run_chain(cfg: EChainConfig, steps: int, rng: np.random.Generator, trajectory: bool = False):
    """Iterate the chain `steps` times with fresh i.i.d. ``(a, b)`` per step.

    Returns the final state, or ``(final, states)`` with ``states[0]`` the
    initial state when `trajectory` is set.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    e = cfg.initial_value
    states = [e]
    if steps:
        a = cfg.model_a.sample(rng, (steps, cfg.K))
        b = cfg.model_b.sample(rng, (steps, cfg.K))
        a2, b2, s2 = _step_terms(a, b)
        for n in range(steps):
            e = float(_apply(e, a2[n], b2[n], s2[n], cfg.delta))
            states.append(e)
    return (e, np.array(states)) if trajectory else e


def run_coupled(model_a: FadingModel, model_b: FadingModel, K: int, steps: int,
                rng: np.random.Generator, delta: float = 0.0, inits=(0.0, math.inf)) -> np.ndarray:
    """Trajectories from several initial states driven by the same draws.

    Returns an array of shape ``(len(inits), steps + 1)``.
    """
    a = model_a.sample(rng, (steps, K))
    b = model_b.sample(rng, (steps, K))
    a2, b2, s2 = _step_terms(a, b) if steps else (np.empty(0),) * 3
    out = np.empty((len(inits), steps + 1))
    e = np.array(inits, dtype=float)
    out[:, 0] = e
    for n in range(steps):
        e = _apply(e, a2[n], b2[n], s2[n], delta)
        out[:, n + 1] = e
    return out


def ref_narula() -> float:
    """K = 1 Rayleigh offset ``gamma / log 2`` (bits)."""
    return float(np.euler_gamma) / LOG2


def ref_sqrt_bound(K: int) -> float:
    """Earlier Rayleigh lower bound ``-log2(1 + sqrt(1 - 1/K))`` on the offset (bits)."""
    return -math.log2(1 + math.sqrt(1 - 1 / K))


@dataclass(frozen=True)
class OffsetBoundLadder:
    """Lower/upper estimates of ``lim C(P) - log P`` (nats) per chain order n.

    The offset in bits is ``L_inf = -(C - log P)/log 2``, so the nat-domain
    lower bound maps to the bit-domain upper bound and vice versa.
    """

    K: int
    trials: int
    orders: tuple
    lower_nats: np.ndarray
    upper_nats: np.ndarray
    lower_se: np.ndarray
    upper_se: np.ndarray

    @property
    def l_inf_upper_bits(self) -> np.ndarray:
        return -self.lower_nats / LOG2

    @property
    def l_inf_lower_bits(self) -> np.ndarray:
        return -self.upper_nats / LOG2

    def entry(self, n: int) -> dict:
        i = self.orders.index(n)
        return {"lower_nats": float(self.lower_nats[i]), "lower_se": float(self.lower_se[i]),
                "upper_nats": float(self.upper_nats[i]), "upper_se": float(self.upper_se[i])}

    def rows(self) -> list[dict]:
        out = []
        for i, n in enumerate(self.orders):
            out.append({
                "K": self.K, "n": n, "trials": self.trials,
                "lower_Linf_bits": float(self.l_inf_lower_bits[i]),
                "lower_se": float(self.upper_se[i] / LOG2),
                "upper_Linf_bits": float(self.l_inf_upper_bits[i]),
                "upper_se": float(self.lower_se[i] / LOG2),
                "ref_narula": ref_narula(),
                "ref_sqrt_bound": ref_sqrt_bound(self.K) if self.K > 1 else 0.0,
                "ref_asymptotic": -1.0,
            })
        return out


def _ladder_block(model_a, model_b, K, orders, size, rng, coupled):
    n_max = max(orders)
    a = model_a.sample(rng, (n_max, size, K))
    b = model_b.sample(rng, (n_max, size, K))
    b_out2 = np.sum(np.abs(model_b.sample(rng, (size, K))) ** 2, axis=-1)
    terms = _step_terms(a, b)
    if coupled:
        terms_hi = terms
    else:
        terms_hi = _step_terms(model_a.sample(rng, (n_max, size, K)),
                               model_b.sample(rng, (n_max, size, K)))
    lo = np.empty((len(orders), size))
    hi = np.empty((len(orders), size))
    for i, n in enumerate(orders):
        # order n uses the last n maps, so the ladder is pathwise monotone in n
        e0 = np.zeros(size)
        einf = np.full(size, math.inf)
        for j in range(n_max - n, n_max):
            e0 = _apply(e0, terms[0][j], terms[1][j], terms[2][j], 0.0)
            einf = _apply(einf, terms_hi[0][j], terms_hi[1][j], terms_hi[2][j], 0.0)
        lo[i] = np.log((e0 + b_out2) / K)
        hi[i] = np.log((einf + b_out2) / K)
    return lo, hi


def bound_ladder(model_a: FadingModel, model_b: FadingModel, K: int, orders: Sequence[int] | int,
                 trials: int = 100_000, seed: int = 0, coupled: bool = True,
                 workers: int | None = 1) -> OffsetBoundLadder:
    """Offset bounds ``E log((e_n(0) + |b|^2)/K)`` and ``E log((e_n(inf) + |b|^2)/K)``.

    `orders` is a list of chain orders or an int ``n_max`` meaning
    ``1..n_max``.  ``b`` is a fresh K-vector independent of the chain.
    With `coupled`, both chains see the same draws; each order is built from
    the most recent maps (coupling from the past), which makes
    ``lower_n <= lower_{n+1} <= upper_{n+1} <= upper_n`` hold trial by trial.
    Trials are processed in blocks, block i drawing from stream (seed, i).
    """
    if isinstance(orders, int):
        orders = range(1, orders + 1)
    orders = tuple(int(n) for n in orders)
    if not orders or min(orders) < 1:
        raise ValueError("orders must be positive")
    if K < 1 or trials < 1:
        raise ValueError("K and trials must be positive")
    sizes = _streams.block_sizes(trials)
    parts = _streams.map_ordered(
        lambda i: _ladder_block(model_a, model_b, K, orders, sizes[i], _streams.stream(seed, i), coupled),
        len(sizes), workers)
    lo = np.concatenate([p[0] for p in parts], axis=1)
    hi = np.concatenate([p[1] for p in parts], axis=1)
    stats_lo = [_streams.mean_and_se(row) for row in lo]
    stats_hi = [_streams.mean_and_se(row) for row in hi]
    return OffsetBoundLadder(
        K=K, trials=trials, orders=orders,
        lower_nats=np.array([s[0] for s in stats_lo]), lower_se=np.array([s[1] for s in stats_lo]),
        upper_nats=np.array([s[0] for s in stats_hi]), upper_se=np.array([s[1] for s in stats_hi]),
    )


def offset_bounds(model_a: FadingModel, model_b: FadingModel, K: int, n: int,
                  trials: int = 100_000, seed: int = 0) -> OffsetBoundLadder:
    """Order-n bounds as a single-entry ladder."""
    return bound_ladder(model_a, model_b, K, [n], trials, seed)


def stationary_offset(model_a: FadingModel, model_b: FadingModel, K: int, burn_in: int = 10_000,
                      samples: int = 1_000_000, seed: int = 0, chains: int = 100,
                      delta: float = 0.0) -> tuple[float, float]:
    """Time average of ``log((e_n + |b_{n-1}|^2)/K)`` along the chain.

    The state is the pair ``(e_n, b_{n-1})``: each step records the
    functional, draws ``a_n``, moves ``e`` using ``(a_n, b_{n-1})`` and then
    draws ``b_n``.  `samples` recorded steps are split over `chains`
    independent chains (chain c uses stream (seed, c)), each discarding its
    first `burn_in` steps; the standard error comes from the spread of the
    per-chain averages.
    """
    if chains < 2:
        raise ValueError("need at least two chains for an error estimate")
    per_chain = -(-samples // chains)
    rngs = [_streams.stream(seed, c) for c in range(chains)]
    e = np.zeros(chains)
    b_prev = np.stack([model_b.sample(r, K) for r in rngs])
    acc = np.zeros(chains)
    total = burn_in + per_chain
    block = 1024
    for start in range(0, total, block):
        n = min(block, total - start)
        a_blk = np.stack([model_a.sample(r, (n, K)) for r in rngs], axis=1)
        b_blk = np.stack([model_b.sample(r, (n, K)) for r in rngs], axis=1)
        a2 = np.sum(np.abs(a_blk) ** 2, axis=-1)
        for j in range(n):
            b2 = np.sum(np.abs(b_prev) ** 2, axis=-1)
            if start + j >= burn_in:
                acc += np.log((e + b2) / K)
            s2 = sin_sq(a_blk[j], b_prev)
            e = delta + a2[j] * (e + b2 * s2) / (e + b2)
            b_prev = b_blk[j]
    means = acc / per_chain
    return _streams.mean_and_se(means)


@dataclass(frozen=True)
class TdmaOffset:
    offset_nats: float  # lim C(P) - log P

    @property
    def l_inf_bits(self) -> float:
        return -self.offset_nats / LOG2

    @property
    def l_inf_db(self) -> float:
        # 3 dB times the bit-domain offset
        return 10 * math.log10(2) * self.l_inf_bits


def high_snr_offset_tdma(model_a: FadingModel, model_b: FadingModel) -> TdmaOffset:
    """``2 max(E log|a|, E log|b|)``: the K = 1 limit of ``C(P) - log P``."""
    ea = model_a.moments().e_log_abs
    eb = model_b.moments().e_log_abs
    return TdmaOffset(2 * max(ea, eb))
