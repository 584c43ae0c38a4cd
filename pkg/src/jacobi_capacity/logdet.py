"""Log-determinants of Hermitian Jacobi matrices and the Monte Carlo capacity.

Two independent algorithms compute ``log det G``:

* :func:`logdet_ldl` sums the logs of the LDL^+ pivots
  ``d_m = G[m,m] - |G[m-1,m]|^2 / d_{m-1}``;
* :func:`logdet_recursion` runs the three-term determinant recursion of the
  leading principal minors, renormalising the pair of running minors after
  every step so that nothing overflows.

Both accept a batch of matrices (leading axes of ``diag``/``offdiag``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _streams
from .channel import TridiagonalHermitian, gram_tridiagonal, sample_channel, tridiagonal_entries
from .fading import FadingModel

CSV_FIELDS = ("M", "K", "P", "protocol", "trials", "mean_nats", "std_error", "seed")

# trials stacked per vectorised LDL pass
_TRIAL_BATCH = 32


class PivotBreakdownError(ArithmeticError):
    """An LDL pivot came out non-positive; the input is not positive definite."""


class Protocol(str, Enum):
    TDMA = "TDMA"
    WB = "WB"


def _unpack(G):
    if isinstance(G, TridiagonalHermitian):
        return G.diag, G.offdiag
    diag, off = G
    return np.asarray(diag, dtype=float), np.asarray(off, dtype=complex)


def _scalarise(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


def ldl_pivots(G) -> np.ndarray:
    """Pivots ``d_1..d_M`` of ``G = L D L^+`` (shape of ``diag``)."""
    diag, off = _unpack(G)
    M = diag.shape[-1]
    off_sq = np.abs(off) ** 2
    d = np.empty_like(diag)
    d[..., 0] = diag[..., 0]
    for m in range(1, M):
        d[..., m] = diag[..., m] - off_sq[..., m - 1] / d[..., m - 1]
    return d


def logdet_ldl(G):
    """``log det G`` in nats via the LDL pivots."""
    d = ldl_pivots(G)
    if not np.all(d > 0):
        bad = np.argwhere(~(d > 0))[0]
        raise PivotBreakdownError(f"non-positive LDL pivot at index {tuple(bad)}")
    return _scalarise(np.sum(np.log(d), axis=-1))


def logdet_recursion(G):
    """``log det G`` via ``det G_m = G[m,m] det G_{m-1} - |G[m,m-1]|^2 det G_{m-2}``."""
    diag, off = _unpack(G)
    M = diag.shape[-1]
    off_sq = np.abs(off) ** 2
    batch = diag.shape[:-1]
    prev = np.zeros(batch)   # det G_{m-2}, scaled
    cur = np.ones(batch)     # det G_{m-1}, scaled
    log_scale = np.zeros(batch)
    for m in range(M):
        new = diag[..., m] * cur
        if m > 0:
            new = new - off_sq[..., m - 1] * prev
        scale = np.maximum(np.abs(new), np.abs(cur))
        prev = cur / scale
        cur = new / scale
        log_scale = log_scale + np.log(scale)
    if not np.all(cur > 0):
        raise PivotBreakdownError("determinant recursion produced a non-positive minor")
    return _scalarise(log_scale + np.log(cur))


def logdet_dense(G) -> float:
    """Reference ``log det`` from a dense LU factorisation (small M only)."""
    sign, val = np.linalg.slogdet(G.dense() if isinstance(G, TridiagonalHermitian) else G)
    if sign.real <= 0:
        raise PivotBreakdownError("dense determinant is not positive")
    return float(val)


def hadamard_bound(G):
    """``sum log G[m,m]``, an upper bound on ``log det G`` for positive definite G."""
    diag, _ = _unpack(G)
    return _scalarise(np.sum(np.log(diag), axis=-1))


@dataclass(frozen=True)
class CapacityEstimate:
    """Per-cell sum-rate estimate in nats per channel use."""

    mean_nats: float
    std_error: float
    trials: int
    M: int
    K: int
    P: float
    protocol: Protocol
    seed: int = 0
    samples: np.ndarray | None = field(default=None, compare=False, repr=False)

    def row(self) -> dict:
        return {"M": self.M, "K": self.K, "P": self.P, "protocol": self.protocol.value,
                "trials": self.trials, "mean_nats": self.mean_nats,
                "std_error": self.std_error, "seed": self.seed}


def capacity_samples(model_a: FadingModel, model_b: FadingModel, M: int, K: int, rho: float,
                     trials: int, seed: int, workers: int | None = 1) -> np.ndarray:
    """``(1/M) log det G_M`` for trials ``0..trials-1``; trial t uses stream (seed, t)."""
    starts = list(range(0, trials, _TRIAL_BATCH))

    def run(i):
        idx = range(starts[i], min(starts[i] + _TRIAL_BATCH, trials))
        a = np.empty((len(idx), M, K), dtype=complex)
        b = np.empty_like(a)
        for j, t in enumerate(idx):
            ch = sample_channel(model_a, model_b, M, K, _streams.stream(seed, t))
            a[j], b[j] = ch.a, ch.b
        diag, off = tridiagonal_entries(a, b, rho)
        return np.atleast_1d(logdet_ldl((diag, off))) / M

    return np.concatenate(_streams.map_ordered(run, len(starts), workers))


def capacity_mc(model_a: FadingModel, model_b: FadingModel, M: int, K: int, P: float,
                protocol: Protocol | str = Protocol.WB, trials: int = 1000, seed: int = 0,
                workers: int | None = 1) -> CapacityEstimate:
    """Monte Carlo estimate of ``C_M(P) = (1/M) E log det(I + rho H H^+)``.

    WB spreads the cell power over all K users (``rho = P/K``); TDMA serves
    one user per cell at full power, which is the ``K = 1`` channel with
    ``rho = P``.
    """
    protocol = Protocol(protocol)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if P < 0:
        raise ValueError("P must be non-negative")
    k_eff = 1 if protocol is Protocol.TDMA else K
    if P == 0:
        return CapacityEstimate(0.0, 0.0, trials, M, k_eff, P, protocol, seed, np.zeros(trials))
    vals = capacity_samples(model_a, model_b, M, k_eff, P / k_eff, trials, seed, workers)
    mean, se = _streams.mean_and_se(vals)
    return CapacityEstimate(mean, se, trials, M, k_eff, P, protocol, seed, vals)


def capacity_bounds_mc(model_a: FadingModel, model_b: FadingModel, K: int, P: float,
                       samples: int = 100_000, seed: int = 0) -> dict:
    """Single-letter bounds on the limiting capacity by direct Monte Carlo.

    ``lower = max(E log(1 + P|a|^2/K), E log(1 + P|b|^2/K))`` and
    ``upper = E log(1 + P(|a|^2 + |b|^2)/K)``, with independent K-vectors.
    """
    rng = _streams.stream(seed, 0)
    a2 = np.sum(np.abs(model_a.sample(rng, (samples, K))) ** 2, axis=-1)
    b2 = np.sum(np.abs(model_b.sample(rng, (samples, K))) ** 2, axis=-1)
    la, sea = _streams.mean_and_se(np.log1p(P * a2 / K))
    lb, seb = _streams.mean_and_se(np.log1p(P * b2 / K))
    up, seu = _streams.mean_and_se(np.log1p(P * (a2 + b2) / K))
    lower, lower_se = (la, sea) if la >= lb else (lb, seb)
    return {"lower": lower, "lower_se": lower_se, "upper": up, "upper_se": seu}


def realization_capacity(ch, rho: float) -> float:
    """``(1/M) log det G_M`` for one realisation."""
    return logdet_ldl(gram_tridiagonal(ch, rho)) / ch.M
