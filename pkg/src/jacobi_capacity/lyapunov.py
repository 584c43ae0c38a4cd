"""Eigenvector recurrence, 2x2 transfer matrices and the top Lyapunov exponent.

For a spectral parameter ``lam < 0`` the sequence ``x_0 = 0``, ``x_1 = 1``::

    x_{n+1} = ((lam - |a_n|^2 - |b_n|^2) x_n - conj(<a_n; b_{n-1}>) x_{n-1}) / <a_{n+1}; b_n>

vanishes at ``n = M + 1`` exactly on the spectrum of ``H_M H_M^+``.  With
``lam = -1/rho`` this gives, per realisation,

    (1/M) log det G_M = log rho + (1/M) log|x_{M+1}| + (1/M) sum_i log|<a_{i+1}; b_i>|.

Gain arrays follow one convention throughout: ``a[..., i, :]`` is
``a_{i+1}`` and ``b[..., i, :]`` is ``b_i`` when a ``b_0`` row is present
(transfer products) or ``b_{i+1}`` when it is not (the scalar recurrence).
"""

from __future__ import annotations

import math

import numpy as np

from . import _streams
from .channel import inner
from .fading import FadingModel

CSV_FIELDS = ("lambda", "M", "reps", "gamma_hat", "se")
BOUND_CSV_FIELDS = ("lambda", "k", "trials", "upper_bound", "se")


class ZeroGainError(ArithmeticError):
    """A coupling ``<a_{n+1}; b_n>`` is exactly zero (a probability-zero draw)."""


def _check_lambda(lam: float) -> None:
    if not lam < 0:
        raise ValueError(f"lambda must be negative, got {lam}")


def _as_vectors(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return x[..., None] if x.ndim == 1 else x


def recurrence_logx_gains(a: np.ndarray, b: np.ndarray, lam: float) -> tuple:
    """Run the recurrence on given gains.

    `a` holds ``a_1..a_{M+1}`` (shape ``(..., M+1, K)``), `b` holds
    ``b_1..b_M`` (shape ``(..., M, K)``).  Scalar-per-cell input (K = 1) may
    drop the last axis.  Returns ``(log|x_{M+1}|, sum_{i=1}^M log|<a_{i+1}; b_i>|)``.
    """
    _check_lambda(lam)
    a = _as_vectors(a)
    b = _as_vectors(b)
    M = b.shape[-2]
    if a.shape[-2] != M + 1:
        raise ValueError("need one more a-row than b-rows")
    couple = inner(a[..., 1:, :], b)          # <a_{n+1}; b_n>, n = 1..M
    if np.any(couple == 0):
        raise ZeroGainError("zero coupling between adjacent cells")
    diag = (np.sum(np.abs(a[..., :M, :]) ** 2, axis=-1)
            + np.sum(np.abs(b) ** 2, axis=-1))  # |a_n|^2 + |b_n|^2
    back = np.conj(inner(a[..., 1:M, :], b[..., :M - 1, :]))  # conj<a_n; b_{n-1}>, n = 2..M
    batch = b.shape[:-2]
    prev = np.zeros(batch, dtype=complex)
    cur = np.ones(batch, dtype=complex)
    log_scale = np.zeros(batch)
    for n in range(M):
        new = (lam - diag[..., n]) * cur
        if n > 0:
            new = new - back[..., n - 1] * prev
        new = new / couple[..., n]
        scale = np.maximum(np.abs(new), np.abs(cur))
        prev, cur = cur / scale, new / scale
        log_scale = log_scale + np.log(scale)
    logx = log_scale + np.log(np.abs(cur))
    sumlog = np.sum(np.log(np.abs(couple)), axis=-1)
    if logx.ndim == 0:
        return float(logx), float(sumlog)
    return logx, sumlog


def _draw_windows(model_a, model_b, M, K, reps, seed, with_b0):
    rows_b = M + 1 if with_b0 else M
    a = np.empty((reps, M + 1, K), dtype=complex)
    b = np.empty((reps, rows_b, K), dtype=complex)
    for r in range(reps):
        rng = _streams.stream(seed, r)
        a[r] = model_a.sample(rng, (M + 1, K))
        b[r] = model_b.sample(rng, (rows_b, K))
    return a, b


def recurrence_logx(model_a: FadingModel, model_b: FadingModel, lam: float, M: int, seed: int = 0,
                    K: int = 1, reps: int | None = None):
    """Sample gains and run :func:`recurrence_logx_gains`.

    With `reps` given, returns arrays over independent replicas, replica r
    drawing from stream (seed, r); otherwise a single replica from (seed, 0).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    a, b = _draw_windows(model_a, model_b, M, K, 1 if reps is None else reps, seed, False)
    logx, sumlog = recurrence_logx_gains(a, b, lam)
    if reps is None:
        return float(logx[0]), float(sumlog[0])
    return logx, sumlog


def transfer_matrices(a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    """``g_1..g_M`` of shape ``(..., M, 2, 2)``.

    `a` holds ``a_1..a_{M+1}`` and `b` holds ``b_0..b_M``; ``g_n`` is::

        [[(lam - |a_n|^2 - |b_n|^2) / <a_{n+1}; b_n>, -conj<a_n; b_{n-1}> / <a_{n+1}; b_n>],
         [1, 0]]
    """
    _check_lambda(lam)
    a = _as_vectors(a)
    b = _as_vectors(b)
    M = a.shape[-2] - 1
    if b.shape[-2] != M + 1:
        raise ValueError("a and b must both have M + 1 rows")
    couple = inner(a[..., 1:, :], b[..., 1:, :])
    if np.any(couple == 0):
        raise ZeroGainError("zero coupling between adjacent cells")
    diag = np.sum(np.abs(a[..., :M, :]) ** 2, axis=-1) + np.sum(np.abs(b[..., 1:, :]) ** 2, axis=-1)
    back = np.conj(inner(a[..., :M, :], b[..., :M, :]))
    g = np.zeros(a.shape[:-2] + (M, 2, 2), dtype=complex)
    g[..., 0, 0] = (lam - diag) / couple
    g[..., 0, 1] = -back / couple
    g[..., 1, 0] = 1.0
    return g


def _matrix_norm(Q: np.ndarray, norm: str) -> np.ndarray:
    if norm == "spectral":
        return np.linalg.norm(Q, ord=2, axis=(-2, -1))
    if norm == "frobenius":
        return np.linalg.norm(Q, ord="fro", axis=(-2, -1))
    raise ValueError(f"unknown norm {norm!r}")


def log_product_norm(g: np.ndarray, norm: str = "spectral") -> np.ndarray:
    """``log ||g_M ... g_1||`` with per-step renormalisation (leading axes batch)."""
    M = g.shape[-3]
    batch = g.shape[:-3]
    q00 = np.ones(batch, dtype=complex)
    q01 = np.zeros(batch, dtype=complex)
    q10 = np.zeros(batch, dtype=complex)
    q11 = np.ones(batch, dtype=complex)
    log_scale = np.zeros(batch)
    for n in range(M):
        g00, g01 = g[..., n, 0, 0], g[..., n, 0, 1]
        # bottom row of g_n is (1, 0): new bottom row is the old top row
        n00 = g00 * q00 + g01 * q10
        n01 = g00 * q01 + g01 * q11
        q10, q11 = q00, q01
        q00, q01 = n00, n01
        scale = np.maximum.reduce([np.abs(q00), np.abs(q01), np.abs(q10), np.abs(q11)])
        q00, q01, q10, q11 = q00 / scale, q01 / scale, q10 / scale, q11 / scale
        log_scale = log_scale + np.log(scale)
    Q = np.stack([np.stack([q00, q01], -1), np.stack([q10, q11], -1)], -2)
    return log_scale + np.log(_matrix_norm(Q, norm))


def lyapunov_estimate(model_a: FadingModel, model_b: FadingModel, lam: float, M: int,
                      reps: int = 20, seed: int = 0, K: int = 1,
                      norm: str = "spectral") -> tuple[float, float]:
    """Mean and standard error over `reps` of ``(1/M) log ||g_M ... g_1||``."""
    _check_lambda(lam)
    a, b = _draw_windows(model_a, model_b, M, K, reps, seed, True)
    vals = log_product_norm(transfer_matrices(a, b, lam), norm) / M
    return _streams.mean_and_se(vals)


def lyapunov_upper_bound(model_a: FadingModel, model_b: FadingModel, lam: float, k: int,
                         trials: int = 100_000, seed: int = 0, K: int = 1) -> tuple[float, float]:
    """``(1/k) E log ||g_k ... g_1||`` over i.i.d. windows, with standard error.

    Sub-multiplicativity of the operator norm makes every k an upper bound
    on the top exponent, improving as k grows.
    """
    _check_lambda(lam)
    if k < 1:
        raise ValueError("k must be >= 1")
    sizes = _streams.block_sizes(trials)
    vals = []
    for i, size in enumerate(sizes):
        rng = _streams.stream(seed, i)
        a = model_a.sample(rng, (size, k + 1, K))
        b = model_b.sample(rng, (size, k + 1, K))
        vals.append(log_product_norm(transfer_matrices(a, b, lam)) / k)
    return _streams.mean_and_se(np.concatenate(vals))


def thouless_capacity(a: np.ndarray, b: np.ndarray, rho: float) -> float:
    """``(1/M) log det G_M`` from the recurrence at ``lam = -1/rho``.

    Takes ``a_1..a_{M+1}`` and ``b_1..b_M``; ``a_{M+1}`` cancels out.
    """
    logx, sumlog = recurrence_logx_gains(a, b, -1.0 / rho)
    M = np.asarray(b).shape[0]
    return math.log(rho) + (logx + sumlog) / M
