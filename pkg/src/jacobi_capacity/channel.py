"""Soft-handoff channel realisations and the tridiagonal matrix ``I + rho H H^+``.

Cell ``m`` is heard by base station ``m`` through the K-vector ``a_m`` and
base station ``m`` also hears the users of cell ``m+1`` through ``b_m``, so
``H_M`` is ``M x K(M+1)`` with two nonzero block diagonals.  Only the
``2M - 1`` tridiagonal scalars of the Gram matrix are ever stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fading import FadingModel


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Gains ``a[m, k]`` and ``b[m, k]`` for ``m < M`` cells and ``k < K`` users."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        if a.ndim != 2 or a.shape != b.shape:
            raise ValueError(f"a and b must both be M x K, got {a.shape} and {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def M(self) -> int:
        return self.a.shape[0]

    @property
    def K(self) -> int:
        return self.a.shape[1]

    def head(self, M: int) -> "ChannelRealization":
        """The first `M` cells."""
        return ChannelRealization(self.a[:M], self.b[:M])

    def transfer_matrix(self) -> np.ndarray:
        """Dense ``H_M`` (M x K(M+1)).  Intended for small-M checks only."""
        M, K = self.M, self.K
        H = np.zeros((M, K * (M + 1)), dtype=complex)
        for m in range(M):
            H[m, m * K:(m + 1) * K] = self.a[m]
            H[m, (m + 1) * K:(m + 2) * K] = self.b[m]
        return H


@dataclass(frozen=True, eq=False)
class TridiagonalHermitian:
    """``diag`` (M reals) and ``offdiag`` (M-1 complex, the super-diagonal).

    The sub-diagonal is the conjugate of ``offdiag``.  Leading axes, if any,
    index independent matrices of the same size.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    rho: float = 1.0
    P: float = 1.0

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        o = np.asarray(self.offdiag, dtype=complex)
        if d.ndim < 1 or o.shape[:-1] != d.shape[:-1] or o.shape[-1] != d.shape[-1] - 1:
            raise ValueError(f"offdiag must have one entry fewer than diag: {d.shape} vs {o.shape}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", o)

    @property
    def M(self) -> int:
        return self.diag.shape[-1]

    def dense(self) -> np.ndarray:
        """Dense Hermitian matrix (single matrix only)."""
        if self.diag.ndim != 1:
            raise ValueError("dense() needs a single matrix")
        G = np.diag(self.diag.astype(complex))
        idx = np.arange(self.M - 1)
        G[idx, idx + 1] = self.offdiag
        G[idx + 1, idx] = np.conj(self.offdiag)
        return G


def sample_channel(model_a: FadingModel, model_b: FadingModel, M: int, K: int,
                   rng: np.random.Generator) -> ChannelRealization:
    """Draw all ``MK`` entries of ``a`` and of ``b`` i.i.d. from their models."""
    if M < 1 or K < 1:
        raise ValueError("M and K must be positive")
    a = model_a.sample(rng, (M, K))
    b = model_b.sample(rng, (M, K))
    return ChannelRealization(a, b)


def inner(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``<u; v> = sum_l conj(u_l) v_l`` over the last axis."""
    return np.sum(np.conj(u) * v, axis=-1)


def tridiagonal_entries(a: np.ndarray, b: np.ndarray, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Raw ``(diag, offdiag)`` arrays for gains of shape ``(..., M, K)``."""
    diag = 1.0 + rho * (np.sum(np.abs(a) ** 2, axis=-1) + np.sum(np.abs(b) ** 2, axis=-1))
    off = rho * inner(a[..., 1:, :], b[..., :-1, :])
    return diag, off


def gram_tridiagonal(ch: ChannelRealization, rho: float, P: float | None = None) -> TridiagonalHermitian:
    """``G_M = I + rho H_M H_M^+`` in tridiagonal form.

    ``diag[m] = 1 + rho(|a_m|^2 + |b_m|^2)`` and
    ``offdiag[m] = rho <a_{m+1}; b_m>``.
    """
    if rho < 0:
        raise ValueError("rho must be non-negative")
    diag, off = tridiagonal_entries(ch.a, ch.b, rho)
    return TridiagonalHermitian(diag, off, rho=rho, P=rho * ch.K if P is None else P)


def dense_gram(ch: ChannelRealization, rho: float) -> np.ndarray:
    """``I + rho H H^+`` assembled from the dense transfer matrix."""
    H = ch.transfer_matrix()
    return np.eye(ch.M) + rho * H @ H.conj().T


def save_realization(path, ch: ChannelRealization) -> None:
    """Write ``a`` then ``b`` (row-major) as little-endian float64 re/im pairs."""
    buf = np.concatenate([ch.a.ravel(), ch.b.ravel()])
    inter = np.empty(2 * buf.size, dtype="<f8")
    inter[0::2] = buf.real
    inter[1::2] = buf.imag
    inter.tofile(path)


def load_realization(path, M: int, K: int) -> ChannelRealization:
    raw = np.fromfile(path, dtype="<f8")
    if raw.size != 4 * M * K:
        raise ValueError(f"{path}: expected {4 * M * K} doubles, found {raw.size}")
    z = raw[0::2] + 1j * raw[1::2]
    return ChannelRealization(z[:M * K].reshape(M, K), z[M * K:].reshape(M, K))
