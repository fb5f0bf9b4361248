"""Fourier helpers on the periodic spatial grid."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grid import SpatialGrid


class Wavenumbers:
    def __init__(self, grid: SpatialGrid):
        n, d = grid.cells_per_axis, grid.dim
        k1 = 2 * np.pi / grid.domain_length * np.fft.fftfreq(n, d=1.0 / n)
        self.k = np.stack(np.meshgrid(*([k1] * d), indexing="ij"))
        self.k_sq = np.sum(self.k**2, axis=0)
        inv = np.zeros_like(self.k_sq)
        nz = self.k_sq > 0
        inv[nz] = 1.0 / self.k_sq[nz]
        self.inv_k_sq = inv
        # derivative symbol with the Nyquist mode removed so real fields stay real
        nyq = np.abs(np.fft.fftfreq(n, d=1.0 / n)) == n // 2
        kd = self.k.copy()
        for i in range(d):
            sl = [slice(None)] * d
            sl[i] = nyq
            kd[i][tuple(sl)] = 0.0
        self.k_deriv = kd
        kd_sq = np.sum(kd**2, axis=0)
        self.inv_kd_sq = np.where(kd_sq > 0, 1.0 / np.where(kd_sq > 0, kd_sq, 1.0), 0.0)
        kmax = n // 2
        idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        m1 = idx < (2.0 / 3.0) * kmax
        mask = np.ones((n,) * d, dtype=bool)
        for i in range(d):
            shape = [1] * d
            shape[i] = n
            mask &= m1.reshape(shape)
        self.dealias = mask


@lru_cache(maxsize=16)
def wavenumbers(grid: SpatialGrid) -> Wavenumbers:
    return Wavenumbers(grid)


def fft(u: np.ndarray, d: int) -> np.ndarray:
    return np.fft.fftn(u, axes=tuple(range(u.ndim - d, u.ndim)))


def ifft(u_hat: np.ndarray, d: int) -> np.ndarray:
    return np.fft.ifftn(u_hat, axes=tuple(range(u_hat.ndim - d, u_hat.ndim))).real


def project_hat(u_hat: np.ndarray, wn: Wavenumbers) -> np.ndarray:
    """Leray projection in Fourier space: remove the component along k.

    Uses the derivative symbol, so Nyquist modes (which real fields cannot
    differentiate) are left alone and the projection stays idempotent.
    """
    k_dot_u = np.sum(wn.k_deriv * u_hat, axis=0)
    return u_hat - wn.k_deriv * (k_dot_u * wn.inv_kd_sq)


def gradient(u: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Spectral gradient of a vector field: result[i, j] = d u_i / d x_j."""
    wn = wavenumbers(grid)
    d = grid.dim
    u_hat = fft(u, d)
    return np.stack([ifft(1j * wn.k_deriv[j] * u_hat, d) for j in range(d)], axis=1)


def divergence_hat(u_hat: np.ndarray, wn: Wavenumbers) -> np.ndarray:
    return np.sum(1j * wn.k_deriv * u_hat, axis=0)
