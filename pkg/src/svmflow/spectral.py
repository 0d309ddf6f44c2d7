"""Periodic 2D spectral grid, discrete transforms, and grid inner products.

Everything lives on the unit square [0, 1]^2 sampled on an n-by-n uniform
mesh with node (i, j) at (i*h, j*h), h = 1/n, and periodic wrap-around.
The forward transform carries the 1/n^2 normalization, so the (0, 0)
coefficient of a field equals its mean and mass conservation reduces to a
single-coefficient check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic n x n grid on [0, 1]^2 with precomputed wavenumbers.

    n must be a power of two, at least 8.  ``kx``/``ky`` hold the integer
    mode number of each FFT bin (values in -n/2 .. n/2-1), ``k2`` the
    Laplacian symbol (2 pi kx)^2 + (2 pi ky)^2.  A 2/3-rule mask is
    precomputed; nonlinear terms are truncated with it only when
    ``dealias`` is set (off by default, and off in every benchmark run so
    all schemes share one spatial discretization).
    """

    n: int
    dealias: bool = False

    def __post_init__(self):
        n = self.n
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        modes = np.fft.fftfreq(n, d=1.0 / n)  # integer mode numbers as floats
        kx, ky = np.meshgrid(modes, modes, indexing="ij")
        kx.setflags(write=False)
        ky.setflags(write=False)
        k2 = TWO_PI**2 * (kx * kx + ky * ky)
        k2.setflags(write=False)
        kcut = (2.0 / 3.0) * (n // 2)
        mask = (np.abs(kx) < kcut) & (np.abs(ky) < kcut)
        mask.setflags(write=False)
        object.__setattr__(self, "kx", kx)
        object.__setattr__(self, "ky", ky)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "dealias_mask", mask)

    @property
    def h(self) -> float:
        # exact: n is a power of two
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def nodes(self):
        """Coordinate arrays (x, y), each n x n, node (i, j) at (i*h, j*h)."""
        c = np.arange(self.n) * self.h
        return np.meshgrid(c, c, indexing="ij")


def _check_shape(grid: Grid2D, a: np.ndarray, what: str) -> None:
    if a.shape != grid.shape:
        raise ValueError(f"{what} has shape {a.shape}, grid expects {grid.shape}")


def fft_forward(grid: Grid2D, values: np.ndarray) -> np.ndarray:
    """Nodal values -> Fourier coefficients with the 1/n^2 normalization."""
    _check_shape(grid, values, "field")
    return np.fft.fft2(values, norm="forward")


def fft_inverse(grid: Grid2D, coeffs: np.ndarray) -> np.ndarray:
    """Fourier coefficients -> real nodal values (imaginary part dropped)."""
    _check_shape(grid, coeffs, "coefficient table")
    return np.fft.ifft2(coeffs, norm="forward").real


def apply_symbol(grid: Grid2D, coeffs: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Multiply coefficients mode-wise by a real per-mode symbol table."""
    _check_shape(grid, coeffs, "coefficient table")
    _check_shape(grid, np.asarray(symbol), "symbol table")
    return coeffs * symbol


def dealias(grid: Grid2D, coeffs: np.ndarray) -> np.ndarray:
    """Zero all modes outside the 2/3-rule box."""
    _check_shape(grid, coeffs, "coefficient table")
    return coeffs * grid.dealias_mask


def inner_product(u: np.ndarray, v: np.ndarray) -> float:
    """Discrete L^2 inner product (u, v)_h = h^2 sum_ij u_ij v_ij."""
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    # h^2 = 1/n^2 on the unit square, so this is just the average of u*v
    return float(np.mean(u * v))


def mean(u: np.ndarray) -> float:
    """Grid average (u, 1)_h; equals the (0, 0) Fourier coefficient."""
    return float(np.mean(u))


def spectral_abs2(coeffs: np.ndarray) -> np.ndarray:
    """|coeffs|^2 without the intermediate sqrt of np.abs."""
    return coeffs.real**2 + coeffs.imag**2
