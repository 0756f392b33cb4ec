"""Uniform grid on the periodicity box B = [-pi, pi)^2 and its discrete Fourier transform.

Normalization follows the 2D orthonormal basis ``e_k(x) = exp(i k.x) / (2 pi)``
together with the trapezoidal weights ``(2 pi / m)^2``.  With that choice the
discrete transform is

    F_m(u)_k = sum_j u_j conj(e_k(x_j)) q_j,

so ``F_m(e_k)`` is the indicator of ``k`` and Parseval holds exactly.
Coefficient arrays are stored in FFT-natural order; public accessors take the
signed index ``k in {-m/2, ..., m/2 - 1}^2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class GridMismatchError(ValueError):
    """Raised when fields living on different grids are combined."""


@dataclass(frozen=True)
class Grid2:
    """Uniform ``m x m`` grid on ``[-pi, pi)^2`` with trapezoidal weights."""

    m: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise TypeError(f"grid size must be an integer, got {self.m!r}")
        if self.m < 4 or self.m % 2:
            raise ValueError(f"grid size must be even and >= 4, got m={self.m}")

    @property
    def h(self) -> float:
        return TWO_PI / self.m

    @property
    def weight(self) -> float:
        """Quadrature weight of a single node, ``(2 pi / m)^2``."""
        return self.h**2

    @cached_property
    def axis(self) -> np.ndarray:
        return -np.pi + self.h * np.arange(self.m)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.full((self.m, self.m), self.weight)

    @cached_property
    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays ``(X1, X2)`` indexed ``[j1, j2]``."""
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    @cached_property
    def freqs(self) -> np.ndarray:
        """Signed integer frequencies in FFT-natural order."""
        return np.fft.fftfreq(self.m, 1.0 / self.m)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Frequency arrays ``(K1, K2)`` in FFT-natural order."""
        return np.meshgrid(self.freqs, self.freqs, indexing="ij")

    @cached_property
    def _sign(self) -> np.ndarray:
        # e^{i k pi} for the shift of the grid origin to -pi
        s = np.where(self.freqs.astype(int) % 2 == 0, 1.0, -1.0)
        return np.outer(s, s)

    def index(self, k: tuple[int, int]) -> tuple[int, int]:
        """Storage position of signed frequency ``k``."""
        half = self.m // 2
        k1, k2 = int(k[0]), int(k[1])
        if not (-half <= k1 < half and -half <= k2 < half):
            raise IndexError(f"frequency {k} outside Z^2_m for m={self.m}")
        return k1 % self.m, k2 % self.m

    def wrap(self, x) -> np.ndarray:
        """Map points into ``[-pi, pi)`` by periodicity."""
        return np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi

    def nearest_index(self, x) -> np.ndarray:
        """Integer node index nearest to each coordinate of ``x`` (cyclic)."""
        x = np.asarray(x, dtype=float)
        return np.mod(np.rint((x + np.pi) / self.h).astype(int), self.m)


@dataclass
class GridField:
    """Samples of a function on a :class:`Grid2`, shape ``(m, m)``."""

    grid: Grid2
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.m, self.grid.m):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid m={self.grid.m}"
            )

    @classmethod
    def from_function(cls, grid: Grid2, func) -> "GridField":
        X1, X2 = grid.points
        return cls(grid, np.broadcast_to(func(X1, X2), X1.shape).copy())

    @classmethod
    def constant(cls, grid: Grid2, c=1.0) -> "GridField":
        return cls(grid, np.full((grid.m, grid.m), c))

    def _check(self, other):
        if isinstance(other, GridField) and other.grid != self.grid:
            raise GridMismatchError(f"m={self.grid.m} vs m={other.grid.m}")

    def __add__(self, other):
        self._check(other)
        o = other.values if isinstance(other, GridField) else other
        return GridField(self.grid, self.values + o)

    def __sub__(self, other):
        self._check(other)
        o = other.values if isinstance(other, GridField) else other
        return GridField(self.grid, self.values - o)

    def __mul__(self, other):
        self._check(other)
        o = other.values if isinstance(other, GridField) else other
        return GridField(self.grid, self.values * o)

    __rmul__ = __mul__

    def conj(self) -> "GridField":
        return GridField(self.grid, np.conj(self.values))


@dataclass
class SpectralField:
    """Discrete Fourier coefficients on ``Z^2_m`` (FFT-natural storage)."""

    grid: Grid2
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.grid.m, self.grid.m):
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid m={self.grid.m}"
            )

    def __getitem__(self, k):
        return self.coeffs[self.grid.index(k)]

    def signed(self) -> np.ndarray:
        """Coefficients arranged with ``k = (-m/2, -m/2)`` at ``[0, 0]``."""
        return np.fft.fftshift(self.coeffs)

    def evaluate(self, points) -> np.ndarray:
        """Trigonometric interpolant ``sum_k c_k e_k(x)`` at arbitrary points."""
        return evaluate_coeffs(self.grid, self.coeffs, points)


def make_grid(m: int) -> Grid2:
    return Grid2(m)


def _same_grid(u, v):
    if u.grid != v.grid:
        raise GridMismatchError(f"m={u.grid.m} vs m={v.grid.m}")


def pairing(u: GridField, v: GridField) -> complex:
    """Discrete duality pairing ``sum_j u_j v_j q_j`` (no conjugation)."""
    _same_grid(u, v)
    return complex(np.sum(u.values * v.values) * u.grid.weight)


def inner(u: GridField, v: GridField) -> complex:
    """Weighted inner product ``(u | v)_q = pairing(u, conj v)``."""
    return pairing(u, v.conj())


def forward(values: np.ndarray, grid: Grid2) -> np.ndarray:
    """Raw-array version of :func:`dft_forward` (natural order out)."""
    return (TWO_PI / grid.m**2) * grid._sign * np.fft.fft2(values)


def inverse(coeffs: np.ndarray, grid: Grid2) -> np.ndarray:
    """Raw-array version of :func:`dft_inverse`."""
    return np.fft.ifft2(coeffs * grid._sign) * (grid.m**2 / TWO_PI)


def dft_forward(u: GridField) -> SpectralField:
    return SpectralField(u.grid, forward(u.values, u.grid))


def dft_inverse(c: SpectralField) -> GridField:
    return GridField(c.grid, inverse(c.coeffs, c.grid))


def eval_basis(k, x) -> complex:
    """``e_k(x) = exp(i k.x) / (2 pi)``."""
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.exp(1j * np.dot(k, x)) / TWO_PI


def basis_field(grid: Grid2, k) -> GridField:
    """Grid samples ``e^m_k`` of the basis function with signed index ``k``."""
    X1, X2 = grid.points
    return GridField(grid, np.exp(1j * (k[0] * X1 + k[1] * X2)) / TWO_PI)


def phase_tables(grid: Grid2, points) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis factors of ``e_k(y)`` for each point, shapes ``(n, m)``.

    ``e_k(y_j) = A1[j, k1] * A2[j, k2]`` with the ``1/(2 pi)`` carried by ``A1``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    A1 = np.exp(1j * np.outer(P[:, 0], grid.freqs)) / TWO_PI
    A2 = np.exp(1j * np.outer(P[:, 1], grid.freqs))
    return A1, A2


def evaluate_coeffs(grid: Grid2, coeffs: np.ndarray, points) -> np.ndarray:
    """``sum_k c_k e_k(y)`` at each point by factorized direct summation.

    Equal to the discrete pairing of the grid delta at ``y`` with the field.
    """
    A1, A2 = phase_tables(grid, points)
    return np.einsum("jk,jk->j", A1 @ coeffs, A2)
