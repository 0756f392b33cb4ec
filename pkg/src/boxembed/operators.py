"""Periodic operators defined by Fourier symbols, and their truncated kernels.

An x-independent symbol ``a(k)`` acts on grid fields as the multiplier
``F^{-1} diag[a(k)] F``.  Its truncated kernel

    k^m_a(x, y) = sum_{k in Z^2_m} a(k) e_k(x) e_k(-y)

can be evaluated at arbitrary points, on or off the grid.  With the 2D basis
``e_k = e^{ik.x}/(2 pi)`` the identity symbol yields ``(m/2pi)^2`` on the
diagonal of the grid, i.e. the discrete identity divided by the node weight.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral_core import TWO_PI, Grid2, GridField, forward, inverse


@dataclass(frozen=True)
class Symbol:
    """Fourier multiplier ``a(k)``.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(K1, K2)`` returning the multiplier on broadcast integer
        frequency arrays.  When ``depends_on_x`` is true it is called as
        ``evaluator(K1, K2, x)`` for a single point ``x``; such symbols can only
        be used with :func:`kernel_eval`.
    name : str
        Label used in reports.
    """

    evaluator: Callable
    name: str = "symbol"
    depends_on_x: bool = False

    def __call__(self, K1, K2, x=None):
        K1 = np.asarray(K1, dtype=float)
        K2 = np.asarray(K2, dtype=float)
        if self.depends_on_x:
            if x is None:
                raise ValueError(f"symbol {self.name!r} needs a point x")
            out = self.evaluator(K1, K2, x)
        else:
            out = self.evaluator(K1, K2)
        return np.broadcast_to(np.asarray(out, dtype=complex), np.broadcast(K1, K2).shape)

    def on_grid(self, grid: Grid2) -> np.ndarray:
        """Multiplier on ``Z^2_m`` in FFT-natural order."""
        if self.depends_on_x:
            raise ValueError("x-dependent symbols cannot be applied by FFT diagonalization")
        vals = self(*grid.wavenumbers)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"symbol {self.name!r} is not finite on Z^2_{grid.m}")
        return vals


def _safe_reciprocal(d: np.ndarray) -> np.ndarray:
    out = np.zeros_like(d, dtype=float)
    nz = d != 0
    out[nz] = 1.0 / d[nz]
    return out


def identity_symbol() -> Symbol:
    return Symbol(lambda K1, K2: np.ones(np.broadcast(K1, K2).shape), "identity")


def laplacian_symbol() -> Symbol:
    """Symbol ``|k|^2`` of ``-Delta``."""
    return Symbol(lambda K1, K2: K1**2 + K2**2, "-laplace")


def green_dirichlet_symbol() -> Symbol:
    """``1/|k|^2`` with the value 0 at ``k = 0`` (inverse of ``-Delta`` on mean-zero data)."""
    return Symbol(lambda K1, K2: _safe_reciprocal(K1**2 + K2**2), "G_D")


def green_neumann_symbol() -> Symbol:
    """``1/(1 + |k|^2)``, the inverse of ``1 - Delta``."""
    return Symbol(lambda K1, K2: 1.0 / (1.0 + K1**2 + K2**2), "G_N")


def apply_symbol_coeffs(sym: Symbol, grid: Grid2, coeffs: np.ndarray) -> np.ndarray:
    return sym.on_grid(grid) * coeffs


def apply_symbol(sym: Symbol, u: GridField) -> GridField:
    """``F^{-1} diag[a(k)] F u``."""
    c = forward(u.values, u.grid)
    return GridField(u.grid, inverse(sym.on_grid(u.grid) * c, u.grid))


@dataclass(frozen=True)
class KernelEvaluator:
    symbol: Symbol
    grid: Grid2


def _kernel_phases(grid: Grid2, t: float) -> np.ndarray:
    # The index -m/2 carries phase +m/2, which is what the discrete pairing of
    # two grid deltas produces; the symbol itself is still evaluated at -m/2.
    f = grid.freqs.copy()
    f[grid.m // 2] = grid.m // 2
    return np.exp(1j * f * t)


def kernel_eval(ke: KernelEvaluator, x, y) -> complex:
    """Truncated kernel ``sum_k a(k) e_k(x) e_k(-y)`` by direct summation.

    When ``x`` is a grid node this agrees to rounding with
    ``(a(D) delta_y | delta_x)_q``, the discrete pairing with grid deltas, for
    any ``y``.  Off the grid the two differ only through the Nyquist terms.
    """
    grid = ke.grid
    x = grid.wrap(x)
    y = grid.wrap(y)
    K1, K2 = grid.wavenumbers
    a = ke.symbol(K1, K2, x) if ke.symbol.depends_on_x else ke.symbol.on_grid(grid)
    p1 = _kernel_phases(grid, x[0] - y[0])
    p2 = _kernel_phases(grid, x[1] - y[1])
    return complex(p1 @ a @ p2) / TWO_PI**2


def translate(u: GridField, shift) -> GridField:
    """Cyclic shift ``u(. - v)`` with ``v = h * shift`` (integer grid offsets)."""
    s1, s2 = (int(s) for s in shift)
    return GridField(u.grid, np.roll(u.values, (s1, s2), axis=(0, 1)))

