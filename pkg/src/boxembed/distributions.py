"""Spectral projections of the distributions and test functions the solver uses.

A distribution ``u`` is represented by its coefficients ``u~_k = <u, e_k>`` on
``Z^2_m``; its action on a grid field follows the generalized Parseval identity
``<u, phi> ~ sum_k u~_k phi^_k``.  Point deltas and their derivatives are built
from per-axis factors, which is also how boundary row functionals are applied
in bulk (:class:`PointFunctionals`).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .spectral_core import TWO_PI, Grid2, GridField, GridMismatchError, SpectralField, forward


class TestFunctionKind(str, enum.Enum):
    __test__ = False  # not a pytest class

    SYMMETRIC = "sym"
    NORMAL_DERIVATIVE = "nderiv"
    DIRAC = "dirac"


class PaddingStyle(str, enum.Enum):
    GAUSSIAN_CORNER = "gaussian_corner"
    TANH_RADIAL = "tanh_radial"


@dataclass
class SpectralDistribution:
    grid: Grid2
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    def __getitem__(self, k):
        return self.coeffs[self.grid.index(k)]

    def __add__(self, other: "SpectralDistribution"):
        return SpectralDistribution(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralDistribution"):
        return SpectralDistribution(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, c):
        return SpectralDistribution(self.grid, self.coeffs * c)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralDistribution(self.grid, -self.coeffs)

    def pair(self, u) -> complex:
        """``sum_k u~_k phi^_k`` against a grid or spectral field."""
        if isinstance(u, GridField):
            c = forward(u.values, u.grid)
        elif isinstance(u, SpectralField):
            c = u.coeffs
        else:
            raise TypeError(f"cannot pair a distribution with {type(u).__name__}")
        if u.grid != self.grid:
            raise GridMismatchError(f"m={self.grid.m} vs m={u.grid.m}")
        return complex(np.sum(self.coeffs * c))

    def samples(self) -> GridField:
        """Physical-space projection ``sum_k u~_k conj(e^m_k)``."""
        return GridField(self.grid, np.fft.fft2(self.coeffs * self.grid._sign) / TWO_PI)


def _axis_phases(grid: Grid2, t: float) -> np.ndarray:
    return np.exp(1j * grid.freqs * t)


def delta(grid: Grid2, x0) -> SpectralDistribution:
    """Spectral Dirac delta at ``x0``: ``u~_k = e_k(x0)``."""
    y = grid.wrap(x0)
    return SpectralDistribution(
        grid, np.outer(_axis_phases(grid, y[0]), _axis_phases(grid, y[1])) / TWO_PI
    )


def delta_derivative(grid: Grid2, x0, alpha=None, direction=None) -> SpectralDistribution:
    """Derivative of the delta at ``x0``.

    Give either a multi-index ``alpha`` (``|alpha| <= 2``), producing
    ``d^alpha delta`` with ``<d^alpha delta, phi> = (-1)^|alpha| d^alpha phi(x0)``,
    or a ``direction`` vector ``v`` producing ``sum_j v_j d_j delta``.
    """
    if (alpha is None) == (direction is None):
        raise ValueError("pass exactly one of alpha or direction")
    base = delta(grid, x0).coeffs
    K1, K2 = grid.wavenumbers
    if alpha is not None:
        a1, a2 = (int(a) for a in alpha)
        if a1 < 0 or a2 < 0 or a1 + a2 > 2:
            raise ValueError(f"multi-index {alpha} must be non-negative with order <= 2")
        factor = (-1) ** (a1 + a2) * (1j * K1) ** a1 * (1j * K2) ** a2
        return SpectralDistribution(grid, factor * base)
    v = np.asarray(direction, dtype=float)
    if not np.any(v):
        raise ValueError("direction vector must be non-zero")
    return SpectralDistribution(grid, -1j * (v[0] * K1 + v[1] * K2) * base)


def normal_derivative_functional(grid: Grid2, y, normal) -> SpectralDistribution:
    """``-(d_nu delta_y)``, so that pairing with ``u`` gives ``d_nu u(y)``."""
    return -delta_derivative(grid, y, direction=normal)


@dataclass
class PointFunctionals:
    """A bank of point functionals ``delta_{y_j}`` or ``-(d_nu delta_{y_j})``.

    Applied to spectral coefficients by factorized direct summation, which is
    the exact discrete pairing with the corresponding grid distributions.
    """

    grid: Grid2
    points: np.ndarray
    normals: np.ndarray | None = None
    _tables: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.normals is not None:
            self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
            if self.normals.shape != self.points.shape:
                raise ValueError("normals must match points")
        f = self.grid.freqs
        A1 = np.exp(1j * np.outer(self.points[:, 0], f)) / TWO_PI
        A2 = np.exp(1j * np.outer(self.points[:, 1], f))
        self._tables = (A1, A2)

    @property
    def kind(self) -> str:
        return "delta" if self.normals is None else "normal_derivative"

    def __len__(self):
        return self.points.shape[0]

    def distribution(self, j: int) -> SpectralDistribution:
        if self.normals is None:
            return delta(self.grid, self.points[j])
        return normal_derivative_functional(self.grid, self.points[j], self.normals[j])

    def _apply_one(self, c: np.ndarray) -> np.ndarray:
        A1, A2 = self._tables
        if self.normals is None:
            return np.einsum("jk,jk->j", A1 @ c, A2)
        f = 1j * self.grid.freqs
        d1 = np.einsum("jk,jk->j", (A1 * f) @ c, A2)
        d2 = np.einsum("jk,jk->j", A1 @ c, A2 * f)
        return self.normals[:, 0] * d1 + self.normals[:, 1] * d2

    def _apply_stack(self, C: np.ndarray) -> np.ndarray:
        A1, A2 = self._tables
        if self.normals is None:
            return np.einsum("cjk,jk->jc", A1 @ C, A2)
        f = 1j * self.grid.freqs
        d1 = np.einsum("cjk,jk->jc", (A1 * f) @ C, A2)
        d2 = np.einsum("cjk,jk->jc", A1 @ C, A2 * f)
        return self.normals[:, :1] * d1 + self.normals[:, 1:] * d2

    def apply(self, coeffs, block: int = 16) -> np.ndarray:
        """Values of every functional on one field ``(m, m)`` or a stack ``(c, m, m)``.

        A stack gives an ``(n, c)`` array, processed ``block`` fields at a time.
        """
        if isinstance(coeffs, SpectralField):
            coeffs = coeffs.coeffs
        coeffs = np.asarray(coeffs)
        if coeffs.ndim == 2:
            return self._apply_one(coeffs)
        out = np.empty((len(self), coeffs.shape[0]), dtype=complex)
        for i in range(0, coeffs.shape[0], block):
            out[:, i : i + block] = self._apply_stack(coeffs[i : i + block])
        return out


@dataclass(frozen=True)
class TestFunctionSpec:
    """Source shape centred at ``center``; ``alpha=None`` means ``4 m``."""

    __test__ = False  # not a pytest class

    kind: TestFunctionKind
    center: tuple[float, float] = (0.0, 0.0)
    alpha: float | None = None
    normal: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TestFunctionKind(self.kind))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError(f"sharpness alpha must be positive, got {self.alpha}")
        if self.normal is not None:
            nrm = np.hypot(*self.normal)
            if abs(nrm - 1.0) > 1e-12:
                raise ValueError(f"normal must be a unit vector, |nu|={nrm}")
            object.__setattr__(self, "normal", tuple(float(v) for v in self.normal))
        if self.kind is TestFunctionKind.NORMAL_DERIVATIVE and self.normal is None:
            raise ValueError("normal-derivative test functions need a normal")

    def at(self, center, normal=None) -> "TestFunctionSpec":
        """Same shape re-centred (and re-oriented for normal derivatives)."""
        if self.kind is not TestFunctionKind.NORMAL_DERIVATIVE:
            normal = None
        return replace(self, center=tuple(center), normal=None if normal is None else tuple(normal))

    def sharpness(self, grid: Grid2) -> float:
        return 4.0 * grid.m if self.alpha is None else float(self.alpha)


def _dirichlet_kernel(grid: Grid2, t: np.ndarray) -> np.ndarray:
    # sum_{k in Z_m} e^{ikt}
    return np.exp(1j * np.outer(t, grid.freqs)).sum(axis=1)


def test_function_terms(grid: Grid2, spec: TestFunctionSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Separable factors ``[(f1, f2), ...]`` with ``phi = sum outer(f1, f2)``."""
    x = grid.axis
    c1, c2 = spec.center
    if spec.kind is TestFunctionKind.DIRAC:
        return [
            (_dirichlet_kernel(grid, c1 - x) / TWO_PI, _dirichlet_kernel(grid, c2 - x) / TWO_PI)
        ]
    a = spec.sharpness(grid)
    g1 = np.exp(-a * np.sin(0.5 * (x - c1)) ** 2)
    g2 = np.exp(-a * np.sin(0.5 * (x - c2)) ** 2)
    if spec.kind is TestFunctionKind.SYMMETRIC:
        return [(g1, g2)]
    n1, n2 = spec.normal
    # d/dz exp(-a sin^2((z-c)/2)) = -(a/2) sin(z-c) exp(...)
    d1 = -0.5 * a * np.sin(x - c1) * g1
    d2 = -0.5 * a * np.sin(x - c2) * g2
    return [(n1 * d1, g2), (n2 * g1, d2)]


test_function_terms.__test__ = False  # keep pytest from collecting it


def test_function_coeffs(grid: Grid2, spec: TestFunctionSpec) -> np.ndarray:
    """``F_m`` of the test function, computed factor by factor with 1D FFTs."""
    s = np.where(grid.freqs.astype(int) % 2 == 0, 1.0, -1.0)
    out = np.zeros((grid.m, grid.m), dtype=complex)
    for f1, f2 in test_function_terms(grid, spec):
        out += np.outer(s * np.fft.fft(f1), s * np.fft.fft(f2))
    return out * (TWO_PI / grid.m**2)


test_function_coeffs.__test__ = False


def test_function(grid: Grid2, spec: TestFunctionSpec) -> GridField:
    """Grid samples of the test function (closed form, no finite differences)."""
    if spec.kind is TestFunctionKind.DIRAC:
        return delta(grid, spec.center).samples()
    vals = sum(np.outer(f1, f2) for f1, f2 in test_function_terms(grid, spec))
    return GridField(grid, vals)


test_function.__test__ = False


def padding_psi(grid: Grid2, style=PaddingStyle.GAUSSIAN_CORNER) -> GridField:
    """Padding used to shift means away from the domain.

    ``gaussian_corner``: ``exp(-200 sin^2((x1-pi)/2) sin^2((x2-pi)/2))``, which
    equals one on the box edges and vanishes in the interior.
    ``tanh_radial``: ``(1 + tanh(-5/2 (|x|^2 - (pi-0.2)^2))) / 2``, one on disks
    of radius below ``pi - 0.2`` and small near the box boundary.
    """
    style = PaddingStyle(style)
    X1, X2 = grid.points
    if style is PaddingStyle.GAUSSIAN_CORNER:
        s = np.sin(0.5 * (X1 - np.pi)) ** 2 * np.sin(0.5 * (X2 - np.pi)) ** 2
        return GridField(grid, np.exp(-200.0 * s))
    r2 = X1**2 + X2**2
    return GridField(grid, 0.5 * (1.0 + np.tanh(-2.5 * (r2 - (np.pi - 0.2) ** 2))))


def project_mean_zero(u, psi: GridField):
    """``P_psi u = u - (u^_0 / psi^_0) psi``.

    Works on grid fields and on spectral distributions; the result has a zero
    ``(0, 0)`` coefficient and agrees with ``u`` wherever ``psi`` vanishes.
    """
    psi0 = forward(psi.values, psi.grid)[0, 0]
    if abs(psi0) < 1e-14 * max(1.0, float(np.abs(psi.values).max()) * TWO_PI):
        raise ValueError("padding function has (numerically) zero mean")
    if isinstance(u, GridField):
        if u.grid != psi.grid:
            raise GridMismatchError(f"m={u.grid.m} vs m={psi.grid.m}")
        u0 = forward(u.values, u.grid)[0, 0]
        return GridField(u.grid, u.values - (u0 / psi0) * psi.values)
    if isinstance(u, SpectralDistribution):
        # <psi, e_k> for the grid function psi
        psi_t = np.conj(forward(np.conj(psi.values), psi.grid))
        return SpectralDistribution(u.grid, u.coeffs - (u.coeffs[0, 0] / psi_t[0, 0]) * psi_t)
    raise TypeError(f"cannot project {type(u).__name__}")
