"""Closed boundary curves inside the box, their samples and offset source points."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .spectral_core import TWO_PI, Grid2


@dataclass(frozen=True)
class BoundaryCurve:
    """Counterclockwise, 2π-periodic parametrization ``gamma(t)`` of a simple closed curve.

    Parameters
    ----------
    gamma : callable
        Maps an array ``t`` to an array of shape ``(len(t), 2)``.
    dgamma : callable
        Derivative of ``gamma`` with the same calling convention.
    kind : str
        ``"circle"`` or ``"parametric"``.
    center, radius : optional
        Set for circles, which get an exact interior test.
    """

    gamma: Callable
    dgamma: Callable
    kind: str = "parametric"
    center: tuple[float, float] | None = None
    radius: float | None = None

    @classmethod
    def circle(cls, center=(0.0, 0.0), radius: float = 1.0) -> "BoundaryCurve":
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        c = np.asarray(center, dtype=float)

        def gamma(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            return c + radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

        def dgamma(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            return radius * np.stack([-np.sin(t), np.cos(t)], axis=-1)

        return cls(gamma, dgamma, "circle", (float(c[0]), float(c[1])), float(radius))

    @classmethod
    def from_samples(cls, t, points) -> "BoundaryCurve":
        """Trigonometric interpolant through equispaced samples ``gamma(2 pi j / n)``.

        The derivative is obtained spectrally.  Clockwise samples are reversed
        so the result is always counterclockwise.
        """
        t = np.asarray(t, dtype=float)
        P = np.asarray(points, dtype=float)
        n = t.size
        if P.shape != (n, 2):
            raise ValueError("points must have shape (n, 2)")
        order = np.argsort(t)
        t, P = t[order], P[order]
        if n < 8:
            raise ValueError("need at least 8 boundary samples")
        if not np.allclose(t, TWO_PI * np.arange(n) / n, atol=1e-9):
            raise ValueError("parameter values must be equispaced on [0, 2 pi)")
        if _signed_area(P) < 0:
            P = np.concatenate([P[:1], P[:0:-1]])
        coeffs = np.fft.fft(P, axis=0) / n
        freqs = np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            # split the Nyquist mode between +-n/2 so the interpolant stays real
            coeffs[n // 2] *= 0.5
            freqs = np.append(freqs, n // 2)
            coeffs = np.vstack([coeffs, coeffs[n // 2]])

        def gamma(s):
            E = np.exp(1j * np.outer(np.atleast_1d(s), freqs))
            return (E @ coeffs).real

        def dgamma(s):
            E = np.exp(1j * np.outer(np.atleast_1d(s), freqs)) * (1j * freqs)
            return (E @ coeffs).real

        return cls(gamma, dgamma, "parametric")

    @classmethod
    def from_file(cls, path) -> "BoundaryCurve":
        """Load a curve from rows ``t, y1, y2`` (comma or blank separated, ``#`` comments)."""
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    rows.append([float(v) for v in line.replace(",", " ").split()])
        data = np.asarray(rows, dtype=float)
        if data.ndim != 2 or data.shape[1] != 3:
            raise ValueError(f"{path}: expected rows 't, y1, y2'")
        return cls.from_samples(data[:, 0], data[:, 1:])

    def polygon(self, n: int = 1024) -> np.ndarray:
        return self.gamma(TWO_PI * np.arange(n) / n)

    def orientation(self) -> float:
        """+1 for counterclockwise parametrizations, -1 otherwise."""
        return 1.0 if _signed_area(self.polygon(256)) > 0 else -1.0

    def contains(self, x1, x2) -> np.ndarray:
        """Strict interior predicate on broadcast coordinate arrays."""
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        if self.kind == "circle":
            return np.hypot(x1 - self.center[0], x2 - self.center[1]) < self.radius
        return _inside_polygon(self.polygon(), x1, x2)


def _signed_area(P: np.ndarray) -> float:
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _inside_polygon(P: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    # even-odd ray casting along +x1
    inside = np.zeros(x1.shape, dtype=bool)
    a = P
    b = np.roll(P, -1, axis=0)
    for (ax, ay), (bx, by) in zip(a, b):
        crosses = (ay > x2) != (by > x2)
        if not crosses.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (x2 - ay) * (bx - ax) / (by - ay)
        inside ^= crosses & (x1 < xint)
    return inside


@dataclass(frozen=True)
class BoundarySample:
    """``n`` boundary points with unit frames and offset source centres.

    ``offsets`` are ``y + delta * nu`` unless the sample was snapped, in which
    case they are grid nodes and ``offset_index`` holds their integer indices.
    """

    curve: BoundaryCurve
    params: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    speed: np.ndarray
    delta: float
    offsets: np.ndarray
    offset_index: np.ndarray | None = None
    snap_displacement: float = 0.0

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def snapped(self) -> bool:
        return self.offset_index is not None

    def line_integral(self, values) -> float:
        """Trapezoidal ``int_Gamma g ds`` from samples ``g(y_j)``."""
        return float(np.sum(np.asarray(values) * self.speed) * TWO_PI / self.n)


def sample_boundary(curve: BoundaryCurve, n: int, delta: float = 0.0) -> BoundarySample:
    """Equispaced samples ``gamma(2 pi j / n)`` and offsets ``y + delta nu(y)``.

    Raises
    ------
    ValueError
        If ``n < 4``, ``delta < 0``, an offset point leaves the box or lies in
        the closed domain.
    """
    if int(n) != n or n < 4:
        raise ValueError(f"need an integer n >= 4, got {n}")
    if delta < 0:
        raise ValueError(f"offset delta must be non-negative, got {delta}")
    n = int(n)
    t = TWO_PI * np.arange(n) / n
    Y = curve.gamma(t)
    dY = curve.dgamma(t)
    speed = np.hypot(dY[:, 0], dY[:, 1])
    if np.any(speed <= 0):
        raise ValueError("curve is not regular at some sample")
    tau = dY / speed[:, None]
    if curve.kind == "circle":
        nu = (Y - np.asarray(curve.center)) / curve.radius
    else:
        nu = curve.orientation() * np.stack([tau[:, 1], -tau[:, 0]], axis=1)
        tau = curve.orientation() * tau
    offsets = Y + delta * nu
    if np.any(np.abs(Y) >= np.pi):
        raise ValueError("boundary leaves the periodicity box")
    if np.any(np.abs(offsets) >= np.pi):
        raise ValueError(f"offset points escape the box for delta={delta}")
    # below ~1e-10 the offsets coincide with the boundary up to rounding
    if delta > 1e-10 and np.any(curve.contains(offsets[:, 0], offsets[:, 1])):
        raise ValueError(f"offset points re-enter the domain for delta={delta}")
    return BoundarySample(curve, t, Y, nu, tau, speed, float(delta), offsets)


def nearest_grid_snap(sample: BoundarySample, grid: Grid2) -> BoundarySample:
    """Move every offset centre to its nearest grid node.

    The boundary points are left untouched; ``snap_displacement`` records the
    largest move (at most ``pi sqrt(2) / m``).
    """
    idx = grid.nearest_index(sample.offsets)
    snapped = grid.axis[idx]
    disp = grid.wrap(snapped - sample.offsets)
    return replace(
        sample,
        offsets=snapped,
        offset_index=idx,
        snap_displacement=float(np.max(np.hypot(disp[:, 0], disp[:, 1]))),
    )
