"""Embedded-boundary solver for Dirichlet and Neumann problems in the periodic box.

The box solution ``v`` of ``A v = f`` (``A = -Delta`` with mean-zero
projection, or ``A = 1 - Delta`` with a cutoff rhs) is corrected by a
combination of box solves of sources placed outside the domain:

    u = v + sum_k w_k G(s_k),

with ``w`` chosen so that the boundary functionals (point values or normal
derivatives at ``y_j``) of ``u`` match the data.  Sources are smooth bumps at
offset centres (smooth kernel) or point deltas on the boundary (rough kernel).
"""
from __future__ import annotations

import enum
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .distributions import (
    PaddingStyle,
    PointFunctionals,
    TestFunctionKind,
    TestFunctionSpec,
    padding_psi,
    test_function_coeffs,
)
from .geometry import BoundaryCurve, BoundarySample
from .operators import Symbol, green_dirichlet_symbol, green_neumann_symbol
from .spectral_core import TWO_PI, Grid2, GridField, evaluate_coeffs, forward, inverse


class ProblemKind(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


class KernelFlavor(str, enum.Enum):
    SMOOTH_PHI = "smooth_phi"
    ROUGH_DELTA = "rough_delta"


class SingularMatrixError(np.linalg.LinAlgError):
    """The boundary system is numerically singular."""

    def __init__(self, message: str, cond: float):
        super().__init__(message)
        self.cond = cond


class FastPathUnavailable(ValueError):
    """The translation fast path does not apply to the requested assembly."""


@dataclass
class BvpProblem:
    """``-Delta u = f`` (Dirichlet) or ``(1 - Delta) u = f`` (Neumann) in the domain.

    Parameters
    ----------
    kind : ProblemKind
    domain : BoundaryCurve
    f : GridField
        Right-hand side sampled on the whole box.
    g : callable, array or None
        Boundary data: a function of the boundary points ``(n, 2)`` (and, for
        Neumann data, optionally of the normals), an explicit length-``n``
        array, or ``None`` for homogeneous data.
    padding : GridField
        The padding ``psi`` for Dirichlet problems or the rhs cutoff for Neumann
        problems.
    """

    kind: ProblemKind
    domain: BoundaryCurve
    f: GridField
    g: Callable | np.ndarray | None = None
    padding: GridField | None = None

    def __post_init__(self):
        self.kind = ProblemKind(self.kind)
        if self.padding is not None and self.padding.grid != self.f.grid:
            raise ValueError("padding and rhs live on different grids")

    @classmethod
    def dirichlet(cls, domain, f, g=None, padding=None) -> "BvpProblem":
        if padding is None:
            padding = padding_psi(f.grid, PaddingStyle.GAUSSIAN_CORNER)
        return cls(ProblemKind.DIRICHLET, domain, f, g, padding)

    @classmethod
    def neumann(cls, domain, f, g=None, cutoff=None) -> "BvpProblem":
        if cutoff is None:
            cutoff = padding_psi(f.grid, PaddingStyle.TANH_RADIAL)
        return cls(ProblemKind.NEUMANN, domain, f, g, cutoff)

    @property
    def grid(self) -> Grid2:
        return self.f.grid

    @property
    def symbol(self) -> Symbol:
        if self.kind is ProblemKind.DIRICHLET:
            return green_dirichlet_symbol()
        return green_neumann_symbol()

    def boundary_data(self, sample: BoundarySample) -> np.ndarray:
        if self.g is None:
            return np.zeros(sample.n, dtype=complex)
        if callable(self.g):
            return np.asarray(self.g(sample.points), dtype=complex)
        g = np.asarray(self.g, dtype=complex)
        if g.shape != (sample.n,):
            raise ValueError(f"boundary data has shape {g.shape}, expected ({sample.n},)")
        return g

    def is_real(self, sample: BoundarySample) -> bool:
        f_real = not np.any(np.imag(self.f.values))
        return f_real and not np.any(self.boundary_data(sample).imag)

    def row_functionals(self, sample: BoundarySample) -> PointFunctionals:
        if self.kind is ProblemKind.DIRICHLET:
            return PointFunctionals(self.grid, sample.points)
        return PointFunctionals(self.grid, sample.points, sample.normals)


class _Sources:
    """Column sources of a kernel matrix and their box solves.

    Keeps only the recipe (centres, normals, kind), so fields are rebuilt on
    demand and linear combinations need a single box solve.
    """

    def __init__(self, problem: BvpProblem, spec: TestFunctionSpec, centers, normals):
        self.problem = problem
        self.grid = problem.grid
        self.spec = spec
        self.centers = np.asarray(centers, dtype=float)
        self.normals = np.asarray(normals, dtype=float)
        self.green = problem.symbol.on_grid(self.grid)
        # Normal-derivative bumps have zero mean and need no projection.
        self.project = (
            problem.kind is ProblemKind.DIRICHLET
            and spec.kind is not TestFunctionKind.NORMAL_DERIVATIVE
        )
        if self.project:
            self.psi_hat = forward(problem.padding.values, self.grid)
            if abs(self.psi_hat[0, 0]) < 1e-14:
                raise ValueError("padding function has (numerically) zero mean")

    def __len__(self):
        return self.centers.shape[0]

    def raw(self, k: int) -> np.ndarray:
        spec = self.spec.at(self.centers[k], self.normals[k])
        return test_function_coeffs(self.grid, spec)

    def solve(self, c: np.ndarray) -> np.ndarray:
        """``G P_psi`` applied to source coefficients."""
        if self.project:
            c = c - (c[0, 0] / self.psi_hat[0, 0]) * self.psi_hat
        return self.green * c

    def column(self, k: int) -> np.ndarray:
        return self.solve(self.raw(k))

    def combine(self, weights) -> np.ndarray:
        acc = np.zeros((self.grid.m, self.grid.m), dtype=complex)
        for k, w in enumerate(weights):
            if w != 0:
                acc += w * self.raw(k)
        return self.solve(acc)


@dataclass
class KernelMatrix:
    """Dense boundary matrix with lazily computed LU factors and 2-norm condition number."""

    entries: np.ndarray
    flavor: KernelFlavor
    sources: _Sources | None = field(default=None, repr=False)
    assembly: str = "direct"
    assembly_seconds: float = 0.0
    _lu: tuple | None = field(default=None, init=False, repr=False)
    _cond: float | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"kernel matrix must be square, got {self.entries.shape}")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def cond2(self) -> float:
        if self._cond is None:
            s = scipy.linalg.svdvals(self.entries)
            self._cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
        return self._cond

    def lu(self):
        if self._lu is None:
            scale = np.linalg.norm(self.entries, np.inf)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                lu, piv = scipy.linalg.lu_factor(self.entries, check_finite=True)
            if scale == 0 or np.min(np.abs(np.diag(lu))) < 1e-14 * scale:
                raise SingularMatrixError(
                    f"boundary matrix is numerically singular (cond2 ~ {self.cond2:.3e})",
                    self.cond2,
                )
            self._lu = (lu, piv)
        return self._lu

    def solve(self, rhs) -> np.ndarray:
        return scipy.linalg.lu_solve(self.lu(), np.asarray(rhs))


def solve_boundary_weights(M: KernelMatrix, rhs, precond: KernelMatrix | None = None):
    """Solve ``M w = rhs``, optionally as ``(P^-1 M) w = P^-1 rhs``.

    Returns
    -------
    w : ndarray
    cond_precond : float or None
        2-norm condition number of ``P^-1 M`` when a preconditioner is given.
    """
    rhs = np.asarray(rhs)
    if rhs.shape != (M.n,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({M.n},)")
    if precond is None:
        return M.solve(rhs), None
    if precond.n != M.n:
        raise ValueError("preconditioner size does not match")
    C = KernelMatrix(precond.solve(M.entries), M.flavor)
    return C.solve(precond.solve(rhs)), C.cond2


def particular_solution_coeffs(problem: BvpProblem) -> np.ndarray:
    grid = problem.grid
    if problem.padding is None:
        raise ValueError(f"{problem.kind.value} problem needs a padding/cutoff field")
    green = problem.symbol.on_grid(grid)
    if problem.kind is ProblemKind.DIRICHLET:
        c = forward(problem.f.values, grid)
        psi_hat = forward(problem.padding.values, grid)
        c = c - (c[0, 0] / psi_hat[0, 0]) * psi_hat
    else:
        c = forward(problem.f.values * problem.padding.values, grid)
    return green * c


def particular_solution(problem: BvpProblem) -> GridField:
    """Box solution ``v``: ``G^D P_psi f`` (Dirichlet) or ``G^N (psi f)`` (Neumann)."""
    return GridField(problem.grid, inverse(particular_solution_coeffs(problem), problem.grid))


def _fast_path_reason(problem: BvpProblem, sample: BoundarySample, spec: TestFunctionSpec):
    if not sample.snapped:
        return "source centres are not snapped to grid nodes"
    if problem.kind is ProblemKind.DIRICHLET and spec.kind is not TestFunctionKind.NORMAL_DERIVATIVE:
        return "the mean-zero projection breaks translation invariance for this source"
    return None


def _assemble_shifted(problem, sources: _Sources, sample: BoundarySample, rows: PointFunctionals):
    """One box solve per base field, rows evaluated at translated points by NUFFT."""
    import finufft

    grid = problem.grid
    idx = np.asarray(sample.offset_index)
    shifts = idx - idx[0]
    base_center = sources.centers[0]
    if sources.spec.kind is TestFunctionKind.NORMAL_DERIVATIVE:
        bases = [(1.0, 0.0), (0.0, 1.0)]
        col_weights = [sources.normals[:, 0], sources.normals[:, 1]]
        fields = [
            sources.solve(test_function_coeffs(grid, sources.spec.at(base_center, b))) for b in bases
        ]
    else:
        col_weights = [np.ones(len(sources))]
        fields = [sources.column(0)]
    Y = rows.points
    n = Y.shape[0]
    P = grid.wrap(Y[:, None, :] - grid.h * shifts[None, :, :]).reshape(-1, 2)
    x1 = np.ascontiguousarray(P[:, 0])
    x2 = np.ascontiguousarray(P[:, 1])

    def interp(c):
        c = np.ascontiguousarray(c, dtype=np.complex128)
        out = finufft.nufft2d2(x1, x2, c, eps=1e-15, isign=1, modeord=1)
        return out.reshape(n, n) / TWO_PI

    K1, K2 = grid.wavenumbers
    M = np.zeros((n, n), dtype=complex)
    for W, a in zip(fields, col_weights):
        if rows.normals is None:
            vals = interp(W)
        else:
            vals = rows.normals[:, :1] * interp(1j * K1 * W) + rows.normals[:, 1:] * interp(1j * K2 * W)
        M += vals * a[None, :]
    return M


def assemble_matrix(
    problem: BvpProblem,
    sample: BoundarySample,
    tf: TestFunctionSpec,
    flavor: KernelFlavor | None = None,
    fast_path: bool | str = "auto",
) -> KernelMatrix:
    """Kernel matrix ``M_jk = R_j[G P s_k]`` with row functionals ``R_j``.

    Parameters
    ----------
    flavor : KernelFlavor, optional
        ``ROUGH_DELTA`` places Dirac sources at the boundary points themselves;
        ``SMOOTH_PHI`` places ``tf`` at the offset centres.  By default the
        flavor follows ``tf.kind`` and the offset centres are used.
    fast_path : bool or "auto"
        Use one box solve plus translations.  ``True`` raises
        :class:`FastPathUnavailable` when translation invariance fails.
    """
    tf = TestFunctionSpec(tf) if isinstance(tf, (str, TestFunctionKind)) else tf
    if flavor is None:
        flavor = (
            KernelFlavor.ROUGH_DELTA if tf.kind is TestFunctionKind.DIRAC else KernelFlavor.SMOOTH_PHI
        )
        centers = sample.offsets
    else:
        flavor = KernelFlavor(flavor)
        if flavor is KernelFlavor.ROUGH_DELTA:
            tf = TestFunctionSpec(TestFunctionKind.DIRAC)
            centers = sample.points
        else:
            if tf.kind is TestFunctionKind.DIRAC:
                raise ValueError("a smooth kernel needs a smooth test function")
            if sample.delta <= 0:
                raise ValueError("a smooth kernel needs offset centres (delta > 0)")
            centers = sample.offsets
    # Sources placed on the boundary itself are exempt: rounding alone can put them "inside".
    on_boundary = np.all(centers == sample.points, axis=1)
    inside = problem.domain.contains(centers[:, 0], centers[:, 1]) & ~on_boundary
    if np.any(inside):
        raise ValueError(f"{int(inside.sum())} source centres lie inside the domain")
    if problem.kind is ProblemKind.DIRICHLET and flavor is KernelFlavor.SMOOTH_PHI:
        psi_c = np.abs(evaluate_coeffs(problem.grid, forward(problem.padding.values, problem.grid), centers))
        if psi_c.max() > 1e-10:
            warnings.warn(
                f"padding is {psi_c.max():.2e} at a source centre; supports overlap", stacklevel=2
            )

    sources = _Sources(problem, tf, centers, sample.normals)
    rows = problem.row_functionals(sample)
    t0 = time.perf_counter()
    use_fast = False
    if fast_path:
        reason = _fast_path_reason(problem, sample, tf)
        if flavor is KernelFlavor.ROUGH_DELTA and reason is None:
            reason = "rough kernels are assembled directly"
        if reason is None:
            use_fast = True
        elif fast_path is True:
            raise FastPathUnavailable(reason)
    if use_fast:
        M = _assemble_shifted(problem, sources, sample, rows)
    else:
        M = np.empty((sample.n, sample.n), dtype=complex)
        block = 16
        for k0 in range(0, sample.n, block):
            cols = np.stack([sources.column(k) for k in range(k0, min(k0 + block, sample.n))])
            M[:, k0 : k0 + cols.shape[0]] = rows.apply(cols)
    elapsed = time.perf_counter() - t0
    return KernelMatrix(M, flavor, sources, "shifted" if use_fast else "direct", elapsed)


@dataclass
class SolveOptions:
    precondition: bool = False
    fast_path: bool | str = "auto"


@dataclass
class BvpSolution:
    problem: BvpProblem
    sample: BoundarySample
    coeffs: np.ndarray
    weights: np.ndarray
    matrix: KernelMatrix
    rough: KernelMatrix | None = None
    cond_precond: float | None = None
    residual: float = 0.0

    @property
    def field(self) -> GridField:
        """Box field ``u``; real whenever the rhs and boundary data are real.

        The unpaired Nyquist modes leave a spurious imaginary part at the level
        of the discretization error, which is dropped for real problems.
        """
        u = inverse(self.coeffs, self.problem.grid)
        if self.problem.is_real(self.sample):
            u = u.real
        return GridField(self.problem.grid, u)

    def interior_mask(self) -> np.ndarray:
        X1, X2 = self.problem.grid.points
        return self.problem.domain.contains(X1, X2)

    def column_field(self, k: int) -> GridField:
        grid = self.problem.grid
        return GridField(grid, inverse(self.matrix.sources.column(k), grid))


def solve_bvp(problem: BvpProblem, sample: BoundarySample, tf, options: SolveOptions | None = None) -> BvpSolution:
    """Assemble, solve for boundary weights and reconstruct the box field."""
    options = options or SolveOptions()
    M = assemble_matrix(problem, sample, tf, fast_path=options.fast_path)
    rows = problem.row_functionals(sample)
    v_hat = particular_solution_coeffs(problem)
    rhs = problem.boundary_data(sample) - rows.apply(v_hat)
    rough = None
    if options.precondition:
        rough = assemble_matrix(problem, sample, tf, flavor=KernelFlavor.ROUGH_DELTA)
    w, cond_c = solve_boundary_weights(M, rhs, rough)
    coeffs = v_hat + M.sources.combine(w)
    g = problem.boundary_data(sample)
    res = np.linalg.norm(rows.apply(coeffs) - g) / max(np.linalg.norm(rhs), 1e-300)
    return BvpSolution(problem, sample, coeffs, w, M, rough, cond_c, float(res))


def restrict_and_error(sol: BvpSolution, exact: Callable) -> tuple[float, float]:
    """Relative ``l_inf`` and ``l_2`` errors over grid nodes strictly inside the domain."""
    mask = sol.interior_mask()
    if not mask.any():
        raise ValueError("no grid nodes inside the domain")
    X1, X2 = sol.problem.grid.points
    u = sol.field.values[mask]
    ref = np.broadcast_to(exact(X1, X2), X1.shape)[mask]
    return relative_errors(u, ref)


def relative_errors(u, ref) -> tuple[float, float]:
    e = np.asarray(u) - np.asarray(ref)
    return (
        float(np.abs(e).max() / np.abs(ref).max()),
        float(np.linalg.norm(e) / np.linalg.norm(ref)),
    )


def kernel_function_resolution(grid: Grid2, sample: BoundarySample, tf, k_max: int, harmonics=None, fast_path="auto"):
    """Reproduce the harmonics ``(r/2)^k e^{ik theta}`` on the disk of radius 2.

    Solves the homogeneous-rhs Dirichlet problem once per harmonic with one
    factorization.  Returns a list of ``(k, e_inf, e_2)``.
    """
    curve = sample.curve
    if curve.kind != "circle" or not np.isclose(curve.radius, 2.0) or np.any(curve.center):
        raise ValueError("kernel functions are known in closed form on the disk B(0, 2) only")
    if harmonics is None:
        if k_max > sample.n // 2:
            raise ValueError(f"k_max={k_max} exceeds n/2={sample.n // 2}")
        harmonics = range(1, k_max + 1)
    problem = BvpProblem.dirichlet(curve, GridField.constant(grid, 0.0))
    M = assemble_matrix(problem, sample, tf, fast_path=fast_path)
    X1, X2 = grid.points
    mask = curve.contains(X1, X2)
    Z = (X1[mask] + 1j * X2[mask]) / 2.0
    zb = (sample.points[:, 0] + 1j * sample.points[:, 1]) / 2.0
    out = []
    for k in harmonics:
        w = M.solve(zb**k)
        u = inverse(M.sources.combine(w), grid)[mask]
        out.append((int(k), *relative_errors(u, Z**k)))
    return out
