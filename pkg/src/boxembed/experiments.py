"""Model problems on disks and the batch experiments built on them.

Every experiment takes an :class:`ExperimentConfig` and returns a list of
result rows (dicts keyed by :data:`COLUMNS`), one per parameter combination
(or per harmonic for the kernel-function experiment).
"""
from __future__ import annotations

import csv
import io
import itertools
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bvp_solver import (
    BvpProblem,
    KernelFlavor,
    SolveOptions,
    assemble_matrix,
    kernel_function_resolution,
    restrict_and_error,
    solve_bvp,
)
from .distributions import TestFunctionKind, TestFunctionSpec
from .domain_quadrature import build_quadrature, integrate as quad_integrate
from .geometry import BoundaryCurve, nearest_grid_snap, sample_boundary
from .spectral_core import Grid2, GridField

EXPERIMENTS = ("integral", "dirichlet", "neumann", "kernels", "precondition", "delta-sweep")

COLUMNS = (
    "experiment", "radius", "m", "n", "delta", "tf_kind", "alpha", "snap", "precondition",
    "harmonic", "cond_M", "cond_rough", "cond_precond", "e_inf", "e_2", "abs_err", "wall_ms",
)

DEFAULTS = {
    "integral": dict(m=[32, 64, 96], n=[128, 256, 512], delta=[0.0]),
    "dirichlet": dict(m=[128, 256], n=[64, 80, 96, 112], delta=[0.4]),
    "delta-sweep": dict(m=[256], n=[64], delta=[0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]),
    "neumann": dict(m=[64, 128], n=[32, 48, 64], delta=[0.3, 0.4, 0.5]),
    "kernels": dict(m=[128], n=[80], delta=[0.4]),
    "precondition": dict(m=[128, 256], n=[64, 128], delta=[0.4]),
}


class UsageError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str
    m: list[int] = field(default_factory=list)
    n: list[int] = field(default_factory=list)
    delta: list[float] = field(default_factory=list)
    tf: str = "sym"
    alpha: float | None = None
    snap: bool = False
    precondition: bool = False
    radius: float = 2.0
    harmonics: list[int] = field(default_factory=lambda: list(range(1, 34)))
    seed: int = 0
    timing: bool = True
    curve: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        for name in ("m", "n", "delta"):
            if not getattr(self, name):
                raise UsageError(f"parameter list --{name} is empty")
        for m in self.m:
            if m < 4 or m % 2:
                raise UsageError(f"grid size m={m} must be even and >= 4")
        if any(n < 4 for n in self.n):
            raise UsageError("boundary counts n must be >= 4")
        if any(d < 0 for d in self.delta):
            raise UsageError("offsets delta must be non-negative")
        try:
            kind = TestFunctionKind(self.tf)
        except ValueError:
            raise UsageError(f"unknown test function kind {self.tf!r}") from None
        if self.curve is not None and self.experiment != "integral":
            raise UsageError("--curve is only supported by the integral experiment")
        if self.alpha is not None and not self.alpha > 0:
            raise UsageError("alpha must be positive")
        if not self.radius > 0 or self.radius >= np.pi:
            raise UsageError("radius must lie in (0, pi)")
        if self.experiment in ("neumann", "kernels") and self.radius != 2.0:
            raise UsageError(f"the {self.experiment} experiment has a closed-form solution only for radius 2")
        if self.experiment in ("kernels", "precondition") and kind is TestFunctionKind.DIRAC:
            raise UsageError(f"the {self.experiment} experiment needs a smooth test function")
        if self.experiment == "precondition" and self.precondition is False:
            self.precondition = True
        if self.experiment == "kernels" and not self.harmonics:
            raise UsageError("harmonic list is empty")
        if kind is not TestFunctionKind.DIRAC and self.experiment != "integral" and any(d == 0 for d in self.delta):
            raise UsageError("smooth test functions need delta > 0")
        return self

    def spec(self) -> TestFunctionSpec:
        kind = TestFunctionKind(self.tf)
        normal = (1.0, 0.0) if kind is TestFunctionKind.NORMAL_DERIVATIVE else None
        return TestFunctionSpec(kind, alpha=self.alpha, normal=normal)


def config_for(experiment: str, **overrides) -> ExperimentConfig:
    base = dict(DEFAULTS.get(experiment, {}))
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(experiment, **base)


# ---------------------------------------------------------------- model problems

def dirichlet_disk(grid: Grid2, radius: float = 2.0):
    """``-Delta u = 1`` on ``B(0, radius)``, ``u = 0`` on the circle; ``u = (radius^2 - r^2)/4``."""
    curve = BoundaryCurve.circle(radius=radius)
    problem = BvpProblem.dirichlet(curve, GridField.constant(grid, 1.0))
    return problem, lambda x1, x2: (radius**2 - x1**2 - x2**2) / 4.0


def neumann_rhs(x1, x2):
    """``(1 - Delta) cos(pi r / 2)``."""
    r = np.hypot(x1, x2)
    c = np.pi / 2
    return (1 + c**2) * np.cos(c * r) + c * c * np.sinc(r / 2)


def neumann_disk(grid: Grid2):
    """``(1 - Delta) u = f`` on ``B(0, 2)`` with zero flux; ``u = cos(pi r / 2)``."""
    curve = BoundaryCurve.circle(radius=2.0)
    problem = BvpProblem.neumann(curve, GridField.from_function(grid, neumann_rhs))
    return problem, lambda x1, x2: np.cos(np.pi / 2 * np.hypot(x1, x2))


def quadrature_oracle(radius: float = 2.0):
    """``int cos(pi r^2/4)`` and ``int |cos(pi r^2/4)|`` over ``B(0, radius)`` by radial quadrature."""
    f = lambda r: np.cos(np.pi * r * r / 4) * 2 * np.pi * r  # noqa: E731
    kinks = [np.sqrt(2.0 * (2 * j + 1)) for j in range(8) if np.sqrt(2.0 * (2 * j + 1)) < radius]
    # The signed integral vanishes for radius 2, so only an absolute tolerance makes sense.
    exact = integrate.quad(f, 0, radius, points=kinks or None, epsabs=1e-13, epsrel=0, limit=200)[0]
    absval = integrate.quad(lambda r: abs(f(r)), 0, radius, points=kinks or None, epsabs=1e-13, limit=200)[0]
    return exact, absval


# ---------------------------------------------------------------- experiment rows

def cos_x1_integral(curve: BoundaryCurve, n: int = 4096) -> float:
    """``int_Omega cos(x1) dx = int sin(g1) g2' dt`` (divergence theorem), trapezoidal in ``t``."""
    t = 2 * np.pi * np.arange(n) / n
    g, dg = curve.gamma(t), curve.dgamma(t)
    return curve.orientation() * float(np.sum(np.sin(g[:, 0]) * dg[:, 1])) * 2 * np.pi / n


def _row(cfg: ExperimentConfig, **vals) -> dict:
    row = dict.fromkeys(COLUMNS, "")
    row.update(experiment=cfg.experiment, radius=cfg.radius if cfg.curve is None else "", snap=int(cfg.snap),
               precondition=int(cfg.precondition))
    if cfg.experiment != "integral":
        row["tf_kind"] = cfg.tf
        row["alpha"] = cfg.spec().sharpness(Grid2(vals["m"]))
    row.update({k: v for k, v in vals.items() if v is not None})
    return row


def _sample(cfg, grid, curve, n, delta):
    s = sample_boundary(curve, n, delta)
    return nearest_grid_snap(s, grid) if cfg.snap else s


def run_integral(cfg: ExperimentConfig) -> list[dict]:
    if cfg.curve is None:
        curve = BoundaryCurve.circle(radius=cfg.radius)
        exact, scale = quadrature_oracle(cfg.radius)
        integrand = lambda a, b: np.cos(np.pi / 4 * (a * a + b * b))  # noqa: E731
    else:
        try:
            curve = BoundaryCurve.from_file(cfg.curve)
        except OSError as exc:
            raise UsageError(f"cannot read curve file: {exc}") from None
        exact = cos_x1_integral(curve)
        scale = abs(exact)
        integrand = lambda a, b: np.cos(a)  # noqa: E731
    rows = []
    for m, n_line in itertools.product(sorted(cfg.m), sorted(cfg.n)):
        t0 = time.perf_counter()
        grid = Grid2(m)
        u = GridField.from_function(grid, integrand)
        val = quad_integrate(build_quadrature(curve, grid, n_line), u)
        err = abs(val - exact)
        rows.append(_row(cfg, m=m, n=n_line, delta=0.0, abs_err=err, e_inf=err / scale,
                         wall_ms=1e3 * (time.perf_counter() - t0)))
    return rows


def _solve_row(cfg, problem, exact, sample, m, n, delta):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_bvp(problem, sample, cfg.spec(), SolveOptions(precondition=cfg.precondition))
    e_inf, e_2 = restrict_and_error(sol, exact)
    return _row(
        cfg, m=m, n=n, delta=delta, cond_M=sol.matrix.cond2,
        cond_rough=sol.rough.cond2 if sol.rough is not None else None,
        cond_precond=sol.cond_precond, e_inf=e_inf, e_2=e_2,
        wall_ms=1e3 * (time.perf_counter() - t0),
    )


def run_bvp(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for m, n, delta in itertools.product(sorted(cfg.m), sorted(cfg.n), sorted(cfg.delta)):
        grid = Grid2(m)
        if cfg.experiment == "neumann":
            problem, exact = neumann_disk(grid)
        else:
            problem, exact = dirichlet_disk(grid, cfg.radius)
        sample = _sample(cfg, grid, problem.domain, n, delta)
        rows.append(_solve_row(cfg, problem, exact, sample, m, n, delta))
    return rows


def run_kernels(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    curve = BoundaryCurve.circle(radius=2.0)
    for m, n, delta in itertools.product(sorted(cfg.m), sorted(cfg.n), sorted(cfg.delta)):
        grid = Grid2(m)
        sample = _sample(cfg, grid, curve, n, delta)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table = kernel_function_resolution(grid, sample, cfg.spec(), max(cfg.harmonics),
                                               harmonics=sorted(cfg.harmonics))
        ms = 1e3 * (time.perf_counter() - t0) / len(table)
        for k, e_inf, e_2 in table:
            rows.append(_row(cfg, m=m, n=n, delta=delta, harmonic=k, e_inf=e_inf, e_2=e_2, wall_ms=ms))
    return rows


def precondition_conds(m: int, n: int, delta: float, radius: float = 2.0, spec=None):
    """``cond(M_phi)``, ``cond(M_delta)`` and ``cond(M_delta^{-1} M_phi)`` for the disk problem."""
    grid = Grid2(m)
    problem, _ = dirichlet_disk(grid, radius)
    sample = sample_boundary(problem.domain, n, delta)
    spec = spec or TestFunctionSpec(TestFunctionKind.SYMMETRIC)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        Mp = assemble_matrix(problem, sample, spec)
        Md = assemble_matrix(problem, sample, spec, flavor=KernelFlavor.ROUGH_DELTA)
    C = np.linalg.cond(Md.solve(Mp.entries))
    return Mp.cond2, Md.cond2, float(C)


def run(cfg: ExperimentConfig) -> list[dict]:
    """Run one experiment; rows come back sorted by their parameters."""
    cfg.validate()
    if cfg.experiment == "integral":
        rows = run_integral(cfg)
    elif cfg.experiment == "kernels":
        rows = run_kernels(cfg)
    else:
        rows = run_bvp(cfg)
    if not cfg.timing:
        for r in rows:
            r["wall_ms"] = ""
    return rows


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.5e}"
    return str(v)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()
