"""Acceptance checks comparing the method against reference values.

Every check returns a :class:`CriterionResult` with the measured and expected
values.  ``tolerance`` widens all comparison factors and bounds (and the
runtime budgets); monotonicity requirements are never relaxed.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bvp_solver import (
    KernelFlavor,
    assemble_matrix,
    kernel_function_resolution,
    restrict_and_error,
    solve_bvp,
)
from .distributions import TestFunctionKind, TestFunctionSpec, delta
from .domain_quadrature import build_quadrature, integrate
from .experiments import dirichlet_disk, neumann_disk, precondition_conds, quadrature_oracle
from .geometry import BoundaryCurve, nearest_grid_snap, sample_boundary
from .spectral_core import TWO_PI, Grid2, GridField, forward, inverse

SYM = TestFunctionSpec(TestFunctionKind.SYMMETRIC)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0
    tolerance: float = 1.0

    @property
    def status(self) -> str:
        if self.passed:
            return "PASS"
        return "FAIL" if self.tolerance == 1.0 else "WARN"

    def line(self) -> str:
        return (
            f"[{self.status}] {self.number:2d} {self.name}: measured {self.measured}; "
            f"expected {self.expected} ({self.seconds:.1f} s)"
        )


def _within(value: float, target: float, factor: float) -> bool:
    return target / factor <= value <= target * factor


def _decreasing(v) -> bool:
    return bool(np.all(np.diff(v) < 0))


def _increasing(v) -> bool:
    return bool(np.all(np.diff(v) > 0))


def _timed(fn):
    def wrapper(tolerance: float = 1.0, **kw) -> CriterionResult:
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = fn(tolerance, **kw)
        res.seconds = time.perf_counter() - t0
        res.tolerance = tolerance
        budget = getattr(fn, "budget", None)
        if budget is not None and res.seconds > budget * tolerance:
            res.passed = False
            res.measured += f"; runtime {res.seconds:.1f} s over budget {budget * tolerance:.0f} s"
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _budget(seconds):
    def deco(fn):
        fn.budget = seconds
        return fn

    return deco


@_timed
@_budget(1.0)
def c1_faithful_discretization(tol, forward_fn: Callable = forward, inverse_fn: Callable = inverse, seed: int = 0):
    """Orthonormality, Parseval and round trip on m = 8, 16, 32."""
    rng = np.random.default_rng(seed)
    worst = {"orth": 0.0, "indicator": 0.0, "parseval": 0.0, "roundtrip": 0.0}
    for m in (8, 16, 32):
        g = Grid2(m)
        X1, X2 = g.points
        K1, K2 = (k.ravel() for k in g.wavenumbers)
        B = np.exp(1j * (np.outer(X1.ravel(), K1) + np.outer(X2.ravel(), K2))) / TWO_PI
        gram = (B.T @ B.conj()) * g.weight
        worst["orth"] = max(worst["orth"], np.abs(gram - np.eye(m * m)).max())
        basis = B.T.reshape(m * m, m, m)
        coeffs = np.stack([forward_fn(b, g) for b in basis]).reshape(m * m, m * m)
        worst["indicator"] = max(worst["indicator"], np.abs(coeffs - np.eye(m * m)).max())
        for _ in range(20):
            u = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            v = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            lhs = np.sum(u * v.conj()) * g.weight
            rhs = np.sum(forward_fn(u, g) * forward_fn(v, g).conj())
            worst["parseval"] = max(worst["parseval"], abs(lhs - rhs) / abs(lhs))
            back = inverse_fn(forward_fn(u, g), g)
            worst["roundtrip"] = max(worst["roundtrip"], np.abs(back - u).max() / np.abs(u).max())
    bound = 1e-12 * tol
    ok = all(v <= bound for v in worst.values())
    meas = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return CriterionResult(1, "faithful discretization", ok, meas, f"all <= {bound:.0e}, < 1 s")


@_timed
@_budget(1.0)
def c2_delta_exactness(tol):
    """On-grid deltas are scaled discrete Diracs; off-grid evaluation converges super-algebraically."""
    g = Grid2(32)
    j = (5, 21)
    x0 = (g.axis[j[0]], g.axis[j[1]])
    s = delta(g, x0).samples().values
    peak = (g.m / TWO_PI) ** 2
    off = np.abs(np.delete(s.ravel(), j[0] * g.m + j[1])).max()
    peak_err = abs(s[j] - peak) / peak
    phi = lambda a, b: np.exp(np.sin(a) + np.cos(b))  # noqa: E731
    y = (0.3, -1.1)
    errs = []
    for m in (16, 32):
        gm = Grid2(m)
        val = delta(gm, y).pair(GridField.from_function(gm, phi))
        errs.append(abs(val - phi(*y)))
    ratio = errs[0] / max(errs[1], 1e-300)
    ok = off <= 1e-10 * tol and peak_err <= 1e-12 * tol and ratio >= 1e2 / tol
    meas = f"off-diagonal {off:.1e}, peak rel err {peak_err:.1e}, errors {errs[0]:.1e} -> {errs[1]:.1e} (ratio {ratio:.1e})"
    return CriterionResult(2, "delta exactness", ok, meas, "off-diagonal <= 1e-10, ratio >= 1e2")


@_timed
@_budget(10.0)
def c3_domain_quadrature(tol):
    """Fourier quadrature of cos(pi r^2/4) on B(0,2), error normalized by the integral of |u|."""
    exact, scale = quadrature_oracle(2.0)
    curve = BoundaryCurve.circle(radius=2.0)
    errs = {}
    for m in (32, 64, 96):
        g = Grid2(m)
        u = GridField.from_function(g, lambda a, b: np.cos(np.pi / 4 * (a * a + b * b)))
        for nl in (128, 256, 512):
            errs[m, nl] = abs(integrate(build_quadrature(curve, g, nl), u) - exact) / scale
    at96 = [errs[96, nl] for nl in (128, 256, 512)]
    mono = all(_decreasing([errs[m, nl] for m in (32, 64, 96)]) for nl in (128, 256, 512))
    spread = max(
        (max(errs[m, nl] for nl in (128, 256, 512)) / min(errs[m, nl] for nl in (128, 256, 512)) - 1)
        for m in (32, 64, 96)
    )
    ok = all(_within(e, 8.73e-6, 10 * tol) for e in at96) and mono and spread < 0.01 * tol
    meas = (
        f"m=96: {', '.join(f'{e:.2e}' for e in at96)}; "
        f"m=32/64/96 at n=512: {errs[32, 512]:.2e}/{errs[64, 512]:.2e}/{errs[96, 512]:.2e}; "
        f"n_line spread {100 * spread:.3f}%"
    )
    return CriterionResult(3, "domain quadrature", ok, meas, "8.73e-06 (x10), monotone in m, spread < 1%")


def _dirichlet_einf(m, n, d, radius=2.0, tf=SYM):
    g = Grid2(m)
    problem, exact = dirichlet_disk(g, radius)
    sol = solve_bvp(problem, sample_boundary(problem.domain, n, d), tf)
    return restrict_and_error(sol, exact), sol.matrix.cond2


@_timed
@_budget(120.0)
def c4_dirichlet_accuracy(tol):
    """Point errors and monotonicity in n for the homogeneous Dirichlet problem on B(0,2).

    The literal unit-disk configuration is also run and reported.
    """
    e128 = _dirichlet_einf(128, 80, 0.4)[0][0]
    col = [_dirichlet_einf(256, n, 0.4)[0][0] for n in (64, 80, 96, 112)]
    unit = [_dirichlet_einf(256, n, 0.4, radius=1.0)[0][0] for n in (64, 80, 96, 112)]
    unit128 = _dirichlet_einf(128, 80, 0.4, radius=1.0)[0][0]
    f = 100 * tol
    ok = _within(e128, 1.94e-7, f) and _within(col[-1], 1.17e-10, f) and _decreasing(col)
    unit_ok = _within(unit128, 1.94e-7, f) and _within(unit[-1], 1.17e-10, f) and _decreasing(unit)
    meas = (
        f"B(0,2): (128,80) {e128:.2e}, m=256 n=64..112 {', '.join(f'{e:.2e}' for e in col)}; "
        f"B(0,1) for reference: (128,80) {unit128:.2e}, m=256 {', '.join(f'{e:.2e}' for e in unit)}"
        f" ({'passes' if unit_ok else 'fails'} the same test)"
    )
    return CriterionResult(4, "Dirichlet accuracy", ok, meas, "1.94e-07 and 1.17e-10 (x100), decreasing in n")


@_timed
@_budget(120.0)
def c5_delta_sweep(tol):
    """Error falls and conditioning grows with the offset distance at m=256, n=64."""
    deltas = (0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
    res = [_dirichlet_einf(256, 64, d) for d in deltas]
    e = [r[0][0] for r in res]
    c = [r[1] for r in res]
    f = 100 * tol
    ok = _decreasing(e) and _increasing(c) and _within(e[0], 9.06e-4, f) and _within(e[-1], 1.42e-9, f)
    meas = f"e_inf {', '.join(f'{v:.2e}' for v in e)}; cond {', '.join(f'{v:.1e}' for v in c)}"
    return CriterionResult(5, "offset sweep", ok, meas, "monotone; endpoints 9.06e-04 and 1.42e-09 (x100)")


@_timed
@_budget(60.0)
def c6_rough_kernel(tol):
    """Dirac sources on the boundary: well conditioned but only ~5e-2 accurate."""
    (e_inf, _), cond = _dirichlet_einf(128, 64, 0.0, tf=TestFunctionSpec(TestFunctionKind.DIRAC))
    ok = _within(cond, 10.9, 2 * tol) and _within(e_inf, 5.49e-2, 10 * tol)
    return CriterionResult(6, "rough-kernel conditioning", ok, f"cond {cond:.2f}, e_inf {e_inf:.2e}",
                           "cond 10.9 (x2), e_inf 5.49e-02 (x10)")


@_timed
@_budget(120.0)
def c7_preconditioning(tol):
    """Conditioning of the smooth, rough and preconditioned matrices at (256,128)."""
    cp, cd, cc = precondition_conds(256, 128, 0.4)
    ok = cp >= 1e5 / tol and cd <= 1e2 * tol and cc <= 25 * tol
    meas = f"cond(M_phi) {cp:.2e}, cond(M_delta) {cd:.2e}, cond(M_delta^-1 M_phi) {cc:.2e}"
    return CriterionResult(7, "preconditioning", ok, meas, ">= 1e+05, <= 1e+02, <= 25")


@_timed
@_budget(300.0)
def c8_kernel_functions(tol):
    """Harmonics (r/2)^k e^{ik theta} on B(0,2): exact at (512,256), degrading with k at (128,80)."""
    curve = BoundaryCurve.circle(radius=2.0)
    ks = range(1, 34)
    fine = kernel_function_resolution(Grid2(512), sample_boundary(curve, 256, 0.4), SYM, 33, harmonics=ks)
    coarse = kernel_function_resolution(Grid2(128), sample_boundary(curve, 80, 0.4), SYM, 33, harmonics=ks)
    fine_max = max(r[2] for r in fine)
    c2 = [r[2] for r in coarse]
    ok = fine_max <= 1e-10 * tol and bool(np.all(np.diff(c2) >= 0)) and _within(c2[-1], 7.05e-2, 10 * tol)
    meas = f"(512,256) max l2 {fine_max:.1e}; (128,80) l2 k=1 {c2[0]:.2e} .. k=33 {c2[-1]:.2e}"
    return CriterionResult(8, "kernel-function resolution", ok, meas,
                           "<= 1e-10; growing in k to 7.05e-02 (x10)")


@_timed
@_budget(120.0)
def c9_neumann(tol):
    """Neumann problem for cos(pi r/2) on B(0,2)."""
    out = []
    for m, n in ((128, 64), (256, 128)):
        g = Grid2(m)
        problem, exact = neumann_disk(g)
        sol = solve_bvp(problem, sample_boundary(problem.domain, n, 0.4), SYM)
        out.append((restrict_and_error(sol, exact)[0], sol.matrix.cond2))
    (e1, c1), (e2, c2) = out
    f = 100 * tol
    ok = (_within(e1, 2.12e-5, f) and _within(e2, 4.41e-10, f)
          and _within(c1, 98.3, 5 * tol) and _within(c2, 3.33e4, 5 * tol))
    meas = f"(128,64) e_inf {e1:.2e} cond {c1:.1f}; (256,128) e_inf {e2:.2e} cond {c2:.2e}"
    return CriterionResult(9, "Neumann accuracy", ok, meas,
                           "2.12e-05, 4.41e-10 (x100); cond 98.3, 3.33e+04 (x5)")


@_timed
@_budget(60.0)
def c10_translation_fast_path(tol, repeats: int = 3):
    """Snapped centres: one box solve plus shifts against n box solves at (256,128)."""
    g = Grid2(256)
    problem, _ = neumann_disk(g)
    sample = nearest_grid_snap(sample_boundary(problem.domain, 128, 0.4), g)
    assemble_matrix(problem, sample, SYM, fast_path=True)  # warm-up (imports, plans)
    direct = [assemble_matrix(problem, sample, SYM, fast_path=False) for _ in range(repeats)]
    fast = [assemble_matrix(problem, sample, SYM, fast_path=True) for _ in range(repeats)]
    Md, Mf = direct[0].entries, fast[0].entries
    diff = np.abs(Md - Mf).max() / np.abs(Md).max()
    speedup = min(d.assembly_seconds for d in direct) / min(f.assembly_seconds for f in fast)
    ok = diff <= 1e-12 * tol and speedup >= 5 / tol and fast[0].assembly == "shifted"
    return CriterionResult(10, "translation fast path", ok,
                           f"max entry difference {diff:.1e} (relative), speed-up {speedup:.1f}x",
                           "<= 1e-12, >= 5x")


CRITERIA = {
    1: c1_faithful_discretization,
    2: c2_delta_exactness,
    3: c3_domain_quadrature,
    4: c4_dirichlet_accuracy,
    5: c5_delta_sweep,
    6: c6_rough_kernel,
    7: c7_preconditioning,
    8: c8_kernel_functions,
    9: c9_neumann,
    10: c10_translation_fast_path,
}


def run_all(tolerance: float = 1.0, only=None, echo: Callable | None = None, seed: int = 0) -> list[CriterionResult]:
    results = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        res = fn(tolerance=tolerance, seed=seed) if k == 1 else fn(tolerance=tolerance)
        if echo:
            echo(res.line())
        results.append(res)
    return results
