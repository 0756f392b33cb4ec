import dataclasses
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boxembed.bvp_solver import (
    BvpProblem,
    FastPathUnavailable,
    KernelFlavor,
    KernelMatrix,
    SingularMatrixError,
    SolveOptions,
    assemble_matrix,
    kernel_function_resolution,
    particular_solution,
    relative_errors,
    restrict_and_error,
    solve_boundary_weights,
    solve_bvp,
)
from boxembed.distributions import TestFunctionSpec
from boxembed.experiments import dirichlet_disk, neumann_disk, precondition_conds
from boxembed.geometry import BoundaryCurve, nearest_grid_snap, sample_boundary
from boxembed.operators import apply_symbol, laplacian_symbol
from boxembed.spectral_core import Grid2, GridField

pytestmark = pytest.mark.filterwarnings("ignore:padding is:UserWarning")

SYM = TestFunctionSpec("sym")
NDERIV = TestFunctionSpec("nderiv", normal=(1.0, 0.0))


@pytest.fixture(scope="module")
def disk128():
    # the Gaussian-corner padding is only resolved to ~1e-3 at m = 64
    grid = Grid2(128)
    problem, exact = dirichlet_disk(grid)
    return grid, problem, exact, sample_boundary(problem.domain, 40, 0.4)


def test_dirichlet_disk_accuracy(disk128):
    grid, problem, exact, sample = disk128
    sol = solve_bvp(problem, sample, SYM)
    e_inf, e_2 = restrict_and_error(sol, exact)
    assert e_inf < 1e-3 and e_2 < 1e-3
    assert sol.residual < 1e-8
    assert not np.iscomplexobj(sol.field.values)


def test_boundary_values_reproduced_at_collocation_points(disk128):
    grid, problem, exact, sample = disk128
    sol = solve_bvp(problem, sample, SYM)
    rows = problem.row_functionals(sample)
    assert np.abs(rows.apply(sol.coeffs)).max() < 1e-9


def test_harmonic_polynomial_with_inhomogeneous_data():
    grid = Grid2(64)
    curve = BoundaryCurve.circle(radius=2.0)
    g = lambda P: P[:, 0] ** 2 - P[:, 1] ** 2  # noqa: E731
    problem = BvpProblem.dirichlet(curve, GridField.constant(grid, 0.0), g)
    sol = solve_bvp(problem, sample_boundary(curve, 48, 0.4), SYM)
    e_inf, _ = restrict_and_error(sol, lambda a, b: a**2 - b**2)
    assert e_inf < 1e-3


def test_column_fields_are_harmonic_inside(disk128):
    grid, problem, exact, sample = disk128
    sol = solve_bvp(problem, sample, SYM)
    inner = np.hypot(*grid.points) < 1.8
    for k in (0, 17):
        col = sol.column_field(k)
        lap = apply_symbol(laplacian_symbol(), col).values
        assert np.abs(lap[inner]).max() < 1e-8 * max(1.0, np.abs(col.values).max())


def test_particular_solution_solves_pde_inside(disk128):
    grid, problem, _, _ = disk128
    v = particular_solution(problem)
    lap = apply_symbol(laplacian_symbol(), v).values
    inner = np.hypot(*grid.points) < 2.2
    assert np.abs(lap[inner] - 1.0).max() < 1e-10


def test_neumann_disk_accuracy():
    grid = Grid2(64)
    problem, exact = neumann_disk(grid)
    sol = solve_bvp(problem, sample_boundary(problem.domain, 48, 0.4), TestFunctionSpec("sym"))
    e_inf, _ = restrict_and_error(sol, exact)
    assert e_inf < 5e-2


@pytest.mark.parametrize("kind", ["dirichlet", "neumann"])
def test_fast_path_matches_direct_assembly(kind):
    grid = Grid2(64)
    problem, _ = (dirichlet_disk(grid) if kind == "dirichlet" else neumann_disk(grid))
    sample = nearest_grid_snap(sample_boundary(problem.domain, 32, 0.5), grid)
    tf = NDERIV if kind == "dirichlet" else SYM
    fast = assemble_matrix(problem, sample, tf, fast_path=True)
    direct = assemble_matrix(problem, sample, tf, fast_path=False)
    assert fast.assembly == "shifted" and direct.assembly == "direct"
    scale = np.abs(direct.entries).max()
    assert np.abs(fast.entries - direct.entries).max() < 1e-11 * scale


def test_fast_path_refused_when_invariance_fails(disk128):
    grid, problem, _, sample = disk128
    with pytest.raises(FastPathUnavailable, match="snapped"):
        assemble_matrix(problem, sample, SYM, fast_path=True)
    snapped = nearest_grid_snap(sample, grid)
    with pytest.raises(FastPathUnavailable, match="projection"):
        assemble_matrix(problem, snapped, SYM, fast_path=True)
    assert assemble_matrix(problem, snapped, SYM).assembly == "direct"


def test_source_centres_inside_domain_rejected(disk128):
    grid, problem, _, sample = disk128
    bad = dataclasses.replace(sample, offsets=0.5 * sample.points)
    with pytest.raises(ValueError, match="inside"):
        assemble_matrix(problem, bad, SYM)


def test_overlapping_padding_warns():
    grid = Grid2(32)
    problem, _ = dirichlet_disk(grid)
    sample = sample_boundary(problem.domain, 16, 1.0)
    with pytest.warns(UserWarning, match="padding"):
        assemble_matrix(problem, sample, SYM)


def test_smooth_flavor_validation(disk128):
    grid, problem, _, sample = disk128
    with pytest.raises(ValueError):
        assemble_matrix(problem, sample, TestFunctionSpec("dirac"), flavor=KernelFlavor.SMOOTH_PHI)
    flat = sample_boundary(problem.domain, 40, 0.0)
    with pytest.raises(ValueError):
        assemble_matrix(problem, flat, SYM, flavor=KernelFlavor.SMOOTH_PHI)


def test_singular_matrix_reports_condition_number():
    M = KernelMatrix(np.ones((3, 3)), KernelFlavor.SMOOTH_PHI)
    with pytest.raises(SingularMatrixError) as info:
        M.solve(np.ones(3))
    assert info.value.cond > 1e15
    assert isinstance(info.value, np.linalg.LinAlgError)
    with pytest.raises(ValueError):
        KernelMatrix(np.ones((2, 3)), KernelFlavor.SMOOTH_PHI)


@settings(max_examples=25)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_weight_solver_properties(n, seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((n, n)) + n * np.eye(n)
    P = r.standard_normal((n, n)) + n * np.eye(n)
    b = r.standard_normal(n)
    w, c = solve_boundary_weights(KernelMatrix(A, KernelFlavor.SMOOTH_PHI), b)
    assert c is None
    np.testing.assert_allclose(A @ w, b, atol=1e-10)
    w2, c2 = solve_boundary_weights(
        KernelMatrix(A, KernelFlavor.SMOOTH_PHI), b, KernelMatrix(P, KernelFlavor.ROUGH_DELTA)
    )
    np.testing.assert_allclose(w2, w, atol=1e-9 * max(1, np.abs(w).max()))
    assert c2 == pytest.approx(np.linalg.cond(np.linalg.solve(P, A)), rel=1e-8)
    with pytest.raises(ValueError):
        solve_boundary_weights(KernelMatrix(A, KernelFlavor.SMOOTH_PHI), np.ones(n + 1))


def test_preconditioned_solve_agrees_with_plain(disk128):
    grid, problem, exact, sample = disk128
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        plain = solve_bvp(problem, sample, SYM)
        pre = solve_bvp(problem, sample, SYM, SolveOptions(precondition=True))
    assert pre.cond_precond is not None
    np.testing.assert_allclose(pre.field.values, plain.field.values, atol=1e-8)


def test_preconditioner_lower_bound():
    # C = M_delta^{-1} M_phi  implies  cond(M_phi) <= cond(M_delta) cond(C)
    c_phi, c_delta, c_pre = precondition_conds(64, 40, 0.4)
    assert c_pre >= c_phi / c_delta * (1 - 1e-8)


def test_kernel_functions_first_harmonics(disk128):
    grid, _, _, sample = disk128
    res = kernel_function_resolution(grid, sample, SYM, 4)
    assert [k for k, *_ in res] == [1, 2, 3, 4]
    assert all(e_inf < 1e-3 for _, e_inf, _ in res)
    with pytest.raises(ValueError):
        kernel_function_resolution(grid, sample, SYM, 21)
    other = sample_boundary(BoundaryCurve.circle(radius=1.0), 16, 0.2)
    with pytest.raises(ValueError):
        kernel_function_resolution(grid, other, SYM, 2)


def test_relative_errors_definition():
    e_inf, e_2 = relative_errors([1.0, 2.0, 2.5], [1.0, 2.0, 2.0])
    assert e_inf == pytest.approx(0.25)
    assert e_2 == pytest.approx(0.5 / 3.0)


def test_boundary_data_shape_checked(disk128):
    grid, _, _, sample = disk128
    p = BvpProblem.dirichlet(sample.curve, GridField.constant(grid, 0.0), np.zeros(3))
    with pytest.raises(ValueError):
        p.boundary_data(sample)
