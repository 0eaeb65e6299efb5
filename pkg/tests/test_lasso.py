import numpy as np
import pytest

from ocksr.errors import DimensionMismatch, EmptyPath
from ocksr.kernel import KernelParams, gram_matrix
from ocksr.lasso import (
    Breakpoint,
    LarsPath,
    SparsityTarget,
    kkt_check,
    lars_path,
    lasso_objective,
    select_by_sparsity,
)

from conftest import cd_lasso, gauss_solve, well_conditioned_pd


def _solution_at(path, delta):
    """Interpolate the piecewise-linear path at penalty ``delta``."""
    bps = path.breakpoints
    for left, right in zip(bps, bps[1:]):
        if right.delta <= delta <= left.delta:
            t = (left.delta - delta) / (left.delta - right.delta)
            return (1 - t) * left.alpha + t * right.alpha
    raise AssertionError(f"delta {delta} outside the path")


def test_scalar_path():
    path = lars_path(np.array([[1.0]]), np.array([1.0]))
    assert path.breakpoints[0].delta == 2.0
    end = path.breakpoints[-1]
    assert end.delta == 0.0
    np.testing.assert_allclose(end.alpha, [1.0])
    np.testing.assert_allclose(_solution_at(path, 1.0), [0.5], rtol=1e-15)


def test_scalar_objective_at_delta_one():
    # (0.5 - 1)^2 + 0.5 = 0.75 for the minimiser; a = 0.5 is where it sits
    path = lars_path(np.array([[1.0]]), np.array([1.0]))
    a = _solution_at(path, 1.0)
    assert lasso_objective(np.array([[1.0]]), [1.0], a, 1.0) == pytest.approx(0.75, rel=1e-15)
    for other in (0.0, 0.25, 0.75, 1.0):
        assert lasso_objective(np.array([[1.0]]), [1.0], [other], 1.0) >= 0.75


def test_objective_hand_value():
    K = np.array([[1.0, 0.5], [0.5, 1.0]])
    # K a - y = [0.75 - 1, 0.375 - 1] -> 0.0625 + 0.390625, plus 0.5 * 0.75
    assert lasso_objective(K, [1.0, 1.0], [0.75, 0.0], 0.5) == pytest.approx(0.828125, rel=1e-15)


def test_objective_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        lasso_objective(np.eye(2), [1.0, 1.0], [1.0, 2.0, 3.0], 0.1)


def test_zero_response_gives_single_breakpoint():
    path = lars_path(np.eye(3), np.zeros(3))
    assert len(path) == 1
    assert path.breakpoints[0].nnz == 0


def test_path_endpoint_is_unregularised_solution(rng):
    for _ in range(20):
        n = int(rng.integers(2, 15))
        K = well_conditioned_pd(rng, n)
        y = rng.uniform(-1, 1, size=n)
        end = lars_path(K, y).breakpoints[-1]
        assert end.delta == 0.0
        np.testing.assert_allclose(end.alpha, gauss_solve(K, y), rtol=0, atol=1e-9)


def test_breakpoints_satisfy_kkt():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 21))
        K = well_conditioned_pd(rng, n)
        y = rng.uniform(-1, 1, size=n)
        path = lars_path(K, y)
        deltas = [bp.delta for bp in path.breakpoints]
        assert all(b < a for a, b in zip(deltas, deltas[1:]))
        for bp in path.breakpoints:
            assert set(np.flatnonzero(bp.alpha)) <= set(bp.active)
            assert kkt_check(K, y, bp.alpha, bp.delta, tol=1e-8), seed


def test_path_matches_coordinate_descent_oracle(rng):
    X = rng.normal(size=(15, 2))
    K = gram_matrix(X, KernelParams(1.0)).matrix
    y = np.ones(15)
    path = lars_path(K, y)
    top = path.breakpoints[0].delta
    for frac in (0.9, 0.5, 0.2, 0.05):
        delta = frac * top
        a = _solution_at(path, delta)
        oracle = cd_lasso(K, y, delta)
        assert lasso_objective(K, y, a, delta) <= lasso_objective(K, y, oracle, delta) + 1e-6
        assert lasso_objective(K, y, a, delta) == pytest.approx(lasso_objective(K, y, oracle, delta), abs=1e-6)


def test_max_active_stops_path(rng):
    K = well_conditioned_pd(rng, 12)
    y = rng.uniform(-1, 1, size=12)
    path = lars_path(K, y, max_active=3)
    assert max(bp.nnz for bp in path.breakpoints) <= 3
    assert path.breakpoints[-1].delta > 0


def test_delta_min_early_stop(rng):
    K = well_conditioned_pd(rng, 10)
    y = rng.uniform(-1, 1, size=10)
    full = lars_path(K, y)
    delta = 0.3 * full.breakpoints[0].delta
    short = lars_path(K, y, delta_min=delta)
    assert short.breakpoints[-1].delta == pytest.approx(delta, rel=1e-12)
    np.testing.assert_allclose(short.breakpoints[-1].alpha, _solution_at(full, delta), atol=1e-9)


def test_max_active_validation():
    with pytest.raises(ValueError):
        lars_path(np.eye(2), [1.0, 1.0], max_active=0)
    with pytest.raises(DimensionMismatch):
        lars_path(np.eye(2), [1.0, 1.0, 1.0])


def test_sparsity_target():
    assert SparsityTarget(0.9).nonzeros(100) == 10
    assert SparsityTarget(0.0).nonzeros(7) == 7
    for bad in (-0.1, 1.0, 1.5):
        with pytest.raises(ValueError):
            SparsityTarget(bad)


def test_select_by_sparsity_exact_cardinality():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 3))
    K = gram_matrix(X, KernelParams(1.0)).matrix
    y = np.ones(40)
    target = SparsityTarget(0.9)
    path = lars_path(K, y, max_active=4)
    coef, bp, skipped = select_by_sparsity(path, target)
    assert not skipped
    assert np.count_nonzero(coef.alpha) == 4
    assert bp is [b for b in path.breakpoints if b.nnz == 4][-1]
    assert kkt_check(K, y, coef.alpha, bp.delta, tol=1e-8)


def test_select_by_sparsity_falls_back_and_flags():
    bps = [
        Breakpoint((), np.zeros(3), 1.0),
        Breakpoint((0,), np.array([0.2, 0.0, 0.0]), 0.5),
        Breakpoint((0, 1, 2), np.array([0.3, 0.1, 0.1]), 0.0),
    ]
    path = LarsPath(bps, 3)
    coef, bp, skipped = select_by_sparsity(path, SparsityTarget(1 / 3))
    assert skipped and bp is bps[1]
    np.testing.assert_array_equal(coef.alpha, [0.2, 0.0, 0.0])


def test_select_by_sparsity_empty():
    with pytest.raises(EmptyPath):
        select_by_sparsity(LarsPath([], 3), SparsityTarget(0.5))


def test_selected_solution_minimises_objective(rng):
    X = rng.normal(size=(25, 2))
    K = gram_matrix(X, KernelParams(0.8)).matrix
    y = np.ones(25)
    coef, bp, _ = select_by_sparsity(lars_path(K, y), SparsityTarget(0.8))
    best = lasso_objective(K, y, coef.alpha, bp.delta)
    for _ in range(200):
        trial = coef.alpha + rng.normal(scale=0.05, size=25)
        assert lasso_objective(K, y, trial, bp.delta) >= best - 1e-12


def test_kkt_report_flags_violation():
    rep = kkt_check(np.eye(2), [1.0, 1.0], [0.0, 0.0], 0.5)
    assert not rep
    assert {v[1] for v in rep.violations} == {"bound"}
    assert kkt_check(np.eye(2), [1.0, 1.0], [0.75, 0.75], 0.5)
