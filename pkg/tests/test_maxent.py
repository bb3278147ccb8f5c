import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import (bisect_scalar_dual, central_gradient, central_jacobian,
                     random_instance)

from momentlock import density as dm
from momentlock.errors import (AbsoluteContinuityViolated, DivergedInfeasible,
                               InfeasibleMoments, InvalidParams, SingularHessian,
                               SparseGridWarning, TooFewPoints)
from momentlock.grid import initial_discretization, trapezoid_weights, uniform_grid
from momentlock.maxent import (SolverConfig, dual_gradient, dual_hessian,
                               dual_objective, kl_divergence, log_dual_objective,
                               pinsker_bound, solve_dual)
from momentlock.moments import custom, polynomial, targets_from_density

X3 = np.array([0.0, 0.5, 1.0])
Q3 = np.full(3, 1 / 3)
# mpmath root of sum q exp(lam (x - 0.6)) (x - 0.6) = 0
LAM_STAR = 0.60923652208262896358
P_STAR = [0.23837140660679650928, 0.32325718678640698145, 0.43837140660679650928]
KL_STAR = 0.030228912203639665457


def _solve(q, tvals, tbar, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SparseGridWarning)
        return solve_dual(q, tvals, tbar, SolverConfig(**kw) if kw else None)


def test_three_point_closed_form(kernel_module):
    sol = _solve(Q3, X3, [0.6])
    assert sol.lam[0] == pytest.approx(LAM_STAR, rel=1e-9)
    np.testing.assert_allclose(sol.probs, P_STAR, rtol=1e-10)
    assert sol.kl == pytest.approx(KL_STAR, rel=1e-9)
    assert sol.probs @ X3 == pytest.approx(0.6, abs=1e-12)


def test_three_point_matches_bisection():
    sol = _solve(Q3, X3, [0.6])
    assert sol.lam[0] == pytest.approx(bisect_scalar_dual(Q3, X3, 0.6), abs=1e-9)


def test_duality_gap_vanishes():
    sol = _solve(Q3, X3, [0.6])
    assert -math.log(sol.dual.J_value) == pytest.approx(sol.kl, abs=1e-12)


@pytest.mark.parametrize("lam", [[0.0, 0.0], [0.7, -1.3], [3.0, 2.0]])
def test_gradient_and_hessian_by_differences(lam):
    x = np.linspace(-1, 1, 7)
    q = np.linspace(1, 2, 7) / np.linspace(1, 2, 7).sum()
    tv = np.column_stack([x, x ** 2])
    tbar = np.array([0.1, 0.4])
    J = lambda l: dual_objective(q, tv, tbar, l)  # noqa: E731
    np.testing.assert_allclose(dual_gradient(q, tv, tbar, lam),
                               central_gradient(J, lam), rtol=1e-7, atol=1e-9)
    np.testing.assert_allclose(dual_hessian(q, tv, tbar, lam),
                               central_jacobian(lambda l: dual_gradient(q, tv, tbar, l), lam),
                               rtol=1e-7, atol=1e-9)


def test_log_dual_survives_large_lambda():
    v = log_dual_objective(Q3, X3, [0.6], [1e4])
    assert math.isfinite(v) and v == pytest.approx(1e4 * 0.4 + math.log(1 / 3))


def test_exact_q_is_returned_unchanged(kernel_module):
    tbar = Q3 @ np.column_stack([X3, X3 ** 2])
    sol = _solve(Q3, np.column_stack([X3, X3 ** 2]), tbar)
    assert np.array_equal(sol.probs, Q3)
    assert sol.kl == 0.0 and not np.any(sol.lam)


@pytest.mark.parametrize("tbar", [[1.2], [-0.1]])
def test_outside_hull_is_infeasible(tbar):
    with pytest.raises(InfeasibleMoments):
        _solve(Q3, X3, tbar)


def test_vertex_target_diverges_without_face_reduction():
    tv = np.column_stack([X3, X3 ** 2])
    with pytest.raises(DivergedInfeasible):
        _solve(Q3, tv, [1.0, 1.0])


def test_vertex_target_with_face_reduction():
    tv = np.column_stack([X3, X3 ** 2])
    sol = _solve(Q3, tv, [1.0, 1.0], face_reduction=True)
    assert sol.on_boundary
    np.testing.assert_allclose(sol.probs, [0, 0, 1])


def test_hidden_infeasibility_in_interior_box():
    # every component is strictly inside its box but (0.5, 0.5) is above the parabola chord
    tv = np.column_stack([X3, X3 ** 2])
    with pytest.raises(InfeasibleMoments):
        _solve(Q3, tv, [0.5, 0.6])


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        _solve(np.array([0.5, 0.5]), np.column_stack([[0, 1], [0, 1]]), [0.5, 0.5])


def test_sparse_grid_warns():
    x = np.linspace(0, 1, 4)
    with pytest.warns(SparseGridWarning):
        solve_dual(np.full(4, 0.25), np.column_stack([x, x ** 2]), [0.5, 0.3])


def test_dependent_components_singular():
    x = np.linspace(0, 1, 9)
    tv = np.column_stack([x, 2 * x + 1])
    with pytest.raises(SingularHessian):
        _solve(np.full(9, 1 / 9), tv, [0.4, 1.8])


def test_dimension_mismatch():
    with pytest.raises(InvalidParams):
        solve_dual(Q3, X3, [0.5, 0.5])


def test_bad_config():
    with pytest.raises(InvalidParams):
        SolverConfig(kappa=-1.0)


def test_kl_and_pinsker():
    assert kl_divergence(P_STAR, Q3) == pytest.approx(KL_STAR, rel=1e-12)
    assert pinsker_bound(P_STAR, Q3) >= np.abs(np.subtract(P_STAR, Q3)).sum()
    with pytest.raises(AbsoluteContinuityViolated):
        kl_divergence([0.5, 0.5], [1.0, 0.0])


def test_zero_q_points_stay_zero():
    s = uniform_grid((0, 1), 6)
    q = initial_discretization(dm.beta(2, 4), s, trapezoid_weights(s))
    T = polynomial(3)
    sol = solve_dual(q, T, targets_from_density(dm.beta(2, 4), T))
    assert sol.probs[0] == 0 and sol.probs[-1] == 0


@given(seed=st.integers(0, 10**9), I=st.integers(4, 30), L=st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_random_instances_are_matched(seed, I, L):
    assume(I >= L + 1)
    x, q, tv, tbar = random_instance(np.random.default_rng(seed), I, L)
    sol = _solve(q, tv, tbar)
    assert sol.moment_residual <= 1e-8
    assert sol.probs.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(sol.probs >= 0)
    assert sol.kl >= 0
    assert np.abs(sol.probs - q).sum() <= pinsker_bound(sol.probs, q) + 1e-12
    # the primal optimum is a tilt of q
    logr = np.log(sol.probs / q)
    A = np.column_stack([np.ones(I), tv])
    coef = np.linalg.lstsq(A, logr, rcond=None)[0]
    np.testing.assert_allclose(A @ coef, logr, atol=1e-7)


@given(seed=st.integers(0, 10**9))
@settings(max_examples=25, deadline=None)
def test_affine_reparametrization_invariance(seed):
    rng = np.random.default_rng(seed)
    x, q, tv, tbar = random_instance(rng, 12, 3)
    B = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    c = rng.normal(size=3)
    a = _solve(q, tv, tbar)
    b = _solve(q, tv @ B + c, tbar @ B + c)
    np.testing.assert_allclose(a.probs, b.probs, atol=1e-10)


def test_optimality_against_perturbations():
    rng = np.random.default_rng(3)
    x, q, tv, tbar = random_instance(rng, 10, 2)
    sol = _solve(q, tv, tbar)
    A = np.vstack([np.ones(10), tv.T])
    _, _, vt = np.linalg.svd(A)
    N = vt[3:].T
    for _ in range(50):
        p = sol.probs + N @ rng.normal(scale=1e-3, size=N.shape[1])
        if np.all(p > 0):
            assert kl_divergence(p, q) >= sol.kl - 1e-15


def test_unscaled_path_agrees():
    x, q, tv, tbar = random_instance(np.random.default_rng(11), 15, 2)
    a = _solve(q, tv, tbar)
    b = _solve(q, tv, tbar, scaling=False)
    np.testing.assert_allclose(a.probs, b.probs, atol=1e-9)


def test_custom_components():
    T = custom([np.exp, np.sin])
    s = uniform_grid((0, 1), 6)
    q = initial_discretization(dm.uniform(), s, trapezoid_weights(s))
    t = targets_from_density(dm.uniform(), T)
    sol = solve_dual(q, T, t)
    np.testing.assert_allclose(sol.probs @ T.values(s.points), t.values, atol=1e-12)
