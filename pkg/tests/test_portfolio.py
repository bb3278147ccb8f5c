import math

import numpy as np
import pytest
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import norm

from momentlock.errors import DegenerateDenominator, DomainViolation, InvalidParams
from momentlock.portfolio import (PortfolioProblem, discretize_stock_return,
                                  expected_utility, feasible_interval,
                                  lognormal_excess_moments, optimize_theta,
                                  solve_portfolio, taylor_theta_approx, utility_foc)

BASE = PortfolioProblem()


@pytest.mark.parametrize("kw", [dict(gamma=1.0), dict(gamma=-2.0), dict(sigma=0.0),
                                dict(M=0), dict(L=-1)])
def test_invalid_problem(kw):
    with pytest.raises(InvalidParams):
        PortfolioProblem(**kw)


def test_three_point_trapezoid_optimum_by_brentq():
    p = PortfolioProblem(M=1, L=0)
    x = np.array([-1.0, 0.0, 1.0])
    q = np.array([0.5, 1.0, 0.5]) * norm.pdf(x)
    q /= q.sum()
    X = np.exp(p.mu + p.sigma * x) - p.R2
    foc = lambda t: np.sum(q * (t * X + p.R2) ** -p.gamma * X)  # noqa: E731
    lo, hi = -p.R2 / X.max() * (1 - 1e-9), -p.R2 / X.min() * (1 - 1e-9)
    theta = brentq(foc, lo, hi, xtol=1e-14)
    assert solve_portfolio(p).theta == pytest.approx(theta, abs=1e-10)


@pytest.mark.parametrize("M,L", [(4, 0), (4, 2), (9, 4)])
def test_golden_and_foc_agree(M, L):
    p = PortfolioProblem(M=M, L=L)
    sol = solve_portfolio(p)
    assert sol.theta == pytest.approx(sol.theta_golden, abs=1e-6)
    ret = discretize_stock_return(p)
    assert abs(utility_foc(ret.atoms, ret.probs, p, sol.theta)) < 1e-10


def test_optimum_matches_scipy_bounded_search():
    p = PortfolioProblem(M=9, L=2)
    ret = discretize_stock_return(p)
    lo, hi = feasible_interval(ret.atoms, ret.probs, p)
    res = minimize_scalar(lambda t: -expected_utility(ret.atoms, ret.probs, p, t),
                          bounds=(lo + 1e-6, hi - 1e-6), method="bounded",
                          options={"xatol": 1e-10})
    assert optimize_theta(ret.atoms, ret.probs, p)[0] == pytest.approx(res.x, abs=1e-6)


def test_matched_moments_are_normal():
    ret = discretize_stock_return(PortfolioProblem(M=9, L=4))
    moms = [ret.probs @ ret.x ** k for k in range(1, 5)]
    np.testing.assert_allclose(moms, [0, 1, 0, 3], atol=1e-9)


def test_single_grid_face_case():
    ret = discretize_stock_return(PortfolioProblem(M=1, L=2))
    assert ret.on_boundary
    np.testing.assert_allclose(ret.probs, [0.5, 0.0, 0.5], atol=1e-14)


def test_domain_violation():
    p = BASE
    atoms = np.array([0.8, 1.3])
    with pytest.raises(DomainViolation):
        expected_utility(atoms, [0.5, 0.5], p, 100.0)


def test_zero_probability_atoms_are_ignored():
    p = BASE
    atoms = np.array([0.01, 0.9, 1.2])
    u = expected_utility(atoms, [0.0, 0.5, 0.5], p, 4.0)
    assert u == pytest.approx(expected_utility(atoms[1:], [0.5, 0.5], p, 4.0))


def test_taylor_formula_and_degenerate_denominator():
    mX, vX = lognormal_excess_moments(BASE)
    theta = taylor_theta_approx(BASE, mX, vX)
    assert theta == pytest.approx(BASE.R2 * mX / (3 * vX - mX ** 2))
    with pytest.raises(DegenerateDenominator):
        taylor_theta_approx(BASE, 1.0, 0.1)


def test_lognormal_moments_by_quadrature():
    p = BASE
    x = np.linspace(-12, 12, 200001)
    w = norm.pdf(x) * (x[1] - x[0])
    R1 = np.exp(p.mu + p.sigma * x)
    mX, vX = lognormal_excess_moments(p)
    assert w @ (R1 - p.R2) == pytest.approx(mX, rel=1e-9)
    assert w @ (R1 - w @ R1) ** 2 == pytest.approx(vX, rel=1e-9)


def test_reference_error_uses_unrounded_theta():
    sol = solve_portfolio(PortfolioProblem(M=4, L=0), reference=0.6681)
    assert sol.rel_error_vs_reference == pytest.approx((sol.theta - 0.6681) / 0.6681)
