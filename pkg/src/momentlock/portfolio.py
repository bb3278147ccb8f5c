"""One risky lognormal asset, one riskless bond, CRRA investor."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density import std_normal
from .errors import DegenerateDenominator, DomainViolation, InvalidParams, SparseGridWarning
from .grid import initial_discretization, symmetric_grid, trapezoid_weights, simpson_weights
from .maxent import SolverConfig, solve_dual
from .moments import polynomial, targets_from_density

# converged optimum of the reference parameter set (51-point grid)
REFERENCE_THETA = 0.6681
THETA_TOL = 1e-6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PortfolioProblem:
    gamma: float = 3.0
    mu: float = 0.07
    sigma: float = 0.2
    r: float = 0.01
    M: int = 1
    L: int = 0
    rule: str = "trapezoid"

    def __post_init__(self):
        if not self.gamma > 0 or self.gamma == 1:
            raise InvalidParams("risk aversion must be positive and != 1")
        if not self.sigma > 0 or self.M < 1 or self.L < 0:
            raise InvalidParams("need sigma > 0, M >= 1, L >= 0")

    @property
    def R2(self) -> float:
        return math.exp(self.r)


@dataclass(frozen=True)
class StockReturn:
    atoms: np.ndarray
    probs: np.ndarray
    x: np.ndarray
    on_boundary: bool = False


@dataclass(frozen=True)
class PortfolioSolution:
    theta: float
    utility: float
    theta_golden: float
    rel_error_vs_reference: Optional[float] = None


def discretize_stock_return(p: PortfolioProblem,
                            cfg: Optional[SolverConfig] = None) -> StockReturn:
    """Discretize ``log R1 ~ N(mu, sigma^2)`` on ``{m / sqrt(M)}``.

    With ``L >= 1`` the normal-density quadrature is fine-tuned to match the
    first ``L`` standard normal moments. Targets that can only be matched on
    the boundary of the grid's moment hull are resolved on that face.
    """
    s = symmetric_grid(p.M, 1.0 / math.sqrt(p.M))
    rule = simpson_weights(s) if p.rule == "simpson" else trapezoid_weights(s)
    q = initial_discretization(std_normal(), s, rule)
    probs, boundary = q.probs, False
    if p.L >= 1:
        cfg = cfg or SolverConfig(face_reduction=True)
        T = polynomial(p.L)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SparseGridWarning)
            sol = solve_dual(q, T, targets_from_density(std_normal(), T), cfg)
        probs, boundary = sol.probs, sol.on_boundary
    atoms = np.exp(p.mu + p.sigma * s.points)
    return StockReturn(atoms, np.asarray(probs), s.points, boundary)


def _excess(atoms, p: PortfolioProblem):
    return np.asarray(atoms, dtype=float) - p.R2


def _charged(atoms, probs):
    probs = np.asarray(probs, dtype=float)
    keep = probs > 0
    return np.asarray(atoms, dtype=float)[keep], probs[keep]


def expected_utility(atoms, probs, p: PortfolioProblem, theta: float) -> float:
    """CRRA expected utility of the portfolio; zero-probability atoms are ignored."""
    atoms, probs = _charged(atoms, probs)
    gross = theta * _excess(atoms, p) + p.R2
    if np.any(gross <= 0):
        raise DomainViolation(f"portfolio return nonpositive at theta={theta}")
    return float(np.dot(probs, gross ** (1.0 - p.gamma)) / (1.0 - p.gamma))


def utility_foc(atoms, probs, p: PortfolioProblem, theta: float) -> float:
    """Derivative of expected utility in theta: ``E[(theta X + R2)^-gamma X]``."""
    atoms, probs = _charged(atoms, probs)
    X = _excess(atoms, p)
    gross = theta * X + p.R2
    if np.any(gross <= 0):
        raise DomainViolation(f"portfolio return nonpositive at theta={theta}")
    return float(np.dot(probs, gross ** (-p.gamma) * X))


def feasible_interval(atoms, probs, p: PortfolioProblem):
    """Open interval of theta keeping every charged atom's return positive."""
    X = _excess(atoms, p)[np.asarray(probs) > 0]
    pos, neg = X[X > 0], X[X < 0]
    lo = float(np.max(-p.R2 / pos)) if pos.size else -math.inf
    hi = float(np.min(-p.R2 / neg)) if neg.size else math.inf
    return lo, hi


def _golden_max(f, a, b, tol):
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _bisect(f, a, b, tol):
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def optimize_theta(atoms, probs, p: PortfolioProblem, tol: float = 1e-12):
    """Maximize expected utility over the feasible theta interval.

    Golden-section search locates the optimum; bisection on the first-order
    condition refines it. Returns ``(theta_foc, theta_golden)``.
    """
    lo, hi = feasible_interval(atoms, probs, p)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidParams("one asset dominates; no interior optimal portfolio")
    width = hi - lo
    a, b = lo + 1e-9 * width, hi - 1e-9 * width
    u = lambda t: expected_utility(atoms, probs, p, t)  # noqa: E731
    foc = lambda t: utility_foc(atoms, probs, p, t)  # noqa: E731
    tg = _golden_max(u, a, b, 1e-10 * width)
    if foc(a) <= 0:
        return a, tg
    if foc(b) >= 0:
        return b, tg
    return _bisect(foc, a, b, tol), tg


def solve_portfolio(p: PortfolioProblem, reference: Optional[float] = REFERENCE_THETA,
                    cfg: Optional[SolverConfig] = None) -> PortfolioSolution:
    ret = discretize_stock_return(p, cfg)
    theta, tg = optimize_theta(ret.atoms, ret.probs, p)
    rel = None
    if reference:
        rel = (theta - reference) / reference
    return PortfolioSolution(theta, expected_utility(ret.atoms, ret.probs, p, theta),
                             tg, rel)


def taylor_theta_approx(p: PortfolioProblem, mean_X: float, var_X: float) -> float:
    """Second-order approximation ``R2 E[X] / (gamma Var[X] - E[X]^2)``."""
    den = p.gamma * var_X - mean_X ** 2
    if not den > 0:
        raise DegenerateDenominator("gamma * Var[X] must exceed E[X]^2")
    return p.R2 * mean_X / den


def lognormal_excess_moments(p: PortfolioProblem):
    """Exact mean and variance of ``X = R1 - R2`` under the lognormal model."""
    m1 = math.exp(p.mu + 0.5 * p.sigma ** 2)
    m2 = math.exp(2 * p.mu + 2 * p.sigma ** 2)
    return m1 - p.R2, m2 - m1 ** 2
