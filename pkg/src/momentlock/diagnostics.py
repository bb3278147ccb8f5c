"""Error measurement, Chebyshev improvement factors and convergence studies."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .density import Density, expectation_oracle
from .errors import MomentLockError, SparseGridWarning
from .grid import InitialDiscretization, initial_discretization, make_rule, uniform_grid
from .maxent import MaxEntSolution, SolverConfig, solve_dual
from .moments import MomentDefiningFunction, MomentTargets, polynomial, targets_from_density

SUP_SAMPLES = 100_000


@dataclass(frozen=True)
class ErrorReport:
    e_q: float
    e_p: float
    pinsker_bound_value: float
    sup_g: float
    exact: float
    kl: float

    @property
    def bound_holds(self) -> bool:
        return self.e_p <= self.pinsker_bound_value


def sup_norm(g: Callable, interval, n: int = SUP_SAMPLES) -> float:
    """Sup norm of ``g`` estimated on ``n`` equally spaced samples."""
    c, d = interval
    x = np.linspace(c, d, n)
    return float(np.max(np.abs(g(x))))


def expectation_errors(d: Density, g: Callable, q: InitialDiscretization,
                       sol: MaxEntSolution,
                       exact: Optional[float] = None) -> ErrorReport:
    """Errors of ``E[g]`` under ``Q`` and ``P`` and the Pinsker-chain bound."""
    if exact is None:
        exact = expectation_oracle(d, g)
    gx = np.asarray(g(q.points), dtype=float)
    e_q = abs(exact - float(np.dot(q.probs, gx)))
    e_p = abs(exact - float(np.dot(sol.probs, gx)))
    sup_g = sup_norm(g, d.oracle_interval())
    bound = e_q + sup_g * math.sqrt(2.0 * max(sol.kl, 0.0))
    return ErrorReport(e_q, e_p, bound, sup_g, exact, sol.kl)


def moment_error(q: InitialDiscretization, T: MomentDefiningFunction,
                 targets: MomentTargets) -> float:
    """Euclidean norm of the moment defect of the reference distribution."""
    defect = np.asarray(targets.values) - q.probs @ T.values(q.points)
    return float(np.linalg.norm(defect))


@dataclass(frozen=True)
class ChebyshevFit:
    degree: int
    coefficients: np.ndarray
    nodes: np.ndarray
    interval: tuple
    sup_residual: float

    def __call__(self, x):
        c, d = self.interval
        t = (2.0 * np.asarray(x, dtype=float) - (c + d)) / (d - c)
        return npcheb.chebval(t, self.coefficients)

    @property
    def log10_residual(self) -> float:
        return math.log10(self.sup_residual) if self.sup_residual > 0 else -math.inf


def chebyshev_fit(g: Callable, interval, L: int,
                  samples: int = SUP_SAMPLES) -> ChebyshevFit:
    """Degree-``L`` interpolant of ``g`` at the ``L + 1`` Chebyshev extreme points."""
    if L < 1:
        raise ValueError("degree must be >= 1")
    c, d = map(float, interval)
    j = np.arange(L + 1)
    theta = j * np.pi / L
    nodes = 0.5 * (c + d) + 0.5 * (d - c) * np.cos(theta)
    fx = np.asarray(g(nodes), dtype=float)
    # discrete cosine transform on the extreme points, endpoints halved
    w = np.ones(L + 1)
    w[0] = w[-1] = 0.5
    coef = (2.0 / L) * (np.cos(np.outer(j, theta)) @ (w * fx))
    coef[0] *= 0.5
    coef[-1] *= 0.5
    fit = ChebyshevFit(L, coef, nodes, (c, d), 0.0)
    xs = np.linspace(c, d, samples)
    resid = float(np.max(np.abs(np.asarray(g(xs), dtype=float) - fit(xs))))
    return ChebyshevFit(L, coef, nodes, (c, d), resid)


@dataclass
class StudyRow:
    M: int
    I_M: int
    e_q: float
    e_p: float = math.nan
    kl: float = math.nan
    pinsker_bound: float = math.nan
    moment_residual: float = math.nan
    status: str = "ok"


@dataclass
class ConvergenceStudy:
    rows: List[StudyRow]
    slopes: Dict[str, float] = field(default_factory=dict)
    exact: float = math.nan


def loglog_slope(Ms: Sequence[float], errs: Sequence[float]) -> float:
    """Least-squares slope of ``log err`` against ``log M``."""
    Ms = np.asarray(Ms, dtype=float)
    errs = np.asarray(errs, dtype=float)
    ok = np.isfinite(errs) & (errs > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(Ms[ok]), np.log(errs[ok]), 1)[0])


def discretize(d: Density, rule_kind: str, M: int) -> InitialDiscretization:
    c, e = d.oracle_interval() if d.kind == "std_normal" else d.support
    s = uniform_grid((c, e), M)
    return initial_discretization(d, s, make_rule(rule_kind, s))


def convergence_study(d: Density, g: Callable, rule_kind: str, L: int,
                      M_range: Sequence[int],
                      cfg: Optional[SolverConfig] = None,
                      fit_min_M: Optional[int] = None,
                      exact: Optional[float] = None) -> ConvergenceStudy:
    """Errors of the initial rule and of its moment-matched version per ``M``.

    Solver failures are recorded in the row status rather than raised.
    Slopes are fitted over ``M >= fit_min_M`` (default: upper half of the
    range).
    """
    Ms = sorted(M_range)
    if not Ms:
        raise ValueError("M_range is empty")
    if exact is None:
        exact = expectation_oracle(d, g)
    T = polynomial(L) if L > 0 else None
    targets = targets_from_density(d, T) if T is not None else None
    rows = []
    for M in Ms:
        q = discretize(d, rule_kind, M)
        gx = np.asarray(g(q.points), dtype=float)
        row = StudyRow(M, len(q.set), abs(exact - float(q.probs @ gx)))
        if T is not None:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", SparseGridWarning)
                    sol = solve_dual(q, T, targets, cfg)
            except MomentLockError as exc:
                row.status = type(exc).__name__
            else:
                rep = expectation_errors(d, g, q, sol, exact=exact)
                row.e_p, row.kl = rep.e_p, rep.kl
                row.pinsker_bound = rep.pinsker_bound_value
                row.moment_residual = sol.moment_residual
        rows.append(row)
    if fit_min_M is None:
        fit_min_M = Ms[len(Ms) // 2]
    fit = [r for r in rows if r.M >= fit_min_M]
    slopes = {"e_q": loglog_slope([r.M for r in fit], [r.e_q for r in fit])}
    if T is not None:
        slopes["e_p"] = loglog_slope([r.M for r in fit], [r.e_p for r in fit])
    return ConvergenceStudy(rows, slopes, exact)
