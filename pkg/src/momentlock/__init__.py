"""Discretize continuous densities on arbitrary grids with exact moments."""

from ._backend import BACKEND
from .density import (Density, beta, custom, exact_polynomial_moment,
                      expectation_oracle, parse_density, pdf_eval, std_normal,
                      uniform)
from .grid import (DiscreteSet, InitialDiscretization, QuadratureRule,
                   initial_discretization, simpson_weights, symmetric_grid,
                   trapezoid_weights, uniform_grid)
from .maxent import (MaxEntSolution, SolverConfig, dual_gradient,
                     dual_hessian, dual_objective, kl_divergence,
                     pinsker_bound, solve_dual)
from .moments import (Feasibility, MomentDefiningFunction, MomentTargets,
                      evaluate_T, feasibility_precheck, polynomial,
                      targets_from_density)

__version__ = "0.1.0"
