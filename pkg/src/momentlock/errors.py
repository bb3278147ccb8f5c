"""Exception hierarchy.

Every error carries a stable type name; the CLI maps the three top-level
families onto exit codes (infeasible moments, solver failure, oracle failure).
"""


class MomentLockError(Exception):
    """Base class for all package errors."""


class InvalidParams(MomentLockError, ValueError):
    pass


class Unsupported(MomentLockError):
    pass


class NoConvergence(MomentLockError):
    """Adaptive quadrature oracle failed to reach its tolerance."""


class NonUniformGrid(MomentLockError, ValueError):
    pass


class EvenPointCount(MomentLockError, ValueError):
    pass


class DegenerateDiscretization(MomentLockError, ValueError):
    pass


class NonFiniteValue(MomentLockError, ValueError):
    pass


class InfeasibleMoments(MomentLockError):
    """Targets cannot be matched on the given grid."""


class TooFewPoints(InfeasibleMoments):
    """Fewer support points than moment constraints plus one."""


class DivergedInfeasible(InfeasibleMoments):
    """Dual iterates blew up: targets are not interior to the convex hull."""


class SolverError(MomentLockError):
    pass


class SingularHessian(SolverError):
    pass


class NotConverged(SolverError):
    pass


class AbsoluteContinuityViolated(MomentLockError, ValueError):
    pass


class DomainViolation(MomentLockError, ValueError):
    pass


class DegenerateDenominator(MomentLockError, ZeroDivisionError):
    pass


class ConfigError(MomentLockError, ValueError):
    pass


class SparseGridWarning(UserWarning):
    """Fewer than twice as many support points as constraints."""
