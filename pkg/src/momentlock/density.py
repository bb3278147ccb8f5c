"""Continuous densities on the real line with exact or oracle moments."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import betaln

from .errors import InvalidParams, NoConvergence, Unsupported

# Truncation of infinite supports for the oracle, in standard deviations.
NORMAL_TRUNCATION = 12.0

ORACLE_TOL = 1e-12

KINDS = ("uniform", "beta", "std_normal", "custom")


@dataclass(frozen=True)
class Density:
    """A probability density on an interval (possibly the whole line).

    Parameters
    ----------
    kind : str
        One of ``uniform``, ``beta``, ``std_normal`` or ``custom``.
    params : tuple of float
        Family parameters: ``(a, b)`` for beta, empty otherwise.
    support : tuple of float
        Closed interval ``(c, d)``; ``(-inf, inf)`` for the normal.
    func : callable, optional
        Vectorized pdf for ``custom`` densities.
    """

    kind: str
    params: Tuple[float, ...] = ()
    support: Tuple[float, float] = (0.0, 1.0)
    func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown density kind {self.kind!r}")
        c, d = self.support
        if not c < d:
            raise InvalidParams(f"empty support {self.support}")
        if self.kind == "beta":
            if len(self.params) != 2 or min(self.params) <= 0:
                raise InvalidParams(f"beta needs a, b > 0, got {self.params}")
        if self.kind == "custom" and self.func is None:
            raise InvalidParams("custom density requires a pdf callback")

    @property
    def name(self) -> str:
        if self.kind == "beta":
            a, b = self.params
            return f"beta:{a:g},{b:g}"
        return self.kind

    def pdf(self, x):
        return pdf_eval(self, x)

    def oracle_interval(self) -> Tuple[float, float]:
        c, d = self.support
        if self.kind == "std_normal":
            return (-NORMAL_TRUNCATION, NORMAL_TRUNCATION)
        if not (math.isfinite(c) and math.isfinite(d)):
            raise Unsupported("oracle needs a bounded support for custom densities")
        return (c, d)


def uniform(c: float = 0.0, d: float = 1.0) -> Density:
    return Density("uniform", (), (float(c), float(d)))


def beta(a: float, b: float) -> Density:
    return Density("beta", (float(a), float(b)), (0.0, 1.0))


def std_normal() -> Density:
    return Density("std_normal", (), (-math.inf, math.inf))


def custom(func: Callable, support: Tuple[float, float]) -> Density:
    return Density("custom", (), (float(support[0]), float(support[1])), func)


def parse_density(spec: str) -> Density:
    """Parse ``uniform``, ``uniform:c,d``, ``beta:a,b`` or ``std_normal``."""
    name, _, args = spec.partition(":")
    name = name.strip().lower()
    try:
        vals = [float(v) for v in args.split(",")] if args else []
    except ValueError as exc:
        raise InvalidParams(f"bad density parameters in {spec!r}") from exc
    if name == "uniform":
        return uniform(*vals) if vals else uniform()
    if name == "beta" and len(vals) == 2:
        return beta(*vals)
    if name in ("std_normal", "normal") and not vals:
        return std_normal()
    raise InvalidParams(f"cannot parse density {spec!r}")


def pdf_eval(d: Density, x):
    """Evaluate the density; zero outside the support."""
    x = np.asarray(x, dtype=float)
    c, e = d.support
    inside = (x >= c) & (x <= e)
    if d.kind == "uniform":
        out = np.where(inside, 1.0 / (e - c), 0.0)
    elif d.kind == "std_normal":
        out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    elif d.kind == "beta":
        a, b = d.params
        xc = np.clip(x, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            # 0**0 == 1 keeps the a == 1 / b == 1 endpoints correct
            out = np.power(xc, a - 1.0) * np.power(1.0 - xc, b - 1.0)
        out = np.where(inside, out * math.exp(-betaln(a, b)), 0.0)
    else:
        out = np.where(inside, np.asarray(d.func(x), dtype=float), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def exact_polynomial_moment(d: Density, l: int) -> float:
    """Closed-form E[X**l] for the built-in families."""
    if l < 1:
        raise InvalidParams("moment order must be >= 1")
    if d.kind == "uniform":
        c, e = d.support
        return (e ** (l + 1) - c ** (l + 1)) / ((l + 1) * (e - c))
    if d.kind == "beta":
        a, b = d.params
        m = 1.0
        for j in range(l):
            m *= (a + j) / (a + b + j)
        return m
    if d.kind == "std_normal":
        if l % 2:
            return 0.0
        m = 1.0
        for k in range(l - 1, 0, -2):
            m *= k
        return m
    raise Unsupported("no closed-form moments for custom densities")


def expectation_oracle(d: Density, g: Callable, tol: float = ORACLE_TOL) -> float:
    """Compute the integral of pdf * g by adaptive Gauss-Kronrod quadrature."""
    lo, hi = d.oracle_interval()

    def integrand(x):
        return pdf_eval(d, x) * float(g(x))

    breakpoints = [0.0] if d.kind == "std_normal" else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(
            integrand, lo, hi, epsabs=tol, epsrel=tol, limit=500,
            points=breakpoints, full_output=1,
        )[:3]
    if not math.isfinite(val) or err > max(10 * tol, 1e-10 * abs(val)):
        raise NoConvergence(
            f"oracle stalled: estimate {val!r}, error bound {err:.3g}"
        )
    return val
