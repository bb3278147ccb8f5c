"""Discrete point sets and the positive-weight quadrature rules built on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import Density, pdf_eval
from .errors import (DegenerateDiscretization, EvenPointCount, InvalidParams,
                     NonUniformGrid)

SPACING_RTOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteSet:
    points: np.ndarray
    M: int = 0

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidParams("a discrete set needs at least two points")
        if not np.all(np.diff(pts) > 0):
            raise InvalidParams("points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    @property
    def spacing(self) -> float:
        """Common gap of a uniformly spaced set."""
        gaps = np.diff(self.points)
        h = gaps.mean()
        if np.max(np.abs(gaps - h)) > SPACING_RTOL * h:
            raise NonUniformGrid("points are not equally spaced")
        return float(h)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    weights: np.ndarray
    rule_kind: str = "custom"

    def __post_init__(self):
        w = _frozen(self.weights)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidParams("quadrature weights must be finite and nonnegative")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True, eq=False)
class InitialDiscretization:
    """Grid plus reference probabilities ``q`` proportional to ``w * f``."""

    set: DiscreteSet
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(self.probs))

    @property
    def points(self) -> np.ndarray:
        return self.set.points

    @property
    def support_mask(self) -> np.ndarray:
        return self.probs > 0

    def expect(self, g) -> float:
        return float(np.dot(self.probs, np.asarray(g(self.points), dtype=float)))


def uniform_grid(interval, M: int) -> DiscreteSet:
    """``2M + 1`` equally spaced points covering ``[c, d]`` inclusive."""
    c, d = map(float, interval)
    if not c < d or M < 1:
        raise InvalidParams("need c < d and M >= 1")
    h = (d - c) / (2 * M)
    pts = c + h * np.arange(2 * M + 1)
    pts[-1] = d
    return DiscreteSet(pts, M)


def symmetric_grid(M: int, h: float) -> DiscreteSet:
    """Points ``m * h`` for ``m = -M, ..., M``."""
    if M < 1 or not h > 0:
        raise InvalidParams("need M >= 1 and h > 0")
    return DiscreteSet(h * np.arange(-M, M + 1, dtype=float), M)


def trapezoid_weights(s: DiscreteSet) -> QuadratureRule:
    h = s.spacing
    w = np.full(len(s), h)
    w[0] = w[-1] = h / 2
    return QuadratureRule(w, "trapezoid")


def simpson_weights(s: DiscreteSet) -> QuadratureRule:
    if len(s) % 2 == 0:
        raise EvenPointCount("Simpson's rule needs an odd number of points")
    h = s.spacing
    w = np.empty(len(s))
    # 0-based odd index == 1-based even index
    w[1::2] = 4 * h / 3
    w[2::2] = 2 * h / 3
    w[0] = w[-1] = h / 3
    return QuadratureRule(w, "simpson")


def custom_rule(weights) -> QuadratureRule:
    return QuadratureRule(weights, "custom")


RULES = {"trapezoid": trapezoid_weights, "simpson": simpson_weights}


def make_rule(kind: str, s: DiscreteSet) -> QuadratureRule:
    try:
        return RULES[kind](s)
    except KeyError:
        raise InvalidParams(f"unknown rule {kind!r}") from None


def initial_discretization(d: Density, s: DiscreteSet,
                           rule: QuadratureRule) -> InitialDiscretization:
    if rule.weights.shape != s.points.shape:
        raise InvalidParams("weights and points differ in length")
    mass = rule.weights * np.asarray(pdf_eval(d, s.points), dtype=float)
    total = mass.sum()
    if not total > 0:
        raise DegenerateDiscretization("every grid point has zero weight * density")
    return InitialDiscretization(s, mass / total)
