"""Moment-defining functions and their targets."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import functions
from .density import Density, exact_polynomial_moment, expectation_oracle
from .errors import InvalidParams, NonFiniteValue, Unsupported
from .grid import DiscreteSet


@dataclass(frozen=True)
class MomentDefiningFunction:
    """Vector of ``L`` scalar components ``T_1 .. T_L``.

    Polynomial specs have ``T_l(x) = x**l``; custom specs carry callables and,
    when built from the registry, their names (needed for serialization).
    """

    kind: str
    degree: int = 0
    components: Tuple[Callable, ...] = field(default=(), compare=False, repr=False)
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind == "polynomial":
            if self.degree < 1:
                raise InvalidParams("polynomial moment spec needs degree >= 1")
        elif self.kind == "custom":
            if not self.components:
                raise InvalidParams("custom moment spec needs components")
        else:
            raise InvalidParams(f"unknown moment kind {self.kind!r}")

    @property
    def L(self) -> int:
        return self.degree if self.kind == "polynomial" else len(self.components)

    def values(self, points) -> np.ndarray:
        """``(I, L)`` matrix of component values at each point."""
        x = np.asarray(points, dtype=float)
        if self.kind == "polynomial":
            out = np.power.outer(x, np.arange(1, self.degree + 1))
        else:
            out = np.stack([np.broadcast_to(np.asarray(c(x), dtype=float), x.shape)
                            for c in self.components], axis=-1)
        if not np.all(np.isfinite(out)):
            raise NonFiniteValue("moment function is not finite at some point")
        return out

    def to_dict(self) -> dict:
        if self.kind == "polynomial":
            return {"kind": "polynomial", "degree": self.degree}
        if len(self.names) != len(self.components):
            raise Unsupported("only named custom components can be serialized")
        return {"kind": "custom", "components": list(self.names)}

    @classmethod
    def from_dict(cls, data: dict) -> "MomentDefiningFunction":
        if data.get("kind") == "polynomial":
            return polynomial(int(data["degree"]))
        if data.get("kind") == "custom":
            return named(data["components"])
        raise InvalidParams(f"bad moment spec {data!r}")


def polynomial(L: int) -> MomentDefiningFunction:
    return MomentDefiningFunction("polynomial", L)


def custom(components: Sequence[Callable],
           names: Sequence[str] = ()) -> MomentDefiningFunction:
    return MomentDefiningFunction("custom", 0, tuple(components), tuple(names))


def named(names: Sequence[str]) -> MomentDefiningFunction:
    return custom([functions.lookup(n) for n in names], names)


def evaluate_T(T: MomentDefiningFunction, x) -> np.ndarray:
    return T.values(np.asarray([x], dtype=float))[0]


@dataclass(frozen=True, eq=False)
class MomentTargets:
    values: np.ndarray
    source: str = "user"

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def targets_from_density(d: Density, T: MomentDefiningFunction,
                         force_oracle: bool = False) -> MomentTargets:
    if T.kind == "polynomial" and d.kind != "custom" and not force_oracle:
        vals = [exact_polynomial_moment(d, l) for l in range(1, T.L + 1)]
        return MomentTargets(vals, "analytic")
    vals = [expectation_oracle(d, lambda x, l=l: T.values(np.asarray([x]))[0, l])
            for l in range(T.L)]
    return MomentTargets(vals, "oracle")


class Feasibility(enum.Enum):
    FEASIBLE = "feasible"
    UNVERIFIED = "unverified"
    INFEASIBLE = "infeasible"


def feasibility_precheck(T: MomentDefiningFunction, s,
                         targets: MomentTargets,
                         mask: Optional[np.ndarray] = None) -> Feasibility:
    """Componentwise box test of the targets against ``T`` on the grid.

    Strictly inside every box is necessary for interiority; outside any box
    is a certificate of infeasibility; touching a box face is undecided.
    """
    pts = s.points if isinstance(s, DiscreteSet) else np.asarray(s, dtype=float)
    vals = T.values(pts)
    if mask is not None:
        vals = vals[np.asarray(mask, dtype=bool)]
    return box_check(vals, targets.values)


def box_check(vals: np.ndarray, tbar: np.ndarray) -> Feasibility:
    lo, hi = vals.min(axis=0), vals.max(axis=0)
    if np.any(tbar < lo) or np.any(tbar > hi):
        return Feasibility.INFEASIBLE
    if np.all((lo < tbar) & (tbar < hi)):
        return Feasibility.FEASIBLE
    return Feasibility.UNVERIFIED
