"""Minimum-KL fine-tuning of a discretization subject to exact moments.

The primal problem over the grid probabilities is solved through its
unconstrained dual: minimize ``J(lam) = sum_i q_i exp(<lam, T_i - Tbar>)`` by
a Newton iteration regularized with ``kappa * I``, then tilt ``q`` by the
minimizer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular

from ._backend import BACKEND, kernels
from .errors import (AbsoluteContinuityViolated, DivergedInfeasible,
                     InfeasibleMoments, InvalidParams, NotConverged,
                     SingularHessian, SparseGridWarning, TooFewPoints)
from .grid import InitialDiscretization
from .moments import (Feasibility, MomentDefiningFunction, MomentTargets,
                      box_check)

RESIDUAL_TOL = 1e-8
# relative eigenvalue floor of the (standardized) Hessian at the start
SINGULAR_RTOL = 1e-13
FACE_RTOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    kappa: float = 1e-7
    stop_tol: float = 1e-10
    grad_tol: float = 1e-9
    max_iters: int = 200
    lambda_blowup: float = 1e6
    scaling: bool = True
    max_halvings: int = 30
    kappa_max: float = 1e-3
    # restrict to the grid face when a target sits on its box boundary
    face_reduction: bool = False

    def __post_init__(self):
        for name in ("kappa", "stop_tol", "grad_tol", "max_iters",
                     "lambda_blowup", "kappa_max"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"solver setting {name} must be positive")


@dataclass(frozen=True)
class DualState:
    lam: np.ndarray
    J_value: float
    grad_norm: float
    iterations: int


@dataclass(frozen=True)
class MaxEntSolution:
    probs: np.ndarray
    dual: DualState
    kl: float
    moment_residual: float
    q: np.ndarray = field(repr=False)
    on_boundary: bool = False
    backend: str = BACKEND

    @property
    def lam(self) -> np.ndarray:
        return self.dual.lam

    @property
    def iterations(self) -> int:
        return self.dual.iterations


def _probs(q) -> np.ndarray:
    if isinstance(q, InitialDiscretization):
        return np.asarray(q.probs, dtype=float)
    return np.asarray(q, dtype=float)


def _centered(q, tvals, targets, lam):
    q = np.ascontiguousarray(_probs(q))
    tvals = np.asarray(tvals, dtype=float)
    if tvals.ndim == 1:
        tvals = tvals[:, None]
    tbar = np.asarray(getattr(targets, "values", targets), dtype=float).reshape(-1)
    lam = np.ascontiguousarray(np.asarray(lam, dtype=float).reshape(-1))
    if tvals.shape != (q.size, tbar.size) or lam.size != tbar.size:
        raise InvalidParams("dimension mismatch between q, T values, targets and lambda")
    return q, np.ascontiguousarray(tvals - tbar), lam


def log_dual_objective(q, tvals, targets, lam) -> float:
    """``log J(lam)``, finite even where ``J`` itself would overflow."""
    return kernels.log_dual(*_centered(q, tvals, targets, lam))


def dual_objective(q, tvals, targets, lam) -> float:
    return math.exp(log_dual_objective(q, tvals, targets, lam))


def dual_gradient(q, tvals, targets, lam) -> np.ndarray:
    _, m, g, _ = kernels.dual_terms(*_centered(q, tvals, targets, lam))
    return math.exp(m) * g


def dual_hessian(q, tvals, targets, lam) -> np.ndarray:
    _, m, _, h = kernels.dual_terms(*_centered(q, tvals, targets, lam))
    return math.exp(m) * h


def kl_divergence(p, q) -> float:
    """``sum p log(p / q)`` with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pos = p > 0
    if np.any(pos & (q <= 0)):
        raise AbsoluteContinuityViolated("p puts mass where q has none")
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))


def pinsker_bound(p, q) -> float:
    """Upper bound ``sqrt(2 KL)`` on the L1 distance between p and q."""
    return math.sqrt(2.0 * max(kl_divergence(p, q), 0.0))


def _newton(q: np.ndarray, D: np.ndarray, cfg: SolverConfig):
    """Minimize the dual over ``lam`` for centered values ``D``.

    Returns ``(lam, log_J, grad_norm, iterations)``; ``lam`` is exactly zero
    when ``q`` already satisfies the constraints.
    """
    L = D.shape[1]
    lam = np.zeros(L)
    eye = np.eye(L)
    norms = []
    for it in range(1, cfg.max_iters + 1):
        Jt, m, g, H = kernels.dual_terms(q, D, lam)
        log_J = m + math.log(Jt)
        gnorm = float(np.linalg.norm(g / Jt))
        if it == 1:
            ev = np.linalg.eigvalsh(H / Jt)
            if ev[0] <= SINGULAR_RTOL * max(ev[-1], 1.0):
                raise SingularHessian(
                    "moment components are affinely dependent on the support"
                )
        kappa = cfg.kappa
        while True:
            try:
                factor = cho_factor(kappa * math.exp(-m) * eye + H)
                break
            except (LinAlgError, ValueError):
                kappa *= 10
                if kappa > cfg.kappa_max:
                    raise SingularHessian("regularized Hessian is not positive definite") from None
        step = -cho_solve(factor, g)
        step_norm = float(np.linalg.norm(step))
        if not np.all(np.isfinite(step)):
            raise DivergedInfeasible("Newton step overflowed")

        if step_norm < cfg.stop_tol and gnorm <= cfg.grad_tol:
            if it == 1:
                # already exact under q: keep lam at zero so P == Q
                return lam, log_J, gnorm, it
            lam = lam + step
            log_J = kernels.log_dual(q, D, lam)
            return lam, log_J, gnorm, it

        t = 1.0
        slack = 4 * np.finfo(float).eps * max(1.0, abs(log_J))
        for _ in range(cfg.max_halvings):
            trial = lam + t * step
            if kernels.log_dual(q, D, trial) <= log_J + slack:
                break
            t *= 0.5
        else:
            if gnorm <= cfg.grad_tol:
                return lam, log_J, gnorm, it
            raise NotConverged("backtracking could not decrease the dual objective")
        lam = trial
        norms.append(float(np.linalg.norm(lam)))
        if norms[-1] > cfg.lambda_blowup:
            raise DivergedInfeasible(
                f"|lambda| = {norms[-1]:.3g} exceeds {cfg.lambda_blowup:g}; "
                "targets are not interior to the convex hull of T on the grid"
            )
    tail = norms[-10:]
    if len(tail) > 1 and all(b > a for a, b in zip(tail, tail[1:])):
        raise DivergedInfeasible(
            f"no convergence after {cfg.max_iters} iterations with |lambda| still growing"
        )
    raise NotConverged(f"no convergence after {cfg.max_iters} iterations")


def _standardize(q, D, cfg):
    """Affinely whiten ``D`` so its covariance under ``q`` is the identity.

    Returns the transformed values and the upper-triangular factor ``R``
    with ``D_whitened = D @ inv(R)``; dual variables map back as
    ``lam = inv(R) @ lam_whitened``.
    """
    L = D.shape[1]
    if not cfg.scaling:
        return D, np.eye(L)
    centered = np.sqrt(q)[:, None] * (D - q @ D)
    R = np.linalg.qr(centered, mode="r")
    diag = np.abs(np.diag(R))
    if np.any(diag <= SINGULAR_RTOL * max(diag.max(), 1e-300)):
        raise SingularHessian("moment components are affinely dependent on the support")
    Dw = solve_triangular(R, D.T, trans="T", lower=False).T
    return np.ascontiguousarray(Dw), R


def _unscale(R, lam_s):
    return solve_triangular(R, lam_s, lower=False)


def _face(vals: np.ndarray, tbar: np.ndarray):
    """Shrink to the points that can carry mass when targets touch box faces.

    Returns the boolean selection over rows of ``vals`` and the indices of the
    components that still vary on the selection.
    """
    keep = np.ones(vals.shape[0], dtype=bool)
    comps = list(range(vals.shape[1]))
    changed = True
    while changed:
        changed = False
        for l in list(comps):
            col = vals[keep, l]
            lo, hi = col.min(), col.max()
            tol = FACE_RTOL * max(1.0, abs(lo), abs(hi))
            if tbar[l] < lo - tol or tbar[l] > hi + tol:
                raise InfeasibleMoments(f"target {l + 1} lies outside the grid values")
            if hi - lo <= tol:
                comps.remove(l)
                changed = True
            elif tbar[l] <= lo + tol:
                keep &= vals[:, l] <= lo + tol
                changed = True
            elif tbar[l] >= hi - tol:
                keep &= vals[:, l] >= hi - tol
                changed = True
    return keep, comps


def _solve_on_face(q, tvals, tbar, mask, cfg):
    idx = np.flatnonzero(mask)
    keep, comps = _face(tvals[idx], tbar)
    sub = idx[keep]
    qs = q[sub] / q[sub].sum()
    lam = np.zeros(tbar.size)
    if comps:
        D = tvals[np.ix_(sub, comps)] - tbar[comps]
        # an affinely independent basis for what still varies on the face
        centered = D - qs @ D
        _, sv, vt = np.linalg.svd(centered, full_matrices=False)
        rank = int(np.sum(sv > 1e-10 * sv[0]))
        if sub.size < rank + 1:
            raise TooFewPoints("face has fewer points than independent constraints")
        basis = vt[:rank].T
        Dr, R = _standardize(qs, np.ascontiguousarray(D @ basis), cfg)
        lam_r, _, gnorm, iters = _newton(np.ascontiguousarray(qs), Dr, cfg)
        p_sub = kernels.tilt(np.ascontiguousarray(qs), Dr, lam_r)
        lam[comps] = basis @ _unscale(R, lam_r)
    else:
        p_sub, gnorm, iters = qs, 0.0, 0
    p = np.zeros(q.size)
    p[sub] = p_sub
    return p, lam, gnorm, iters


def solve_dual(q: Union[InitialDiscretization, np.ndarray],
               T: Union[MomentDefiningFunction, np.ndarray],
               targets: Union[MomentTargets, np.ndarray],
               cfg: Optional[SolverConfig] = None,
               points: Optional[np.ndarray] = None) -> MaxEntSolution:
    """Fine-tune ``q`` to the closest distribution (in KL) matching ``targets``.

    Parameters
    ----------
    q : InitialDiscretization or array
        Reference probabilities on the grid.
    T : MomentDefiningFunction or array
        Either the moment function (evaluated at the grid points) or a
        precomputed ``(I, L)`` matrix of its values.
    targets : MomentTargets or array
        Moments to match exactly.
    cfg : SolverConfig, optional
    points : array, optional
        Grid points, required when ``q`` is a bare array and ``T`` a function.

    Raises
    ------
    TooFewPoints, InfeasibleMoments, DivergedInfeasible
        The targets cannot be matched in the interior.
    SingularHessian, NotConverged
        Numerical failure of the Newton iteration.
    """
    cfg = cfg or SolverConfig()
    qv = _probs(q)
    if isinstance(T, MomentDefiningFunction):
        if points is None:
            if not isinstance(q, InitialDiscretization):
                raise InvalidParams("points are needed to evaluate T")
            points = q.points
        tvals = T.values(points)
    else:
        tvals = np.asarray(T, dtype=float)
        if tvals.ndim == 1:
            tvals = tvals[:, None]
    tbar = np.asarray(getattr(targets, "values", targets), dtype=float).reshape(-1)
    if tvals.shape != (qv.size, tbar.size):
        raise InvalidParams("T values and targets do not match the grid")
    if np.any(qv < 0) or not qv.sum() > 0:
        raise InvalidParams("reference probabilities must be nonnegative")

    L = tbar.size
    mask = qv > 0
    n_eff = int(mask.sum())
    if n_eff < L + 1:
        raise TooFewPoints(
            f"{n_eff} support points cannot satisfy {L} moments plus normalization"
        )
    if n_eff < 2 * (L + 1):
        warnings.warn(
            f"{n_eff} support points for {L + 1} constraints; the matched "
            "distribution may be far from the reference",
            SparseGridWarning, stacklevel=2,
        )
    verdict = box_check(tvals[mask], tbar)
    if verdict is Feasibility.INFEASIBLE:
        raise InfeasibleMoments("targets lie outside the range of T on the grid")

    on_boundary = False
    if cfg.face_reduction and verdict is Feasibility.UNVERIFIED:
        keep, comps = _face(tvals[mask], tbar)
        on_boundary = not keep.all() or len(comps) < L
    if on_boundary:
        p, lam, gnorm, iters = _solve_on_face(qv, tvals, tbar, mask, cfg)
    else:
        qm = np.ascontiguousarray(qv[mask])
        D, R = _standardize(qm, np.ascontiguousarray(tvals[mask] - tbar), cfg)
        lam_s, _, gnorm, iters = _newton(qm, D, cfg)
        p = np.zeros(qv.size)
        if not np.any(lam_s):
            p[mask] = qm
        else:
            p[mask] = kernels.tilt(qm, D, lam_s)
        lam = _unscale(R, lam_s)

    residual = float(np.max(np.abs(p @ tvals - tbar)))
    if residual > RESIDUAL_TOL:
        raise NotConverged(f"moment residual {residual:.3g} after convergence")
    log_J = log_dual_objective(qv, tvals, tbar, lam)
    state = DualState(lam, math.exp(log_J), gnorm, iters)
    return MaxEntSolution(p, state, kl_divergence(p, qv), residual, qv,
                          on_boundary)
