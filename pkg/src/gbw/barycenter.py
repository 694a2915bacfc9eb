"""Weighted Frechet means (barycenters) under the GBW distance.

The barycenter of SPD matrices X_1..X_N with positive weights w_l minimizes
F(A) = sum_l w_l d^2(X_l, A).  At a minimizer the first-order condition

    A^{1/2} M^{-1} A^{1/2} = sum_l w_l (A^{1/2} M^{-1} X_l M^{-1} A^{1/2})^{1/2}

holds, which rearranges into the fixed-point map

    K(A) = M A^{-1/2} (sum_l w_l (A^{1/2} M^{-1} X_l M^{-1} A^{1/2})^{1/2})^2 A^{-1/2} M.

Iterating K from the arithmetic mean keeps F non-increasing and converges
at the scales this library targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import GbwManifold
from .linalg import SpdMatrix, SpdValidationError, _as_spd, _psd_sqrt, _spd_power, _sym

__all__ = ["BarycenterProblem", "BarycenterResult", "barycenter", "optimality_residual"]


@dataclass(frozen=True)
class BarycenterProblem:
    """Weighted mean problem over a GBW manifold.

    Weights must be strictly positive; they are normalized to sum to one.
    """

    manifold: GbwManifold
    points: tuple
    weights: np.ndarray

    def __init__(self, manifold: GbwManifold, points, weights=None):
        pts = tuple(_as_spd(p) for p in points)
        if not pts:
            raise SpdValidationError("barycenter needs at least one point")
        for p in pts:
            if p.dim != manifold.dim:
                raise SpdValidationError(
                    f"point dim {p.dim} != manifold dim {manifold.dim}"
                )
        if weights is None:
            w = np.full(len(pts), 1.0 / len(pts))
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (len(pts),):
                raise SpdValidationError(
                    f"got {len(pts)} points but weight shape {w.shape}"
                )
            if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
                raise SpdValidationError("weights must be finite and positive")
            w = w / w.sum()
        w.flags.writeable = False
        object.__setattr__(self, "manifold", manifold)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def objective(self, a) -> float:
        """F(A) = sum_l w_l d^2(X_l, A)."""
        return float(
            sum(
                w * self.manifold.squared_distance(p, a)
                for w, p in zip(self.weights, self.points)
            )
        )


def _mean_sqrt_term(problem: BarycenterProblem, a_mat: np.ndarray):
    """(A^{1/2}, A^{-1/2}, sum_l w_l (A^{1/2} M^{-1} X_l M^{-1} A^{1/2})^{1/2})."""
    mi = problem.manifold.param.m_inv.mat
    a_rt = _spd_power(a_mat, 0.5)
    a_irt = _spd_power(a_mat, -0.5)
    acc = np.zeros_like(a_mat)
    for w, p in zip(problem.weights, problem.points):
        acc += w * _psd_sqrt(_sym(a_rt @ mi @ p.mat @ mi @ a_rt))
    return a_rt, a_irt, acc


def fixed_point_map(problem: BarycenterProblem, a) -> SpdMatrix:
    """One application of the barycenter fixed-point map K."""
    a_mat = _as_spd(a).mat
    m = problem.manifold.param.m.mat
    a_rt, a_irt, acc = _mean_sqrt_term(problem, a_mat)
    return SpdMatrix(_sym(m @ a_irt @ acc @ acc @ a_irt @ m))


def optimality_residual(problem: BarycenterProblem, a) -> float:
    """Frobenius residual of the first-order barycenter condition at a."""
    a_mat = _as_spd(a).mat
    mi = problem.manifold.param.m_inv.mat
    a_rt, _, acc = _mean_sqrt_term(problem, a_mat)
    return float(np.linalg.norm(_sym(a_rt @ mi @ a_rt) - acc))


@dataclass
class BarycenterResult:
    point: SpdMatrix
    converged: bool
    n_iters: int
    objective_trace: list = field(default_factory=list)
    change_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dim": self.point.dim,
            "point": self.point.mat.tolist(),
            "converged": self.converged,
            "n_iters": self.n_iters,
            "objective_trace": [float(v) for v in self.objective_trace],
            "change_trace": [float(v) for v in self.change_trace],
        }


def barycenter(
    problem: BarycenterProblem,
    tol: float = 1e-12,
    max_iters: int = 1000,
    initial=None,
) -> BarycenterResult:
    """Fixed-point iteration for the weighted GBW barycenter.

    Starts from the weighted arithmetic mean unless ``initial`` is given;
    stops when the relative Frobenius change drops below ``tol``.
    """
    if initial is None:
        a = _sym(
            sum(w * p.mat for w, p in zip(problem.weights, problem.points))
        )
    else:
        a = _as_spd(initial).mat
    objective_trace = [problem.objective(SpdMatrix(a))]
    change_trace: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        nxt = fixed_point_map(problem, a).mat
        change = np.linalg.norm(nxt - a) / max(np.linalg.norm(a), 1e-300)
        a = nxt
        objective_trace.append(problem.objective(SpdMatrix(a)))
        change_trace.append(float(change))
        if change < tol:
            converged = True
            break
    return BarycenterResult(
        point=SpdMatrix(a),
        converged=converged,
        n_iters=it,
        objective_trace=objective_trace,
        change_trace=change_trace,
    )
