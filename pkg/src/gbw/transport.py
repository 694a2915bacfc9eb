"""Optimal transport between centered Gaussians under an M-weighted cost.

With ground cost ||x - y||^2_{M^{-1}}, the squared W2 distance between
N(0, X) and N(0, Y) is exactly the squared GBW distance, the optimal plan
is the linear pushforward y = T x with

    T = M (X^{-1} # (M^{-1} Y M^{-1})),

and the coupling fidelity term is

    f_tilde(X, Y) = tr((X^{1/2} M^{-1} Y M^{-1} X^{1/2})^{1/2}).

The robust variant maximizes the squared distance over the weight matrix
S = M^{-1} constrained to 0 <= S <= I (Loewner); its square root is still a
metric, and the value is invariant under congruences P with P P^T >= I.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import GbwManifold
from .linalg import (
    EPS_PD,
    GbwParam,
    SpdMatrix,
    SpdValidationError,
    _as_spd,
    _psd_sqrt,
    _psd_trace_sqrt,
    _spd_power,
    _sym,
    geometric_mean,
)

__all__ = [
    "GaussianMeasure",
    "f_tilde",
    "variational_upper_bound",
    "gaussian_w2",
    "transport_plan",
    "transport_cost",
    "weighted_sq_distance",
    "weighted_sq_distance_grad",
    "RobustConstraintSet",
    "AscentConfig",
    "RobustDistanceResult",
    "robust_distance",
]


@dataclass(frozen=True)
class GaussianMeasure:
    """A centered Gaussian, identified with its SPD covariance."""

    cov: SpdMatrix

    def __init__(self, cov):
        object.__setattr__(self, "cov", _as_spd(cov))

    @property
    def dim(self) -> int:
        return self.cov.dim


def _man_of(m) -> GbwManifold:
    if isinstance(m, GbwManifold):
        return m
    if isinstance(m, GbwParam):
        return GbwManifold(m)
    return GbwManifold(GbwParam(m))


def f_tilde(man, x, y) -> float:
    """Coupling fidelity tr((X^{1/2} M^{-1} Y M^{-1} X^{1/2})^{1/2})."""
    man = _man_of(man)
    xm = _as_spd(x).mat
    ym = _as_spd(y).mat
    mi = man.param.m_inv.mat
    xs = _spd_power(xm, 0.5)
    return _psd_trace_sqrt(xs @ mi @ ym @ mi @ xs)


def variational_upper_bound(man, x, y, a) -> tuple[float, float]:
    """The two variational objectives whose minima over SPD A equal f_tilde.

    Returns (arithmetic, geometric) where

        arithmetic = 0.5 tr(X A + M^{-1} Y M^{-1} A^{-1})
        geometric  = sqrt(tr(X A) tr(M^{-1} Y M^{-1} A^{-1}))

    Both are minimized by A* = X^{-1} # (M^{-1} Y M^{-1}).
    """
    man = _man_of(man)
    xm = _as_spd(x).mat
    ym = _as_spd(y).mat
    am = _as_spd(a).mat
    mi = man.param.m_inv.mat
    a_inv = _spd_power(am, -1.0)
    t1 = float(np.trace(xm @ am))
    t2 = float(np.trace(mi @ ym @ mi @ a_inv))
    return 0.5 * (t1 + t2), float(np.sqrt(t1 * t2))


def variational_minimizer(man, x, y) -> SpdMatrix:
    """A* = X^{-1} # (M^{-1} Y M^{-1}), the minimizer of both variational forms."""
    man = _man_of(man)
    xm = _as_spd(x).mat
    ym = _as_spd(y).mat
    mi = man.param.m_inv.mat
    return geometric_mean(_spd_power(xm, -1.0), _sym(mi @ ym @ mi))


def gaussian_w2(mu: GaussianMeasure, nu: GaussianMeasure, m) -> float:
    """Squared W2 distance between centered Gaussians under the M^{-1} cost.

    Coincides with the squared GBW distance of the covariances.
    """
    man = _man_of(m)
    return man.squared_distance(mu.cov, nu.cov)


def transport_plan(x, y, m) -> np.ndarray:
    """The optimal map T = M (X^{-1} # (M^{-1} Y M^{-1})); pushes N(0,X) to N(0,Y)."""
    man = _man_of(m)
    xm = _as_spd(x).mat
    ym = _as_spd(y).mat
    mi = man.param.m_inv.mat
    core = geometric_mean(_spd_power(xm, -1.0), _sym(mi @ ym @ mi)).mat
    return man.param.m.mat @ core


def transport_cost(x, y, m) -> float:
    """E ||x - T x||^2_{M^{-1}} evaluated in closed form.

    Equals tr(M^{-1}X) + tr(M^{-1}Y) - 2 tr(M^{-1} T X), which matches the
    squared GBW distance.
    """
    man = _man_of(m)
    xm = _as_spd(x).mat
    ym = _as_spd(y).mat
    mi = man.param.m_inv.mat
    t = transport_plan(x, y, man)
    return float(np.trace(mi @ xm) + np.trace(mi @ ym) - 2.0 * np.trace(mi @ t @ xm))


def weighted_sq_distance(x, y, s) -> float:
    """Squared GBW distance with weight matrix S in place of M^{-1}.

    Valid for any symmetric PSD S (possibly rank deficient):
    tr(S X) + tr(S Y) - 2 tr((X^{1/2} S Y S X^{1/2})^{1/2}), floored at 0.
    """
    xm = np.asarray(x, dtype=float) if not isinstance(x, SpdMatrix) else x.mat
    ym = np.asarray(y, dtype=float) if not isinstance(y, SpdMatrix) else y.mat
    sm = _sym(np.asarray(s, dtype=float))
    xs = _spd_power(_sym(xm), 0.5)
    cross = _psd_trace_sqrt(xs @ sm @ ym @ sm @ xs)
    return max(float(np.trace(sm @ xm) + np.trace(sm @ ym)) - 2.0 * cross, 0.0)


def weighted_sq_distance_grad(x, y, s) -> np.ndarray:
    """Gradient in S of ``weighted_sq_distance``.

    With Z = X^{1/2} S Y S X^{1/2}:
        grad = X + Y - 2 {Y S X^{1/2} Z^{-1/2} X^{1/2}}_S.
    """
    xm = np.asarray(x, dtype=float) if not isinstance(x, SpdMatrix) else x.mat
    ym = np.asarray(y, dtype=float) if not isinstance(y, SpdMatrix) else y.mat
    sm = _sym(np.asarray(s, dtype=float))
    xs = _spd_power(_sym(xm), 0.5)
    z = _sym(xs @ sm @ ym @ sm @ xs)
    w, q = np.linalg.eigh(z)
    w = np.clip(w, 1e-40 * max(float(w[-1]), 1e-40), None)
    z_irt = (q * (1.0 / np.sqrt(w))) @ q.T
    return xm + ym - 2.0 * _sym(ym @ sm @ xs @ z_irt @ xs)


@dataclass(frozen=True)
class RobustConstraintSet:
    """Loewner interval 0 <= S <= upper * I for the robust weight matrix."""

    dim: int
    upper: float = 1.0

    def project(self, s) -> np.ndarray:
        """Spectral projection: clamp eigenvalues into [EPS_PD, upper]."""
        w, q = np.linalg.eigh(_sym(np.asarray(s, dtype=float)))
        w = np.clip(w, EPS_PD, self.upper)
        return _sym((q * w) @ q.T)

    def contains(self, s, slack: float = 1e-10) -> bool:
        w = np.linalg.eigvalsh(_sym(np.asarray(s, dtype=float)))
        return bool(w[0] >= -slack and w[-1] <= self.upper + slack)


@dataclass(frozen=True)
class AscentConfig:
    step0: float = 1e-2
    max_iters: int = 500
    tol: float = 1e-10
    max_halvings: int = 30


@dataclass
class RobustDistanceResult:
    """Best-found value of the robust maximization with its trace."""

    value: float
    maximizer: np.ndarray
    trace: list = field(default_factory=list)
    converged: bool = False

    @property
    def distance(self) -> float:
        return float(np.sqrt(max(self.value, 0.0)))


def robust_distance(
    x,
    y,
    constraints: RobustConstraintSet | None = None,
    config: AscentConfig | None = None,
) -> RobustDistanceResult:
    """Worst-case squared distance over the weight set 0 <= S <= I.

    Projected gradient ascent from S = I with backtracking, so the recorded
    objective trace is non-decreasing.  The result is the best value found;
    the maximization is not certified globally optimal.
    """
    xm = _as_spd(x).mat
    ym = _as_spd(y).mat
    if xm.shape != ym.shape:
        raise SpdValidationError(f"dimension mismatch: {xm.shape} vs {ym.shape}")
    n = xm.shape[0]
    cset = constraints if constraints is not None else RobustConstraintSet(n)
    if cset.dim != n:
        raise SpdValidationError(f"constraint dim {cset.dim} != matrix dim {n}")
    cfg = config if config is not None else AscentConfig()
    s = cset.project(np.eye(n) * cset.upper)
    val = weighted_sq_distance(xm, ym, s)
    trace = [val]
    converged = False
    for _ in range(cfg.max_iters):
        grad = weighted_sq_distance_grad(xm, ym, s)
        step = cfg.step0
        moved = False
        for _ in range(cfg.max_halvings):
            cand = cset.project(s + step * grad)
            cand_val = weighted_sq_distance(xm, ym, cand)
            if cand_val >= val:
                change = np.linalg.norm(cand - s) / max(1.0, np.linalg.norm(s))
                s, val, moved = cand, cand_val, True
                break
            step *= 0.5
        trace.append(val)
        if not moved:
            converged = True  # no ascent direction left at backtracking floor
            break
        if change < cfg.tol:
            converged = True
            break
    return RobustDistanceResult(value=val, maximizer=s, trace=trace, converged=converged)
