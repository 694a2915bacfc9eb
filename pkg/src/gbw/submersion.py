"""Curvature of the GBW manifold through its Riemannian submersion.

The manifold is the image of the map

    pi(P) = M^{1/2} P P^T M^{1/2}

from invertible matrices with a right O(n) symmetry.  Tangents at P split
into a vertical part (kernel of D pi) and a horizontal part (its metric
complement); sectional curvature of the quotient follows O'Neill's formula
and depends only on the vertical part of the bracket of horizontal lifts.

For P with singular values sigma_1 >= ... >= sigma_n the sectional
curvature of the plane spanned by horizontal U~, V~ is

    K = 3 / Q(U~, V~) * sum_ij  sigma_i^2 C_ij^2 / (sigma_i^2 + sigma_j^2)^2,

where C = V^T (V~^T U~ - U~^T V~) V from the SVD P = U S V^T and
Q(U~, V~) = |U~|^2 |V~|^2 - <U~, V~>^2 normalizes non-orthonormal spans.
Curvature is bounded below by 0 (flat planes exist through every point)
and above by 3 / (sigma_n^2 + sigma_{n-1}^2), attained by an explicit pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GbwManifold
from .linalg import (
    SingularOperatorError,
    SpdMatrix,
    SpdValidationError,
    SymMatrix,
    _as_spd,
    _gen_lyap_core,
    _spd_power,
    _sym,
)

__all__ = [
    "FiberPoint",
    "fiber_point",
    "pushforward",
    "differential",
    "horizontal_project",
    "vertical_project",
    "horizontal_lift",
    "sectional_curvature",
    "CurvatureBounds",
    "curvature_bounds",
]

# Horizontality check slack, relative to the tangent norm.
HORIZONTAL_RTOL = 1e-8


@dataclass(frozen=True)
class FiberPoint:
    """An invertible matrix P in the fiber over pi(P)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise SpdValidationError(f"fiber point must be square, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise SpdValidationError("fiber point has non-finite entries")
        s = np.linalg.svd(p, compute_uv=False)
        if s[-1] <= 1e-13 * s[0] or s[0] == 0.0:
            raise SingularOperatorError("fiber point is numerically singular")
        frozen = np.array(p)
        frozen.flags.writeable = False
        object.__setattr__(self, "p", frozen)

    @property
    def dim(self) -> int:
        return self.p.shape[0]


def fiber_point(man: GbwManifold, x) -> FiberPoint:
    """Canonical fiber representative P = M^{-1/2} X^{1/2} over x."""
    xs = _as_spd(x)
    return FiberPoint(man.param.m_invsqrt.mat @ _spd_power(xs.mat, 0.5))


def pushforward(man: GbwManifold, p: FiberPoint) -> SpdMatrix:
    """pi(P) = M^{1/2} P P^T M^{1/2}."""
    ms = man.param.m_sqrt.mat
    return SpdMatrix(_sym(ms @ p.p @ p.p.T @ ms))


def differential(man: GbwManifold, p: FiberPoint, u: np.ndarray) -> SymMatrix:
    """D pi(P)[U] = M^{1/2} (U P^T + P U^T) M^{1/2}."""
    ms = man.param.m_sqrt.mat
    u = np.asarray(u, dtype=float)
    return SymMatrix(_sym(ms @ (u @ p.p.T + p.p @ u.T) @ ms))


def _split(man: GbwManifold, p: FiberPoint, u: np.ndarray):
    """Horizontal and vertical parts of an ambient tangent U at P."""
    u = np.asarray(u, dtype=float)
    ms = man.param.m_sqrt.mat
    mis = man.param.m_invsqrt.mat
    pi_p = pushforward(man, p)
    pi_inv = _spd_power(pi_p.mat, -1.0)
    # horizontal: M^{1/2} S M^{1/2} P with  M S pi(P) + pi(P) S M = D pi(P)[U]
    rhs_sym = _sym(ms @ (u @ p.p.T + p.p @ u.T) @ ms)
    s = _sym(_gen_lyap_core(man.param.m.mat, _spd_power(pi_p.mat, -0.5), rhs_sym, 0.0))
    u_h = ms @ s @ ms @ p.p
    # vertical: M^{-1/2} K M^{-1/2} P^{-T} with skew K solving
    # M^{-1} K pi(P)^{-1} + pi(P)^{-1} K M^{-1} = M^{-1/2}(U P^{-1} - P^{-T} U^T) M^{-1/2}
    p_inv = np.linalg.inv(p.p)
    rhs_skew = mis @ (u @ p_inv - p_inv.T @ u.T) @ mis
    rhs_skew = 0.5 * (rhs_skew - rhs_skew.T)
    k = _gen_lyap_core(
        man.param.m_inv.mat, _spd_power(pi_inv, -0.5), rhs_skew, 0.0
    )
    k = 0.5 * (k - k.T)
    u_v = mis @ k @ mis @ p_inv.T
    return u_h, u_v, s, k


def horizontal_project(man: GbwManifold, p: FiberPoint, u) -> np.ndarray:
    """Horizontal part of the ambient tangent U at P."""
    u_h, _, _, _ = _split(man, p, u)
    return u_h


def vertical_project(man: GbwManifold, p: FiberPoint, u) -> np.ndarray:
    """Vertical part of the ambient tangent U at P (kernel of D pi)."""
    _, u_v, _, _ = _split(man, p, u)
    return u_v


def horizontal_lift(man: GbwManifold, p: FiberPoint, u) -> np.ndarray:
    """Horizontal lift at P of a tangent U (symmetric) at pi(P).

    The lift is M^{1/2} S M^{1/2} P where S solves
    M S pi(P) + pi(P) S M = U.
    """
    us = u if isinstance(u, SymMatrix) else SymMatrix(u)
    ms = man.param.m_sqrt.mat
    pi_p = pushforward(man, p)
    s = _sym(
        _gen_lyap_core(man.param.m.mat, _spd_power(pi_p.mat, -0.5), us.mat, 0.0)
    )
    return ms @ s @ ms @ p.p


def _check_horizontal(man: GbwManifold, p: FiberPoint, u: np.ndarray, name: str):
    nrm = np.linalg.norm(u)
    if nrm == 0.0:
        raise SpdValidationError(f"{name} must be nonzero")
    vert = vertical_project(man, p, u)
    if np.linalg.norm(vert) > HORIZONTAL_RTOL * nrm:
        raise SpdValidationError(
            f"{name} is not horizontal: vertical residual "
            f"{np.linalg.norm(vert):.3e} vs norm {nrm:.3e}"
        )


def sectional_curvature(man: GbwManifold, p: FiberPoint, u_tilde, v_tilde) -> float:
    """Sectional curvature of the plane spanned by two horizontal tangents.

    Inputs must be horizontal at p (checked through the vertical residual)
    and span a plane; they need not be orthonormal.
    """
    u = np.asarray(u_tilde, dtype=float)
    v = np.asarray(v_tilde, dtype=float)
    _check_horizontal(man, p, u, "u_tilde")
    _check_horizontal(man, p, v, "v_tilde")
    nu2 = float(np.sum(u * u))
    nv2 = float(np.sum(v * v))
    uv = float(np.sum(u * v))
    q = nu2 * nv2 - uv * uv
    if q <= 1e-12 * nu2 * nv2:
        raise SpdValidationError("u_tilde and v_tilde do not span a plane")
    _, sig, vt = np.linalg.svd(p.p)
    vmat = vt.T
    c = vmat.T @ (v.T @ u - u.T @ v) @ vmat
    s2 = sig**2
    denom = (s2[:, None] + s2[None, :]) ** 2
    k = 3.0 * float(np.sum(s2[:, None] * c**2 / denom))
    return k / q


@dataclass(frozen=True)
class CurvatureBounds:
    """Curvature range at a fiber point with an extremal horizontal pair."""

    k_min: float
    k_max: float
    u_extremal: np.ndarray
    v_extremal: np.ndarray


def curvature_bounds(man: GbwManifold, p: FiberPoint) -> CurvatureBounds:
    """Sectional curvature bounds at pi(P).

    The lower bound is 0 (planes through lifts of S = M^{-1} are flat).  The
    upper bound 3 / (sigma_n^2 + sigma_{n-1}^2) uses the two smallest
    singular values of P and is attained by the returned horizontal pair.
    """
    n = p.dim
    if n < 2:
        raise SpdValidationError("curvature needs dimension >= 2")
    pu, sig, vt = np.linalg.svd(p.p)
    ms = man.param.m_sqrt.mat
    mis = man.param.m_invsqrt.mat
    k_max = 3.0 / (sig[-1] ** 2 + sig[-2] ** 2)
    # E_{ij} = e_i e_j^T + e_j e_i^T on the two smallest directions
    e_last = np.zeros((n, n))
    e_last[n - 1, n - 1] = 2.0
    e_prev = np.zeros((n, n))
    e_prev[n - 2, n - 2] = 2.0
    e_cross = np.zeros((n, n))
    e_cross[n - 1, n - 2] = 1.0
    e_cross[n - 2, n - 1] = 1.0
    inv_sig = 1.0 / sig
    scale = np.sqrt(inv_sig[-1] ** 2 + inv_sig[-2] ** 2)
    core_u = np.diag(inv_sig) @ (e_prev - e_last) @ np.diag(inv_sig)
    core_v = np.diag(inv_sig) @ e_cross @ np.diag(inv_sig)
    s_u = mis @ pu @ core_u @ pu.T @ mis / (2.0 * scale)
    s_v = mis @ pu @ core_v @ pu.T @ mis / scale
    u_ext = ms @ _sym(s_u) @ ms @ p.p
    v_ext = ms @ _sym(s_v) @ ms @ p.p
    return CurvatureBounds(0.0, float(k_max), u_ext, v_ext)
