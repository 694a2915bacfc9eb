"""The generalized Bures-Wasserstein (GBW) manifold of SPD matrices.

For a fixed SPD parameter M, the metric at a point X is

    g_X(U, V) = (1/2) tr(L V),    where  X L M + M L X = U,

the solution L of a generalized Lyapunov equation.  M = I recovers the
ordinary Bures-Wasserstein geometry of optimal transport between centered
Gaussians; a general M rescales it by the congruence X -> M^{-1/2} X M^{-1/2},
which is an isometry onto the M = I manifold.

This module provides the metric, the closed-form distance, minimizing
geodesics, exponential and logarithm maps, the Levi-Civita connection, and
the geodesic/linear interpolation comparison.  Curvature lives in
``gbw.submersion``, Frechet means in ``gbw.barycenter``.
"""

from __future__ import annotations

import numpy as np

from .linalg import (
    EPS_PD,
    GbwParam,
    SpdMatrix,
    SpdValidationError,
    SymMatrix,
    _as_spd,
    _gen_lyap_core,
    _product_power,
    _psd_trace_sqrt,
    _spd_power,
    _sym,
    geometric_mean,
    loewner_gap,
    polar_factor,
    GEN_LYAP_FLOOR,
)

__all__ = [
    "ExpMapDomainError",
    "OutOfConeError",
    "GeodesicSegment",
    "GbwManifold",
]

# Absolute slack allowed on the squared-distance radicand before the input
# is declared inconsistent rather than a victim of roundoff.
RADICAND_SLACK = 1e-10


class ExpMapDomainError(RuntimeError):
    """Tangent vector leaves the domain where the exponential map is defined."""


class OutOfConeError(RuntimeError):
    """Curve evaluation left the SPD cone (only possible outside t in [0, 1])."""


class GeodesicSegment:
    """Minimizing geodesic between two SPD matrices under the GBW metric.

    With square roots X^{1/2}, Y^{1/2} and the orthogonal alignment O of the
    endpoint square roots, the segment is

        gamma(t) = psi(t) psi(t)^T,   psi(t) = (1-t) X^{1/2} + t Y^{1/2} O.

    gamma is defined and SPD for every t in [0, 1]; outside that range it may
    leave the cone, in which case ``eval`` raises OutOfConeError.
    """

    def __init__(self, manifold: "GbwManifold", x: SpdMatrix, y: SpdMatrix):
        self.manifold = manifold
        self.x = x
        self.y = y
        self._xs = _spd_power(x.mat, 0.5)
        ys = _spd_power(y.mat, 0.5)
        mi = manifold.param.m_inv.mat
        self.alignment = polar_factor(ys @ mi @ self._xs)
        self._ys_aligned = ys @ self.alignment

    def eval(self, t: float) -> SpdMatrix:
        """Point gamma(t); raises OutOfConeError if it is not PD."""
        psi = (1.0 - t) * self._xs + t * self._ys_aligned
        try:
            return SpdMatrix(_sym(psi @ psi.T))
        except SpdValidationError as exc:
            raise OutOfConeError(f"geodesic point at t={t} is not PD: {exc}") from exc

    __call__ = eval

    def velocity(self, t: float) -> SymMatrix:
        """Ambient derivative gamma'(t)."""
        psi = (1.0 - t) * self._xs + t * self._ys_aligned
        dpsi = self._ys_aligned - self._xs
        return SymMatrix(_sym(dpsi @ psi.T + psi @ dpsi.T))

    def acceleration(self) -> SymMatrix:
        """Ambient second derivative gamma''(t), constant in t."""
        dpsi = self._ys_aligned - self._xs
        return SymMatrix(_sym(2.0 * dpsi @ dpsi.T))

    def sample_dict(self, ts) -> dict:
        """JSON-ready dict with the t grid and sampled points."""
        ts = [float(t) for t in ts]
        return {
            "dim": self.x.dim,
            "t_grid": ts,
            "x": self.x.mat.tolist(),
            "y": self.y.mat.tolist(),
            "points": [self.eval(t).mat.tolist() for t in ts],
        }


class GbwManifold:
    """SPD matrices with the generalized Bures-Wasserstein metric for fixed M."""

    def __init__(self, param):
        if not isinstance(param, GbwParam):
            param = GbwParam(param)
        self.param = param

    @classmethod
    def bures_wasserstein(cls, n: int) -> "GbwManifold":
        """The M = I manifold."""
        return cls(GbwParam.identity(n))

    @property
    def dim(self) -> int:
        return self.param.dim

    def _point(self, x) -> SpdMatrix:
        xs = _as_spd(x)
        if xs.dim != self.dim:
            raise SpdValidationError(f"point dim {xs.dim} != manifold dim {self.dim}")
        return xs

    def _tangent(self, u) -> SymMatrix:
        us = u if isinstance(u, SymMatrix) else SymMatrix(u)
        if us.dim != self.dim:
            raise SpdValidationError(f"tangent dim {us.dim} != manifold dim {self.dim}")
        return us

    def lyapunov(self, x, u, *, floor: float = GEN_LYAP_FLOOR) -> SymMatrix:
        """L with X L M + M L X = U; the metric's defining solve at x."""
        xs = self._point(x)
        us = self._tangent(u)
        l = _gen_lyap_core(xs.mat, self.param.m_invsqrt.mat, us.mat, floor)
        return SymMatrix(_sym(l))

    def inner(self, x, u, v) -> float:
        """Metric inner product g_X(U, V) = (1/2) tr(L_X[U] V)."""
        l = self.lyapunov(x, u).mat
        vs = self._tangent(v)
        return 0.5 * float(np.trace(l @ vs.mat))

    def norm(self, x, u) -> float:
        return float(np.sqrt(max(self.inner(x, u, u), 0.0)))

    def squared_distance(self, x, y) -> float:
        """Closed-form squared distance.

        d^2(X, Y) = tr(M^{-1} X) + tr(M^{-1} Y)
                    - 2 tr((X^{1/2} M^{-1} Y M^{-1} X^{1/2})^{1/2}).

        A radicand in [-RADICAND_SLACK, 0) is clamped to zero; anything more
        negative raises, since it signals inconsistent inputs rather than
        roundoff.
        """
        xs = self._point(x)
        ys = self._point(y)
        mis = self.param.m_invsqrt.mat
        xt = _sym(mis @ xs.mat @ mis)
        yt = _sym(mis @ ys.mat @ mis)
        xt_rt = _spd_power(xt, 0.5)
        cross = _psd_trace_sqrt(xt_rt @ yt @ xt_rt)
        radicand = float(np.trace(xt) + np.trace(yt) - 2.0 * cross)
        if radicand < 0.0:
            if radicand < -RADICAND_SLACK:
                raise SpdValidationError(
                    f"squared distance came out {radicand:.3e} < -{RADICAND_SLACK:.0e}"
                )
            radicand = 0.0
        return radicand

    def distance(self, x, y) -> float:
        return float(np.sqrt(self.squared_distance(x, y)))

    def procrustes_distance(self, x, y) -> tuple[float, np.ndarray]:
        """Distance as the best M^{-1}-weighted alignment of square roots.

        Returns (value, O) where O is the orthogonal matrix minimizing
        || X^{1/2} - Y^{1/2} O ||_{M^{-1}}; the value equals distance(x, y).
        """
        xs = _spd_power(self._point(x).mat, 0.5)
        ys = _spd_power(self._point(y).mat, 0.5)
        mi = self.param.m_inv.mat
        o = polar_factor(ys @ mi @ xs)
        diff = xs - ys @ o
        val = float(np.sqrt(max(np.trace(diff.T @ mi @ diff), 0.0)))
        return val, o

    def alignment_polar_forms(self, x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Three closed forms of the aligning orthogonal factor.

        (a) Y^{1/2} M^{-1} X^{1/2} (X^{1/2} M^{-1} Y M^{-1} X^{1/2})^{-1/2}
        (b) Y^{1/2} (Y^{-1} M X^{-1} M)^{1/2} M^{-1} X^{1/2}
        (c) Y^{-1/2} (Y # (M X^{-1} M)) M^{-1} X^{1/2}

        All three agree with the polar factor of Y^{1/2} M^{-1} X^{1/2}; they
        are exposed separately so the equivalences stay testable.
        """
        xm = self._point(x).mat
        ym = self._point(y).mat
        mi = self.param.m_inv.mat
        m = self.param.m.mat
        xs = _spd_power(xm, 0.5)
        ys = _spd_power(ym, 0.5)
        x_inv = _spd_power(xm, -1.0)
        y_inv = _spd_power(ym, -1.0)
        mid = _sym(xs @ mi @ ym @ mi @ xs)
        o_a = ys @ mi @ xs @ _spd_power(mid, -0.5)
        o_b = ys @ _product_power(y_inv, _sym(m @ x_inv @ m), 0.5) @ mi @ xs
        o_c = (
            _spd_power(ym, -0.5)
            @ geometric_mean(ym, _sym(m @ x_inv @ m)).mat
            @ mi
            @ xs
        )
        return o_a, o_b, o_c

    def geodesic(self, x, y) -> GeodesicSegment:
        """Minimizing geodesic from x (t=0) to y (t=1)."""
        return GeodesicSegment(self, self._point(x), self._point(y))

    def exp(self, x, u) -> SpdMatrix:
        """Exponential map Exp_X(U) = X + U + M L X L M with L = L_X[U].

        Defined while M + M L M stays PD; beyond that boundary the formula
        stops being the metric exponential and ExpMapDomainError is raised.
        """
        xs = self._point(x)
        us = self._tangent(u)
        m = self.param.m.mat
        l = self.lyapunov(xs, us).mat
        guard = _sym(m + m @ l @ m)
        w = np.linalg.eigvalsh(guard)
        if w[0] <= EPS_PD * max(abs(w[-1]), 1e-300):
            raise ExpMapDomainError(
                f"tangent leaves the exp domain: min eig of M + MLM = {w[0]:.3e}"
            )
        out = _sym(xs.mat + us.mat + m @ l @ xs.mat @ l @ m)
        return SpdMatrix(out)

    def log(self, x, y) -> SymMatrix:
        """Logarithm map: the tangent at x whose exponential reaches y.

        Log_X(Y) = M (M^{-1} X M^{-1} Y)^{1/2} + (Y M^{-1} X M^{-1})^{1/2} M - 2X.
        """
        xs = self._point(x)
        ys = self._point(y)
        m = self.param.m.mat
        mi = self.param.m_inv.mat
        b = _sym(mi @ xs.mat @ mi)
        r = _product_power(b, ys.mat, 0.5)
        return SymMatrix(_sym(2.0 * _sym(m @ r) - 2.0 * xs.mat))

    def second_order_ratio(self, x, h, theta: float) -> float:
        """Defect of d^2(X, X + theta H) against its metric approximation.

        Returns |d^2 - theta^2 g_X(H, H)| / theta^2, which shrinks linearly
        in theta while X + theta H stays SPD.
        """
        xs = self._point(x)
        hs = self._tangent(h)
        y = SpdMatrix(xs.mat + theta * hs.mat)
        d2 = self.squared_distance(xs, y)
        quad = theta**2 * self.inner(xs, hs, hs)
        return abs(d2 - quad) / theta**2

    def levi_civita(self, x, xi, eta, d_xi_eta) -> SymMatrix:
        """Levi-Civita covariant derivative (nabla_xi eta) at x.

        ``d_xi_eta`` is the ambient directional derivative of the field eta
        along xi at x (zero for a frozen coefficient matrix).  The correction
        terms use L_xi = L_X[xi], L_eta = L_X[eta]:

            nabla = D + {X L_eta M L_xi M + X L_xi M L_eta M}_S
                      - {M L_eta xi}_S - {M L_xi eta}_S.
        """
        xs = self._point(x)
        xis = self._tangent(xi)
        etas = self._tangent(eta)
        ds = self._tangent(d_xi_eta)
        m = self.param.m.mat
        l_xi = self.lyapunov(xs, xis).mat
        l_eta = self.lyapunov(xs, etas).mat
        mix = xs.mat @ l_eta @ m @ l_xi @ m + xs.mat @ l_xi @ m @ l_eta @ m
        out = ds.mat + _sym(mix) - _sym(m @ l_eta @ xis.mat) - _sym(m @ l_xi @ etas.mat)
        return SymMatrix(_sym(out))

    def interpolation_gap(self, x, y, t: float) -> float:
        """Smallest eigenvalue of (1-t) X + t Y - gamma(t); nonnegative.

        The geodesic is dominated in the Loewner order by the linear
        interpolation of its endpoints.
        """
        gam = self.geodesic(x, y).eval(t)
        lin = (1.0 - t) * self._point(x).mat + t * self._point(y).mat
        return loewner_gap(gam.mat, lin)

    def __repr__(self):
        return f"GbwManifold(dim={self.dim})"
