"""Riemannian solvers: trust region (truncated CG) and stochastic descent.

Both solvers are single-threaded state machines over the manifold protocol
from ``gbw.manifolds`` and record their progress in a ``SolveTrace`` with
the fixed CSV schema

    iter, cumulative_inner_iters, cost, grad_norm, step, dist_to_ref

One row is appended per outer iteration (trust region) or per epoch
(stochastic descent); row 0 is the initial state.  Floats serialize with
``repr`` so reruns with the same config and seed produce byte-identical
files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import ExpMapDomainError, OutOfConeError
from .linalg import SingularOperatorError
from .manifolds import Objective

__all__ = [
    "TRACE_COLUMNS",
    "SolveTrace",
    "spectral_distance",
    "TrustRegionConfig",
    "TrustRegionResult",
    "trust_region",
    "SgdConfig",
    "RsgdResult",
    "rsgd",
]

TRACE_COLUMNS = ("iter", "cumulative_inner_iters", "cost", "grad_norm", "step", "dist_to_ref")

# Errors a candidate step may legitimately raise; the solvers respond by
# rejecting the step instead of crashing.
_STEP_ERRORS = (ExpMapDomainError, OutOfConeError, SingularOperatorError)


def spectral_distance(a, b) -> float:
    """Largest singular value of A - B; the default distance-to-reference."""
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b), 2))


def _fmt(value) -> str:
    if value is None:
        return ""
    v = float(value)
    if np.isnan(v):
        return ""
    return repr(v)


@dataclass
class SolveTrace:
    """Per-iteration solver record with a fixed serialization schema."""

    rows: list = field(default_factory=list)

    def append(self, iteration, inner, cost, grad_norm, step=None, dist_to_ref=None):
        self.rows.append(
            (int(iteration), int(inner), cost, grad_norm, step, dist_to_ref)
        )

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        idx = TRACE_COLUMNS.index(name)
        return [row[idx] for row in self.rows]

    @property
    def final(self):
        return self.rows[-1] if self.rows else None

    def to_csv_text(self) -> str:
        lines = [",".join(TRACE_COLUMNS)]
        for it, inner, cost, gnorm, step, dist in self.rows:
            lines.append(
                ",".join(
                    [str(it), str(inner), _fmt(cost), _fmt(gnorm), _fmt(step), _fmt(dist)]
                )
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())


@dataclass
class TrustRegionConfig:
    """Knobs for the trust-region solver.

    The truncated CG model solve stops on the residual target
    ||r|| <= ||r0|| min(kappa, ||r0||^theta), on negative curvature, or at
    the region boundary.  Steps with ratio below ``rho_accept`` are
    rejected and shrink the radius; strong steps that hit the boundary
    expand it.  ``rebase_cadence`` >= 1 re-anchors manifolds that support
    it (the adaptive metric) every that-many outer iterations.
    """

    gtol: float = 1e-9
    max_outer: int = 500
    kappa: float = 0.1
    theta: float = 1.0
    rho_accept: float = 0.1
    expand: float = 2.0
    shrink: float = 0.25
    radius0: Optional[float] = None
    max_radius: Optional[float] = None
    max_inner: Optional[int] = None
    rebase_cadence: int = 0
    fd_hessian_step: float = 1e-4
    stop_when: Optional[Callable] = None
    reference: Optional[np.ndarray] = None
    ref_metric: Callable = spectral_distance


@dataclass
class TrustRegionResult:
    point: np.ndarray
    trace: SolveTrace
    converged: bool
    stop_reason: str
    n_outer: int
    cumulative_inner: int
    cost: float
    grad_norm: float


def _boundary_tau(eta_sq, e_d, d_sq, radius) -> float:
    """Positive root of ||eta + tau delta||^2 = radius^2 in the metric."""
    disc = max(e_d * e_d + d_sq * (radius * radius - eta_sq), 0.0)
    return (-e_d + np.sqrt(disc)) / d_sq


def _truncated_cg(man, x, grad, hess, radius, kappa, theta, max_inner):
    """Steihaug-Toint model solve; returns (step, inner_iters, hit_boundary)."""
    eta = np.zeros_like(grad)
    r = grad.copy()
    delta = -r
    r_r = man.inner(x, r, r)
    norm_r0 = np.sqrt(max(r_r, 0.0))
    target = norm_r0 * min(kappa, norm_r0**theta)
    eta_sq = 0.0
    for j in range(max_inner):
        h_delta = hess(delta)
        d_hd = man.inner(x, delta, h_delta)
        d_sq = man.inner(x, delta, delta)
        e_d = man.inner(x, eta, delta)
        if d_sq <= 0.0:
            return eta, j + 1, False
        if d_hd <= 0.0:
            tau = _boundary_tau(eta_sq, e_d, d_sq, radius)
            return eta + tau * delta, j + 1, True
        alpha = r_r / d_hd
        eta_sq_new = eta_sq + 2.0 * alpha * e_d + alpha * alpha * d_sq
        if eta_sq_new >= radius * radius:
            tau = _boundary_tau(eta_sq, e_d, d_sq, radius)
            return eta + tau * delta, j + 1, True
        eta = eta + alpha * delta
        eta_sq = eta_sq_new
        r = r + alpha * h_delta
        r_r_new = man.inner(x, r, r)
        if np.sqrt(max(r_r_new, 0.0)) <= target:
            return eta, j + 1, False
        delta = -r + (r_r_new / r_r) * delta
        r_r = r_r_new
    return eta, max_inner, False


def _fd_hessian(man, obj: Objective, x, grad, h: float):
    """First-order Hessian surrogate for objectives without a Hessian rule."""

    def apply(v):
        nrm = man.norm(x, v)
        if nrm == 0.0:
            return np.zeros_like(v)
        step = h / nrm
        xh = man.exp(x, man.scale(v, step))
        gh = man.rgrad(xh, obj.egrad(xh))
        return man.project(x, (gh - grad) / step)

    return apply


def trust_region(man, obj: Objective, x0, config: Optional[TrustRegionConfig] = None):
    """Riemannian trust region with truncated-CG model solves.

    Accepted costs are monotone non-increasing.  Exp-map domain errors and
    cone exits on the candidate evaluation reject the step and shrink the
    radius; the trace records the state after every outer iteration with
    the cumulative truncated-CG iteration count.
    """
    cfg = config or TrustRegionConfig()
    x = np.asarray(x0, dtype=float)
    if cfg.radius0 is not None:
        radius0 = cfg.radius0
    else:
        base = float(np.linalg.norm(x)) / 8.0
        radius0 = base if base > 0.0 else 1.0
    radius = radius0
    max_radius = cfg.max_radius if cfg.max_radius is not None else 1e6 * radius0
    template = man
    work = man

    def dist(pt):
        if cfg.reference is None:
            return None
        return cfg.ref_metric(pt, cfg.reference)

    trace = SolveTrace()
    cost = obj.cost(x)
    cumulative_inner = 0
    stop_reason = "max_outer"
    converged = False
    n_outer = 0
    refresh = True
    egrad = grad = None
    gnorm = np.inf

    for k in range(cfg.max_outer + 1):
        if cfg.rebase_cadence >= 1 and k % cfg.rebase_cadence == 0:
            work = template.anchored_at(x) if hasattr(template, "anchored_at") else template
            refresh = True
        if refresh:
            egrad = obj.egrad(x)
            grad = work.rgrad(x, egrad)
            gnorm = work.norm(x, grad)
            refresh = False
        if k == 0:
            trace.append(0, 0, cost, gnorm, None, dist(x))
        if gnorm <= cfg.gtol:
            stop_reason = "gtol"
            converged = True
            break
        if cfg.stop_when is not None and cfg.stop_when(x):
            stop_reason = "target"
            converged = True
            break
        if k == cfg.max_outer:
            break
        if radius < 1e-16 * radius0:
            stop_reason = "radius_underflow"
            break

        n_outer = k + 1
        if obj.has_hessian:
            hess = lambda v: work.rhess(x, v, egrad, obj.ehess(x, v))
        else:
            hess = _fd_hessian(work, obj, x, grad, cfg.fd_hessian_step)
        max_inner = cfg.max_inner if cfg.max_inner is not None else work.tangent_dim(x)
        eta, used, hit_boundary = _truncated_cg(
            work, x, grad, hess, radius, cfg.kappa, cfg.theta, max_inner
        )
        cumulative_inner += used

        accepted = False
        step_size = 0.0
        try:
            candidate = work.exp(x, eta)
            cand_cost = obj.cost(candidate)
            decrease = -(work.inner(x, grad, eta) + 0.5 * work.inner(x, eta, hess(eta)))
            if np.isfinite(cand_cost) and decrease > 0.0:
                # Near the optimum both numerator and denominator sink below
                # float resolution of the cost; the shared offset keeps the
                # ratio meaningful instead of rejecting noise-level steps.
                reg = max(1.0, abs(cost)) * np.finfo(float).eps * 1e4
                rho = (cost - cand_cost + reg) / (decrease + reg)
                if rho >= cfg.rho_accept:
                    accepted = True
                    step_size = work.norm(x, eta)
                    x = candidate
                    cost = cand_cost
                    refresh = True
                    if rho > 0.75 and hit_boundary:
                        radius = min(radius * cfg.expand, max_radius)
                else:
                    radius *= cfg.shrink
            else:
                radius *= cfg.shrink
        except _STEP_ERRORS:
            radius *= cfg.shrink

        if refresh:
            # recompute before logging so the row reflects the new iterate
            egrad = obj.egrad(x)
            grad = work.rgrad(x, egrad)
            gnorm = work.norm(x, grad)
            refresh = False
        trace.append(k + 1, cumulative_inner, cost, gnorm, step_size if accepted else 0.0, dist(x))

    return TrustRegionResult(
        point=x,
        trace=trace,
        converged=converged,
        stop_reason=stop_reason,
        n_outer=n_outer,
        cumulative_inner=cumulative_inner,
        cost=cost,
        grad_norm=gnorm,
    )


@dataclass
class SgdConfig:
    """Knobs for stochastic descent with the decaying schedule
    alpha_t = step0 / (1 + step0 * decay * t)."""

    step0: float = 1e-2
    decay: float = 1e-3
    batch_size: int = 50
    epochs: int = 50
    seed: int = 0
    max_halvings: int = 30
    monitor: Optional[Callable] = None


@dataclass
class RsgdResult:
    point: object
    trace: SolveTrace
    aborted: bool
    stop_reason: str
    steps: int


def rsgd(man, sobj, x0, config: Optional[SgdConfig] = None) -> RsgdResult:
    """Riemannian stochastic gradient descent over minibatch epochs.

    ``sobj`` exposes ``n_samples`` and ``minibatch(point, idx) ->
    (cost, euclidean_gradient)``.  Shuffling is epoch-wise from the seeded
    generator.  Steps that leave the exponential's domain are halved up to
    ``max_halvings`` times; running out of halvings aborts the solve with
    the trace intact.  One trace row is written per epoch; the optional
    ``monitor(point) -> dict`` supplies full-dataset cost, gradient proxy,
    and optionally a reference distance for those rows.
    """
    cfg = config or SgdConfig()
    rng = np.random.default_rng(cfg.seed)
    x = x0
    n = int(sobj.n_samples)
    if n < 1:
        raise ValueError("stochastic objective has no samples")
    batch = max(1, min(cfg.batch_size, n))
    trace = SolveTrace()
    t = 0
    alpha = cfg.step0
    last_cost = None
    last_gnorm = None

    def record(epoch):
        if cfg.monitor is not None:
            stats = cfg.monitor(x)
            trace.append(
                epoch,
                t,
                stats.get("cost"),
                stats.get("grad_norm"),
                alpha,
                stats.get("dist_to_ref"),
            )
        else:
            trace.append(epoch, t, last_cost, last_gnorm, alpha, None)

    record(0)
    aborted = False
    stop_reason = "epochs"
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch):
            idx = perm[start : start + batch]
            cost, egrad = sobj.minibatch(x, idx)
            grad = man.rgrad(x, egrad)
            alpha = cfg.step0 / (1.0 + cfg.step0 * cfg.decay * t)
            scale = alpha
            for _ in range(cfg.max_halvings + 1):
                try:
                    x = man.exp(x, man.scale(grad, -scale))
                    break
                except _STEP_ERRORS:
                    scale *= 0.5
            else:
                aborted = True
                stop_reason = "step_underflow"
                break
            last_cost = cost
            last_gnorm = man.norm(x, grad)
            t += 1
        record(epoch + 1)
        if aborted:
            break
    return RsgdResult(point=x, trace=trace, aborted=aborted, stop_reason=stop_reason, steps=t)
