"""Problems built on the transport geometry and the solver layer.

Four optimization problems plus a property sweep:

- log-det minimization with a known optimum, the solver benchmark;
- Gaussian mixture fitting through a reformulated density whose only
  parameters are SPD matrices and weight logits;
- dimension reduction that keeps reduced SPD matrices spread out around
  their reduced mean (an orthonormal-projector fit);
- metric learning of a low-rank weighting S = W W^T that shrinks
  same-class distances and grows cross-class ones;
- a randomized geodesic-convexity check for the standard convex-along-
  geodesics function family.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .barycenter import BarycenterProblem, barycenter
from .datasets import make_spd_with_condition, random_spd, random_sym
from .geometry import GbwManifold, OutOfConeError
from .linalg import (
    GbwParam,
    SpdMatrix,
    _as_spd,
    _psd_trace_sqrt,
    _spd_power,
    _sym,
)
from .manifolds import (
    BlockPoint,
    BlockProductManifold,
    EuclideanManifold,
    Objective,
    StiefelManifold,
    gradient_check,
    make_manifold,
)
from .solvers import _STEP_ERRORS, SgdConfig, SolveTrace, TrustRegionConfig, rsgd, trust_region

__all__ = [
    "LogDetProblem",
    "logdet_objective",
    "GmmModel",
    "GmmObjective",
    "gmm_log_density",
    "gmm_single_component_optimum",
    "fit_gmm",
    "bw_sq_distance",
    "reduced_bw_sq_distance",
    "nearest_neighbor_accuracy",
    "PcaProblem",
    "PcaFitConfig",
    "PcaFitResult",
    "pca_deviation",
    "pca_objective",
    "pca_fit",
    "MetricLearnProblem",
    "MetricFitConfig",
    "MetricFitResult",
    "metric_objective",
    "metric_learn_fit",
    "separation_ratio",
    "CONVEXITY_FUNCTIONS",
    "ConvexityRow",
    "ConvexityReport",
    "geodesic_convexity_report",
]


# --------------------------------------------------------------------------
# log-det minimization
# --------------------------------------------------------------------------


def _chol_logdet(x: np.ndarray) -> float:
    try:
        chol = np.linalg.cholesky(x)
    except np.linalg.LinAlgError as exc:
        raise OutOfConeError("iterate left the SPD cone") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def logdet_objective(c) -> Objective:
    """f(X) = -logdet X + tr(C X), smooth on the cone, minimized at C^{-1}."""
    cm = _as_spd(c).mat

    def cost(x):
        return -_chol_logdet(np.asarray(x, dtype=float)) + float(np.trace(cm @ x))

    def egrad(x):
        return cm - np.linalg.inv(x)

    def ehess(x, u):
        xi = np.linalg.inv(x)
        return xi @ _sym(u) @ xi

    return Objective(cost, egrad, ehess)


@dataclass(frozen=True)
class LogDetProblem:
    """Coefficient matrix C together with the known optimum C^{-1}."""

    c: SpdMatrix
    x_star: np.ndarray

    @classmethod
    def from_matrix(cls, c) -> "LogDetProblem":
        cs = _as_spd(c)
        return cls(c=cs, x_star=_spd_power(cs.mat, -1.0))

    @classmethod
    def from_condition(cls, rng, n: int, cond: float) -> "LogDetProblem":
        """Problem whose optimum has the requested condition number."""
        x_star = make_spd_with_condition(rng, n, cond)
        return cls(c=SpdMatrix(_spd_power(x_star.mat, -1.0)), x_star=x_star.mat)

    def objective(self) -> Objective:
        return logdet_objective(self.c)


# --------------------------------------------------------------------------
# Gaussian mixtures through the reformulated density
# --------------------------------------------------------------------------


def gmm_log_density(x: np.ndarray, precision: np.ndarray) -> np.ndarray:
    """Rowwise log of (2 pi)^{1-d/2} det(S)^{1/2} exp(1/2 - x^T S x / 2).

    The density is parameterized directly by the SPD matrix S; the usual
    normalizer is absorbed so that S carries both covariance shape and
    weight information.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    quad = np.einsum("bi,ij,bj->b", x, precision, x)
    return (1.0 - 0.5 * d) * np.log(2.0 * np.pi) + 0.5 * _chol_logdet(precision) + 0.5 - 0.5 * quad


@dataclass
class GmmModel:
    """Mixture state: k SPD matrices plus unconstrained weight logits."""

    precisions: tuple
    logits: np.ndarray

    @property
    def k(self) -> int:
        return len(self.precisions)

    @property
    def weights(self) -> np.ndarray:
        z = self.logits - np.max(self.logits)
        e = np.exp(z)
        return e / e.sum()

    def to_point(self) -> BlockPoint:
        return BlockPoint(tuple(self.precisions), np.asarray(self.logits, dtype=float))

    @classmethod
    def from_point(cls, point: BlockPoint) -> "GmmModel":
        return cls(precisions=tuple(point.blocks), logits=np.asarray(point.vector))

    @classmethod
    def initial(cls, rng, d: int, k: int, jitter: float = 0.05) -> "GmmModel":
        """Identity precisions with a small seeded symmetric perturbation."""
        mats = []
        for _ in range(k):
            p = np.eye(d) + jitter * random_sym(rng, d)
            w = np.linalg.eigvalsh(p)
            if w[0] <= 1e-6:
                p = p + (1e-6 - w[0] + 0.1) * np.eye(d)
            mats.append(_sym(p))
        return cls(precisions=tuple(mats), logits=np.zeros(k))


class GmmObjective:
    """Minibatch negative log-likelihood of the reformulated mixture.

    Data is centered once at construction; the mixture has no mean
    parameters.  ``minibatch`` returns the mean negative log-likelihood of
    the batch and its Euclidean gradient as a BlockPoint (one symmetric
    matrix per component plus the logit vector).
    """

    def __init__(self, data, k: int, center: bool = True):
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.size == 0 or data.shape[0] < 1:
            raise ValueError("mixture fit needs a nonempty dataset")
        if not np.all(np.isfinite(data)):
            raise ValueError("dataset contains non-finite values")
        if k < 1:
            raise ValueError("component count must be >= 1")
        self.data = data - data.mean(axis=0) if center else data
        self.k = int(k)
        self.d = data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    def _posteriors(self, point: BlockPoint, xb: np.ndarray):
        logits = point.vector
        log_w = logits - (np.max(logits) + np.log(np.sum(np.exp(logits - np.max(logits)))))
        scores = np.stack(
            [log_w[j] + gmm_log_density(xb, point.blocks[j]) for j in range(self.k)],
            axis=1,
        )
        top = scores.max(axis=1)
        lse = top + np.log(np.sum(np.exp(scores - top[:, None]), axis=1))
        resp = np.exp(scores - lse[:, None])
        return lse, resp

    def minibatch(self, point: BlockPoint, idx) -> tuple:
        xb = self.data[np.asarray(idx)]
        b = xb.shape[0]
        lse, resp = self._posteriors(point, xb)
        cost = -float(np.mean(lse))
        weights = GmmModel.from_point(point).weights
        grads = []
        for j in range(self.k):
            rj = resp[:, j]
            second_moment = xb.T @ (xb * rj[:, None])
            inv_j = np.linalg.inv(point.blocks[j])
            grads.append(-0.5 / b * (rj.sum() * inv_j - second_moment))
        grad_logits = -(resp.mean(axis=0) - weights)
        return cost, BlockPoint(tuple(_sym(g) for g in grads), grad_logits)

    def full_stats(self, point: BlockPoint) -> dict:
        """Full-dataset cost and the Euclidean gradient-norm proxy."""
        cost, egrad = self.minibatch(point, np.arange(self.n_samples))
        total = float(np.vdot(egrad.vector, egrad.vector))
        for g in egrad.blocks:
            total += float(np.vdot(g, g))
        return {"cost": cost, "grad_norm": float(np.sqrt(total))}


def gmm_single_component_optimum(data, center: bool = True) -> np.ndarray:
    """Closed-form k=1 optimum: the inverse second-moment matrix."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if center:
        data = data - data.mean(axis=0)
    second = data.T @ data / data.shape[0]
    return _spd_power(_sym(second), -1.0)


def fit_gmm(
    data,
    k: int,
    kind: str = "gbw_adaptive",
    config: Optional[SgdConfig] = None,
    init: Optional[GmmModel] = None,
) -> tuple:
    """Stochastic mixture fit; returns (GmmModel, RsgdResult).

    ``kind`` picks the SPD block geometry (gbw_adaptive, bw, or ai); logits
    always descend with plain Euclidean steps.  Epoch rows carry the
    full-dataset cost and the Euclidean gradient-norm proxy.
    """
    obj = GmmObjective(data, k)
    block = make_manifold(kind, n=obj.d)
    man = BlockProductManifold(block, k)
    cfg = config or SgdConfig()
    if cfg.monitor is None:
        cfg = replace(cfg, monitor=obj.full_stats)
    model0 = init or GmmModel.initial(np.random.default_rng(cfg.seed), obj.d, k)
    result = rsgd(man, obj, model0.to_point(), cfg)
    return GmmModel.from_point(result.point), result


# --------------------------------------------------------------------------
# shared reduced-distance helpers
# --------------------------------------------------------------------------


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root on the closed PSD cone; tiny negative eigenvalues clamp to 0."""
    w, q = np.linalg.eigh(_sym(a))
    return _sym((q * np.sqrt(np.clip(w, 0.0, None))) @ q.T)


def bw_sq_distance(x, y) -> float:
    """Squared transport distance tr X + tr Y - 2 tr((X^{1/2} Y X^{1/2})^{1/2}).

    Defined on the closed PSD cone, so rank-deficient projections are fine.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rt = _psd_sqrt(x)
    val = float(np.trace(x) + np.trace(y)) - 2.0 * _psd_trace_sqrt(_sym(rt @ y @ rt))
    return max(val, 0.0)


def reduced_bw_sq_distance(x, y, w) -> float:
    """Transport distance of the projected matrices W^T X W and W^T Y W."""
    return bw_sq_distance(_sym(w.T @ x @ w), _sym(w.T @ y @ w))


def _projected_cross_gradient(x, y, w):
    """Gradient in W of tr((A B)^{1/2}) with A = W^T X W, B = W^T Y W.

    Uses d tr(Z^{1/2}) = (1/2) tr(Z^{-1/2} dZ) through the congruences,
    which collapses to the matrix geometric means A^{-1}#B and B^{-1}#A.
    """
    a = _sym(w.T @ x @ w)
    b = _sym(w.T @ y @ w)
    for red in (a, b):
        ev = np.linalg.eigvalsh(red)
        if ev[0] <= 1e-14 * max(ev[-1], 0.0):
            raise OutOfConeError("projected matrix is numerically singular; gradient undefined")
    ga = _product_geomean(np.linalg.inv(a), b)
    gb = _product_geomean(np.linalg.inv(b), a)
    return x @ w @ ga + y @ w @ gb


def _product_geomean(a, b) -> np.ndarray:
    """Geometric mean A # B for SPD operands given as plain arrays.

    The congruence of B is PSD by construction, so its root is clamped.
    """
    rt = _spd_power(_sym(a), 0.5)
    irt = _spd_power(_sym(a), -0.5)
    return _sym(rt @ _psd_sqrt(irt @ _sym(b) @ irt) @ rt)


def _reduced_sq_dist_grad(x, y, w):
    """Gradient in W of the reduced squared distance."""
    return 2.0 * (x @ w + y @ w - _projected_cross_gradient(x, y, w))


def nearest_neighbor_accuracy(train, train_labels, test, test_labels, sq_dist) -> float:
    """1-nearest-neighbor accuracy under a pluggable squared distance."""
    train_labels = np.asarray(train_labels)
    test_labels = np.asarray(test_labels)
    hits = 0
    for t, lab in zip(test, test_labels):
        dists = [sq_dist(t, s) for s in train]
        if train_labels[int(np.argmin(dists))] == lab:
            hits += 1
    return hits / len(test_labels)


# --------------------------------------------------------------------------
# dimension reduction on the transport geometry
# --------------------------------------------------------------------------


@dataclass
class PcaProblem:
    """Samples, their transport-metric mean, and the target dimension."""

    samples: list
    x_bar: np.ndarray
    d: int
    barycenter_converged: bool = True

    @classmethod
    def from_samples(cls, samples: Sequence, d: int, tol: float = 1e-12) -> "PcaProblem":
        mats = [_as_spd(s) for s in samples]
        n = mats[0].dim
        if not 1 <= d <= n:
            raise ValueError(f"target dim must satisfy 1 <= d <= {n}, got {d}")
        man = GbwManifold.bures_wasserstein(n)
        res = barycenter(BarycenterProblem(man, mats), tol=tol)
        return cls(
            samples=[m.mat for m in mats],
            x_bar=res.point.mat,
            d=int(d),
            barycenter_converged=res.converged,
        )

    @property
    def n(self) -> int:
        return self.x_bar.shape[0]


def pca_deviation(problem: PcaProblem, w: np.ndarray) -> float:
    """Spread of the reduced samples around the reduced mean (maximized)."""
    return float(
        sum(reduced_bw_sq_distance(x, problem.x_bar, w) for x in problem.samples)
    )


def _pca_deviation_grad(problem: PcaProblem, w: np.ndarray) -> np.ndarray:
    total = np.zeros_like(w)
    for x in problem.samples:
        total += _reduced_sq_dist_grad(x, problem.x_bar, w)
    return total


def pca_objective(problem: PcaProblem) -> Objective:
    """Minimization form: negative spread, for solver reuse."""
    return Objective(
        cost=lambda w: -pca_deviation(problem, w),
        egrad=lambda w: -_pca_deviation_grad(problem, w),
    )


@dataclass
class PcaFitConfig:
    optimizer: str = "ascent"  # or "tr"
    max_iters: int = 200
    tol: float = 1e-8
    step0: float = 1e-2
    seed: int = 0
    w0: Optional[np.ndarray] = None
    fd_gate: float = 1e-4


@dataclass
class PcaFitResult:
    w: np.ndarray
    trace: SolveTrace
    converged: bool
    value: float


def _ascend_on_manifold(man, value_fn, grad_fn, w0, cfg) -> PcaFitResult:
    """Backtracking gradient ascent with a monotone value trace."""
    w = w0
    value = value_fn(w)
    step = cfg.step0
    trace = SolveTrace()
    converged = False
    grad = man.rgrad(w, grad_fn(w))
    gnorm = man.norm(w, grad)
    trace.append(0, 0, value, gnorm, None, None)
    for it in range(1, cfg.max_iters + 1):
        if gnorm <= cfg.tol * (1.0 + abs(value)):
            converged = True
            break
        accepted = False
        trial_step = step
        for _ in range(60):
            try:
                cand = man.exp(w, man.scale(grad, trial_step))
                cand_value = value_fn(cand)
            except _STEP_ERRORS:
                trial_step *= 0.5
                continue
            if np.isfinite(cand_value) and cand_value >= value - 1e-15 * max(1.0, abs(value)):
                accepted = True
                break
            trial_step *= 0.5
        if not accepted:
            converged = True  # no ascent direction at working precision
            break
        grew = trial_step == step
        w = cand
        value = cand_value
        step = min(trial_step * (2.0 if grew else 1.0), cfg.step0 * 100.0)
        try:
            grad = man.rgrad(w, grad_fn(w))
        except _STEP_ERRORS:
            trace.append(it, 0, value, gnorm, trial_step, None)
            break
        gnorm = man.norm(w, grad)
        trace.append(it, 0, value, gnorm, trial_step, None)
    return PcaFitResult(w=w, trace=trace, converged=converged, value=value)


def pca_fit(problem: PcaProblem, config: Optional[PcaFitConfig] = None) -> PcaFitResult:
    """Fit the orthonormal projector by ascent on the frame manifold.

    The analytic gradient is gated by a finite-difference check at the
    starting frame before any step is taken.  The value trace is monotone
    non-decreasing.  ``optimizer="tr"`` runs the trust-region solver on the
    negative objective with a finite-difference Hessian surrogate instead.
    """
    cfg = config or PcaFitConfig()
    man = StiefelManifold(problem.n, problem.d)
    rng = np.random.default_rng(cfg.seed)
    if cfg.w0 is not None:
        w0 = np.asarray(cfg.w0, dtype=float)
    else:
        w0 = np.linalg.qr(rng.standard_normal((problem.n, problem.d)))[0]
    obj = pca_objective(problem)
    err = gradient_check(obj, w0, rng)
    if err > cfg.fd_gate:
        raise ValueError(
            f"analytic gradient failed its finite-difference gate: rel err {err:.2e}"
        )
    if cfg.optimizer == "tr":
        res = trust_region(
            man,
            obj,
            w0,
            TrustRegionConfig(gtol=cfg.tol, max_outer=cfg.max_iters),
        )
        trace = SolveTrace()
        for it, inner, cost, gnorm, step, dist in res.trace.rows:
            trace.append(it, inner, None if cost is None else -cost, gnorm, step, dist)
        return PcaFitResult(
            w=res.point, trace=trace, converged=res.converged, value=-res.cost
        )
    if cfg.optimizer != "ascent":
        raise ValueError(f"unknown optimizer {cfg.optimizer!r}")
    return _ascend_on_manifold(
        man,
        lambda w: pca_deviation(problem, w),
        lambda w: _pca_deviation_grad(problem, w),
        w0,
        cfg,
    )


# --------------------------------------------------------------------------
# metric learning
# --------------------------------------------------------------------------


@dataclass
class MetricLearnProblem:
    """Labeled SPD samples with the +1/-1 pair adjacency."""

    samples: list
    labels: np.ndarray

    def __post_init__(self):
        self.samples = [np.asarray(_as_spd(s).mat, dtype=float) for s in self.samples]
        self.labels = np.asarray(self.labels)
        if len(self.samples) != len(self.labels):
            raise ValueError("one label per sample required")
        if len(self.samples) < 2:
            raise ValueError("need at least two samples")
        if all(l == self.labels[0] for l in self.labels):
            raise ValueError("degenerate problem: every sample has the same class")

    @property
    def n(self) -> int:
        return self.samples[0].shape[0]

    def adjacency(self, i: int, j: int) -> float:
        return 1.0 if self.labels[i] == self.labels[j] else -1.0

    def pairs(self):
        m = len(self.samples)
        for i in range(m):
            for j in range(i + 1, m):
                yield i, j


def _sigmoid(z: float) -> float:
    return float(np.exp(-np.logaddexp(0.0, -z)))


def metric_objective(problem: MetricLearnProblem, d: int) -> Objective:
    """Pair loss sum log(1 + exp(A_ij d^2_S)) with S = W W^T, over W.

    The weighted squared distance with S = W W^T equals the transport
    distance of the projected matrices, so the gradient reuses the
    projected chain rule and stays finite for singular S.
    """

    def cost(w):
        total = 0.0
        for i, j in problem.pairs():
            z = problem.adjacency(i, j) * reduced_bw_sq_distance(
                problem.samples[i], problem.samples[j], w
            )
            total += float(np.logaddexp(0.0, z))
        return total

    def egrad(w):
        total = np.zeros_like(w)
        for i, j in problem.pairs():
            a = problem.adjacency(i, j)
            z = a * reduced_bw_sq_distance(problem.samples[i], problem.samples[j], w)
            total += (
                _sigmoid(z)
                * a
                * _reduced_sq_dist_grad(problem.samples[i], problem.samples[j], w)
            )
        return total

    return Objective(cost, egrad)


@dataclass
class MetricFitConfig:
    max_iters: int = 200
    tol: float = 1e-8
    step0: float = 1e-2
    seed: int = 0
    w0: Optional[np.ndarray] = None
    fd_gate: float = 1e-4


@dataclass
class MetricFitResult:
    w: np.ndarray
    trace: SolveTrace
    converged: bool
    value: float

    @property
    def s(self) -> np.ndarray:
        return _sym(self.w @ self.w.T)


def metric_learn_fit(
    problem: MetricLearnProblem, d: int, config: Optional[MetricFitConfig] = None
) -> MetricFitResult:
    """Descend the pair loss over the unconstrained factor W (n x d)."""
    cfg = config or MetricFitConfig()
    if not 1 <= d <= problem.n:
        raise ValueError(f"need 1 <= d <= {problem.n}, got {d}")
    rng = np.random.default_rng(cfg.seed)
    if cfg.w0 is not None:
        w0 = np.asarray(cfg.w0, dtype=float)
    else:
        w0 = rng.standard_normal((problem.n, d)) / np.sqrt(problem.n)
    obj = metric_objective(problem, d)
    err = gradient_check(obj, w0, rng)
    if err > cfg.fd_gate:
        raise ValueError(
            f"analytic gradient failed its finite-difference gate: rel err {err:.2e}"
        )
    res = _ascend_on_manifold(
        EuclideanManifold(),
        lambda w: -obj.cost(w),
        lambda w: -obj.egrad(w),
        w0,
        PcaFitConfig(
            max_iters=cfg.max_iters, tol=cfg.tol, step0=cfg.step0, seed=cfg.seed
        ),
    )
    trace = SolveTrace()
    for it, inner, val, gnorm, step, dist in res.trace.rows:
        trace.append(it, inner, None if val is None else -val, gnorm, step, dist)
    return MetricFitResult(
        w=res.w, trace=trace, converged=res.converged, value=-res.value
    )


def separation_ratio(problem: MetricLearnProblem, w: np.ndarray) -> float:
    """Mean same-class squared distance over mean cross-class one."""
    same, diff = [], []
    for i, j in problem.pairs():
        d2 = reduced_bw_sq_distance(problem.samples[i], problem.samples[j], w)
        (same if problem.labels[i] == problem.labels[j] else diff).append(d2)
    if not same or not diff:
        raise ValueError("need both same-class and cross-class pairs")
    return float(np.mean(same) / np.mean(diff))


# --------------------------------------------------------------------------
# geodesic convexity sweep
# --------------------------------------------------------------------------

CONVEXITY_FUNCTIONS = ("trace_linear", "trace_quadratic", "neg_logdet", "eigenvalue_sum")


@dataclass
class ConvexityRow:
    function: str
    trials: int
    checks: int
    max_gap: float
    violations: int
    witness: Optional[dict] = None


@dataclass
class ConvexityReport:
    rows: list = field(default_factory=list)

    def row(self, name: str) -> ConvexityRow:
        for r in self.rows:
            if r.function == name:
                return r
        raise KeyError(name)

    @property
    def total_violations(self) -> int:
        return sum(r.violations for r in self.rows)


def _convexity_value(name, x, a, h, k):
    if name == "trace_linear":
        return float(np.trace(a @ x))
    if name == "trace_quadratic":
        return float(np.trace(x @ a @ x))
    if name == "neg_logdet":
        return -_chol_logdet(x)
    if name == "eigenvalue_sum":
        w = np.linalg.eigvalsh(x)[::-1]
        return float(np.sum(h(w[:k])))
    raise ValueError(f"unknown convexity function {name!r}")


def geodesic_convexity_report(
    n: int,
    rng,
    functions: Sequence[str] = CONVEXITY_FUNCTIONS,
    trials: int = 100,
    t_grid: int = 11,
    tol: float = 1e-9,
    h: Callable = np.square,
    k: Optional[int] = None,
    param=None,
) -> ConvexityReport:
    """Chord test f(gamma(t)) <= (1-t) f(X) + t f(Y) + tol on random data.

    Each trial draws endpoints and (unless ``param`` pins it) a fresh metric
    parameter M.  ``h``/``k`` configure the ordered-eigenvalue sum (top-k,
    default all eigenvalues squared).  Any violation is reported with its
    witness.
    """
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    for name in functions:
        if name not in CONVEXITY_FUNCTIONS:
            raise ValueError(f"unknown convexity function {name!r}")
    ts = np.linspace(0.0, 1.0, t_grid)
    stats = {name: [0, 0, -np.inf, None] for name in functions}
    fixed_man = GbwManifold(param) if param is not None else None
    for _ in range(trials):
        man = fixed_man or GbwManifold(GbwParam(random_spd(rng, n)))
        x = random_spd(rng, n)
        y = random_spd(rng, n)
        a = random_spd(rng, n).mat
        geod = man.geodesic(x, y)
        fx = {name: _convexity_value(name, x.mat, a, h, k) for name in functions}
        fy = {name: _convexity_value(name, y.mat, a, h, k) for name in functions}
        for t in ts:
            pt = geod.eval(float(t)).mat
            for name in functions:
                val = _convexity_value(name, pt, a, h, k)
                chord = (1.0 - t) * fx[name] + t * fy[name]
                gap = val - chord
                rec = stats[name]
                rec[1] += 1
                if gap > rec[2]:
                    rec[2] = gap
                    rec[3] = {"t": float(t), "x": x.mat, "y": y.mat, "m": man.param.m.mat}
                if gap > tol:
                    rec[0] += 1
    report = ConvexityReport()
    for name in functions:
        violations, checks, max_gap, witness = stats[name]
        report.rows.append(
            ConvexityRow(
                function=name,
                trials=trials,
                checks=checks,
                max_gap=float(max_gap),
                violations=violations,
                witness=witness if violations > 0 else None,
            )
        )
    return report
