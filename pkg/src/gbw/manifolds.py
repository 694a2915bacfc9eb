"""Riemannian optimization layer: geometries as gradient/Hessian converters.

Solvers in ``gbw.solvers`` are generic over a small manifold protocol:

    project(x, u)            ambient direction -> tangent at x
    inner(x, u, v)           Riemannian metric at x
    norm(x, u)
    exp(x, u)                exponential map (raises ExpMapDomainError
                             outside its domain, e.g. leaving the SPD cone)
    rgrad(x, egrad)          Euclidean gradient -> Riemannian gradient
    rhess(x, u, egrad, ehess_u)
                             Euclidean Hessian action -> Riemannian one
    scale(u, alpha)          tangent scaling (trivial for array tangents)
    tangent_dim(x)           dimension of the tangent space
    random_tangent(rng, x)   unit-norm tangent sample
    zero(x)                  zero tangent

Points and tangents are plain float arrays here; the validation-heavy
wrapped types stay at the library boundary in ``gbw.geometry``.  The four
SPD geometries share the tangent space of symmetric matrices and differ
only in the metric, so each class is essentially one metric plus its
closed-form conversion rules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ExpMapDomainError
from .linalg import (
    EPS_PD,
    GEN_LYAP_FLOOR,
    GbwParam,
    SingularOperatorError,
    SpdMatrix,
    _gen_lyap_core,
    _sym,
)

__all__ = [
    "Objective",
    "gradient_check",
    "hessian_check",
    "sym_basis",
    "GbwOptManifold",
    "AdaptiveGbwManifold",
    "AffineInvariantManifold",
    "StiefelManifold",
    "EuclideanManifold",
    "BlockPoint",
    "BlockProductManifold",
    "make_manifold",
]


class Objective:
    """Smooth cost with ambient first and (optionally) second derivatives.

    ``cost`` maps a point to a float, ``egrad`` to the ambient (Euclidean)
    gradient, and ``ehess`` maps (point, direction) to the ambient
    Hessian-vector product.  Conversion to Riemannian quantities is the
    manifold's job, so one objective serves every geometry.
    """

    def __init__(self, cost, egrad, ehess=None):
        self._cost = cost
        self._egrad = egrad
        self._ehess = ehess

    def cost(self, x) -> float:
        return float(self._cost(x))

    def egrad(self, x) -> np.ndarray:
        return np.asarray(self._egrad(x), dtype=float)

    @property
    def has_hessian(self) -> bool:
        return self._ehess is not None

    def ehess(self, x, u) -> np.ndarray:
        if self._ehess is None:
            raise NotImplementedError("objective has no Hessian rule")
        return np.asarray(self._ehess(x, u), dtype=float)


def _probe_directions(rng: np.random.Generator, x: np.ndarray, n_dirs: int):
    """Unit Frobenius-norm probe directions matching the point's shape.

    Square symmetric points get symmetric directions (their natural ambient
    space); everything else gets unconstrained Gaussian directions.
    """
    symmetric = x.ndim == 2 and x.shape[0] == x.shape[1] and np.allclose(x, x.T)
    out = []
    for _ in range(n_dirs):
        d = rng.standard_normal(x.shape)
        if symmetric:
            d = _sym(d)
        out.append(d / np.linalg.norm(d))
    return out


def gradient_check(obj: Objective, x, rng, n_dirs: int = 6, step: float = 1e-6) -> float:
    """Largest relative error of egrad against central finite differences.

    The error is normalized by the largest directional derivative seen, so
    a single near-zero direction cannot blow up the ratio.
    """
    x = np.asarray(x, dtype=float)
    g = obj.egrad(x)
    numeric, analytic = [], []
    for d in _probe_directions(rng, x, n_dirs):
        numeric.append((obj.cost(x + step * d) - obj.cost(x - step * d)) / (2.0 * step))
        analytic.append(float(np.vdot(g, d)))
    scale = max(max(abs(v) for v in numeric), max(abs(v) for v in analytic), 1e-12)
    return max(abs(a - b) for a, b in zip(numeric, analytic)) / scale


def hessian_check(obj: Objective, x, rng, n_dirs: int = 6, step: float = 1e-5) -> float:
    """Largest relative error of ehess against differenced gradients."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    scale = 1e-12
    for d in _probe_directions(rng, x, n_dirs):
        numeric = (obj.egrad(x + step * d) - obj.egrad(x - step * d)) / (2.0 * step)
        analytic = obj.ehess(x, d)
        worst = max(worst, float(np.linalg.norm(numeric - analytic)))
        scale = max(scale, float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)))
    return worst / scale


def sym_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of symmetric matrices: E_ii and (E_ij + E_ji)/sqrt(2)."""
    out = []
    for i in range(n):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        out.append(e)
        for j in range(i + 1, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
            out.append(e)
    return out


class _SymTangentMixin:
    """Shared plumbing for geometries whose tangents are symmetric matrices."""

    def project(self, x, u) -> np.ndarray:
        return _sym(np.asarray(u, dtype=float))

    def norm(self, x, u) -> float:
        return float(np.sqrt(max(self.inner(x, u, u), 0.0)))

    def scale(self, u, alpha: float) -> np.ndarray:
        return alpha * u

    def tangent_dim(self, x) -> int:
        n = x.shape[0]
        return n * (n + 1) // 2

    def zero(self, x) -> np.ndarray:
        return np.zeros_like(x)

    def random_tangent(self, rng, x) -> np.ndarray:
        u = _sym(rng.standard_normal(x.shape))
        nrm = self.norm(x, u)
        if nrm <= 0.0:
            raise SingularOperatorError("degenerate metric in random_tangent")
        return u / nrm


class GbwOptManifold(_SymTangentMixin):
    """SPD matrices with the generalized Bures-Wasserstein metric, fixed M.

    With L solving X L M + M L X = U, the metric is (1/2) tr(L V), the
    exponential map X + U + M L X L M (defined while M + M L M stays PD),
    the gradient conversion 2 X G M + 2 M G X, and the Hessian conversion
    follows the Levi-Civita connection of the fixed-M metric.
    """

    name = "gbw"

    def __init__(self, param):
        self.param = param if isinstance(param, GbwParam) else GbwParam(param)

    @classmethod
    def bures_wasserstein(cls, n: int) -> "GbwOptManifold":
        man = cls(GbwParam.identity(n))
        man.name = "bw"
        return man

    def lyapunov(self, x, u) -> np.ndarray:
        return _sym(_gen_lyap_core(x, self.param.m_invsqrt.mat, _sym(u), GEN_LYAP_FLOOR))

    def inner(self, x, u, v) -> float:
        return 0.5 * float(np.vdot(self.lyapunov(x, u), _sym(v)))

    def exp(self, x, u) -> np.ndarray:
        m = self.param.m.mat
        l = self.lyapunov(x, u)
        ml = m @ l
        guard = _sym(m + ml @ m)
        w = np.linalg.eigvalsh(guard)
        if w[0] <= EPS_PD * max(abs(w[-1]), 1e-300):
            raise ExpMapDomainError(
                f"tangent leaves the exp domain: min eig of M + MLM = {w[0]:.3e}"
            )
        return _sym(x + u + ml @ x @ ml.T)

    def rgrad(self, x, egrad) -> np.ndarray:
        t = 2.0 * (x @ _sym(egrad) @ self.param.m.mat)
        return t + t.T

    def rhess(self, x, u, egrad, ehess_u) -> np.ndarray:
        m = self.param.m.mat
        g = _sym(egrad)
        gp = _sym(ehess_u)
        l = self.lyapunov(x, u)
        grad = self.rgrad(x, g)
        t1 = u @ g @ m
        t2 = x @ gp @ m
        gm = g @ m
        lm = l @ m
        t3 = x @ gm @ lm
        t4 = x @ lm @ gm
        t5 = m @ l @ grad
        out = (t1 + t1.T) + 2.0 * (t2 + t2.T) + (t3 + t3.T) + (t4 + t4.T) - 0.5 * (t5 + t5.T)
        return _sym(out)

    def anchored_at(self, x) -> "GbwOptManifold":
        return self

    def __repr__(self):
        return f"GbwOptManifold(dim={self.param.dim}, name={self.name!r})"


class AdaptiveGbwManifold(_SymTangentMixin):
    """Generalized Bures-Wasserstein geometry with M tied to the iterate.

    Setting M = X collapses every conversion to a closed form:

        L(U)      = (1/2) X^{-1} U X^{-1}
        inner     = (1/4) tr(X^{-1} U X^{-1} V)
        exp       = X + U + (1/4) U X^{-1} U    (defined while X + U/2 is PD)
        rgrad     = 4 X G X
        rhess(U)  = 4 X Gp X + {U G X + X G U}

    with G, Gp the symmetrized Euclidean gradient and Hessian action.
    """

    name = "gbw_adaptive"

    def lyapunov(self, x, u) -> np.ndarray:
        xi = np.linalg.inv(x)
        return _sym(0.5 * xi @ _sym(u) @ xi)

    def inner(self, x, u, v) -> float:
        a = np.linalg.solve(x, _sym(u))
        b = np.linalg.solve(x, _sym(v))
        return 0.25 * float(np.trace(a @ b))

    def exp(self, x, u) -> np.ndarray:
        u = _sym(u)
        w = np.linalg.eigvalsh(_sym(x + 0.5 * u))
        if w[0] <= EPS_PD * max(abs(w[-1]), 1e-300):
            raise ExpMapDomainError(
                f"tangent leaves the exp domain: min eig of X + U/2 = {w[0]:.3e}"
            )
        return _sym(x + u + 0.25 * u @ np.linalg.solve(x, u))

    def rgrad(self, x, egrad) -> np.ndarray:
        return _sym(4.0 * x @ _sym(egrad) @ x)

    def rhess(self, x, u, egrad, ehess_u) -> np.ndarray:
        t = _sym(u) @ _sym(egrad) @ x
        return _sym(4.0 * x @ _sym(ehess_u) @ x + t + t.T)

    def anchored_at(self, x) -> GbwOptManifold:
        return GbwOptManifold(GbwParam(SpdMatrix(x)))

    def __repr__(self):
        return "AdaptiveGbwManifold()"


class AffineInvariantManifold(_SymTangentMixin):
    """SPD matrices with the affine-invariant metric tr(X^{-1} U X^{-1} V).

    The exponential X^{1/2} expm(X^{-1/2} U X^{-1/2}) X^{1/2} never leaves
    the cone; a non-finite result (overflowing entries) is reported as a
    domain error so step-control loops can react the same way as for the
    transport geometries.
    """

    name = "ai"

    def inner(self, x, u, v) -> float:
        a = np.linalg.solve(x, _sym(u))
        b = np.linalg.solve(x, _sym(v))
        return float(np.trace(a @ b))

    def exp(self, x, u) -> np.ndarray:
        w, q = np.linalg.eigh(x)
        if w[0] <= 0.0:
            raise ExpMapDomainError("base point is not PD")
        rt = (q * np.sqrt(w)) @ q.T
        irt = (q * (1.0 / np.sqrt(w))) @ q.T
        ws, qs = np.linalg.eigh(_sym(irt @ _sym(u) @ irt))
        e = (qs * np.exp(ws)) @ qs.T
        out = _sym(rt @ e @ rt)
        if not np.all(np.isfinite(out)):
            raise ExpMapDomainError("exponential overflowed to non-finite entries")
        return out

    def rgrad(self, x, egrad) -> np.ndarray:
        return _sym(x @ _sym(egrad) @ x)

    def rhess(self, x, u, egrad, ehess_u) -> np.ndarray:
        t = _sym(u) @ _sym(egrad) @ x
        return _sym(x @ _sym(ehess_u) @ x + 0.5 * (t + t.T))

    def anchored_at(self, x) -> "AffineInvariantManifold":
        return self

    def __repr__(self):
        return "AffineInvariantManifold()"


class StiefelManifold:
    """Orthonormal n x d frames with the embedded Euclidean metric.

    Tangents at W are ambient matrices U with sym(W^T U) = 0; the
    retraction is the polar factor of W + U, which stays orthonormal to
    machine precision and errors out on rank deficiency.
    """

    name = "stiefel"

    def __init__(self, n: int, d: int):
        if not 1 <= d <= n:
            raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
        self.n = n
        self.d = d

    def project(self, w, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return u - w @ _sym(w.T @ u)

    def inner(self, w, u, v) -> float:
        return float(np.vdot(u, v))

    def norm(self, w, u) -> float:
        return float(np.linalg.norm(u))

    def scale(self, u, alpha: float) -> np.ndarray:
        return alpha * u

    def exp(self, w, u) -> np.ndarray:
        a = w + u
        left, s, right = np.linalg.svd(a, full_matrices=False)
        if s[-1] <= 1e-13 * s[0] or s[0] == 0.0:
            raise SingularOperatorError(
                f"rank-deficient frame in retraction (singular values [{s[-1]:.3e}, {s[0]:.3e}])"
            )
        return left @ right

    def rgrad(self, w, egrad) -> np.ndarray:
        return self.project(w, egrad)

    def rhess(self, w, u, egrad, ehess_u):
        raise NotImplementedError(
            "Stiefel ships first-order tools only; use a finite-difference "
            "Hessian operator if a second-order model is needed"
        )

    def tangent_dim(self, w) -> int:
        return self.n * self.d - self.d * (self.d + 1) // 2

    def zero(self, w) -> np.ndarray:
        return np.zeros_like(w)

    def random_tangent(self, rng, w) -> np.ndarray:
        u = self.project(w, rng.standard_normal(w.shape))
        nrm = np.linalg.norm(u)
        if nrm <= 0.0:
            raise SingularOperatorError("degenerate tangent sample")
        return u / nrm

    def __repr__(self):
        return f"StiefelManifold(n={self.n}, d={self.d})"


class EuclideanManifold:
    """Flat geometry on arrays; the identity conversion rules."""

    name = "euclidean"

    def project(self, x, u) -> np.ndarray:
        return np.asarray(u, dtype=float)

    def inner(self, x, u, v) -> float:
        return float(np.vdot(u, v))

    def norm(self, x, u) -> float:
        return float(np.linalg.norm(u))

    def scale(self, u, alpha: float) -> np.ndarray:
        return alpha * u

    def exp(self, x, u) -> np.ndarray:
        return x + u

    def rgrad(self, x, egrad) -> np.ndarray:
        return np.asarray(egrad, dtype=float)

    def rhess(self, x, u, egrad, ehess_u) -> np.ndarray:
        return np.asarray(ehess_u, dtype=float)

    def tangent_dim(self, x) -> int:
        return int(np.asarray(x).size)

    def zero(self, x) -> np.ndarray:
        return np.zeros_like(x)

    def random_tangent(self, rng, x) -> np.ndarray:
        u = rng.standard_normal(np.asarray(x).shape)
        return u / np.linalg.norm(u)


@dataclass(frozen=True)
class BlockPoint:
    """Point (or tangent) on a product of SPD blocks and a flat vector."""

    blocks: tuple
    vector: np.ndarray

    @property
    def k(self) -> int:
        return len(self.blocks)


class BlockProductManifold:
    """Product of k copies of one SPD geometry and a Euclidean vector factor.

    Points and tangents are BlockPoint instances; the metric is the sum of
    the block metrics plus the dot product on the vector part.  This is the
    search space for mixture fitting: k precision matrices plus weight
    logits.
    """

    def __init__(self, block_manifold, k: int):
        if k < 1:
            raise ValueError("need at least one block")
        self.block = block_manifold
        self.k = k
        self.name = f"{block_manifold.name}_x{k}"

    def _pairs(self, p: BlockPoint, t: BlockPoint):
        return zip(p.blocks, t.blocks)

    def project(self, p: BlockPoint, t: BlockPoint) -> BlockPoint:
        blocks = tuple(self.block.project(x, u) for x, u in self._pairs(p, t))
        return BlockPoint(blocks, np.asarray(t.vector, dtype=float))

    def inner(self, p: BlockPoint, t: BlockPoint, s: BlockPoint) -> float:
        total = float(np.vdot(t.vector, s.vector))
        for x, u, v in zip(p.blocks, t.blocks, s.blocks):
            total += self.block.inner(x, u, v)
        return total

    def norm(self, p: BlockPoint, t: BlockPoint) -> float:
        return float(np.sqrt(max(self.inner(p, t, t), 0.0)))

    def scale(self, t: BlockPoint, alpha: float) -> BlockPoint:
        return BlockPoint(tuple(alpha * u for u in t.blocks), alpha * t.vector)

    def exp(self, p: BlockPoint, t: BlockPoint) -> BlockPoint:
        blocks = tuple(self.block.exp(x, u) for x, u in self._pairs(p, t))
        return BlockPoint(blocks, p.vector + t.vector)

    def rgrad(self, p: BlockPoint, eg: BlockPoint) -> BlockPoint:
        blocks = tuple(self.block.rgrad(x, g) for x, g in self._pairs(p, eg))
        return BlockPoint(blocks, np.asarray(eg.vector, dtype=float))

    def tangent_dim(self, p: BlockPoint) -> int:
        total = int(p.vector.size)
        for x in p.blocks:
            total += self.block.tangent_dim(x)
        return total

    def zero(self, p: BlockPoint) -> BlockPoint:
        return BlockPoint(tuple(np.zeros_like(x) for x in p.blocks), np.zeros_like(p.vector))

    def random_tangent(self, rng, p: BlockPoint) -> BlockPoint:
        t = BlockPoint(
            tuple(self.block.random_tangent(rng, x) for x in p.blocks),
            rng.standard_normal(p.vector.shape),
        )
        return self.scale(t, 1.0 / self.norm(p, t))

    def __repr__(self):
        return f"BlockProductManifold({self.block!r}, k={self.k})"


def make_manifold(kind: str, *, n: int | None = None, d: int | None = None, param=None):
    """Build a manifold from its string name.

    kind: one of ``gbw`` (fixed M, requires ``param``), ``gbw_adaptive``,
    ``bw`` (requires ``n``), ``affine_invariant``/``ai``, and ``stiefel``
    (requires ``n`` and ``d``).
    """
    kind = kind.lower()
    if kind == "gbw":
        if param is None:
            raise ValueError("kind 'gbw' needs the metric parameter matrix")
        return GbwOptManifold(param)
    if kind == "gbw_adaptive":
        return AdaptiveGbwManifold()
    if kind == "bw":
        if n is None:
            raise ValueError("kind 'bw' needs the dimension n")
        return GbwOptManifold.bures_wasserstein(n)
    if kind in ("affine_invariant", "ai"):
        return AffineInvariantManifold()
    if kind == "stiefel":
        if n is None or d is None:
            raise ValueError("kind 'stiefel' needs both n and d")
        return StiefelManifold(n, d)
    raise ValueError(f"unknown manifold kind {kind!r}")
