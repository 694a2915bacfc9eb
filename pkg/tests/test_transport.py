"""Transport tests: fidelity term with its variational oracles, Gaussian W2
with a Monte Carlo oracle, the closed-form plan, and the robust distance."""

import numpy as np
import pytest

from gbw.datasets import random_orthogonal, random_spd
from gbw.geometry import GbwManifold
from gbw.linalg import GbwParam, SpdValidationError
from gbw.transport import (
    AscentConfig,
    GaussianMeasure,
    RobustConstraintSet,
    f_tilde,
    gaussian_w2,
    robust_distance,
    transport_cost,
    transport_plan,
    variational_minimizer,
    variational_upper_bound,
    weighted_sq_distance,
    weighted_sq_distance_grad,
)
from util import rel_err


class TestFidelity:
    def test_scalar_value(self):
        # x=4, y=9, m=2: sqrt(4 * 9 / 4) = 3
        man = GbwManifold(np.array([[2.0]]))
        assert abs(f_tilde(man, [[4.0]], [[9.0]]) - 3.0) < 1e-12

    def test_all_equal_gives_dimension(self):
        rng = np.random.default_rng(401)
        m = random_spd(rng, 5)
        man = GbwManifold(m)
        assert abs(f_tilde(man, m, m) - 5.0) < 1e-10

    def test_variational_oracle(self):
        # both variational forms dominate f_tilde and meet it at the minimizer
        rng = np.random.default_rng(402)
        man = GbwManifold(random_spd(rng, 3))
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        val = f_tilde(man, x, y)
        a_star = variational_minimizer(man, x, y)
        ar, ge = variational_upper_bound(man, x, y, a_star)
        assert abs(ar - val) < 1e-8 * max(1.0, val)
        assert abs(ge - val) < 1e-8 * max(1.0, val)
        for _ in range(10_000):
            a = random_spd(rng, 3)
            ar, ge = variational_upper_bound(man, x, y, a)
            assert ar >= val - 1e-8
            assert ge >= val - 1e-8


class TestGaussianW2:
    def test_equals_squared_distance(self):
        rng = np.random.default_rng(411)
        m = GbwParam(random_spd(rng, 3))
        man = GbwManifold(m)
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        got = gaussian_w2(GaussianMeasure(x), GaussianMeasure(y), m)
        assert abs(got - man.squared_distance(x, y)) < 1e-12

    def test_monte_carlo_oracle(self):
        # push samples of N(0, X) through T and average the transport cost
        rng = np.random.default_rng(412)
        m = GbwParam(random_spd(rng, 2))
        x = random_spd(rng, 2)
        y = random_spd(rng, 2)
        w2 = gaussian_w2(GaussianMeasure(x), GaussianMeasure(y), m)
        t = transport_plan(x, y, m)
        c = np.linalg.cholesky(x.mat)
        z = rng.standard_normal((200_000, 2)) @ c.T
        diff = z - z @ t.T
        mi = m.m_inv.mat
        est = float(np.mean(np.einsum("ij,jk,ik->i", diff, mi, diff)))
        assert abs(est - w2) <= 0.01 * max(w2, 1e-12)


class TestPlan:
    def test_scalar_plan(self):
        # x=4, y=9 under any m: T = sqrt(9/4)
        t = transport_plan([[4.0]], [[9.0]], np.array([[2.0]]))
        assert abs(t[0, 0] - 1.5) < 1e-12

    def test_pushforward(self):
        rng = np.random.default_rng(421)
        m = GbwParam(random_spd(rng, 4))
        for _ in range(10):
            x = random_spd(rng, 4)
            y = random_spd(rng, 4)
            t = transport_plan(x, y, m)
            assert np.linalg.norm(t @ x.mat @ t.T - y.mat) < 1e-9 * max(
                1.0, np.linalg.norm(y.mat)
            )

    def test_cost_identity(self):
        rng = np.random.default_rng(422)
        m = GbwParam(random_spd(rng, 3))
        man = GbwManifold(m)
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        assert abs(transport_cost(x, y, m) - man.squared_distance(x, y)) < 1e-8

    def test_inverse_plan(self):
        rng = np.random.default_rng(423)
        m = GbwParam(random_spd(rng, 3))
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        t_xy = transport_plan(x, y, m)
        t_yx = transport_plan(y, x, m)
        assert rel_err(t_xy @ t_yx, np.eye(3)) < 1e-9


class TestWeightedDistance:
    def test_gradient_fd_oracle(self):
        rng = np.random.default_rng(431)
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        s = random_spd(rng, 3).mat * 0.3
        g = weighted_sq_distance_grad(x, y, s)
        h = 1e-6
        for _ in range(5):
            d = np.random.default_rng(7).standard_normal((3, 3))
            d = 0.5 * (d + d.T)
            fp = weighted_sq_distance(x, y, s + h * d)
            fm = weighted_sq_distance(x, y, s - h * d)
            fd = (fp - fm) / (2.0 * h)
            assert abs(float(np.sum(g * d)) - fd) < 1e-5 * max(1.0, abs(fd))

    def test_matches_manifold_distance(self):
        rng = np.random.default_rng(432)
        m = random_spd(rng, 3)
        man = GbwManifold(m)
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        s = man.param.m_inv.mat
        assert abs(
            weighted_sq_distance(x, y, s) - man.squared_distance(x, y)
        ) < 1e-10


class TestRobustDistance:
    def test_monotone_trace_and_dominance(self):
        rng = np.random.default_rng(441)
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        res = robust_distance(x, y)
        assert np.all(np.diff(res.trace) >= -1e-14)
        cset = RobustConstraintSet(3)
        assert cset.contains(res.maximizer)
        for _ in range(100):
            w = rng.uniform(0.0, 1.0, size=3)
            q = random_orthogonal(rng, 3)
            s = (q * w) @ q.T
            assert weighted_sq_distance(x, y, s) <= res.value + 1e-8

    def test_zero_on_equal_arguments(self):
        rng = np.random.default_rng(442)
        x = random_spd(rng, 3)
        res = robust_distance(x, x, config=AscentConfig(max_iters=50))
        assert res.value < 1e-10

    def test_triangle_inequality_sampled(self):
        rng = np.random.default_rng(443)
        cfg = AscentConfig(max_iters=300)
        for _ in range(20):
            x, y, z = (random_spd(rng, 3) for _ in range(3))
            dxy = robust_distance(x, y, config=cfg).distance
            dyz = robust_distance(y, z, config=cfg).distance
            dxz = robust_distance(x, z, config=cfg).distance
            assert dxz <= dxy + dyz + 1e-8

    def test_orthogonal_invariance(self):
        # congruence by orthogonal P maps the constraint set onto itself
        rng = np.random.default_rng(444)
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        base = robust_distance(x, y).value
        q = random_orthogonal(rng, 3)
        moved = robust_distance(q.T @ x.mat @ q, q.T @ y.mat @ q).value
        assert abs(base - moved) < 1e-5 * max(1.0, base)

    def test_expansion_monotonicity(self):
        # for P with P P^T >= I the maximizer of (X, Y) stays feasible after
        # the congruence, so the robust value cannot drop
        rng = np.random.default_rng(445)
        for _ in range(5):
            x = random_spd(rng, 3)
            y = random_spd(rng, 3)
            base = robust_distance(x, y).value
            q = random_orthogonal(rng, 3)
            p = q @ np.diag(rng.uniform(1.0, 2.0, size=3))
            moved = robust_distance(p.T @ x.mat @ p, p.T @ y.mat @ p).value
            assert moved >= base - 1e-8

    def test_projection_clamps_spectrum(self):
        cset = RobustConstraintSet(2)
        s = np.diag([5.0, -1.0])
        p = cset.project(s)
        w = np.linalg.eigvalsh(p)
        assert w[-1] <= 1.0 + 1e-12
        assert w[0] >= 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(SpdValidationError):
            robust_distance(np.eye(2), np.eye(3))
