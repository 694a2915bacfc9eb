"""Barycenter tests: scalar closed forms, midpoint identity, optimality
residual, objective monotonicity, and the congruence isometry."""

import numpy as np
import pytest

from gbw.barycenter import (
    BarycenterProblem,
    barycenter,
    fixed_point_map,
    optimality_residual,
)
from gbw.datasets import random_spd
from gbw.geometry import GbwManifold
from gbw.linalg import SpdValidationError, spd_invsqrt, spd_sqrt
from util import rel_err


class TestClosedForms:
    def test_single_point(self):
        rng = np.random.default_rng(301)
        man = GbwManifold(random_spd(rng, 4))
        x = random_spd(rng, 4)
        res = barycenter(BarycenterProblem(man, [x]))
        assert res.converged
        assert rel_err(res.point.mat, x.mat) < 1e-10

    def test_identical_points(self):
        rng = np.random.default_rng(302)
        man = GbwManifold(random_spd(rng, 3))
        x = random_spd(rng, 3)
        res = barycenter(BarycenterProblem(man, [x, x, x]))
        assert rel_err(res.point.mat, x.mat) < 1e-10

    def test_scalar_value(self):
        # m=1: barycenter of {4, 16} is ((sqrt4 + sqrt16)/2)^2 = 9
        man = GbwManifold(np.array([[1.0]]))
        res = barycenter(BarycenterProblem(man, [[[4.0]], [[16.0]]]))
        assert abs(res.point.mat[0, 0] - 9.0) < 1e-10

    def test_two_points_give_geodesic_midpoint(self):
        rng = np.random.default_rng(303)
        man = GbwManifold(random_spd(rng, 4))
        x = random_spd(rng, 4)
        y = random_spd(rng, 4)
        res = barycenter(BarycenterProblem(man, [x, y]))
        mid = man.geodesic(x, y).eval(0.5)
        assert np.linalg.norm(res.point.mat - mid.mat) < 1e-8 * max(
            1.0, np.linalg.norm(mid.mat)
        )


class TestConvergence:
    def test_residual_and_monotonicity(self):
        rng = np.random.default_rng(311)
        man = GbwManifold(random_spd(rng, 4))
        pts = [random_spd(rng, 4) for _ in range(6)]
        w = rng.uniform(0.5, 2.0, size=6)
        prob = BarycenterProblem(man, pts, weights=w)
        res = barycenter(prob)
        assert res.converged
        a = res.point
        assert optimality_residual(prob, a) < 1e-8 * max(
            1.0, np.linalg.norm(a.mat)
        )
        diffs = np.diff(res.objective_trace)
        assert np.all(diffs <= 1e-10)

    def test_fixed_point_decreases_objective(self):
        rng = np.random.default_rng(312)
        man = GbwManifold(random_spd(rng, 3))
        pts = [random_spd(rng, 3) for _ in range(4)]
        prob = BarycenterProblem(man, pts)
        a = random_spd(rng, 3)
        f0 = prob.objective(a)
        f1 = prob.objective(fixed_point_map(prob, a))
        assert f1 <= f0 + 1e-12

    def test_congruence_isometry(self):
        # bary_M({X_l}) = M^{1/2} bary_I({M^{-1/2} X_l M^{-1/2}}) M^{1/2}
        rng = np.random.default_rng(313)
        m = random_spd(rng, 3)
        man = GbwManifold(m)
        pts = [random_spd(rng, 3) for _ in range(4)]
        res = barycenter(BarycenterProblem(man, pts))
        mis = spd_invsqrt(m).mat
        ms = spd_sqrt(m).mat
        bw = GbwManifold.bures_wasserstein(3)
        mapped = [mis @ p.mat @ mis for p in pts]
        res_bw = barycenter(BarycenterProblem(bw, mapped))
        assert rel_err(res.point.mat, ms @ res_bw.point.mat @ ms) < 1e-8


class TestValidation:
    def test_empty_rejected(self):
        man = GbwManifold.bures_wasserstein(2)
        with pytest.raises(SpdValidationError):
            BarycenterProblem(man, [])

    def test_bad_weights_rejected(self):
        man = GbwManifold.bures_wasserstein(2)
        pts = [np.eye(2), 2.0 * np.eye(2)]
        with pytest.raises(SpdValidationError):
            BarycenterProblem(man, pts, weights=[1.0, 0.0])
        with pytest.raises(SpdValidationError):
            BarycenterProblem(man, pts, weights=[1.0, -1.0])
        with pytest.raises(SpdValidationError):
            BarycenterProblem(man, pts, weights=[1.0])

    def test_dim_mismatch_rejected(self):
        man = GbwManifold.bures_wasserstein(2)
        with pytest.raises(SpdValidationError):
            BarycenterProblem(man, [np.eye(3)])

    def test_weights_normalized(self):
        man = GbwManifold.bures_wasserstein(2)
        prob = BarycenterProblem(man, [np.eye(2), 2.0 * np.eye(2)], weights=[2.0, 6.0])
        assert np.allclose(prob.weights, [0.25, 0.75])
