"""Tests for the application problems built on the geometry and solvers."""

import numpy as np
import pytest

from gbw.applications import (
    CONVEXITY_FUNCTIONS,
    GmmModel,
    GmmObjective,
    LogDetProblem,
    MetricFitConfig,
    MetricLearnProblem,
    PcaFitConfig,
    PcaProblem,
    bw_sq_distance,
    fit_gmm,
    geodesic_convexity_report,
    gmm_log_density,
    gmm_single_component_optimum,
    logdet_objective,
    metric_learn_fit,
    metric_objective,
    nearest_neighbor_accuracy,
    pca_deviation,
    pca_fit,
    pca_objective,
    reduced_bw_sq_distance,
    separation_ratio,
)
from gbw.datasets import gmm_synthetic, random_spd, two_class_spd_dataset
from gbw.geometry import GbwManifold, OutOfConeError
from gbw.manifolds import gradient_check, hessian_check, make_manifold, sym_basis
from gbw.solvers import SgdConfig, TrustRegionConfig, trust_region


# --------------------------------------------------------------------------
# log-det minimization
# --------------------------------------------------------------------------


class TestLogDet:
    def test_scalar_values(self):
        obj = logdet_objective(np.array([[2.0]]))
        x = np.array([[3.0]])
        assert obj.cost(x) == pytest.approx(-np.log(3.0) + 6.0)
        assert obj.egrad(x)[0, 0] == pytest.approx(2.0 - 1.0 / 3.0)
        assert obj.ehess(x, np.array([[1.0]]))[0, 0] == pytest.approx(1.0 / 9.0)

    def test_gradient_and_hessian_match_finite_differences(self):
        rng = np.random.default_rng(4)
        obj = logdet_objective(random_spd(rng, 4))
        x = random_spd(rng, 4).mat
        assert gradient_check(obj, x, rng) < 1e-6
        assert hessian_check(obj, x, rng) < 1e-5

    def test_known_optimum(self):
        rng = np.random.default_rng(5)
        prob = LogDetProblem.from_condition(rng, 5, 50.0)
        assert np.allclose(prob.c.mat @ prob.x_star, np.eye(5), atol=1e-10)
        assert np.allclose(prob.objective().egrad(prob.x_star), 0.0, atol=1e-12)

    def test_cost_raises_outside_cone(self):
        obj = logdet_objective(np.eye(2))
        with pytest.raises(OutOfConeError):
            obj.cost(np.diag([1.0, -0.5]))

    @pytest.mark.parametrize("kind", ["gbw_adaptive", "ai", "bw"])
    def test_trust_region_reaches_optimum(self, kind):
        rng = np.random.default_rng(6)
        prob = LogDetProblem.from_condition(rng, 5, 100.0)
        man = make_manifold(kind, n=5)
        res = trust_region(man, prob.objective(), np.eye(5), TrustRegionConfig(gtol=1e-9))
        assert res.converged and res.stop_reason == "gtol"
        rel = np.linalg.norm(res.point - prob.x_star) / np.linalg.norm(prob.x_star)
        assert rel < 1e-8

    def test_adaptive_metric_needs_fewer_model_iterations(self):
        # The re-anchored metric keeps the Hessian well conditioned, so the
        # inner CG solves stay short even for badly conditioned optima.
        rng = np.random.default_rng(7)
        prob = LogDetProblem.from_condition(rng, 8, 1000.0)
        obj = prob.objective()
        cfg = TrustRegionConfig(gtol=1e-9)
        inner = {}
        for kind in ("gbw_adaptive", "bw"):
            res = trust_region(make_manifold(kind, n=8), obj, np.eye(8), cfg)
            assert res.converged
            inner[kind] = res.cumulative_inner
        assert inner["gbw_adaptive"] < inner["bw"]


# --------------------------------------------------------------------------
# mixture fitting
# --------------------------------------------------------------------------


def flat_fd_gradient(obj, point, idx, h=1e-6):
    """Finite-difference gradient of the minibatch cost, blockwise."""
    k = len(point.blocks)
    d = point.blocks[0].shape[0]
    basis = sym_basis(d)
    mat_grads = []
    for j in range(k):
        g = np.zeros((d, d))
        for e in basis:
            blocks_p = list(point.blocks)
            blocks_m = list(point.blocks)
            blocks_p[j] = point.blocks[j] + h * e
            blocks_m[j] = point.blocks[j] - h * e
            cp, _ = obj.minibatch(type(point)(tuple(blocks_p), point.vector), idx)
            cm, _ = obj.minibatch(type(point)(tuple(blocks_m), point.vector), idx)
            g += (cp - cm) / (2.0 * h) * e
        mat_grads.append(g)
    vg = np.zeros_like(point.vector)
    for i in range(point.vector.size):
        dv = np.zeros_like(point.vector)
        dv[i] = h
        cp, _ = obj.minibatch(type(point)(point.blocks, point.vector + dv), idx)
        cm, _ = obj.minibatch(type(point)(point.blocks, point.vector - dv), idx)
        vg[i] = (cp - cm) / (2.0 * h)
    return mat_grads, vg


class TestGmm:
    def test_scalar_density_value(self):
        # d=1, unit parameter, x=0: (2 pi)^{1/2} e^{1/2} = sqrt(2 pi e)
        val = float(np.exp(gmm_log_density(np.array([[0.0]]), np.array([[1.0]])))[0])
        assert val == pytest.approx(np.sqrt(2.0 * np.pi * np.e), abs=1e-12)

    def test_density_quadratic_decay(self):
        s = np.array([[2.0, 0.3], [0.3, 1.0]])
        x = np.array([[0.7, -0.2]])
        expected = (
            np.log(2.0 * np.pi) * 0.0
            + 0.5 * np.log(np.linalg.det(s))
            + 0.5
            - 0.5 * float((x @ s @ x.T)[0, 0])
        )
        assert gmm_log_density(x, s)[0] == pytest.approx(expected, abs=1e-12)

    def test_minibatch_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        data = rng.standard_normal((6, 2))
        obj = GmmObjective(data, k=2)
        model = GmmModel(
            precisions=(random_spd(rng, 2).mat, random_spd(rng, 2).mat),
            logits=np.array([0.2, -0.4]),
        )
        point = model.to_point()
        idx = np.arange(6)
        _, egrad = obj.minibatch(point, idx)
        fd_mats, fd_vec = flat_fd_gradient(obj, point, idx)
        for got, want in zip(egrad.blocks, fd_mats):
            assert np.allclose(got, want, atol=1e-6)
        assert np.allclose(egrad.vector, fd_vec, atol=1e-6)

    def test_single_component_logit_gradient_vanishes(self):
        rng = np.random.default_rng(12)
        obj = GmmObjective(rng.standard_normal((20, 3)), k=1)
        point = GmmModel.initial(rng, 3, 1).to_point()
        _, egrad = obj.minibatch(point, np.arange(20))
        assert np.allclose(egrad.vector, 0.0, atol=1e-14)

    def test_single_component_closed_form_is_stationary(self):
        rng = np.random.default_rng(13)
        data = rng.standard_normal((40, 2)) @ np.array([[1.0, 0.4], [0.0, 0.7]])
        obj = GmmObjective(data, k=1)
        star = gmm_single_component_optimum(data)
        from gbw.manifolds import BlockPoint

        point = BlockPoint((star,), np.zeros(1))
        cost_star, egrad = obj.minibatch(point, np.arange(obj.n_samples))
        assert np.allclose(egrad.blocks[0], 0.0, atol=1e-10)
        cost_eye, _ = obj.minibatch(BlockPoint((np.eye(2),), np.zeros(1)), np.arange(obj.n_samples))
        assert cost_star < cost_eye

    def test_fit_improves_full_likelihood(self):
        rng = np.random.default_rng(14)
        data = gmm_synthetic(rng, 2, 200, k=2)
        model, res = fit_gmm(
            data, 2, config=SgdConfig(epochs=25, batch_size=50, step0=5e-2, seed=1)
        )
        assert not res.aborted
        assert len(res.trace.rows) == 26  # initial row plus one per epoch
        first, last = res.trace.rows[0][2], res.trace.rows[-1][2]
        assert last < first - 1e-3
        for p in model.precisions:
            assert np.linalg.eigvalsh(p)[0] > 0.0

    def test_model_point_roundtrip_and_weights(self):
        model = GmmModel(precisions=(np.eye(2), 2.0 * np.eye(2)), logits=np.array([1.0, -1.0]))
        back = GmmModel.from_point(model.to_point())
        assert np.allclose(back.precisions[1], 2.0 * np.eye(2))
        w = model.weights
        assert w.sum() == pytest.approx(1.0)
        assert w[0] > w[1]

    def test_initial_model_is_spd_and_seeded(self):
        a = GmmModel.initial(np.random.default_rng(3), 4, 3)
        b = GmmModel.initial(np.random.default_rng(3), 4, 3)
        for pa, pb in zip(a.precisions, b.precisions):
            assert np.array_equal(pa, pb)
            assert np.linalg.eigvalsh(pa)[0] > 0.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            GmmObjective(np.empty((0, 2)), k=1)
        with pytest.raises(ValueError):
            GmmObjective(np.ones((5, 2)), k=0)
        with pytest.raises(ValueError):
            GmmObjective(np.array([[np.nan, 0.0]]), k=1)


# --------------------------------------------------------------------------
# distance helpers
# --------------------------------------------------------------------------


class TestDistanceHelpers:
    def test_matches_manifold_distance(self):
        rng = np.random.default_rng(21)
        x, y = random_spd(rng, 4), random_spd(rng, 4)
        man = GbwManifold.bures_wasserstein(4)
        assert bw_sq_distance(x.mat, y.mat) == pytest.approx(
            man.squared_distance(x, y), abs=1e-10
        )

    def test_identity_projection_is_full_distance(self):
        rng = np.random.default_rng(22)
        x, y = random_spd(rng, 3).mat, random_spd(rng, 3).mat
        assert reduced_bw_sq_distance(x, y, np.eye(3)) == pytest.approx(
            bw_sq_distance(x, y), abs=1e-12
        )

    def test_zero_on_equal_arguments(self):
        rng = np.random.default_rng(23)
        x = random_spd(rng, 5).mat
        assert bw_sq_distance(x, x) == 0.0

    def test_rank_deficient_projection_is_finite(self):
        rng = np.random.default_rng(24)
        x, y = random_spd(rng, 4).mat, random_spd(rng, 4).mat
        w = np.zeros((4, 2))
        w[0, 0] = 1.0  # second column zero: projected matrices are singular
        val = reduced_bw_sq_distance(x, y, w)
        assert np.isfinite(val) and val >= 0.0

    def test_nearest_neighbor_perfect_on_train(self):
        rng = np.random.default_rng(25)
        samples, labels = two_class_spd_dataset(rng, 4, 5)
        mats = [s.mat for s in samples]
        acc = nearest_neighbor_accuracy(mats, labels, mats, labels, bw_sq_distance)
        assert acc == 1.0


# --------------------------------------------------------------------------
# dimension reduction
# --------------------------------------------------------------------------


def mixed_dataset(rng, n=5, per_class=6):
    samples, labels = two_class_spd_dataset(rng, n, per_class)
    return [s.mat for s in samples], labels


class TestPca:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(31)
        mats, _ = mixed_dataset(rng)
        prob = PcaProblem.from_samples(mats, 2)
        w = np.linalg.qr(rng.standard_normal((5, 2)))[0]
        assert gradient_check(pca_objective(prob), w, rng) < 1e-5

    def test_full_dimension_deviation_is_frame_independent(self):
        # With d = n the projection is an orthogonal congruence, which the
        # transport distance with identity parameter ignores.
        rng = np.random.default_rng(32)
        mats, _ = mixed_dataset(rng, n=4, per_class=4)
        prob = PcaProblem.from_samples(mats, 4)
        total = sum(bw_sq_distance(x, prob.x_bar) for x in mats)
        q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
        assert pca_deviation(prob, np.eye(4)) == pytest.approx(total, rel=1e-10)
        assert pca_deviation(prob, q) == pytest.approx(total, rel=1e-9)

    def test_rotation_of_frame_does_not_change_value(self):
        rng = np.random.default_rng(33)
        mats, _ = mixed_dataset(rng)
        prob = PcaProblem.from_samples(mats, 2)
        w = np.linalg.qr(rng.standard_normal((5, 2)))[0]
        r = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        assert pca_deviation(prob, w @ r) == pytest.approx(pca_deviation(prob, w), rel=1e-9)

    def test_equal_samples_have_zero_deviation(self):
        rng = np.random.default_rng(34)
        x = random_spd(rng, 4).mat
        prob = PcaProblem.from_samples([x, x, x], 2)
        w = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        assert pca_deviation(prob, w) == pytest.approx(0.0, abs=1e-9)

    def test_fit_is_monotone_and_orthonormal(self):
        # First-order ascent has a linear tail, so the convergence flag is
        # checked at a first-order-realistic tolerance.
        rng = np.random.default_rng(35)
        mats, _ = mixed_dataset(rng)
        prob = PcaProblem.from_samples(mats, 2)
        fit = pca_fit(prob, PcaFitConfig(max_iters=300, tol=1e-4))
        vals = [row[2] for row in fit.trace.rows]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert np.allclose(fit.w.T @ fit.w, np.eye(2), atol=1e-12)
        assert fit.converged

    def test_trust_region_option_matches_ascent(self):
        rng = np.random.default_rng(36)
        mats, _ = mixed_dataset(rng, n=4, per_class=4)
        prob = PcaProblem.from_samples(mats, 2)
        a = pca_fit(prob, PcaFitConfig(max_iters=200))
        b = pca_fit(prob, PcaFitConfig(max_iters=60, optimizer="tr"))
        assert b.value == pytest.approx(a.value, rel=1e-6)

    def test_finite_difference_gate_trips_when_impossible(self):
        rng = np.random.default_rng(37)
        mats, _ = mixed_dataset(rng, n=4, per_class=3)
        prob = PcaProblem.from_samples(mats, 2)
        with pytest.raises(ValueError, match="finite-difference gate"):
            pca_fit(prob, PcaFitConfig(fd_gate=0.0))

    def test_invalid_target_dimension(self):
        rng = np.random.default_rng(38)
        mats, _ = mixed_dataset(rng, n=4, per_class=3)
        with pytest.raises(ValueError):
            PcaProblem.from_samples(mats, 0)
        with pytest.raises(ValueError):
            PcaProblem.from_samples(mats, 5)

    def test_unknown_optimizer_rejected(self):
        rng = np.random.default_rng(39)
        mats, _ = mixed_dataset(rng, n=4, per_class=3)
        prob = PcaProblem.from_samples(mats, 2)
        with pytest.raises(ValueError, match="optimizer"):
            pca_fit(prob, PcaFitConfig(optimizer="newton"))


# --------------------------------------------------------------------------
# metric learning
# --------------------------------------------------------------------------


class TestMetricLearning:
    def test_identity_weight_recovers_plain_distance_loss(self):
        rng = np.random.default_rng(41)
        mats, labels = mixed_dataset(rng, n=4, per_class=3)
        prob = MetricLearnProblem(mats, labels)
        obj = metric_objective(prob, 4)
        manual = 0.0
        for i, j in prob.pairs():
            z = prob.adjacency(i, j) * bw_sq_distance(mats[i], mats[j])
            manual += np.logaddexp(0.0, z)
        assert obj.cost(np.eye(4)) == pytest.approx(manual, rel=1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        mats, labels = mixed_dataset(rng, n=4, per_class=3)
        prob = MetricLearnProblem(mats, labels)
        w = rng.standard_normal((4, 2)) / 2.0
        assert gradient_check(metric_objective(prob, 2), w, rng) < 1e-5

    def test_fit_improves_class_separation(self):
        rng = np.random.default_rng(43)
        mats, labels = mixed_dataset(rng, n=5, per_class=6)
        prob = MetricLearnProblem(mats, labels)
        fit = metric_learn_fit(prob, 2, MetricFitConfig(max_iters=80))
        before = separation_ratio(prob, np.eye(5))
        after = separation_ratio(prob, fit.w)
        assert after < before
        vals = [row[2] for row in fit.trace.rows]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        assert fit.s.shape == (5, 5)
        assert np.linalg.eigvalsh(fit.s)[0] >= -1e-12

    def test_loss_invariant_under_frame_rotation(self):
        rng = np.random.default_rng(44)
        mats, labels = mixed_dataset(rng, n=4, per_class=3)
        obj = metric_objective(MetricLearnProblem(mats, labels), 2)
        w = rng.standard_normal((4, 2))
        r = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        assert obj.cost(w @ r) == pytest.approx(obj.cost(w), rel=1e-10)

    def test_all_same_class_rejected(self):
        rng = np.random.default_rng(45)
        mats = [random_spd(rng, 3).mat for _ in range(4)]
        with pytest.raises(ValueError, match="same class"):
            MetricLearnProblem(mats, np.zeros(4))

    def test_all_distinct_classes_allowed(self):
        # Every pair negative is a legal configuration: the loss pushes all
        # distances up and is still well defined.
        rng = np.random.default_rng(46)
        mats = [random_spd(rng, 3).mat for _ in range(4)]
        prob = MetricLearnProblem(mats, np.arange(4))
        obj = metric_objective(prob, 2)
        w = rng.standard_normal((3, 2))
        assert np.isfinite(obj.cost(w))
        with pytest.raises(ValueError, match="pairs"):
            separation_ratio(prob, np.eye(3))

    def test_label_count_mismatch(self):
        rng = np.random.default_rng(47)
        mats = [random_spd(rng, 3).mat for _ in range(3)]
        with pytest.raises(ValueError, match="label"):
            MetricLearnProblem(mats, np.zeros(2))


# --------------------------------------------------------------------------
# geodesic convexity sweep
# --------------------------------------------------------------------------


class TestConvexity:
    def test_no_violations_on_random_sweep(self):
        rng = np.random.default_rng(51)
        report = geodesic_convexity_report(4, rng, trials=60)
        assert {r.function for r in report.rows} == set(CONVEXITY_FUNCTIONS)
        for row in report.rows:
            assert row.violations == 0
            assert row.max_gap <= 1e-9
            assert row.checks == 60 * 11
            assert row.witness is None
        assert report.total_violations == 0

    def test_partial_eigenvalue_sum(self):
        rng = np.random.default_rng(52)
        report = geodesic_convexity_report(
            5, rng, functions=("eigenvalue_sum",), trials=30, k=2
        )
        assert report.row("eigenvalue_sum").violations == 0

    def test_negative_tolerance_flags_everything(self):
        # Counting sanity: with an impossible tolerance every check trips
        # and the worst witness is kept.
        rng = np.random.default_rng(53)
        report = geodesic_convexity_report(
            3, rng, functions=("trace_linear",), trials=2, tol=-1.0
        )
        row = report.row("trace_linear")
        assert row.violations == row.checks == 2 * 11
        assert row.witness is not None and "t" in row.witness

    def test_bad_arguments_rejected(self):
        rng = np.random.default_rng(54)
        with pytest.raises(ValueError, match="convexity function"):
            geodesic_convexity_report(3, rng, functions=("not_a_name",), trials=1)
        with pytest.raises(ValueError):
            geodesic_convexity_report(3, rng, trials=1, k=9)
