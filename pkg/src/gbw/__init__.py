"""Generalized Bures-Wasserstein geometry on SPD matrices.

The package bundles the metric and its closed forms (distance, geodesics,
exponential/logarithm maps, connection, curvature), the optimal-transport
view (plans, couplings, barycenters, a robust worst-case distance), and
Riemannian solvers (trust region, stochastic gradient) together with the
applications they drive: log-det optimization, Gaussian mixture fitting,
geometry-aware dimension reduction, and metric learning.  ``gbw.cli``
exposes the experiment runner installed as the ``gbw`` console script.
"""

__version__ = "0.1.0"

from .linalg import (
    EigPair,
    GbwParam,
    SingularOperatorError,
    SpdMatrix,
    SpdValidationError,
    SymMatrix,
    geometric_mean,
    loewner_gap,
    polar_factor,
    solve_gen_lyapunov,
    spd_inv,
    spd_invsqrt,
    spd_sqrt,
    sym_eig,
)
from .geometry import ExpMapDomainError, GbwManifold, GeodesicSegment, OutOfConeError
from .manifolds import (
    AdaptiveGbwManifold,
    AffineInvariantManifold,
    BlockPoint,
    BlockProductManifold,
    EuclideanManifold,
    GbwOptManifold,
    Objective,
    StiefelManifold,
    gradient_check,
    hessian_check,
    make_manifold,
    sym_basis,
)
from .solvers import (
    RsgdResult,
    SgdConfig,
    SolveTrace,
    TRACE_COLUMNS,
    TrustRegionConfig,
    TrustRegionResult,
    rsgd,
    trust_region,
)
from .submersion import (
    CurvatureBounds,
    FiberPoint,
    curvature_bounds,
    fiber_point,
    horizontal_lift,
    horizontal_project,
    pushforward,
    sectional_curvature,
    vertical_project,
)
from .transport import (
    AscentConfig,
    GaussianMeasure,
    RobustConstraintSet,
    RobustDistanceResult,
    gaussian_w2,
    robust_distance,
    transport_cost,
    transport_plan,
    weighted_sq_distance,
)
from .barycenter import (
    BarycenterProblem,
    BarycenterResult,
    barycenter,
    fixed_point_map,
    optimality_residual,
)
from .datasets import (
    CovarianceSample,
    gmm_synthetic,
    ingest_covariances,
    make_spd_with_condition,
    random_orthogonal,
    random_spd,
    random_sym,
    two_class_spd_dataset,
)
from .applications import (
    GmmModel,
    GmmObjective,
    LogDetProblem,
    MetricFitConfig,
    MetricFitResult,
    MetricLearnProblem,
    PcaFitConfig,
    PcaFitResult,
    PcaProblem,
    bw_sq_distance,
    fit_gmm,
    geodesic_convexity_report,
    gmm_single_component_optimum,
    logdet_objective,
    metric_learn_fit,
    metric_objective,
    nearest_neighbor_accuracy,
    pca_fit,
    pca_objective,
    reduced_bw_sq_distance,
    separation_ratio,
)
from .experiments import ConfigError, ExperimentConfig, ResultBundle, build_config, emit, run

__all__ = [
    "__version__",
    # linear algebra kernel
    "EigPair",
    "GbwParam",
    "SingularOperatorError",
    "SpdMatrix",
    "SpdValidationError",
    "SymMatrix",
    "geometric_mean",
    "loewner_gap",
    "polar_factor",
    "solve_gen_lyapunov",
    "spd_inv",
    "spd_invsqrt",
    "spd_sqrt",
    "sym_eig",
    # metric geometry
    "ExpMapDomainError",
    "GbwManifold",
    "GeodesicSegment",
    "OutOfConeError",
    # optimization geometries
    "AdaptiveGbwManifold",
    "AffineInvariantManifold",
    "BlockPoint",
    "BlockProductManifold",
    "EuclideanManifold",
    "GbwOptManifold",
    "Objective",
    "StiefelManifold",
    "gradient_check",
    "hessian_check",
    "make_manifold",
    "sym_basis",
    # solvers
    "RsgdResult",
    "SgdConfig",
    "SolveTrace",
    "TRACE_COLUMNS",
    "TrustRegionConfig",
    "TrustRegionResult",
    "rsgd",
    "trust_region",
    # submersion and curvature
    "CurvatureBounds",
    "FiberPoint",
    "curvature_bounds",
    "fiber_point",
    "horizontal_lift",
    "horizontal_project",
    "pushforward",
    "sectional_curvature",
    "vertical_project",
    # transport
    "AscentConfig",
    "GaussianMeasure",
    "RobustConstraintSet",
    "RobustDistanceResult",
    "gaussian_w2",
    "robust_distance",
    "transport_cost",
    "transport_plan",
    "weighted_sq_distance",
    # barycenters
    "BarycenterProblem",
    "BarycenterResult",
    "barycenter",
    "fixed_point_map",
    "optimality_residual",
    # data
    "CovarianceSample",
    "gmm_synthetic",
    "ingest_covariances",
    "make_spd_with_condition",
    "random_orthogonal",
    "random_spd",
    "random_sym",
    "two_class_spd_dataset",
    # applications
    "GmmModel",
    "GmmObjective",
    "LogDetProblem",
    "MetricFitConfig",
    "MetricFitResult",
    "MetricLearnProblem",
    "PcaFitConfig",
    "PcaFitResult",
    "PcaProblem",
    "bw_sq_distance",
    "fit_gmm",
    "geodesic_convexity_report",
    "gmm_single_component_optimum",
    "logdet_objective",
    "metric_learn_fit",
    "metric_objective",
    "nearest_neighbor_accuracy",
    "pca_fit",
    "pca_objective",
    "reduced_bw_sq_distance",
    "separation_ratio",
    # experiment runner
    "ConfigError",
    "ExperimentConfig",
    "ResultBundle",
    "build_config",
    "emit",
    "run",
]
