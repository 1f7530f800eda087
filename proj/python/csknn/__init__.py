"""Cost-sensitive k-NN classification on manifolds with random projections."""

from ._core import (
    BayesOracle,
    CheckResult,
    ConcentrationReport,
    CostCalibration,
    CostMatrix,
    CoveringBounds,
    Dataset,
    DistortionReport,
    DistributionSpec,
    EmbeddedManifold,
    EvalResult,
    ExperimentConfig,
    HardConstruction,
    IntersectionReport,
    ManifoldKind,
    NeighbourIndex,
    ProbVector,
    ProjectionKind,
    ProjectionMatrix,
    ProjectionSpec,
    QueryMode,
    QueryResult,
    RateReport,
    RegularityParams,
    Schedule,
    SlopeFit,
    SyntheticDistribution,
    TrialRow,
    ValidationKind,
    ValidationReport,
    VolumeBoundsRow,
    VerifySummary,
    bayes_oracle,
    build_distribution,
    build_index,
    calibrate,
    check_intersection_bound,
    check_volume_bounds,
    classify,
    covering_bounds,
    covering_number,
    dimension_bound_epsilon,
    dimension_bound_theta,
    distortion,
    dudley_bound,
    doubling_constant,
    epsilon_from_theta,
    estimate_eta,
    euclidean_ball_volume,
    evaluate,
    fit_slope,
    format_summary,
    geodesic_ball_volume,
    geodesic_distance,
    hard_params,
    infinite_margin,
    is_reasonable,
    k_schedule,
    make_manifold,
    margin,
    margin_guarantee_sweep,
    omega_ratio,
    optimal_labels,
    parse_distribution,
    predict,
    query_exact,
    query_projected,
    regret,
    run_rate,
    sample,
    sample_projection,
    sample_uniform,
    separated_net,
    serialize_distribution,
    smoothness_constants,
    summary_csv,
    theta_from_epsilon,
    theta_ratio,
    trial_csv,
    two_point,
    validate_distribution,
    verify_all,
    verify_concentration,
)

__all__ = [name for name in dir() if not name.startswith("_")]
