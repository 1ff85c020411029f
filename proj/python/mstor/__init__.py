"""Multi-splitting two-stage relaxation solver for weakly nonlinear systems Ax = G(x)."""

from ._core import (
    BoundedMap,
    ClassifyMethod,
    HypothesisCheck,
    HypothesisReport,
    InnerSchedule,
    IterationReport,
    LowerPartition,
    MatrixClassReport,
    MethodFamily,
    MstorError,
    MultiSplitting,
    Nonlinearity,
    PBoundReport,
    Regime,
    SolverConfig,
    SparseMatrix,
    SplittingStrategy,
    TorParameters,
    TwoStageSplit,
    WeaklyNonlinearProblem,
    abs_matrix,
    add,
    build_multisplitting,
    comparison_matrix,
    dense_lu_solve,
    equal_values,
    generate_grid_problem,
    grid_laplacian,
    is_h_matrix,
    is_m_matrix,
    is_monotone_matrix,
    load_problem,
    lower_triangular_solve,
    make_componentwise_map,
    matrix_max_abs_diff,
    picard_oracle,
    preset_parameters,
    read_matrix_market,
    residual,
    save_problem,
    solve,
    spectral_radius_nonneg,
    subtract,
    tor_matrices,
    tor_parameter_bound,
    two_stage_decompose,
    validate_h_hypotheses,
    validate_monotone_hypotheses,
    verify_p_bound,
    write_matrix_market,
)

__all__ = [name for name in dir() if not name.startswith("_")]
