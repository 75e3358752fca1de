"""Penalized linear regression with stability-plus-prediction lambda selection."""

from .model import (
    ADAPTIVE_LASSO,
    LASSO,
    SCAD,
    CenteringInfo,
    Coefficients,
    ConstantColumnError,
    Dataset,
    FitOptions,
    NonConvergenceWarning,
    NumericsError,
    PenaltySpec,
    RankDeficiencyError,
    SupportSet,
    active_set,
    adaptive_weights,
    center_data,
    fit_path,
    fit_penalized,
    kkt_violation,
    lambda_grid,
    ols_fit,
    scad_univariate,
    soft_threshold,
)
from .selection import (
    CriterionScore,
    PassResult,
    SelectionFailure,
    SplitPair,
    bic_select,
    cohens_kappa,
    cp_select,
    cv_error,
    gcv_select,
    kfold_cv_select,
    pass_aggregate,
    pass_score,
    random_half_split,
    select_final_model,
)
from .simbench import (
    CellResult,
    CellSummary,
    ReplicateResult,
    ScenarioConfig,
    SummaryTable,
    TrueModel,
    format_table,
    gen_ar1_design,
    gen_response,
    load_summary_csv,
    penalty_from_name,
    replicate_csv,
    resolve_scenario,
    rpe,
    run_replicate,
    run_scenario,
    scenario_presets,
    summary_csv,
    zero_counts,
)

__version__ = "0.1.0"
