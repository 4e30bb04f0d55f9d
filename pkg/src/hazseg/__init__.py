"""Piecewise-constant hazard estimation with automatic cut-point selection.

Fits right-censored survival data with a piecewise-constant hazard whose
number and location of cut points are chosen by an iteratively reweighted
squared-difference penalty, with the penalty strength picked by BIC or
cross-validation and pointwise inference by bootstrap resampling.
"""

__version__ = "0.1.0"

from .data import (
    CutGrid,
    SufficientStats,
    SurvivalData,
    make_cut_grid,
    parse_survival_text,
    read_survival_file,
    sufficient_stats,
)
from .inference import (
    BootstrapBands,
    KaplanMeierCurve,
    SegmentedHazard,
    bootstrap_bands,
    extract_segments,
    kaplan_meier,
    survival_quantile,
)
from .likelihood import (
    BandMatrix,
    log_likelihood,
    mle_rates,
    neg_hessian,
    penalized_log_likelihood,
    score,
)
from .selection import (
    PathResult,
    bic,
    cross_validate,
    model_dimension,
    penalty_grid,
    regularization_path,
    select_penalty,
)
from .simulate import (
    McSummary,
    TrueModel,
    monte_carlo_experiment,
    scenario_pch,
    scenario_weibull,
    simulate_dataset,
    total_variation,
)
from .solver import (
    FitOptions,
    PenalizedFit,
    adaptive_ridge_fit,
    newton_fit,
    ridge_fit,
    solve_band_spd,
)

__all__ = [
    "__version__",
    "SurvivalData", "CutGrid", "SufficientStats",
    "parse_survival_text", "read_survival_file", "make_cut_grid", "sufficient_stats",
    "BandMatrix", "log_likelihood", "mle_rates", "penalized_log_likelihood",
    "score", "neg_hessian",
    "FitOptions", "PenalizedFit", "solve_band_spd", "newton_fit",
    "adaptive_ridge_fit", "ridge_fit",
    "PathResult", "penalty_grid", "regularization_path", "model_dimension",
    "bic", "cross_validate", "select_penalty",
    "SegmentedHazard", "BootstrapBands", "KaplanMeierCurve",
    "extract_segments", "survival_quantile", "bootstrap_bands", "kaplan_meier",
    "TrueModel", "McSummary", "scenario_pch", "scenario_weibull",
    "simulate_dataset", "total_variation", "monte_carlo_experiment",
]
