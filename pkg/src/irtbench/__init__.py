"""Benchmark evaluation toolkit: IRT fitting, Glicko-2 tournaments, analysis.

The package turns binary classifier-by-dataset response matrices into
calibrated item-response models, scores classifiers on the latent ability
scale, ranks them through round-robin Glicko-2 rating periods, and
summarizes benchmark quality (difficulty bins, subset strategies,
metadata correlations).
"""
from __future__ import annotations

from .analysis import (
    AGGREGATE_COLUMNS,
    BIN_KEYS,
    DISCRIMINATION_NOTE,
    FIXTURE_NAME,
    SUBSET_STRATEGIES,
    BenchmarkTable,
    Bin,
    BinProbability,
    CorrelationResult,
    DatasetSummary,
    benchmark_percentages,
    bin_probability,
    correlate_metadata,
    load_fixture,
    load_fixture_rows,
    make_bins,
    pearson,
    subset_strategy,
    summarize_dataset,
)
from .errors import (
    ConvergenceError,
    DomainError,
    DuplicateRespondent,
    EmptyInput,
    IrtBenchError,
    MalformedCell,
    NotFound,
    ShapeError,
    TieError,
    TooFewPlayers,
    TooManyItems,
)
from .glicko2 import (
    DEFAULT_RATING,
    DEFAULT_RD,
    DEFAULT_TAU,
    DEFAULT_VOLATILITY,
    GLICKO2_SCALE,
    MatchOutcome,
    Rating,
    confidence_interval,
    expected_score,
    update_rating,
)
from .irt import (
    FitReport,
    IrtModel,
    ItemParams,
    ability_loglik_gradient,
    birnbaum_fit,
    estimate_ability,
    fit_item,
    icc_probability,
    item_log_likelihood,
    item_loglik_gradient,
    total_log_likelihood,
    true_score,
)
from .responses import (
    ITEM_CAP_WARNING,
    ITEM_HARD_LIMIT,
    CapExceeded,
    DatasetMeta,
    ResponseMatrix,
    accuracy,
    load_metadata_json,
    parse_response_matrix,
    serialize_response_matrix,
    synthesize_artificial,
    validate_benchmark_conventions,
)
from .tournament import (
    BumpPoint,
    PeriodResult,
    RatingHistory,
    bump_chart_data,
    round_robin_scores,
    run_tournament,
)

__version__ = "0.1.0"

__all__ = [
    "AGGREGATE_COLUMNS",
    "BIN_KEYS",
    "DISCRIMINATION_NOTE",
    "FIXTURE_NAME",
    "SUBSET_STRATEGIES",
    "ITEM_CAP_WARNING",
    "ITEM_HARD_LIMIT",
    "GLICKO2_SCALE",
    "DEFAULT_RATING",
    "DEFAULT_RD",
    "DEFAULT_VOLATILITY",
    "DEFAULT_TAU",
    "BenchmarkTable",
    "Bin",
    "BinProbability",
    "BumpPoint",
    "CapExceeded",
    "ConvergenceError",
    "CorrelationResult",
    "DatasetMeta",
    "DatasetSummary",
    "DomainError",
    "DuplicateRespondent",
    "EmptyInput",
    "FitReport",
    "IrtBenchError",
    "IrtModel",
    "ItemParams",
    "MalformedCell",
    "MatchOutcome",
    "NotFound",
    "PeriodResult",
    "Rating",
    "RatingHistory",
    "ResponseMatrix",
    "ShapeError",
    "TieError",
    "TooFewPlayers",
    "TooManyItems",
    "ability_loglik_gradient",
    "accuracy",
    "benchmark_percentages",
    "bin_probability",
    "birnbaum_fit",
    "bump_chart_data",
    "confidence_interval",
    "correlate_metadata",
    "estimate_ability",
    "expected_score",
    "fit_item",
    "icc_probability",
    "item_log_likelihood",
    "item_loglik_gradient",
    "load_fixture",
    "load_fixture_rows",
    "load_metadata_json",
    "make_bins",
    "parse_response_matrix",
    "pearson",
    "round_robin_scores",
    "run_tournament",
    "serialize_response_matrix",
    "subset_strategy",
    "summarize_dataset",
    "synthesize_artificial",
    "total_log_likelihood",
    "true_score",
    "update_rating",
    "validate_benchmark_conventions",
]
