"""bidrank: second-price auction simulation with metric-weighted re-ranking.

Stage I prices candidates with a second-price rule and names the traditional
highest-bid winner. Stage II re-ranks candidates by a weighted combination of
six normalized metrics (revenue, utility, memorability, ctr, relevance,
saliency); the weights come from an exhaustive search over a simplex grid,
constrained so revenue loss stays bounded while the other metrics do not
regress.
"""

from .auction import (
    Bid,
    CandidateOutcome,
    StageOneResult,
    baseline_winner,
    counterfactual_payment,
    run_stage_one,
)
from .data import (
    GeneratorConfig,
    dataset_fingerprint,
    generate_dataset,
    load_dataset,
    record_to_json,
    save_dataset,
    split_folds,
)
from .errors import (
    BidRankError,
    DatasetFormatError,
    DegenerateBaselineError,
    EmptyAuctionError,
    IncompleteCandidateError,
    InconsistentCandidatesError,
    InvalidConfigError,
    InvalidGridStepError,
    InvalidMetricError,
    InvalidWeightsError,
    TooFewAuctionsError,
    UnknownCandidateError,
)
from .harness import DEFAULT_THETA1_GRID, SweepReport, SweepRow, emit_report, run_sweep
from .metrics import (
    METRIC_NAMES,
    N_METRICS,
    PreparedAuction,
    assemble_metric_vectors,
    lexical_relevance,
    normalize_per_auction,
    prepare_auction,
    prepare_dataset,
    tokenize,
)
from .optimizer import (
    ChangeReport,
    FoldOutcome,
    GridEvaluation,
    OptimizationResult,
    TradeoffThresholds,
    apply_weights,
    change_ratio,
    change_report,
    check_thresholds,
    cross_validate,
    enumerate_simplex,
    evaluate_grid,
    feasible,
    grid_size,
    objective,
    optimize_weights,
    pick_best,
)
from .records import AuctionRecord, Candidate, RawMetrics, validate_record
from .rerank import (
    Selection,
    baseline_selection,
    rank_score,
    select_from_prepared,
    select_winner,
    select_with_fallback,
    uniform_weights,
    validate_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AuctionRecord",
    "Bid",
    "BidRankError",
    "Candidate",
    "CandidateOutcome",
    "ChangeReport",
    "DEFAULT_THETA1_GRID",
    "DatasetFormatError",
    "DegenerateBaselineError",
    "EmptyAuctionError",
    "FoldOutcome",
    "GeneratorConfig",
    "GridEvaluation",
    "IncompleteCandidateError",
    "InconsistentCandidatesError",
    "InvalidConfigError",
    "InvalidGridStepError",
    "InvalidMetricError",
    "InvalidWeightsError",
    "METRIC_NAMES",
    "N_METRICS",
    "OptimizationResult",
    "PreparedAuction",
    "RawMetrics",
    "Selection",
    "StageOneResult",
    "SweepReport",
    "SweepRow",
    "TooFewAuctionsError",
    "TradeoffThresholds",
    "UnknownCandidateError",
    "apply_weights",
    "assemble_metric_vectors",
    "baseline_selection",
    "baseline_winner",
    "change_ratio",
    "change_report",
    "check_thresholds",
    "counterfactual_payment",
    "cross_validate",
    "dataset_fingerprint",
    "emit_report",
    "enumerate_simplex",
    "evaluate_grid",
    "feasible",
    "generate_dataset",
    "grid_size",
    "lexical_relevance",
    "load_dataset",
    "normalize_per_auction",
    "objective",
    "optimize_weights",
    "pick_best",
    "prepare_auction",
    "prepare_dataset",
    "rank_score",
    "record_to_json",
    "run_stage_one",
    "run_sweep",
    "save_dataset",
    "select_from_prepared",
    "select_winner",
    "select_with_fallback",
    "split_folds",
    "tokenize",
    "uniform_weights",
    "validate_record",
    "validate_weights",
]
