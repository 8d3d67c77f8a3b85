"""Constrained weight search over a discretized probability simplex.

The optimizer maximizes the summed rank scores of selected candidates over a
training set, subject to bounds on how much each metric may change relative
to the baseline highest-bid selections:

    |change(revenue)| <= |revenue_loss_limit|        (revenue may only drop so far)
    change(k)         >= min_increase[k]             (other metrics must not regress)

The change ratio of a metric is the summed per-auction difference between the
selected and baseline values, divided by the summed baseline values.

The search is exhaustive over all weight vectors whose components are
multiples of a step 1/M and sum to 1. Grid vectors are enumerated with the
first component varying slowest from M down to 0, so the front-loaded
composition (M, 0, ..., 0) comes first; ties on the objective are resolved in
favor of the earliest enumerated composition. Evaluation runs in a compiled
kernel parallelized over grid vectors; each vector's accumulation order over
auctions is fixed, so parallel and serial runs produce bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numba
import numpy as np

from .data import split_folds
from .errors import (
    DegenerateBaselineError,
    EmptyAuctionError,
    InconsistentCandidatesError,
    InvalidConfigError,
    InvalidGridStepError,
)
from .metrics import METRIC_NAMES, N_METRICS, PreparedAuction, prepare_dataset
from .records import AuctionRecord
from .rerank import Selection, baseline_selection, select_from_prepared, validate_weights


@dataclass(frozen=True)
class TradeoffThresholds:
    """Publisher-chosen trade-off bounds.

    ``revenue_loss_limit`` is non-positive: the revenue change ratio must stay
    within its magnitude. ``min_increase`` holds the non-negative floors for
    the remaining five metrics (utility, memorability, ctr, relevance,
    saliency), in the fixed metric order.
    """

    revenue_loss_limit: float
    min_increase: tuple[float, float, float, float, float] = (0.0, 0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not math.isfinite(self.revenue_loss_limit) or self.revenue_loss_limit > 0.0:
            raise InvalidConfigError(
                f"revenue_loss_limit must be a finite non-positive real, got {self.revenue_loss_limit!r}"
            )
        increases = tuple(float(v) for v in self.min_increase)
        if len(increases) != N_METRICS - 1:
            raise InvalidConfigError(
                f"min_increase needs {N_METRICS - 1} values, got {len(increases)}"
            )
        for name, value in zip(METRIC_NAMES[1:], increases):
            if not math.isfinite(value) or value < 0.0:
                raise InvalidConfigError(
                    f"min_increase for {name!r} must be a finite non-negative real, got {value!r}"
                )
        object.__setattr__(self, "revenue_loss_limit", float(self.revenue_loss_limit))
        object.__setattr__(self, "min_increase", increases)

    def as_array(self) -> np.ndarray:
        return np.array((self.revenue_loss_limit, *self.min_increase))


@dataclass(frozen=True)
class ChangeReport:
    """Per-metric change ratios between proposed and baseline selections."""

    ratios: np.ndarray
    n_auctions: int


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of one grid search: the best feasible weights, if any."""

    status: str  # "feasible" or "infeasible"
    weights: np.ndarray | None
    composition: tuple[int, ...] | None
    objective: float | None
    train_changes: ChangeReport | None
    candidates_evaluated: int


def _as_prepared(
    train: Sequence[AuctionRecord] | Sequence[PreparedAuction], reserve: float
) -> list[PreparedAuction]:
    items = list(train)
    if not items:
        raise EmptyAuctionError("empty auction set")
    if isinstance(items[0], AuctionRecord):
        return prepare_dataset(items, reserve)
    return items


def _check_aligned(proposed: Sequence[Selection], baseline: Sequence[Selection]) -> None:
    if not proposed or len(proposed) != len(baseline):
        raise InconsistentCandidatesError("selection lists must be non-empty and the same length")
    for p, b in zip(proposed, baseline):
        if p.auction_id != b.auction_id:
            raise InconsistentCandidatesError(
                f"selection lists misaligned: {p.auction_id!r} vs {b.auction_id!r}"
            )


def change_ratio(k: int, proposed: Sequence[Selection], baseline: Sequence[Selection]) -> float:
    """Aggregate relative change of metric ``k`` versus the baseline selections.

    Computed as the sum of per-auction differences over the sum of baseline
    values, so that identical selections yield exactly 0.0.
    """
    if not 0 <= k < N_METRICS:
        raise ValueError(f"metric index must be in [0, {N_METRICS}), got {k}")
    _check_aligned(proposed, baseline)
    numerator = 0.0
    denominator = 0.0
    for p, b in zip(proposed, baseline):
        numerator += float(p.metric_vector[k]) - float(b.metric_vector[k])
        denominator += float(b.metric_vector[k])
    if denominator == 0.0:
        raise DegenerateBaselineError(
            f"degenerate baseline metric {METRIC_NAMES[k]!r}: baseline values sum to zero"
        )
    return numerator / denominator


def change_report(proposed: Sequence[Selection], baseline: Sequence[Selection]) -> ChangeReport:
    """All six change ratios between aligned selection lists."""
    _check_aligned(proposed, baseline)
    prop = np.stack([s.metric_vector for s in proposed])
    base = np.stack([s.metric_vector for s in baseline])
    numerator = (prop - base).sum(axis=0)
    denominator = base.sum(axis=0)
    for k in range(N_METRICS):
        if denominator[k] == 0.0:
            raise DegenerateBaselineError(
                f"degenerate baseline metric {METRIC_NAMES[k]!r}: baseline values sum to zero"
            )
    return ChangeReport(ratios=numerator / denominator, n_auctions=len(proposed))


def check_thresholds(report: ChangeReport, thresholds: TradeoffThresholds) -> bool:
    """Non-strict feasibility test of a change report against the thresholds."""
    theta = thresholds.as_array()
    r = report.ratios
    return bool(abs(r[0]) <= abs(theta[0])) and bool(np.all(r[1:] >= theta[1:]))


def feasible(
    weights: np.ndarray,
    train: Sequence[AuctionRecord] | Sequence[PreparedAuction],
    thresholds: TradeoffThresholds,
    *,
    reserve: float = 0.0,
) -> tuple[bool, ChangeReport]:
    """Run the re-ranker with ``weights`` on the training set and test the bounds."""
    w = validate_weights(weights)
    prepared = _as_prepared(train, reserve)
    proposed = [select_from_prepared(w, p) for p in prepared]
    baseline = [baseline_selection(p, w) for p in prepared]
    report = change_report(proposed, baseline)
    return check_thresholds(report, thresholds), report


def objective(
    weights: np.ndarray,
    train: Sequence[AuctionRecord] | Sequence[PreparedAuction],
    *,
    reserve: float = 0.0,
) -> float:
    """Sum over auctions of the best rank score achievable under ``weights``."""
    w = validate_weights(weights)
    prepared = _as_prepared(train, reserve)
    total = 0.0
    for p in prepared:
        total += float(np.max(p.vectors @ w))
    return total


def apply_weights(
    weights: np.ndarray,
    dataset: Sequence[AuctionRecord] | Sequence[PreparedAuction],
    *,
    reserve: float = 0.0,
) -> tuple[list[Selection], ChangeReport]:
    """Select a winner per auction under ``weights`` and report changes vs baseline."""
    w = validate_weights(weights)
    prepared = _as_prepared(dataset, reserve)
    proposed = [select_from_prepared(w, p) for p in prepared]
    baseline = [baseline_selection(p, w) for p in prepared]
    return proposed, change_report(proposed, baseline)


def grid_resolution(step: float) -> int:
    """Validate a grid step of the form 1/M and return M."""
    if not isinstance(step, (int, float)) or isinstance(step, bool) or not math.isfinite(step):
        raise InvalidGridStepError(f"invalid grid step {step!r}")
    if step <= 0.0 or step > 1.0:
        raise InvalidGridStepError(f"invalid grid step {step!r}: must be in (0, 1]")
    resolution = round(1.0 / step)
    if resolution < 1 or abs(resolution * step - 1.0) > 1e-9:
        raise InvalidGridStepError(f"invalid grid step {step!r}: must equal 1/M for integer M >= 1")
    return resolution


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # Front-loaded order: the first component runs from `total` down to 0.
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head, *rest)


def grid_size(dims: int, step: float) -> int:
    """Number of grid vectors: C(M + dims - 1, dims - 1)."""
    resolution = grid_resolution(step)
    return math.comb(resolution + dims - 1, dims - 1)


def enumerate_simplex(dims: int, step: float) -> Iterator[np.ndarray]:
    """Yield every weight vector with components c/M summing to 1.

    Vectors appear in the fixed enumeration order used by the optimizer's
    tie-break: (M, 0, ..., 0) first, (0, ..., 0, M) last.
    """
    if dims < 1:
        raise InvalidConfigError(f"dims must be >= 1, got {dims}")
    resolution = grid_resolution(step)
    for comp in _compositions(resolution, dims):
        yield np.array(comp, dtype=float) / resolution


def _composition_matrix(dims: int, resolution: int) -> np.ndarray:
    return np.array(list(_compositions(resolution, dims)), dtype=np.int64)


@dataclass(frozen=True)
class GridEvaluation:
    """Objective and change ratios for every grid vector on one training set.

    Thresholds do not enter here, so one evaluation can be filtered under many
    different trade-off bounds (as the sweep harness does).
    """

    resolution: int
    compositions: np.ndarray  # (G, 6) integer numerators
    weights: np.ndarray  # (G, 6) = compositions / resolution
    objectives: np.ndarray  # (G,)
    ratios: np.ndarray  # (G, 6)
    n_auctions: int


@numba.njit(parallel=True, cache=True)
def _grid_kernel(flat, offsets, sizes, weights, objectives, diff_totals):
    # flat: stacked candidate metric matrices, row 0 of each auction is the
    # baseline winner. For each grid vector: pick the first-maximum score per
    # auction (tie-break order is baked into the row order), accumulate the
    # best score and the selected-minus-baseline metric differences. Auctions
    # are visited in a fixed order per grid vector, so results do not depend
    # on how grid vectors are spread over threads.
    for g in numba.prange(weights.shape[0]):
        total = 0.0
        for z in range(offsets.shape[0]):
            base = offsets[z]
            best = base
            best_score = -1.0
            for row in range(base, base + sizes[z]):
                score = 0.0
                for k in range(6):
                    score += weights[g, k] * flat[row, k]
                if score > best_score:
                    best_score = score
                    best = row
            total += best_score
            for k in range(6):
                diff_totals[g, k] += flat[best, k] - flat[base, k]
        objectives[g] = total


def evaluate_grid(
    train: Sequence[AuctionRecord] | Sequence[PreparedAuction],
    step: float = 0.05,
    *,
    reserve: float = 0.0,
    workers: int = 1,
) -> GridEvaluation:
    """Evaluate objective and change ratios for the whole weight grid.

    ``workers`` sets the number of kernel threads; every thread handles whole
    grid vectors, so the result is bit-identical for any worker count.
    """
    prepared = _as_prepared(train, reserve)
    resolution = grid_resolution(step)
    compositions = _composition_matrix(N_METRICS, resolution)
    weights = compositions / resolution
    sizes = np.array([p.size for p in prepared], dtype=np.int64)
    offsets = np.zeros(len(prepared), dtype=np.int64)
    np.cumsum(sizes[:-1], out=offsets[1:])
    flat = np.ascontiguousarray(np.concatenate([p.vectors for p in prepared]))
    base_totals = flat[offsets].sum(axis=0)
    for k in range(N_METRICS):
        if base_totals[k] == 0.0:
            raise DegenerateBaselineError(
                f"degenerate baseline metric {METRIC_NAMES[k]!r}: baseline values sum to zero"
            )
    total = len(compositions)
    objectives = np.zeros(total)
    diff_totals = np.zeros((total, N_METRICS))
    previous_threads = numba.get_num_threads()
    numba.set_num_threads(max(1, min(workers, numba.config.NUMBA_NUM_THREADS)))
    try:
        _grid_kernel(flat, offsets, sizes, weights, objectives, diff_totals)
    finally:
        numba.set_num_threads(previous_threads)
    return GridEvaluation(
        resolution=resolution,
        compositions=compositions,
        weights=weights,
        objectives=objectives,
        ratios=diff_totals / base_totals,
        n_auctions=len(prepared),
    )


def pick_best(evaluation: GridEvaluation, thresholds: TradeoffThresholds) -> OptimizationResult:
    """Filter a grid evaluation by the thresholds and take the objective argmax.

    Ties on the objective resolve to the earliest enumerated composition,
    i.e. the one with the most weight pushed onto the earliest metrics.
    """
    theta = thresholds.as_array()
    ratios = evaluation.ratios
    mask = (np.abs(ratios[:, 0]) <= abs(theta[0])) & np.all(ratios[:, 1:] >= theta[1:], axis=1)
    total = len(ratios)
    if not mask.any():
        return OptimizationResult(
            status="infeasible",
            weights=None,
            composition=None,
            objective=None,
            train_changes=None,
            candidates_evaluated=total,
        )
    masked = np.where(mask, evaluation.objectives, -np.inf)
    best_value = masked.max()
    best_index = int(np.flatnonzero(masked == best_value)[0])
    return OptimizationResult(
        status="feasible",
        weights=evaluation.weights[best_index].copy(),
        composition=tuple(int(c) for c in evaluation.compositions[best_index]),
        objective=float(best_value),
        train_changes=ChangeReport(
            ratios=evaluation.ratios[best_index].copy(), n_auctions=evaluation.n_auctions
        ),
        candidates_evaluated=total,
    )


def optimize_weights(
    train: Sequence[AuctionRecord] | Sequence[PreparedAuction],
    thresholds: TradeoffThresholds,
    step: float = 0.05,
    *,
    reserve: float = 0.0,
    workers: int = 1,
) -> OptimizationResult:
    """Exhaustive search for the feasible weight vector with the best objective."""
    evaluation = evaluate_grid(train, step, reserve=reserve, workers=workers)
    return pick_best(evaluation, thresholds)


@dataclass(frozen=True)
class FoldOutcome:
    """Per-fold cross-validation outcome: optimizer result plus change reports.

    When the fold's search is infeasible the system falls back to baseline
    selection, so both change reports are exactly zero.
    """

    fold: int
    test_indices: tuple[int, ...]
    result: OptimizationResult
    train_changes: ChangeReport
    test_changes: ChangeReport
    test_objective: float


def cross_validate(
    dataset: Sequence[AuctionRecord] | Sequence[PreparedAuction],
    folds: int,
    thresholds: TradeoffThresholds,
    step: float = 0.05,
    seed: int = 0,
    *,
    reserve: float = 0.0,
    workers: int = 1,
) -> list[FoldOutcome]:
    """Seeded k-fold cross-validation of the weight search."""
    prepared = _as_prepared(dataset, reserve)
    fold_sets = split_folds(prepared, folds, seed)
    outcomes = []
    for fold, test_idx in enumerate(fold_sets):
        held_out = set(test_idx)
        train_set = [p for i, p in enumerate(prepared) if i not in held_out]
        test_set = [prepared[i] for i in test_idx]
        result = optimize_weights(train_set, thresholds, step, workers=workers)
        if result.status == "feasible":
            train_changes = result.train_changes
            selections, test_changes = apply_weights(result.weights, test_set)
            test_objective = float(sum(s.rank_score for s in selections))
        else:
            train_changes = ChangeReport(np.zeros(N_METRICS), len(train_set))
            test_changes = ChangeReport(np.zeros(N_METRICS), len(test_set))
            test_objective = 0.0
        outcomes.append(
            FoldOutcome(
                fold=fold,
                test_indices=tuple(int(i) for i in test_idx),
                result=result,
                train_changes=train_changes,
                test_changes=test_changes,
                test_objective=test_objective,
            )
        )
    return outcomes
