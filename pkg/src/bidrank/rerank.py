"""Stage II: weighted rank scores and winner selection, with baseline fallback.

A candidate's rank score is the dot product of a simplex weight vector and its
normalized metric vector. The displayed ad is the rank-score argmax; ties go
to the higher raw bid, then the lexicographically smallest advertiser id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .auction import StageOneResult
from .errors import EmptyAuctionError, InconsistentCandidatesError, InvalidWeightsError
from .metrics import N_METRICS, PreparedAuction, assemble_metric_vectors
from .records import AuctionRecord

WEIGHT_SUM_TOLERANCE = 1e-9


def uniform_weights() -> np.ndarray:
    """The uniform weight vector (1/6 on each metric)."""
    return np.full(N_METRICS, 1.0 / N_METRICS)


def validate_weights(weights: np.ndarray) -> np.ndarray:
    """Check the simplex constraints: components in [0, 1] summing to 1."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (N_METRICS,):
        raise InvalidWeightsError(f"invalid weights: expected {N_METRICS} components, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidWeightsError("invalid weights: non-finite component")
    if np.any(w < 0.0) or np.any(w > 1.0):
        raise InvalidWeightsError("invalid weights: components must lie in [0, 1]")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise InvalidWeightsError(f"invalid weights: components sum to {total!r}, not 1")
    return w


@dataclass(frozen=True)
class Selection:
    """The ad chosen for one auction, with its score, metrics and payment."""

    auction_id: str
    winner: str
    rank_score: float
    metric_vector: np.ndarray
    payment: float


def _dot6(weights, vector) -> float:
    # Sequential accumulation in metric order; the optimizer's compiled grid
    # kernel uses the same order, so scores agree bit-for-bit across paths.
    total = 0.0
    for k in range(N_METRICS):
        total += weights[k] * vector[k]
    return float(total)


def rank_score(weights: np.ndarray, vector: np.ndarray) -> float:
    """Linear rank score: sum of weight times normalized metric value."""
    w = validate_weights(weights)
    x = np.asarray(vector, dtype=float)
    if x.shape != (N_METRICS,):
        raise ValueError(f"metric vector must have {N_METRICS} components, got shape {x.shape}")
    return _dot6(w, x)


def _scan_best(scores: list[float]) -> int:
    # Candidates are pre-sorted by (bid desc, id asc); keeping the first
    # maximum implements the tie-break.
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def select_winner(
    weights: np.ndarray,
    vectors: Mapping[str, np.ndarray],
    bids: Mapping[str, float],
    *,
    auction_id: str = "",
    payments: Mapping[str, float] | None = None,
) -> Selection:
    """Pick the rank-score argmax among candidates.

    ``vectors`` and ``bids`` must have identical, non-empty key sets. The
    optional ``payments`` map fills the selection's payment field (defaults
    to 0.0 when absent).
    """
    w = validate_weights(weights)
    if not vectors:
        raise EmptyAuctionError("empty auction: no candidates to select from")
    if set(vectors) != set(bids):
        raise InconsistentCandidatesError("inconsistent candidates: vectors and bids disagree")
    order = sorted(vectors, key=lambda cid: (-bids[cid], cid))
    matrix = np.stack([np.asarray(vectors[cid], dtype=float) for cid in order])
    scores = [_dot6(w, matrix[i]) for i in range(len(order))]
    best = _scan_best(scores)
    winner = order[best]
    payment = float(payments[winner]) if payments is not None else 0.0
    return Selection(
        auction_id=auction_id,
        winner=winner,
        rank_score=scores[best],
        metric_vector=matrix[best],
        payment=payment,
    )


def select_from_prepared(weights: np.ndarray, prepared: PreparedAuction) -> Selection:
    """Pick the winner from a prepared auction (already sorted for tie-breaks)."""
    w = np.asarray(weights, dtype=float)
    scores = [_dot6(w, prepared.vectors[i]) for i in range(prepared.size)]
    best = _scan_best(scores)
    return Selection(
        auction_id=prepared.auction_id,
        winner=prepared.advertiser_ids[best],
        rank_score=scores[best],
        metric_vector=prepared.vectors[best],
        payment=float(prepared.payments[best]),
    )


def baseline_selection(prepared: PreparedAuction, weights: np.ndarray | None = None) -> Selection:
    """The traditional highest-bid selection, scored for reporting purposes."""
    w = uniform_weights() if weights is None else np.asarray(weights, dtype=float)
    return Selection(
        auction_id=prepared.auction_id,
        winner=prepared.baseline_id,
        rank_score=_dot6(w, prepared.vectors[0]),
        metric_vector=prepared.vectors[0],
        payment=float(prepared.payments[0]),
    )


def select_with_fallback(
    weights: np.ndarray | None,
    auction: AuctionRecord,
    stage_one: StageOneResult,
    *,
    vectors: Mapping[str, np.ndarray] | None = None,
) -> Selection:
    """Select with optimized weights, or fall back to the highest bidder.

    When ``weights`` is None (the weight search was infeasible) the baseline
    winner is returned and its rank score is computed with uniform weights so
    the report still carries a comparable number.
    """
    if vectors is None:
        vectors = assemble_metric_vectors(auction, stage_one)
    bids = {c.advertiser_id: c.bid for c in auction.candidates}
    payments = {cid: out.payment for cid, out in stage_one.per_candidate.items()}
    if weights is None:
        winner = stage_one.baseline_winner
        return Selection(
            auction_id=auction.auction_id,
            winner=winner,
            rank_score=rank_score(uniform_weights(), vectors[winner]),
            metric_vector=np.asarray(vectors[winner], dtype=float),
            payment=payments[winner],
        )
    return select_winner(
        weights, vectors, bids, auction_id=auction.auction_id, payments=payments
    )
