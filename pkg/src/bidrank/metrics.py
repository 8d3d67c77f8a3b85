"""Stage II inputs: the six normalized metric variables per candidate.

Fixed metric order, identical across all modules and file formats:

    0 revenue       normalized counterfactual payment
    1 utility       normalized (value - payment)
    2 memorability  normalized precomputed score
    3 ctr           normalized click-through rate
    4 relevance     normalized precomputed score or built-in lexical score
    5 saliency      normalized saliency ratio

Normalization is min-max within each auction's candidate set; when all
candidates share the same value the metric is 0.5 for everyone.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .auction import StageOneResult, run_stage_one
from .errors import (
    EmptyAuctionError,
    IncompleteCandidateError,
    InconsistentCandidatesError,
    InvalidMetricError,
)
from .records import AuctionRecord

METRIC_NAMES = ("revenue", "utility", "memorability", "ctr", "relevance", "saliency")
N_METRICS = len(METRIC_NAMES)

_TOKEN = re.compile(r"\w+")


def normalize_per_auction(values: list[float]) -> list[float]:
    """Min-max scale a non-empty list of finite values into [0, 1].

    Degenerate lists (all values equal, including single-element lists) map to
    0.5 everywhere so that downstream tie-breaking decides.
    """
    if not values:
        raise EmptyAuctionError("cannot normalize an empty value list")
    for pos, value in enumerate(values):
        if not math.isfinite(value):
            raise InvalidMetricError(f"invalid metric value at position {pos}: {value!r}")
    lo = min(values)
    hi = max(values)
    if hi == lo:
        return [0.5] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


def tokenize(text: str) -> list[str]:
    """Lowercase a string and split it into word tokens."""
    return _TOKEN.findall(text.lower())


def lexical_relevance(page_tokens: list[str], ad_tokens: list[str]) -> float:
    """Cosine similarity of term-frequency vectors over lowercased tokens.

    Returns 0.0 whenever either side is empty.
    """
    page = Counter(t.lower() for t in page_tokens)
    ad = Counter(t.lower() for t in ad_tokens)
    if not page or not ad:
        return 0.0
    numerator = sum(page[t] * ad[t] for t in page.keys() & ad.keys())
    denominator = math.sqrt(sum(c * c for c in page.values()) * sum(c * c for c in ad.values()))
    if denominator == 0.0:
        return 0.0
    return numerator / denominator


def _relevance_score(record: AuctionRecord) -> dict[str, float]:
    scores: dict[str, float] = {}
    for cand in record.candidates:
        raw = cand.raw
        if raw.relevance is not None:
            if raw.has_text_pair():
                raise IncompleteCandidateError(
                    f"incomplete candidate {cand.advertiser_id!r}: both a relevance "
                    "score and a text pair were provided"
                )
            scores[cand.advertiser_id] = raw.relevance
        elif raw.has_text_pair():
            scores[cand.advertiser_id] = lexical_relevance(
                tokenize(raw.page_text), tokenize(raw.ad_text)
            )
        else:
            raise IncompleteCandidateError(
                f"incomplete candidate {cand.advertiser_id!r}: no relevance score "
                "and no page_text/ad_text pair"
            )
    return scores


def assemble_metric_vectors(
    auction: AuctionRecord, stage_one: StageOneResult
) -> dict[str, np.ndarray]:
    """Build the six-component metric vector for every candidate in one auction.

    ``stage_one`` must cover exactly the auction's candidates. Raises
    InvalidMetricError naming the candidate and metric for non-finite inputs.
    """
    if not auction.candidates:
        raise EmptyAuctionError(f"auction {auction.auction_id!r} has no candidates")
    ids = [c.advertiser_id for c in auction.candidates]
    if set(stage_one.per_candidate) != set(ids):
        raise InconsistentCandidatesError(
            f"stage-one result does not cover the candidates of auction {auction.auction_id!r}"
        )
    relevance = _relevance_score(auction)
    columns = {
        "revenue": [stage_one.per_candidate[i].payment for i in ids],
        "utility": [stage_one.per_candidate[i].utility for i in ids],
        "memorability": [c.raw.memorability for c in auction.candidates],
        "ctr": [c.raw.ctr for c in auction.candidates],
        "relevance": [relevance[i] for i in ids],
        "saliency": [c.raw.saliency for c in auction.candidates],
    }
    matrix = np.empty((len(ids), N_METRICS))
    for k, name in enumerate(METRIC_NAMES):
        values = columns[name]
        for i, value in zip(ids, values):
            if not math.isfinite(value):
                raise InvalidMetricError(
                    f"invalid metric value for candidate {i!r}, metric {name!r}: {value!r}"
                )
        matrix[:, k] = normalize_per_auction(values)
    return {cid: matrix[row].copy() for row, cid in enumerate(ids)}


@dataclass(frozen=True)
class PreparedAuction:
    """One auction with pricing and normalized metric vectors, ready for re-ranking.

    Candidates are stored sorted by (bid descending, advertiser_id ascending),
    so row 0 is always the baseline winner and a first-maximum scan over rows
    implements the rank-score tie-break (higher bid, then smaller id).
    """

    auction_id: str
    advertiser_ids: tuple[str, ...]
    bids: np.ndarray
    payments: np.ndarray
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return len(self.advertiser_ids)

    @property
    def baseline_id(self) -> str:
        return self.advertiser_ids[0]

    @property
    def baseline_vector(self) -> np.ndarray:
        return self.vectors[0]


def prepare_auction(record: AuctionRecord, reserve: float = 0.0) -> PreparedAuction:
    """Run Stage I on a record and assemble its candidate metric matrix."""
    stage_one = run_stage_one(record, reserve)
    vectors = assemble_metric_vectors(record, stage_one)
    by_candidate = {c.advertiser_id: c for c in record.candidates}
    order = sorted(by_candidate, key=lambda cid: (-by_candidate[cid].bid, cid))
    matrix = np.stack([vectors[cid] for cid in order])
    return PreparedAuction(
        auction_id=record.auction_id,
        advertiser_ids=tuple(order),
        bids=np.array([by_candidate[cid].bid for cid in order]),
        payments=np.array([stage_one.per_candidate[cid].payment for cid in order]),
        vectors=matrix,
    )


def prepare_dataset(records: list[AuctionRecord], reserve: float = 0.0) -> list[PreparedAuction]:
    """Prepare every record of a dataset for re-ranking and optimization."""
    return [prepare_auction(r, reserve) for r in records]
