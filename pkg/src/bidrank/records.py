"""Auction records: candidates, bids and raw per-candidate metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DatasetFormatError, IncompleteCandidateError, InvalidMetricError


@dataclass(frozen=True)
class RawMetrics:
    """Raw metric inputs for one candidate ad.

    ``memorability`` and ``saliency`` are precomputed scores ingested as data.
    ``relevance`` is either a precomputed score or left None, in which case
    ``page_text``/``ad_text`` must both be set and the built-in lexical scorer
    is used. Exactly one of the two relevance modes must be provided.
    """

    memorability: float
    ctr: float
    saliency: float
    relevance: float | None = None
    page_text: str | None = None
    ad_text: str | None = None

    def has_text_pair(self) -> bool:
        return self.page_text is not None and self.ad_text is not None


@dataclass(frozen=True)
class Candidate:
    """One advertiser competing in an auction."""

    advertiser_id: str
    bid: float
    raw: RawMetrics


@dataclass(frozen=True)
class AuctionRecord:
    """One auction: a non-empty set of candidates with bids and raw metrics."""

    auction_id: str
    candidates: tuple[Candidate, ...]


def _check_finite(value: float, field: str, candidate_id: str) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise DatasetFormatError(f"field {field!r} of candidate {candidate_id!r} is not a number")
    if not math.isfinite(value):
        raise InvalidMetricError(
            f"invalid metric value: field {field!r} of candidate {candidate_id!r} is not finite"
        )


def validate_raw_metrics(raw: RawMetrics, candidate_id: str) -> None:
    """Check ranges and the relevance-mode rule for one candidate."""
    _check_finite(raw.memorability, "memorability", candidate_id)
    _check_finite(raw.ctr, "ctr", candidate_id)
    _check_finite(raw.saliency, "saliency", candidate_id)
    if not 0.0 <= raw.ctr <= 1.0:
        raise DatasetFormatError(
            f"field 'ctr' of candidate {candidate_id!r} must be in [0, 1], got {raw.ctr!r}"
        )
    if raw.saliency < 0.0:
        raise DatasetFormatError(
            f"field 'saliency' of candidate {candidate_id!r} must be >= 0, got {raw.saliency!r}"
        )
    has_score = raw.relevance is not None
    if has_score:
        _check_finite(raw.relevance, "relevance", candidate_id)
    if has_score == raw.has_text_pair():
        raise IncompleteCandidateError(
            f"incomplete candidate {candidate_id!r}: provide exactly one of "
            "'relevance' or the 'page_text'/'ad_text' pair"
        )
    if not has_score and (raw.page_text is None or raw.ad_text is None):
        raise IncompleteCandidateError(
            f"incomplete candidate {candidate_id!r}: text mode needs both "
            "'page_text' and 'ad_text'"
        )


def validate_record(record: AuctionRecord) -> None:
    """Check one auction record against the schema invariants."""
    if not record.auction_id:
        raise DatasetFormatError("field 'auction_id' must be a non-empty string")
    if not record.candidates:
        raise DatasetFormatError(f"auction {record.auction_id!r} has no candidates")
    seen: set[str] = set()
    for cand in record.candidates:
        if not cand.advertiser_id:
            raise DatasetFormatError(
                f"field 'advertiser_id' must be non-empty (auction {record.auction_id!r})"
            )
        if cand.advertiser_id in seen:
            raise DatasetFormatError(
                f"duplicate advertiser_id {cand.advertiser_id!r} in auction {record.auction_id!r}"
            )
        seen.add(cand.advertiser_id)
        _check_finite(cand.bid, "bid", cand.advertiser_id)
        if cand.bid < 0.0:
            raise DatasetFormatError(
                f"field 'bid' of candidate {cand.advertiser_id!r} must be >= 0, got {cand.bid!r}"
            )
        validate_raw_metrics(cand.raw, cand.advertiser_id)
