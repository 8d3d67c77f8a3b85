"""Stage I: second-price pricing, baseline winner and counterfactual payments.

The baseline system displays the highest bidder. Every candidate also gets a
counterfactual second price: the highest competing bid at or below its own
(falling back to the reserve), which is what it would pay if the re-ranking
stage selected it instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import EmptyAuctionError, InconsistentCandidatesError, UnknownCandidateError
from .records import AuctionRecord


@dataclass(frozen=True)
class Bid:
    """A single advertiser's bid, in abstract currency units."""

    advertiser_id: str
    amount: float


@dataclass(frozen=True)
class CandidateOutcome:
    """Pricing outcome for one candidate: payment, value and utility."""

    payment: float
    value: float
    utility: float


@dataclass(frozen=True)
class StageOneResult:
    """Per-auction pricing: the baseline winner plus one outcome per candidate."""

    auction_id: str
    baseline_winner: str
    per_candidate: dict[str, CandidateOutcome]

    def to_json(self) -> str:
        """Deterministic serialization (sorted keys, shortest-roundtrip floats)."""
        payload = {
            "auction_id": self.auction_id,
            "baseline_winner": self.baseline_winner,
            "per_candidate": {
                cid: {"payment": out.payment, "value": out.value, "utility": out.utility}
                for cid, out in sorted(self.per_candidate.items())
            },
        }
        return json.dumps(payload, sort_keys=True)


def _check_bids(bids: list[Bid]) -> None:
    if not bids:
        raise EmptyAuctionError("empty auction: no bids")
    seen: set[str] = set()
    for bid in bids:
        if bid.amount < 0.0:
            raise ValueError(f"negative bid {bid.amount!r} for advertiser {bid.advertiser_id!r}")
        if bid.advertiser_id in seen:
            raise InconsistentCandidatesError(
                f"duplicate advertiser {bid.advertiser_id!r} in one auction"
            )
        seen.add(bid.advertiser_id)


def baseline_winner(bids: list[Bid]) -> str:
    """Return the highest bidder's id; ties go to the smallest advertiser_id."""
    _check_bids(bids)
    best = bids[0]
    for bid in bids[1:]:
        if bid.amount > best.amount or (
            bid.amount == best.amount and bid.advertiser_id < best.advertiser_id
        ):
            best = bid
    return best.advertiser_id


def counterfactual_payment(candidate_id: str, bids: list[Bid], reserve: float = 0.0) -> float:
    """Second price the candidate would face if every higher bidder were absent.

    Returns max over the reserve and all competing bids at or below the
    candidate's own bid, clamped so that a reserve above the bid never charges
    more than the bid itself.
    """
    _check_bids(bids)
    own = None
    for bid in bids:
        if bid.advertiser_id == candidate_id:
            own = bid.amount
            break
    if own is None:
        raise UnknownCandidateError(f"unknown candidate {candidate_id!r}")
    best = reserve
    for bid in bids:
        if bid.advertiser_id == candidate_id:
            continue
        if best < bid.amount <= own:
            best = bid.amount
    return min(best, own)


def run_stage_one(auction: AuctionRecord, reserve: float = 0.0) -> StageOneResult:
    """Price every candidate (value = bid, truthful bidding) and pick the baseline winner."""
    bids = [Bid(c.advertiser_id, c.bid) for c in auction.candidates]
    winner = baseline_winner(bids)
    per_candidate = {}
    for bid in bids:
        payment = counterfactual_payment(bid.advertiser_id, bids, reserve)
        per_candidate[bid.advertiser_id] = CandidateOutcome(
            payment=payment, value=bid.amount, utility=bid.amount - payment
        )
    return StageOneResult(
        auction_id=auction.auction_id, baseline_winner=winner, per_candidate=per_candidate
    )
