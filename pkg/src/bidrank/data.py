"""Synthetic auction datasets and file ingestion (JSONL and CSV).

The generator stands in for real exchange logs: heavy-tailed lognormal bids,
low-mean beta CTR, uniform precomputed scores, and an optional Gaussian-copula
correlation between bid and CTR. Everything is driven by a single seed and is
byte-reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import betaincinv, ndtr

from .errors import BidRankError, DatasetFormatError, InvalidConfigError, TooFewAuctionsError
from .records import AuctionRecord, Candidate, RawMetrics, validate_record

_BID_DISTRIBUTIONS = ("lognormal", "uniform")
_CSV_COLUMNS = ("auction_id", "advertiser_id", "bid", "ctr", "memorability", "saliency", "relevance")


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for the synthetic dataset generator.

    ``bid_params`` is (mu, sigma) for lognormal bids or (lo, hi) for uniform
    bids. ``rho`` correlates bid and CTR through a Gaussian copula.
    """

    n_auctions: int = 5000
    candidates_min: int = 3
    candidates_max: int = 8
    bid_distribution: str = "lognormal"
    bid_params: tuple[float, float] = (0.0, 1.0)
    ctr_alpha: float = 2.0
    ctr_beta: float = 8.0
    memorability_range: tuple[float, float] = (0.0, 1.0)
    relevance_range: tuple[float, float] = (0.0, 1.0)
    saliency_range: tuple[float, float] = (0.0, 1.0)
    rho: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_auctions < 1:
            raise InvalidConfigError(f"invalid generator config: n_auctions must be >= 1, got {self.n_auctions}")
        if self.candidates_min < 1:
            raise InvalidConfigError(
                f"invalid generator config: candidates_min must be >= 1, got {self.candidates_min}"
            )
        if self.candidates_max < self.candidates_min:
            raise InvalidConfigError(
                "invalid generator config: candidates_max must be >= candidates_min, "
                f"got {self.candidates_max} < {self.candidates_min}"
            )
        if self.bid_distribution not in _BID_DISTRIBUTIONS:
            raise InvalidConfigError(
                f"invalid generator config: bid_distribution must be one of {_BID_DISTRIBUTIONS}, "
                f"got {self.bid_distribution!r}"
            )
        lo, hi = self.bid_params
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidConfigError("invalid generator config: bid_params must be finite")
        if self.bid_distribution == "lognormal" and hi <= 0.0:
            raise InvalidConfigError(
                f"invalid generator config: lognormal sigma must be > 0, got {hi!r}"
            )
        if self.bid_distribution == "uniform" and not 0.0 <= lo < hi:
            raise InvalidConfigError(
                f"invalid generator config: uniform bid range needs 0 <= lo < hi, got {self.bid_params!r}"
            )
        if self.ctr_alpha <= 0.0 or self.ctr_beta <= 0.0:
            raise InvalidConfigError(
                f"invalid generator config: ctr beta shape parameters must be > 0, "
                f"got ({self.ctr_alpha!r}, {self.ctr_beta!r})"
            )
        for field in ("memorability_range", "relevance_range", "saliency_range"):
            lo, hi = getattr(self, field)
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                raise InvalidConfigError(f"invalid generator config: bad {field} {(lo, hi)!r}")
        lo, hi = self.saliency_range
        if lo < 0.0:
            raise InvalidConfigError(
                f"invalid generator config: saliency_range must be non-negative, got {(lo, hi)!r}"
            )
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidConfigError(f"invalid generator config: rho must be in [-1, 1], got {self.rho!r}")


def generate_dataset(cfg: GeneratorConfig) -> list[AuctionRecord]:
    """Generate a seeded synthetic dataset; identical configs give identical data."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    counts = rng.integers(cfg.candidates_min, cfg.candidates_max + 1, size=cfg.n_auctions)
    total = int(counts.sum())
    z_bid = rng.standard_normal(total)
    z_noise = rng.standard_normal(total)
    z_ctr = cfg.rho * z_bid + math.sqrt(1.0 - cfg.rho * cfg.rho) * z_noise
    if cfg.bid_distribution == "lognormal":
        mu, sigma = cfg.bid_params
        bids = np.exp(mu + sigma * z_bid)
    else:
        lo, hi = cfg.bid_params
        bids = lo + (hi - lo) * ndtr(z_bid)
    ctr = betaincinv(cfg.ctr_alpha, cfg.ctr_beta, ndtr(z_ctr))
    memorability = rng.uniform(*cfg.memorability_range, size=total)
    relevance = rng.uniform(*cfg.relevance_range, size=total)
    saliency = rng.uniform(*cfg.saliency_range, size=total)

    records = []
    offset = 0
    for auction_idx, n in enumerate(counts):
        candidates = []
        for slot in range(int(n)):
            i = offset + slot
            candidates.append(
                Candidate(
                    advertiser_id=f"adv_{slot:03d}",
                    bid=float(bids[i]),
                    raw=RawMetrics(
                        memorability=float(memorability[i]),
                        ctr=float(ctr[i]),
                        saliency=float(saliency[i]),
                        relevance=float(relevance[i]),
                    ),
                )
            )
        offset += int(n)
        records.append(
            AuctionRecord(auction_id=f"z{auction_idx:06d}", candidates=tuple(candidates))
        )
    return records


def _candidate_payload(cand: Candidate) -> dict:
    payload: dict = {"advertiser_id": cand.advertiser_id, "bid": cand.bid, "ctr": cand.raw.ctr,
                     "memorability": cand.raw.memorability, "saliency": cand.raw.saliency}
    if cand.raw.relevance is not None:
        payload["relevance"] = cand.raw.relevance
    else:
        payload["page_text"] = cand.raw.page_text
        payload["ad_text"] = cand.raw.ad_text
    return payload


def record_to_json(record: AuctionRecord) -> str:
    """One-line JSON form of a record, as written to JSONL files."""
    payload = {
        "auction_id": record.auction_id,
        "candidates": [_candidate_payload(c) for c in record.candidates],
    }
    return json.dumps(payload, ensure_ascii=False)


def dataset_fingerprint(records: Sequence[AuctionRecord]) -> str:
    """SHA-256 of the canonical JSONL serialization."""
    digest = hashlib.sha256()
    for record in records:
        digest.update(record_to_json(record).encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def save_dataset(records: Sequence[AuctionRecord], path: str | Path, format: str = "jsonl") -> Path:
    """Write a dataset as JSONL (one auction per line) or CSV (one candidate per row)."""
    path = Path(path)
    if format == "jsonl":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(record_to_json(record))
                fh.write("\n")
    elif format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_CSV_COLUMNS)
            for record in records:
                for cand in record.candidates:
                    if cand.raw.relevance is None:
                        raise DatasetFormatError(
                            f"candidate {cand.advertiser_id!r} of auction {record.auction_id!r} "
                            "uses text-pair relevance, which the CSV format does not support"
                        )
                    writer.writerow(
                        [
                            record.auction_id,
                            cand.advertiser_id,
                            repr(float(cand.bid)),
                            repr(float(cand.raw.ctr)),
                            repr(float(cand.raw.memorability)),
                            repr(float(cand.raw.saliency)),
                            repr(float(cand.raw.relevance)),
                        ]
                    )
    else:
        raise DatasetFormatError(f"unknown dataset format {format!r}")
    return path


def _require_number(value, field: str, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise DatasetFormatError(f"{where}: field {field!r} must be a number, got {value!r}")
    return float(value)


def _candidate_from_payload(payload: dict, where: str) -> Candidate:
    if not isinstance(payload, dict):
        raise DatasetFormatError(f"{where}: candidate entries must be objects")
    try:
        advertiser_id = payload["advertiser_id"]
        bid = payload["bid"]
        ctr = payload["ctr"]
        memorability = payload["memorability"]
        saliency = payload["saliency"]
    except KeyError as exc:
        raise DatasetFormatError(f"{where}: missing candidate field {exc.args[0]!r}") from None
    if not isinstance(advertiser_id, str):
        raise DatasetFormatError(f"{where}: field 'advertiser_id' must be a string")
    relevance = payload.get("relevance")
    page_text = payload.get("page_text")
    ad_text = payload.get("ad_text")
    if relevance is not None:
        relevance = _require_number(relevance, "relevance", where)
    if page_text is not None and not isinstance(page_text, str):
        raise DatasetFormatError(f"{where}: field 'page_text' must be a string")
    if ad_text is not None and not isinstance(ad_text, str):
        raise DatasetFormatError(f"{where}: field 'ad_text' must be a string")
    return Candidate(
        advertiser_id=advertiser_id,
        bid=_require_number(bid, "bid", where),
        raw=RawMetrics(
            memorability=_require_number(memorability, "memorability", where),
            ctr=_require_number(ctr, "ctr", where),
            saliency=_require_number(saliency, "saliency", where),
            relevance=relevance,
            page_text=page_text,
            ad_text=ad_text,
        ),
    )


def _load_jsonl(path: Path) -> list[AuctionRecord]:
    records = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{line_no}"
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{where}: parse error: {exc.msg}") from None
            if not isinstance(payload, dict):
                raise DatasetFormatError(f"{where}: each line must be a JSON object")
            auction_id = payload.get("auction_id")
            if not isinstance(auction_id, str) or not auction_id:
                raise DatasetFormatError(f"{where}: field 'auction_id' must be a non-empty string")
            if auction_id in seen:
                raise DatasetFormatError(f"{where}: duplicate auction_id {auction_id!r}")
            seen.add(auction_id)
            candidates = payload.get("candidates")
            if not isinstance(candidates, list) or not candidates:
                raise DatasetFormatError(f"{where}: field 'candidates' must be a non-empty list")
            record = AuctionRecord(
                auction_id=auction_id,
                candidates=tuple(_candidate_from_payload(c, where) for c in candidates),
            )
            _validate_loaded(record, where)
            records.append(record)
    if not records:
        raise DatasetFormatError(f"{path}: dataset is empty")
    return records


def _load_csv(path: Path) -> list[AuctionRecord]:
    order: list[str] = []
    grouped: dict[str, list[Candidate]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}:1: missing CSV header") from None
        if tuple(header) != _CSV_COLUMNS:
            raise DatasetFormatError(
                f"{path}:1: expected header {','.join(_CSV_COLUMNS)}, got {','.join(header)}"
            )
        for row in reader:
            where = f"{path}:{reader.line_num}"
            if len(row) != len(_CSV_COLUMNS):
                raise DatasetFormatError(
                    f"{where}: expected {len(_CSV_COLUMNS)} columns, got {len(row)}"
                )
            auction_id, advertiser_id = row[0], row[1]
            if not auction_id:
                raise DatasetFormatError(f"{where}: field 'auction_id' must be non-empty")
            numbers = {}
            for column, text in zip(_CSV_COLUMNS[2:], row[2:]):
                try:
                    numbers[column] = float(text)
                except ValueError:
                    raise DatasetFormatError(
                        f"{where}: field {column!r} must be a number, got {text!r}"
                    ) from None
            # Candidate rows of one auction must be contiguous; a re-appearing
            # auction_id after another auction started is a duplicate.
            if order and auction_id == order[-1]:
                pass
            elif auction_id in grouped:
                raise DatasetFormatError(f"{where}: duplicate auction_id {auction_id!r}")
            else:
                order.append(auction_id)
                grouped[auction_id] = []
            grouped[auction_id].append(
                Candidate(
                    advertiser_id=advertiser_id,
                    bid=numbers["bid"],
                    raw=RawMetrics(
                        memorability=numbers["memorability"],
                        ctr=numbers["ctr"],
                        saliency=numbers["saliency"],
                        relevance=numbers["relevance"],
                    ),
                )
            )
    if not order:
        raise DatasetFormatError(f"{path}: dataset is empty")
    records = []
    for auction_id in order:
        record = AuctionRecord(auction_id=auction_id, candidates=tuple(grouped[auction_id]))
        _validate_loaded(record, f"{path} (auction {auction_id!r})")
        records.append(record)
    return records


def _validate_loaded(record: AuctionRecord, where: str) -> None:
    try:
        validate_record(record)
    except BidRankError as exc:
        raise DatasetFormatError(f"{where}: {exc}") from None


def load_dataset(path: str | Path, format: str | None = None) -> list[AuctionRecord]:
    """Load and validate a dataset file; format defaults to the file suffix."""
    path = Path(path)
    if format is None:
        format = path.suffix.lstrip(".").lower() or "jsonl"
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "csv":
        return _load_csv(path)
    raise DatasetFormatError(f"unknown dataset format {format!r}")


def split_folds(dataset: Sequence, k: int, seed: int = 0) -> list[list[int]]:
    """Seeded shuffle then contiguous split into k folds with sizes differing by at most 1."""
    if k < 2:
        raise InvalidConfigError(f"fold count must be >= 2, got {k}")
    if len(dataset) < k:
        raise TooFewAuctionsError(
            f"too few auctions: dataset of {len(dataset)} cannot be split into {k} folds"
        )
    indices = np.arange(len(dataset))
    rng = np.random.default_rng(seed)
    rng.shuffle(indices)
    return [part.tolist() for part in np.array_split(indices, k)]
