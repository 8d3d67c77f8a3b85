"""Experiment harness: revenue-threshold sweeps with k-fold cross-validation.

For each revenue-loss threshold on a grid, every fold's training set is
searched for optimal weights and the per-metric change ratios are recorded on
both splits. One grid evaluation per fold is shared across all thresholds,
since only the feasibility filter depends on them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .data import dataset_fingerprint, split_folds
from .errors import BidRankError, InvalidConfigError
from .metrics import METRIC_NAMES, N_METRICS, prepare_dataset
from .optimizer import (
    TradeoffThresholds,
    apply_weights,
    check_thresholds,
    evaluate_grid,
    pick_best,
)
from .records import AuctionRecord

DEFAULT_THETA1_GRID = tuple(round(-0.05 * i, 2) for i in range(11))

_CSV_HEADER = (
    "theta1,fold,split,status,objective,"
    "xi_revenue,xi_utility,xi_memorability,xi_ctr,xi_relevance,xi_saliency"
)


@dataclass(frozen=True)
class SweepRow:
    """One (threshold, fold, split) cell of a sweep."""

    theta1: float
    fold: int
    split: str  # "train" or "test"
    status: str  # "feasible" or "infeasible"
    objective: float
    ratios: tuple[float, ...]


@dataclass(frozen=True)
class SweepReport:
    """All sweep rows plus the run metadata needed to reproduce them."""

    rows: tuple[SweepRow, ...]
    metadata: dict

    def summary_rows(self) -> list[tuple[float, str, tuple[float, ...]]]:
        """Mean change ratios over folds per (theta1, split), in grid order."""
        theta_grid = self.metadata["theta1_grid"]
        out = []
        for theta1 in theta_grid:
            for split in ("train", "test"):
                cells = [r for r in self.rows if r.theta1 == theta1 and r.split == split]
                means = tuple(
                    sum(r.ratios[k] for r in cells) / len(cells) for k in range(N_METRICS)
                )
                out.append((theta1, split, means))
        return out


def _validate_sweep_args(
    theta1_grid: Sequence[float], theta_others: Sequence[float]
) -> tuple[list[float], tuple[float, ...]]:
    grid = [float(t) for t in theta1_grid]
    if not grid:
        raise InvalidConfigError("theta1 grid must be non-empty")
    for t in grid:
        if not math.isfinite(t) or t > 0.0:
            raise InvalidConfigError(f"theta1 values must be finite and non-positive, got {t!r}")
    others = tuple(float(v) for v in theta_others)
    if len(others) != N_METRICS - 1:
        raise InvalidConfigError(
            f"theta_others needs {N_METRICS - 1} values, got {len(others)}"
        )
    for name, v in zip(METRIC_NAMES[1:], others):
        if not math.isfinite(v) or v < 0.0:
            raise InvalidConfigError(
                f"threshold for {name!r} must be finite and non-negative, got {v!r}"
            )
    return grid, others


def run_sweep(
    dataset: Sequence[AuctionRecord],
    theta1_grid: Sequence[float] = DEFAULT_THETA1_GRID,
    theta_others: Sequence[float] = (0.0, 0.0, 0.0, 0.0, 0.0),
    folds: int = 10,
    grid_step: float = 0.05,
    seed: int = 0,
    *,
    reserve: float = 0.0,
    workers: int = 1,
) -> SweepReport:
    """Cross-validated threshold sweep; deterministic given (dataset, args, seed)."""
    grid, others = _validate_sweep_args(theta1_grid, theta_others)
    records = list(dataset)
    prepared = prepare_dataset(records, reserve)
    fold_sets = split_folds(prepared, folds, seed)

    cells: dict[tuple[int, int], tuple[SweepRow, SweepRow]] = {}
    for fold, test_idx in enumerate(fold_sets):
        held_out = set(test_idx)
        train_set = [p for i, p in enumerate(prepared) if i not in held_out]
        test_set = [prepared[i] for i in test_idx]
        evaluation = evaluate_grid(train_set, grid_step, workers=workers)
        for gi, theta1 in enumerate(grid):
            thresholds = TradeoffThresholds(theta1, others)
            result = pick_best(evaluation, thresholds)
            if result.status == "feasible":
                # Re-validate the optimizer's output before reporting it.
                if not check_thresholds(result.train_changes, thresholds):
                    raise BidRankError(
                        "internal error: optimizer returned weights that violate "
                        f"the thresholds at theta1={theta1!r}, fold {fold}"
                    )
                train_row = SweepRow(
                    theta1=theta1,
                    fold=fold,
                    split="train",
                    status="feasible",
                    objective=float(result.objective),
                    ratios=tuple(float(v) for v in result.train_changes.ratios),
                )
                selections, test_changes = apply_weights(result.weights, test_set)
                test_row = SweepRow(
                    theta1=theta1,
                    fold=fold,
                    split="test",
                    status="feasible",
                    objective=float(sum(s.rank_score for s in selections)),
                    ratios=tuple(float(v) for v in test_changes.ratios),
                )
            else:
                zeros = (0.0,) * N_METRICS
                train_row = SweepRow(theta1, fold, "train", "infeasible", 0.0, zeros)
                test_row = SweepRow(theta1, fold, "test", "infeasible", 0.0, zeros)
            cells[(gi, fold)] = (train_row, test_row)

    rows: list[SweepRow] = []
    for gi in range(len(grid)):
        for fold in range(len(fold_sets)):
            train_row, test_row = cells[(gi, fold)]
            rows.append(train_row)
            rows.append(test_row)
    metadata = {
        "seed": seed,
        "grid_step": grid_step,
        "folds": folds,
        "dataset_sha256": dataset_fingerprint(records),
        "n_auctions": len(records),
        "reserve": reserve,
        "theta1_grid": grid,
        "theta_others": list(others),
    }
    return SweepReport(rows=tuple(rows), metadata=metadata)


def _fmt(value: float) -> str:
    return repr(float(value))


def emit_report(
    report: SweepReport, out_dir: str | Path, formats: Sequence[str] = ("csv", "json")
) -> list[Path]:
    """Write sweep.csv / summary.csv / sweep.json into ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    unknown = set(formats) - {"csv", "json"}
    if unknown:
        raise InvalidConfigError(f"unknown report formats: {sorted(unknown)}")
    paths: list[Path] = []
    if "csv" in formats:
        sweep_path = out_dir / "sweep.csv"
        with open(sweep_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_CSV_HEADER + "\n")
            for row in report.rows:
                fields = [
                    _fmt(row.theta1),
                    str(row.fold),
                    row.split,
                    row.status,
                    _fmt(row.objective),
                    *(_fmt(v) for v in row.ratios),
                ]
                fh.write(",".join(fields) + "\n")
        paths.append(sweep_path)
        summary_path = out_dir / "summary.csv"
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(
                "theta1,split,xi_revenue,xi_utility,xi_memorability,"
                "xi_ctr,xi_relevance,xi_saliency\n"
            )
            for theta1, split, means in report.summary_rows():
                fh.write(",".join([_fmt(theta1), split, *(_fmt(v) for v in means)]) + "\n")
        paths.append(summary_path)
    if "json" in formats:
        json_path = out_dir / "sweep.json"
        payload = {
            "metadata": report.metadata,
            "rows": [
                {
                    "theta1": row.theta1,
                    "fold": row.fold,
                    "split": row.split,
                    "status": row.status,
                    "objective": row.objective,
                    "xi": list(row.ratios),
                }
                for row in report.rows
            ],
        }
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        paths.append(json_path)
    return paths
