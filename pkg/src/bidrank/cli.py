"""Command line interface.

Subcommands:
    generate   write a seeded synthetic dataset to a file
    optimize   search for optimal weights on a dataset at one threshold setting
    sweep      run the cross-validated revenue-threshold sweep and emit reports
    evaluate   apply saved weights to a dataset and report the change ratios

Exit codes: 0 on success, 2 on validation errors, 1 on runtime errors. The
``BIDRANK_OUT`` environment variable overrides the sweep output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .data import GeneratorConfig, generate_dataset, load_dataset, save_dataset
from .errors import (
    BidRankError,
    DatasetFormatError,
    IncompleteCandidateError,
    InvalidConfigError,
    InvalidGridStepError,
    InvalidMetricError,
    InvalidWeightsError,
    TooFewAuctionsError,
)
from .harness import DEFAULT_THETA1_GRID, emit_report, run_sweep
from .metrics import METRIC_NAMES, prepare_dataset
from .optimizer import TradeoffThresholds, apply_weights, optimize_weights
from .rerank import baseline_selection, uniform_weights

_VALIDATION_ERRORS = (
    InvalidConfigError,
    DatasetFormatError,
    InvalidGridStepError,
    TooFewAuctionsError,
    InvalidWeightsError,
    InvalidMetricError,
    IncompleteCandidateError,
)


def _float_list(text: str, expected: int | None = None, flag: str = "") -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise InvalidConfigError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if expected is not None and len(values) != expected:
        raise InvalidConfigError(f"{flag}: expected {expected} values, got {len(values)}")
    return values


def _changes_payload(ratios) -> dict:
    return {name: float(v) for name, v in zip(METRIC_NAMES, ratios)}


def _cmd_generate(args: argparse.Namespace) -> int:
    cfg = GeneratorConfig(
        n_auctions=args.n_auctions,
        candidates_min=args.candidates_min,
        candidates_max=args.candidates_max,
        bid_distribution=args.bid_dist,
        bid_params=(args.bid_params[0], args.bid_params[1]),
        ctr_alpha=args.ctr_alpha,
        ctr_beta=args.ctr_beta,
        memorability_range=(args.memorability_range[0], args.memorability_range[1]),
        relevance_range=(args.relevance_range[0], args.relevance_range[1]),
        saliency_range=(args.saliency_range[0], args.saliency_range[1]),
        rho=args.rho,
        seed=args.seed,
    )
    records = generate_dataset(cfg)
    path = save_dataset(records, args.out, args.format)
    print(f"wrote {len(records)} auctions to {path}")
    return 0


def _cmd_optimize(args: argparse.Namespace) -> int:
    records = load_dataset(args.input)
    others = _float_list(args.theta_others, 5, "--theta-others")
    thresholds = TradeoffThresholds(args.theta1, tuple(others))
    result = optimize_weights(
        records, thresholds, args.grid_step, reserve=args.reserve, workers=args.workers
    )
    payload = {
        "status": result.status,
        "theta1": args.theta1,
        "theta_others": others,
        "grid_step": args.grid_step,
        "candidates_evaluated": result.candidates_evaluated,
        "weights": None if result.weights is None else [float(w) for w in result.weights],
        "composition": None if result.composition is None else list(result.composition),
        "objective": result.objective,
        "train_changes": None
        if result.train_changes is None
        else _changes_payload(result.train_changes.ratios),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote optimization result to {args.out}")
    else:
        print(text)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    records = load_dataset(args.input)
    theta1_grid = _float_list(args.theta1_grid, None, "--theta1-grid")
    others = _float_list(args.theta_others, 5, "--theta-others")
    report = run_sweep(
        records,
        theta1_grid,
        others,
        folds=args.folds,
        grid_step=args.grid_step,
        seed=args.seed,
        reserve=args.reserve,
        workers=args.workers,
    )
    out_dir = os.environ.get("BIDRANK_OUT") or args.out
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    paths = emit_report(report, out_dir, formats)
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    records = load_dataset(args.input)
    try:
        saved = json.loads(Path(args.weights).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{args.weights}: parse error: {exc.msg}") from None
    weights = saved.get("weights") if isinstance(saved, dict) else None
    if weights is None:
        # Infeasible saved result: the traditional highest-bid system runs
        # unchanged, so every change ratio is zero by definition.
        prepared = prepare_dataset(records, args.reserve)
        total = sum(baseline_selection(p, uniform_weights()).rank_score for p in prepared)
        payload = {
            "status": "baseline_fallback",
            "n_auctions": len(records),
            "objective": float(total),
            "changes": _changes_payload([0.0] * len(METRIC_NAMES)),
        }
    else:
        selections, report = apply_weights(
            np.array(weights, dtype=float), records, reserve=args.reserve
        )
        payload = {
            "status": "applied",
            "n_auctions": len(records),
            "objective": float(sum(s.rank_score for s in selections)),
            "changes": _changes_payload(report.ratios),
        }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote evaluation to {args.out}")
    else:
        print(text)
    return 0


def _add_range_flag(parser: argparse.ArgumentParser, name: str, default: tuple[float, float]) -> None:
    parser.add_argument(
        name, type=float, nargs=2, metavar=("LO", "HI"), default=list(default)
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bidrank",
        description="Second-price auction simulator with metric-weighted re-ranking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded synthetic dataset")
    gen.add_argument("--n-auctions", type=int, default=5000)
    gen.add_argument("--candidates-min", type=int, default=3)
    gen.add_argument("--candidates-max", type=int, default=8)
    gen.add_argument("--bid-dist", choices=("lognormal", "uniform"), default="lognormal")
    gen.add_argument(
        "--bid-params",
        type=float,
        nargs=2,
        metavar=("A", "B"),
        default=[0.0, 1.0],
        help="(mu, sigma) for lognormal, (lo, hi) for uniform",
    )
    gen.add_argument("--ctr-alpha", type=float, default=2.0)
    gen.add_argument("--ctr-beta", type=float, default=8.0)
    _add_range_flag(gen, "--memorability-range", (0.0, 1.0))
    _add_range_flag(gen, "--relevance-range", (0.0, 1.0))
    _add_range_flag(gen, "--saliency-range", (0.0, 1.0))
    gen.add_argument("--rho", type=float, default=0.0, help="bid/ctr correlation in [-1, 1]")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    opt = sub.add_parser("optimize", help="search weights at one threshold setting")
    opt.add_argument("--input", required=True)
    opt.add_argument("--theta1", type=float, required=True, help="non-positive revenue loss limit")
    opt.add_argument("--theta-others", default="0,0,0,0,0")
    opt.add_argument("--grid-step", type=float, default=0.05)
    opt.add_argument("--reserve", type=float, default=0.0)
    opt.add_argument("--workers", type=int, default=1)
    opt.add_argument("--out")
    opt.set_defaults(func=_cmd_optimize)

    swp = sub.add_parser("sweep", help="cross-validated revenue-threshold sweep")
    swp.add_argument("--input", required=True)
    swp.add_argument(
        "--theta1-grid", default=",".join(repr(t) for t in DEFAULT_THETA1_GRID)
    )
    swp.add_argument("--theta-others", default="0,0,0,0,0")
    swp.add_argument("--folds", type=int, default=10)
    swp.add_argument("--grid-step", type=float, default=0.05)
    swp.add_argument("--seed", type=int, default=0)
    swp.add_argument("--reserve", type=float, default=0.0)
    swp.add_argument("--workers", type=int, default=1)
    swp.add_argument("--formats", default="csv,json")
    swp.add_argument("--out", default="sweep_out", help="output directory (BIDRANK_OUT overrides)")
    swp.set_defaults(func=_cmd_sweep)

    ev = sub.add_parser("evaluate", help="apply saved weights to a dataset")
    ev.add_argument("--input", required=True)
    ev.add_argument("--weights", required=True, help="JSON file produced by 'optimize --out'")
    ev.add_argument("--reserve", type=float, default=0.0)
    ev.add_argument("--out")
    ev.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BidRankError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
