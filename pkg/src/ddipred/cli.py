"""Command line entry point.

Subcommands mirror the pipeline stages (prepare, optimize, train,
evaluate, predict, rank) plus two debug surfaces (rbscore explain,
features dump). Human-readable summaries go to stdout, log lines to
stderr. Exit codes: 0 success, 1 runtime failure, 2 config or validation
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, DataError
from .pipeline import (
    RunConfig,
    cmd_evaluate,
    cmd_features_dump,
    cmd_optimize,
    cmd_predict,
    cmd_prepare,
    cmd_rank,
    cmd_rbscore_explain,
    cmd_train,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _add_config_arg(parser):
    parser.add_argument("--config", required=True, help="run config JSON")
    parser.add_argument("--out", help="override output_dir")
    parser.add_argument("--workers", type=int, help="worker pool size for search/bootstrap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddipred", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="label pairs (PU protocol) and split")
    _add_config_arg(p)
    p.add_argument("--protocol", choices=["random", "coldstart", "scaffold"])
    p.add_argument("--seed", type=int, help="split seed override")

    p = sub.add_parser("optimize", help="three-stage hyperparameter search")
    _add_config_arg(p)
    p.add_argument("--budget", choices=["full", "smoke"], help="search budget override")

    p = sub.add_parser("train", help="train the final model")
    _add_config_arg(p)

    p = sub.add_parser("evaluate", help="metric report for a split")
    _add_config_arg(p)
    p.add_argument("--split", default="test", choices=["train", "validation", "test"])
    p.add_argument("--curves", action="store_true", help="also dump ROC/PR curve points")

    p = sub.add_parser("predict", help="score an arbitrary pairs file")
    _add_config_arg(p)
    p.add_argument("--pairs", required=True)
    p.add_argument("--output", default="predictions.csv")

    p = sub.add_parser("rank", help="top-k candidate interactions")
    _add_config_arg(p)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--pairs", help="candidate pairs CSV (default: prepared unknown pairs)")

    p = sub.add_parser("rbscore", help="clinical score debug surface")
    rb_sub = p.add_subparsers(dest="rbscore_command", required=True)
    p_explain = rb_sub.add_parser("explain", help="print the six rule indicators for a pair")
    _add_config_arg(p_explain)
    p_explain.add_argument("--pair", required=True, help="'DRUG_A,DRUG_B'")

    p = sub.add_parser("features", help="feature matrix debug surface")
    ft_sub = p.add_subparsers(dest="features_command", required=True)
    p_dump = ft_sub.add_parser("dump", help="dump assembled feature rows as CSV")
    _add_config_arg(p_dump)
    p_dump.add_argument("--pairs", help="pairs CSV (default: prepared labeled pairs)")
    p_dump.add_argument("--output", default="features.csv")

    return parser


def _load_config(args) -> RunConfig:
    overrides = {"output_dir": getattr(args, "out", None), "workers": getattr(args, "workers", None)}
    if getattr(args, "protocol", None):
        overrides["split.protocol"] = args.protocol
    if getattr(args, "seed", None) is not None:
        overrides["split.seed"] = args.seed
    if getattr(args, "budget", None):
        overrides["optimizer.budget"] = args.budget
    return RunConfig.from_file(args.config, overrides)


def _dispatch(args) -> int:
    config = _load_config(args)
    if args.command == "prepare":
        manifest = cmd_prepare(config)
        print(json.dumps(manifest, indent=2, sort_keys=True))
    elif args.command == "optimize":
        summary = cmd_optimize(config)
        best = summary["best"]
        print(f"best fitness {best['best_fitness']:.4f} (seed {best['seed']})")
        print(json.dumps(best["best_config"], indent=2, sort_keys=True))
    elif args.command == "train":
        out = cmd_train(config)
        print(f"best val AUC {out['best_val_auc']:.4f} at epoch {out['best_epoch']} "
              f"({out['epochs_run']} epochs run)")
    elif args.command == "evaluate":
        report = cmd_evaluate(config, args.split, curves=args.curves)
        print(report.to_table())
    elif args.command == "predict":
        out = cmd_predict(config, args.pairs, args.output)
        print(f"scored {out['n_scored']} pairs, {out['n_errors']} errors -> {out['output']}")
        if out["n_errors"]:
            return EXIT_RUNTIME
    elif args.command == "rank":
        ranked = cmd_rank(config, args.k, args.pairs)
        for pair, prob in ranked:
            print(f"{pair.drug_a}\t{pair.drug_b}\t{prob:.3f}")
    elif args.command == "rbscore":
        breakdown = cmd_rbscore_explain(config, args.pair)
        for key, value in breakdown.items():
            print(f"{key}: {value}")
    elif args.command == "features":
        path = cmd_features_dump(config, args.pairs, args.output)
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
