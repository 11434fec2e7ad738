"""Command line entry point.

Subcommands mirror the pipeline stages: each stage command runs the pipeline
up to that stage and emits that stage's artifacts; ``run`` (or ``report``)
executes everything. ``synth`` generates the deterministic synthetic corpus.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import TrendmineError, UsageError
from .report import run_pipeline
from .synthcorpus import SynthSpec, generate

log = logging.getLogger(__name__)

STAGE_COMMANDS = {
    "ingest": "ingest",
    "preprocess": "preprocess",
    "filter": "filter",
    "embed": "embed",
    "sentiment": "sentiment",
    "cluster": "cluster",
    "trends": "trends",
    "report": "report",
    "run": "report",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trendmine",
                     description="Social-media sustainability trend mining pipeline")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run", "ingest", "preprocess", "filter", "embed",
                 "sentiment", "cluster", "trends", "report"):
        p = sub.add_parser(name, help=f"run the pipeline through the {name} stage"
                           if name not in ("run", "report") else "run the full pipeline")
        p.add_argument("--input", help="input corpus file (JSONL or CSV)")
        p.add_argument("--format", choices=("auto", "jsonl", "csv"), default=None)

    p = sub.add_parser("synth", help="generate the deterministic synthetic corpus")
    p.add_argument("--noise-fraction", type=float, default=0.0)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "synth":
            spec = SynthSpec(seed=args.seed if args.seed is not None else 7,
                             noise_fraction=args.noise_fraction)
            result = generate(spec, args.out or "out")
            print(f"wrote {result.n_posts} posts ({result.n_topical} topical) "
                  f"to {result.corpus_path}")
            print(f"gold files: {result.gold_sentiment_path}, {result.gold_clusters_path}")
            return 0

        overrides = {"input_path": args.input, "input_format": args.format,
                     "seed": args.seed, "out_dir": args.out}
        config = load_config(args.config, overrides)
        report = run_pipeline(config, until=STAGE_COMMANDS[args.command])
        for stage, count in report.stage_counts.items():
            print(f"{stage}: {count}")
        print(f"artifacts in {config.out_dir}:")
        for path in report.artifacts:
            print(f"  {path}")
        return 0
    except TrendmineError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except SystemExit as exc:       # argparse --help
        return int(exc.code or 0)
    except Exception:
        log.exception("internal error")
        return 3


if __name__ == "__main__":
    sys.exit(main())
