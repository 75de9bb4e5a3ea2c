"""
Copyright 2024 The walkssl authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

"""Command-line entry point: ``walkssl <command> [options]``."""

import argparse
import logging
import os
import sys
from pathlib import Path

from pydantic import ValidationError

from walkssl.core.abc import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, ConfigError, WalkSSLError
from walkssl.core.mesh import ShapeClass
from walkssl.core.resample import ResampleTargets
from walkssl.core.walker import DEFAULT_JUMP_PROB, DEFAULT_WALK_LEN
from walkssl.libs import SysUtil, to_str
from walkssl.version import __version__

from . import commands
from .manifest import DEFAULT_TEST_FRACTION

logger = logging.getLogger(__name__)


def _synth(args) -> int:
    records = commands.cmd_synth(
        args.out, args.classes, args.per_class, args.seed, args.test_fraction, args.threads
    )
    n_test = sum(r.split == "test" for r in records)
    print(f"{len(records)} meshes ({len(records) - n_test} train / {n_test} test) in {args.out}")
    return EXIT_OK


def _ingest(args) -> int:
    records = commands.cmd_ingest(args.root, args.out, args.test_fraction, args.seed, args.threads)
    print(f"{len(records)} meshes listed in {Path(args.out) / commands.MANIFEST_FILE}")
    return EXIT_OK


def _prep(args) -> int:
    try:
        targets = ResampleTargets(face_counts=args.targets, tolerance=args.tolerance)
    except ValidationError as e:
        raise ConfigError(f"Invalid resampling targets: {e}") from e
    rows, skipped = commands.cmd_prep(args.manifest, args.out, targets, args.threads)
    print(f"{len(rows)} resampled meshes, {skipped} skipped")
    return EXIT_OK


def _train(args) -> int:
    result = commands.cmd_train(args.config, epochs=args.epochs, threads=args.threads)
    print(f"trained to epoch {result.checkpoint.epoch}; checkpoint {result.checkpoint_path}")
    return EXIT_OK


def _embed(args) -> int:
    out = commands.cmd_embed(
        args.checkpoint, args.manifest, args.out, args.walks, args.seed, args.threads
    )
    print(f"embeddings written to {out}")
    return EXIT_OK


def _retrieve(args) -> int:
    report = commands.cmd_retrieve(args.embeddings, args.out, args.scope, args.threads)
    print(to_str(report, indent=2))
    return EXIT_OK


def _svm(args) -> int:
    report = commands.cmd_svm(
        args.embeddings, args.out, args.reg, args.epochs, args.seed, args.grid, args.runs
    )
    print(to_str(report, indent=2))
    return EXIT_OK


def _gradcheck(args) -> int:
    table, ok = commands.cmd_gradcheck(args.preset, args.seed)
    print(commands.format_table(table))
    return EXIT_OK if ok else EXIT_NUMERIC


def _walks_dump(args) -> int:
    records = commands.cmd_walks_dump(
        args.mesh, args.out, args.count, args.walk_len, args.jump_prob, args.seed
    )
    if args.out is None:
        for r in records:
            print(to_str(r))
    return EXIT_OK


def _clusters_dump(args) -> int:
    summary = commands.cmd_clusters_dump(args.checkpoint, args.out)
    if args.out is None:
        print(to_str(summary, indent=2))
    return EXIT_OK


def _report(args) -> int:
    runs = {name: paths for name, *paths in args.run}
    table = commands.cmd_report(runs, args.out)
    print(commands.format_table(table))
    return EXIT_OK


def _add_threads(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--threads", type=int, default=SysUtil.get_threads(1), help="worker threads (1 = sequential)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walkssl", description="Self-supervised mesh features from random surface walks."
    )
    parser.add_argument("--version", action="version", version=f"walkssl {__version__}")
    parser.add_argument(
        "--log-level",
        default=os.getenv("WALKSSL_LOG_LEVEL", "INFO"),
        help="DEBUG, INFO, WARNING or ERROR",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labelled dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", nargs="+", choices=[c.value for c in ShapeClass])
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=DEFAULT_TEST_FRACTION)
    _add_threads(p)
    p.set_defaults(func=_synth)

    p = sub.add_parser("ingest", help="manifest for a class-per-folder mesh tree")
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--test-fraction", type=float, default=DEFAULT_TEST_FRACTION)
    p.add_argument("--seed", type=int, default=0)
    _add_threads(p)
    p.set_defaults(func=_ingest)

    p = sub.add_parser("prep", help="resample every mesh to the target face counts")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--targets", type=int, nargs="+", default=[1000, 2000, 4000])
    p.add_argument("--tolerance", type=float, default=0.02)
    _add_threads(p)
    p.set_defaults(func=_prep)

    p = sub.add_parser("train", help="train from a key=value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--epochs", type=int, help="override the configured epoch count")
    p.add_argument("--threads", type=int, help="override the configured thread count")
    p.set_defaults(func=_train)

    p = sub.add_parser("embed", help="one feature vector per model")
    p.add_argument("--checkpoint", required=True, help="checkpoint file or directory")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="embeddings JSON-lines file")
    p.add_argument("--walks", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    _add_threads(p)
    p.set_defaults(func=_embed)

    p = sub.add_parser("retrieve", help="retrieval mAP of an embeddings file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--scope", choices=["all", "test"], default="all")
    p.add_argument("--out", help="JSON report file")
    _add_threads(p)
    p.set_defaults(func=_retrieve)

    p = sub.add_parser("svm", help="linear SVM accuracy of an embeddings file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--reg", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", action="store_true", help="choose --reg on a hold-out fold")
    p.add_argument("--runs", type=int, default=1, help="average accuracy over this many seeds")
    p.add_argument("--out", help="JSON report file")
    p.set_defaults(func=_svm)

    p = sub.add_parser("gradcheck", help="finite-difference check of every gradient")
    p.add_argument("--preset", choices=["full", "desk", "tiny"], default="desk")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_gradcheck)

    walks = sub.add_parser("walks", help="inspect random walks").add_subparsers(
        dest="walks_command", required=True
    )
    p = walks.add_parser("dump", help="print random walks on one mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--walk-len", type=int, default=DEFAULT_WALK_LEN)
    p.add_argument("--jump-prob", type=float, default=DEFAULT_JUMP_PROB)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON-lines file instead of stdout")
    p.set_defaults(func=_walks_dump)

    clusters = sub.add_parser("clusters", help="inspect cluster state").add_subparsers(
        dest="clusters_command", required=True
    )
    p = clusters.add_parser("dump", help="print the cluster means of a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", help="JSON file instead of stdout")
    p.set_defaults(func=_clusters_dump)

    p = sub.add_parser("report", help="compare evaluation reports side by side")
    p.add_argument(
        "--run",
        nargs="+",
        action="append",
        required=True,
        metavar="NAME REPORT",
        help="run name followed by its report files",
    )
    p.add_argument("--out", help="CSV file for the table")
    p.set_defaults(func=_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    """
    Run one command.

    Returns:
        0 on success, 1 for configuration errors, 2 for data errors and 3 for
        numeric failures.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except WalkSSLError as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
