"""Command-line entry point: ``maxmargin {train,gen,verify,bench}``.

Exit codes: 0 success, 1 usage or input error, 2 training stopped at the
iteration cap (or a bench row did), 3 slab does not separate the data.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bench import COLUMNS, DEFAULT_EPSILONS, DEFAULT_N, DEFAULT_RATIOS, DEFAULT_TRIALS, rows_to_csv, run_bench
from .dataset import Label
from .datagen import GenSpec, gen_planted, inject_mislabels
from .engine import EngineConfig, train_active, train_offline, verify_separation
from .errors import MarginError
from .io import (
    dumps,
    file_checksum,
    load_dataset,
    report_to_dict,
    save_dataset,
    slab_from_dict,
    trace_to_csv,
)
from .oracles import exact_counterexample, pool_labeling_oracle, sampled_counterexample
from .reference import planted_margin_bounds

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CAP = 2
EXIT_NOT_SEPARATED = 3

log = logging.getLogger("maxmargin")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    items = [s for s in text.split(",") if s.strip()]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def cmd_train(args: argparse.Namespace) -> int:
    data = load_dataset(args.input)
    config = EngineConfig(epsilon=args.epsilon, tol=args.tol, explicit_cap=args.cap,
                          rng_seed=args.seed)
    t0 = time.perf_counter()
    if args.mode == "offline":
        report = train_offline(data, config)
    else:
        if data.labels is None:
            raise UsageError("active mode simulates its oracles from the file's labels; none found")
        labels = data.require_both_classes()
        b1 = int(np.flatnonzero(labels == Label.BLACK)[0])
        w1 = int(np.flatnonzero(labels == Label.WHITE)[0])
        labeler = pool_labeling_oracle(data)
        if args.oracle == "exact":
            cex = exact_counterexample(data, tol=args.tol)
        else:
            cex = sampled_counterexample(labeler, data.points, args.sample_m,
                                         rng_seed=args.seed, tol=args.tol)
        report = train_active(labeler, cex, data.points, b1, w1, config)
    seconds = time.perf_counter() - t0

    doc = report_to_dict(report)
    doc.update({
        "dataset_checksum": file_checksum(args.input),
        "config": {"epsilon": args.epsilon, "mode": args.mode, "oracle": args.oracle,
                   "sample_m": args.sample_m, "seed": args.seed, "cap": args.cap,
                   "tol": args.tol, "input": str(args.input)},
        "wall_clock_seconds": seconds,
        "library_version": __version__,
    })
    _write(dumps(doc), args.report)
    if args.trace:
        _write(trace_to_csv(report.trace), args.trace)
    log.info("%s after %d iterations, ell=%r", "converged" if report.converged else "stopped",
             report.iterations, report.final_ell)
    return EXIT_OK if report.converged else EXIT_CAP


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GenSpec(dim=args.dim, n=args.n, margin=args.margin, diam=args.diam, seed=args.seed)
    data, normal = gen_planted(spec)
    cert = planted_margin_bounds(data, normal)
    flipped: list[int] = []
    if args.mislabel_rho:
        data = inject_mislabels(data, args.mislabel_rho, seed=args.seed)
        flipped = list(data.meta["flipped"])
    save_dataset(data, args.out)
    sidecar = {
        "spec": {"dim": spec.dim, "n": spec.n, "margin": spec.margin, "diam": spec.diam,
                 "seed": spec.seed, "mislabel_rho": args.mislabel_rho},
        "planted_normal": normal.tolist(),
        "certificate": {"lower": cert.lower, "upper": cert.upper, "exact": cert.exact},
        "anchors": data.meta["anchors"],
        "flipped": flipped,
        "library_version": __version__,
    }
    Path(str(args.out) + ".json").write_text(dumps(sidecar), encoding="utf-8")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    data = load_dataset(args.input)
    try:
        obj = json.loads(Path(args.slab).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.slab}: not valid JSON ({exc})") from None
    slab = slab_from_dict(obj)
    result = verify_separation(data, slab, tol=args.tol)
    sys.stdout.write(dumps({**result._asdict(), "certified": result.certified}))
    return EXIT_OK if result.certified else EXIT_NOT_SEPARATED


def cmd_bench(args: argparse.Namespace) -> int:
    if not args.epsilons or not args.ratios:
        raise UsageError("--epsilons and --ratios need at least one value each")
    for eps in args.epsilons:
        EngineConfig(epsilon=eps)
    rows = run_bench(args.epsilons, args.ratios, args.trials, seed=args.seed, n=args.n,
                     timing=args.timing)
    _write(rows_to_csv(rows), args.out)
    bad = [r for r in rows if not (r.converged and r.within_cap)]
    return EXIT_OK if not bad else EXIT_CAP


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maxmargin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train on a dataset CSV and write a JSON report")
    p.add_argument("input")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--mode", choices=("offline", "active"), default="offline")
    p.add_argument("--oracle", choices=("exact", "sampled"), default="exact",
                   help="counterexample oracle for active mode")
    p.add_argument("--sample-m", type=int, default=100, help="draws per sampled-oracle query")
    p.add_argument("--seed", type=int, default=0, help="sampled-oracle seed")
    p.add_argument("--report", help="report JSON path (default stdout)")
    p.add_argument("--trace", help="per-iteration CSV: iteration,case,index,ell,cos_alpha,t_unclamped")
    p.add_argument("--cap", type=int, help="fixed iteration cap instead of the adaptive bound")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("gen", help="write a planted-margin dataset CSV plus <out>.json sidecar")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--diam", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--mislabel-rho", type=float, default=0.0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check that a slab separates a labeled dataset")
    p.add_argument("input")
    p.add_argument("--slab", required=True, help="slab JSON with anchor_b/anchor_w, or a train report")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser(
        "bench", help="iteration-count scaling table",
        description="Writes CSV columns: " + ",".join(COLUMNS) + ". One row per "
        "(eps, ratio, trial) on planted 2-D data with margin 1 and diameter ~ratio; "
        "cap = ceil(256 (D/(eps*hull_dist))^2). seconds is empty without --timing.")
    p.add_argument("--epsilons", type=_float_list, default=list(DEFAULT_EPSILONS))
    p.add_argument("--ratios", type=_float_list, default=list(DEFAULT_RATIOS),
                   help="diameter / margin values")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--n", type=int, default=DEFAULT_N, help="points per instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--timing", action="store_true", help="fill the seconds column")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MarginError, UsageError, OSError, ValueError) as exc:
        print(f"maxmargin {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
