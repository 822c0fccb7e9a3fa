"""Command line entry point: ``analyze``, ``search`` and ``report``.

Exit codes: 0 success, 2 input error, 3 config error, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .experiment import DEFAULT_QPS, analyze_regions, evaluate, region_statistics
from .media_io import MediaFormatError, load_frames, write_overlay
from .reporting import (ReportSchemaError, build_report, input_entry, merge_reports,
                        write_ctu_csv, write_merged_csv)
from .search import POLICIES, SearchConfig
from .ssim import VARIANTS

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3, 4

log = logging.getLogger("qtmt_ssimv")


class ConfigError(Exception):
    pass


class InvariantError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors, not input errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _qp_list(text: str) -> list[int]:
    try:
        qps = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid QP list {text!r}")
    if not qps or any(not 0 <= q <= 51 for q in qps):
        raise argparse.ArgumentTypeError(f"QPs must be a nonempty list within [0, 51], got {text!r}")
    return qps


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("inputs", nargs="+", help=".y4m, .pgm or raw .yuv files")
    p.add_argument("--width", type=int, help="raw YUV width")
    p.add_argument("--height", type=int, help="raw YUV height")
    p.add_argument("--bit-depth", type=int, default=8, choices=(8, 10), help="raw YUV bit depth")
    p.add_argument("--frames", type=_positive, help="use at most this many frames per input")
    p.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    p.add_argument("--ssim-variant", choices=VARIANTS, default="standard")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtmt-ssimv", description="QTMT intra partition search with SSIMV pruning.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="per-region sub-CU SSIM statistics on 32x32 CUs")
    _add_input_args(a)

    s = sub.add_parser("search", help="paired exhaustive/pruned search with JSON report")
    _add_input_args(s)
    defaults = SearchConfig()
    s.add_argument("--qp", type=_qp_list, default=list(DEFAULT_QPS),
                   help="comma separated QPs (default: 22,27,32,37)")
    s.add_argument("--policy", choices=POLICIES, default=defaults.policy, help="test arm policy")
    s.add_argument("--reference-policy", choices=POLICIES, default="full", help="anchor arm policy")
    s.add_argument("--ctu-size", type=int, default=defaults.ctu_size)
    s.add_argument("--max-mt-depth", type=int, default=defaults.max_mt_depth)
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--repeats", type=_positive, default=3, help="timing repetitions, median reported")
    s.add_argument("--seed", type=int, default=0, help="seed of the random-half policy")

    r = sub.add_parser("report", help="merge JSON reports into one CSV table")
    r.add_argument("reports", nargs="+")
    r.add_argument("--out", default="summary.csv", help="merged CSV path (default: %(default)s)")
    r.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_inputs(args) -> list[tuple[str, list]]:
    loaded = []
    for path in args.inputs:
        seq = load_frames(path, args.width, args.height, args.bit_depth)
        planes = list(seq)[:args.frames] if args.frames else list(seq)
        if not planes:
            raise MediaFormatError(f"{path}: no frames")
        loaded.append((path, planes))
    return loaded


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def cmd_analyze(args) -> int:
    inputs = _load_inputs(args)
    out = _out_dir(args.out)
    values = analyze_regions((p for _, planes in inputs for p in planes), variant=args.ssim_variant)
    rows = region_statistics(values)
    with open(out / "analysis.csv", "w", newline="") as f:
        w = csv.DictWriter(f, ("region", "count", "mean", "std"))
        w.writeheader()
        w.writerows(rows)
    for row in rows:
        print(f"{row['region']:5s} n={row['count']:6d} mean={row['mean']:.4f} std={row['std']:.4f}")
    return EXIT_OK


def cmd_search(args) -> int:
    try:
        cfg = SearchConfig(ctu_size=args.ctu_size, max_mt_depth=args.max_mt_depth,
                           policy=args.policy, ssim_variant=args.ssim_variant, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc))
    inputs = _load_inputs(args)
    out = _out_dir(args.out)

    entries, violations = [], []
    for path, planes in inputs:
        log.info("searching %s (%d frame(s), QPs %s)", path, len(planes), args.qp)
        ev = evaluate(planes, cfg, args.qp, repeats=args.repeats, threads=args.threads,
                      reference_policy=args.reference_policy)
        stem = Path(path).stem
        entries.append(input_entry(stem, planes[0].width, planes[0].height,
                                   planes[0].bit_depth, len(planes), ev))
        violations += [f"{stem}: {v}" for v in ev.containment_violations]
        for (frame, qp, arm), trees in ev.trees.items():
            write_overlay(planes[frame], trees, out / f"{stem}_qp{qp}_{arm}.ppm")

    try:
        doc = build_report(entries, cfg, args.qp, args.reference_policy, args.repeats, args.threads)
    except ReportSchemaError as exc:
        raise InvariantError(f"report does not match its schema: {exc}")
    with open(out / "report.json", "w") as f:
        json.dump(doc, f, indent=1)
    write_ctu_csv(doc, out / "ctus.csv")

    s = doc["summary"]
    bd = "n/a" if s["bd_rate"] is None else f"{s['bd_rate']:.3f}%"
    acc = "n/a" if s["accuracy"] is None else f"{s['accuracy']:.4f}"
    print(f"TS {s['ts_percent']:.2f}%  OH {s['oh_percent']:.2f}%  BDBR {bd}  accuracy {acc}")
    if violations:
        for v in violations:
            print(f"containment violation: {v}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_report(args) -> int:
    docs = []
    for path in args.reports:
        with open(path) as f:
            docs.append((Path(path).stem, json.load(f)))
    rows = merge_reports(docs)
    write_merged_csv(rows, args.out)
    for r in rows:
        cells = ["n/a" if r[k] is None else f"{r[k]:.3f}"
                 for k in ("ts_percent", "oh_percent", "bd_rate", "accuracy")]
        print(f"{r['report']:>12s} {r['input']:>12s}  TS {cells[0]}  OH {cells[1]}  "
              f"BDBR {cells[2]}  acc {cells[3]}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "search": cmd_search, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (MediaFormatError, ReportSchemaError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
