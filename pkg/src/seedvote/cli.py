"""Command line: ``seedvote index|map|eval``."""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import ExitStack

from .index import IndexFormatError, build_index, default_map_bits, load_index_file, save_index_file
from .mapeval import evaluate_paf
from .pipeline import PipelineConfig, run
from .presets import MBP, PRESETS, get_preset
from .seqio import ParseError, open_input, parse_reference
from .vote import VoteParams

log = logging.getLogger("seedvote")


class UsageError(Exception):
    pass


def _formatter(prog: str) -> argparse.HelpFormatter:
    return argparse.ArgumentDefaultsHelpFormatter(prog, max_help_position=32)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seedvote", description="Minimizer seed-and-vote long read mapper.", formatter_class=_formatter
    )
    sub = parser.add_subparsers(dest="command", required=True)
    preset_names = ", ".join(PRESETS)

    p = sub.add_parser("index", help="build a minimizer index", formatter_class=_formatter)
    p.add_argument("ref", help="reference FASTA (optionally gzipped)")
    p.add_argument("out", help="output index file")
    p.add_argument("--preset", default=None, help=f"parameter preset ({preset_names})")
    p.add_argument("--k", type=int, default=None, help="k-mer length (required without --preset)")
    p.add_argument("--w", type=int, default=None, help="minimizer window (required without --preset)")
    p.add_argument("--max-occ", type=int, default=None, help="occurrence cap (required without --preset)")
    p.add_argument("--map-bits", type=int, default=None, help="bucket address bits; unset means min(2k, 26)")

    p = sub.add_parser("map", help="map reads, PAF to stdout", formatter_class=_formatter)
    p.add_argument("index", help="index file from 'seedvote index'")
    p.add_argument("reads", nargs="+", help="FASTQ files (optionally gzipped, '-' for stdin)")
    p.add_argument("--preset", default=None, help=f"parameter preset ({preset_names})")
    p.add_argument("--threads", type=int, default=1, help="post-processing workers (sort/vote/PAF)")
    p.add_argument("--kernel-workers", type=int, default=1, help="seed/query workers; also max batches in flight")
    p.add_argument("--vt-dist", type=int, default=None, help="voting distance (required without --preset)")
    p.add_argument("--batch-size", type=float, default=None, help="batch capacity in Mbp (required without --preset)")
    p.add_argument("--min-score", type=int, default=2, help="minimum voting score")
    p.add_argument("--min-len", type=int, default=0, help="minimum read span of a segment")
    p.add_argument("--max-segments", type=int, default=5, help="segments kept per read")
    p.add_argument("--sort", choices=["auto", "radix", "merge"], default="auto",
                   help="anchor sort; auto is radix for ONT presets, merge otherwise")
    p.add_argument("--ordered", dest="ordered", action="store_true", default=True,
                   help="write records in input read order")
    p.add_argument("--unordered", dest="ordered", action="store_false", help="write records as completed")
    p.add_argument("--unmapped", action="store_true", default=False, help="emit sentinel lines for unmapped reads")
    p.add_argument("--max-occ", type=int, default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("eval", help="score mappings against true origins", formatter_class=_formatter)
    p.add_argument("paf", help="PAF file ('-' for stdin)")
    p.add_argument("--truth", default="names",
                   help="'names' decodes read ids tname!start!end!strand!serial; otherwise a truth PAF path")
    p.add_argument("--total", type=int, default=None, help="total number of reads (default: reads with truth)")
    p.add_argument("--any-strand", action="store_true", default=False, help="ignore strand when scoring")
    return parser


def cmd_index(args: argparse.Namespace) -> None:
    k, w, max_occ = args.k, args.w, args.max_occ
    if args.preset is not None:
        preset = get_preset(args.preset)
        k = preset.k if k is None else k
        w = preset.w if w is None else w
        max_occ = preset.max_occ if max_occ is None else max_occ
    elif None in (k, w, max_occ):
        raise UsageError("without --preset, all of --k, --w and --max-occ are required")
    map_bits = default_map_bits(k) if args.map_bits is None else args.map_bits
    with open_input(args.ref) as fh:
        ref = parse_reference(fh)
    index = build_index(ref, k, w, map_bits, max_occ)
    save_index_file(index, args.out)
    log.info("k=%d w=%d map_bits=%d max_occ=%d locations=%d", k, w, map_bits, max_occ, len(index.key))


def cmd_map(args: argparse.Namespace) -> None:
    if args.max_occ is not None:
        raise UsageError("--max-occ is fixed when the index is built; pass it to 'seedvote index'")
    preset = get_preset(args.preset) if args.preset is not None else None
    vt_dist, batch_mbp = args.vt_dist, args.batch_size
    if preset is None:
        if vt_dist is None or batch_mbp is None:
            raise UsageError("without --preset, both --vt-dist and --batch-size are required")
        capacity = int(batch_mbp * MBP)
    else:
        vt_dist = preset.vt_dist if vt_dist is None else vt_dist
        capacity = preset.batch_capacity if batch_mbp is None else int(batch_mbp * MBP)
    index = load_index_file(args.index)
    if preset is not None:
        if (preset.k, preset.w) != (index.k, index.w):
            raise UsageError(
                f"preset {preset.name} (k={preset.k}, w={preset.w}) does not match "
                f"index {args.index} (k={index.k}, w={index.w})"
            )
        if preset.max_occ != index.max_occ:
            log.warning("preset %s expects max_occ=%d, index was built with %d",
                        preset.name, preset.max_occ, index.max_occ)
    sort = args.sort
    if sort == "auto":
        sort = preset.sort_algorithm if preset is not None else "radix"
    config = PipelineConfig(
        vote_params=VoteParams(vt_dist, args.min_score, args.min_len, args.max_segments),
        batch_capacity=capacity,
        threads=args.threads,
        kernel_workers=args.kernel_workers,
        sort_algorithm=sort,
        ordered_output=args.ordered,
        emit_unmapped=args.unmapped,
        preset=preset,
    )
    with ExitStack() as stack:
        sources = (stack.enter_context(open_input(path)) for path in args.reads)
        stats = run(config, index, sources, sys.stdout)
    sys.stdout.flush()
    for line in stats.lines():
        print(line, file=sys.stderr)


def cmd_eval(args: argparse.Namespace) -> None:
    with ExitStack() as stack:
        paf = stack.enter_context(open_input(args.paf))
        paf_lines = (line.decode("utf-8") for line in paf)
        truth_lines = None
        if args.truth != "names":
            truth = stack.enter_context(open_input(args.truth))
            truth_lines = (line.decode("utf-8") for line in truth)
        report = evaluate_paf(paf_lines, truth_lines, args.total, strict_strand=not args.any_strand)
    sys.stdout.write(report.to_tsv())


COMMANDS = {"index": cmd_index, "map": cmd_map, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="[%(name)s] %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (UsageError, ParseError, IndexFormatError, ValueError, OSError) as exc:
        print(f"seedvote {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
