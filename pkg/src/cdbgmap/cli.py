"""Command line frontend: build, map and eval subcommands.

Build constructs the unitig graph from reads or a reference, map places
reads on it, eval runs the simulated-read accuracy harness.  Exit codes:
0 success, 1 quality gates unmet in eval gating mode, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import sys
import time

from .census import count_kmers, save_solid, solid_set
from .evaluation import run_accuracy_sweep
from .fastx import read_sequences
from .graph import compact, read_unitigs_fasta, write_gfa, write_unitigs_fasta
from .index import (
    approximate_bytes,
    build_anchor_index,
    build_interior_index,
    load_indexes,
    save_indexes,
)
from .mapper import MappingParams, MappingResult, map_reads
from .sequences import MAX_K

TSV_COLUMNS = (
    "read_id",
    "status",
    "strand",
    "path",
    "start_offset",
    "mismatches",
    "mismatch_positions",
    "regime",
    "reason",
)


def _add_common(parser):
    parser.add_argument("-k", type=int, default=31, help="k-mer size (default 31)")


def _add_mapping_params(parser):
    parser.add_argument(
        "-t",
        "--max-mismatches",
        type=int,
        default=2,
        dest="max_mismatches",
        help="mismatch budget per read (default 2)",
    )
    parser.add_argument(
        "-n",
        "--max-anchor-attempts",
        type=int,
        default=2,
        dest="max_anchor_attempts",
        help="anchor attempts per read end (default 2)",
    )
    parser.add_argument(
        "--strand",
        choices=("both", "forward"),
        default="both",
        help="map both strands or the forward one only",
    )
    parser.add_argument("--threads", type=int, default=1)


def _params(args) -> MappingParams:
    return MappingParams(
        max_mismatches=args.max_mismatches,
        max_anchor_attempts=args.max_anchor_attempts,
        strand_mode="both" if args.strand == "both" else "forward_only",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdbgmap",
        description="Compacted de Bruijn graph construction and read mapping "
        "on branching unitig paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="count k-mers, filter, compact to unitigs")
    _add_common(p_build)
    p_build.add_argument(
        "-c",
        "--min-coverage",
        type=int,
        default=3,
        dest="min_coverage",
        help="k-mer coverage threshold (default 3; use 1 for a reference)",
    )
    p_build.add_argument("-o", "--output", required=True, help="unitigs FASTA path")
    p_build.add_argument("--gfa", help="also write the graph as GFA1")
    p_build.add_argument("--solid-out", help="persist the solid k-mer set")
    p_build.add_argument("inputs", nargs="+", help="FASTA/FASTQ files, plain or gzip")

    p_map = sub.add_parser("map", help="map reads onto the unitig graph")
    _add_common(p_map)
    _add_mapping_params(p_map)
    p_map.add_argument("-g", "--graph", required=True, help="unitigs FASTA from build")
    p_map.add_argument("-o", "--output", required=True, help="mapping TSV path")
    p_map.add_argument("--index-in", help="load prebuilt indexes instead of building")
    p_map.add_argument("--index-out", help="save the indexes for later runs")
    p_map.add_argument(
        "--interior-min-length",
        type=int,
        default=0,
        help="index interior positions only for unitigs longer than this",
    )
    p_map.add_argument(
        "--interior-stride", type=int, default=1, help="interior sampling stride"
    )
    p_map.add_argument("reads", nargs="+", help="read files to map")

    p_eval = sub.add_parser("eval", help="simulated-read accuracy harness")
    _add_common(p_eval)
    _add_mapping_params(p_eval)
    ref = p_eval.add_mutually_exclusive_group(required=True)
    ref.add_argument("--reference", help="reference FASTA (first record used)")
    ref.add_argument(
        "--random-ref",
        type=int,
        metavar="LENGTH",
        help="use a seeded uniform-random reference of this length",
    )
    p_eval.add_argument(
        "--rates",
        default="0,0.001,0.002,0.005,0.01,0.02",
        help="comma-separated substitution error rates",
    )
    p_eval.add_argument("--reads-per-rate", type=int, default=10000)
    p_eval.add_argument("--read-length", type=int, default=100)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("-o", "--output", required=True, help="report CSV path")
    p_eval.add_argument("--truth-out", help="write the simulation truth as TSV")
    p_eval.add_argument(
        "--no-exhaustive",
        action="store_true",
        help="skip the greedy-vs-exhaustive comparison",
    )
    p_eval.add_argument(
        "--min-recall",
        type=float,
        help="gate: fail (exit 1) if recall drops below this on any rate",
    )
    p_eval.add_argument(
        "--min-d0",
        type=float,
        help="gate: fail (exit 1) if the distance-0 share drops below this",
    )
    return parser


class SystemExit2(Exception):
    """Usage or IO error; main() turns it into exit code 2."""


def _check_k(k: int) -> None:
    if not 2 <= k <= MAX_K:
        raise SystemExit2(f"k must be in [2, {MAX_K}], got {k}")


def cmd_build(args) -> int:
    _check_k(args.k)
    if args.min_coverage < 1:
        raise SystemExit2("coverage threshold must be >= 1")
    reads = []
    for path in args.inputs:
        reads.extend(read_sequences(path))
    if not reads:
        raise SystemExit2("no sequences")
    census = count_kmers(reads, args.k)
    solid = solid_set(census, args.min_coverage)
    if not len(solid):
        raise SystemExit2("no solid k-mers at this coverage threshold")
    graph = compact(solid)
    write_unitigs_fasta(args.output, graph)
    if args.solid_out:
        save_solid(args.solid_out, solid)
    if args.gfa:
        write_gfa(args.gfa, graph, build_anchor_index(graph))
    print(f"reads={len(reads)}")
    print(f"distinct_kmers={len(census.counts)}")
    print(f"solid_kmers={len(solid)}")
    print(f"unitig_count={len(graph)}")
    print(f"mean_len={graph.mean_length():.2f}")
    return 0


def _result_to_tsv(result: MappingResult) -> str:
    if result.mapped:
        path = ",".join(f"u{uid}{orient}" for uid, orient in result.path)
        positions = ",".join(map(str, result.mismatch_positions)) or "."
        fields = (
            result.read_id,
            "mapped",
            result.strand,
            path,
            str(result.start_offset),
            str(result.mismatches),
            positions,
            result.regime,
            ".",
        )
    else:
        fields = (result.read_id, "unmapped", ".", ".", ".", ".", ".", "unmapped",
                  result.reason or ".")
    return "\t".join(fields)


def cmd_map(args) -> int:
    _check_k(args.k)
    graph = read_unitigs_fasta(args.graph, k=args.k)
    if args.index_in:
        anchor, interior = load_indexes(args.index_in)
        if anchor.k != args.k:
            raise SystemExit2(
                f"index was built for k={anchor.k}, requested k={args.k}"
            )
    else:
        anchor = build_anchor_index(graph)
        interior = build_interior_index(
            graph, args.interior_min_length, args.interior_stride
        )
    if args.index_out:
        save_indexes(args.index_out, anchor, interior)
    reads = []
    for path in args.reads:
        reads.extend(read_sequences(path))
    params = _params(args)
    started = time.perf_counter()
    results = map_reads(
        reads, graph, anchor, interior, params, threads=max(1, args.threads)
    )
    elapsed = time.perf_counter() - started
    with open(args.output, "w", encoding="ascii") as out:
        out.write("\t".join(TSV_COLUMNS) + "\n")
        for result in results:
            out.write(_result_to_tsv(result))
            out.write("\n")
    total = len(results) or 1
    regimes = {"single_unitig": 0, "branching_path": 0, "unmapped": 0}
    for r in results:
        regimes[r.regime] += 1
    print(f"reads={len(results)}")
    print(f"pct_single_unitig={100.0 * regimes['single_unitig'] / total:.2f}")
    print(f"pct_branching_path={100.0 * regimes['branching_path'] / total:.2f}")
    print(f"pct_unmapped={100.0 * regimes['unmapped'] / total:.2f}")
    print(f"reads_per_sec={len(results) / elapsed if elapsed else 0.0:.1f}")
    for name, idx in (("anchor", anchor), ("interior", interior)):
        keys = len(idx) or 1
        print(f"{name}_index_keys={len(idx)}")
        print(f"{name}_index_bytes_per_key={approximate_bytes(idx) / keys:.1f}")
    return 0


def cmd_eval(args) -> int:
    _check_k(args.k)
    if args.random_ref is not None:
        import random

        rng = random.Random(args.seed)
        reference = "".join(rng.choice("ACGT") for _ in range(args.random_ref))
    else:
        records = list(read_sequences(args.reference))
        if not records:
            raise SystemExit2("no sequences")
        reference = records[0].sequence
        if "N" in reference:
            reference = max(reference.split("N"), key=len)
    try:
        rates = [float(r) for r in args.rates.split(",") if r.strip() != ""]
    except ValueError as exc:
        raise SystemExit2(f"bad rate list: {exc}")
    report = run_accuracy_sweep(
        reference,
        k=args.k,
        rates=rates,
        read_count=args.reads_per_rate,
        params=_params(args),
        read_length=args.read_length,
        seed=args.seed,
        threads=max(1, args.threads),
        compare_exhaustive=not args.no_exhaustive,
        truth_path=args.truth_out,
    )
    report.write_csv(args.output)
    for row in report.rows:
        print(
            f"rate={row.error_rate:g} recall={row.recall:.4f} d0={row.d0:.2f} "
            f"subopt_frac={row.subopt_frac:.6f} reads_per_sec={row.reads_per_sec:.0f}"
        )
    gates_ok = True
    for row in report.rows:
        if args.min_recall is not None and row.recall * 100.0 < args.min_recall:
            gates_ok = False
        if args.min_d0 is not None and row.d0 < args.min_d0:
            gates_ok = False
    if not gates_ok:
        print("quality gates unmet", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"build": cmd_build, "map": cmd_map, "eval": cmd_eval}
    try:
        return handlers[args.command](args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
