"""Command-line front end: generate graphs, sample shots, decode, estimate
logical error rates and benchmark scaling.

Run ``sparse-blossom <command> --help`` for the flags of each command.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decoder import Decoder, verify_solution
from .graph import (DetectorGraph, GraphError, format_graph_file, gen_lattice_graph,
                    gen_repetition_graph, parse_graph_file)
from .matcher import MatcherStats, UnmatchableSyndromeError
from .oracle import DEFAULT_EVENT_BOUND, oracle_decode
from .sampler import CHUNK_SIZE, CannotSampleError, format_shots, parse_shots, sample_batch
from .uf import UnionFindDecoder


def wilson_interval(failures: int, shots: int, z: float = 1.96) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if shots == 0:
        return 0.0, 1.0
    p = failures / shots
    denom = 1 + z * z / shots
    centre = (p + z * z / (2 * shots)) / denom
    half = z * math.sqrt(p * (1 - p) / shots + z * z / (4 * shots * shots)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def make_decoder(graph: DetectorGraph, kind: str, **kwargs):
    if kind == "mwpm":
        return Decoder(graph, **kwargs)
    if kind == "uf":
        return UnionFindDecoder(graph)
    raise ValueError(f"unknown decoder {kind!r}")


def _predict(decoder, events) -> int:
    return decoder.decode(events).predicted_observables


# -- logical error rate -----------------------------------------------------------


@dataclass
class LerResult:
    shots: int
    failures: int
    errors: int = 0

    @property
    def rate(self) -> float:
        return self.failures / self.shots if self.shots else 0.0

    def interval(self) -> tuple:
        return wilson_interval(self.failures, self.shots)


def _ler_chunk(args) -> tuple:
    graph, kind, seed, chunk, count = args
    decoder = make_decoder(graph, kind)
    events, truth = sample_batch(graph, count, seed, first_chunk=chunk)
    failures = 0
    errors = 0
    for ev, t in zip(events, truth):
        try:
            pred = _predict(decoder, ev)
        except UnmatchableSyndromeError:
            errors += 1
            failures += 1
            continue
        failures += pred != int(t)
    return failures, errors


def run_ler(graph: DetectorGraph, shots: int, seed: int, decoder: str = "mwpm",
            workers: int = 1) -> LerResult:
    """Sample ``shots`` shots and count mispredicted observable masks.

    Shots are split into fixed chunks so the result does not depend on
    ``workers``.  Unmatchable shots count as failures.
    """
    tasks = []
    chunk = 0
    left = shots
    while left > 0:
        k = min(CHUNK_SIZE, left)
        tasks.append((graph, decoder, seed, chunk, k))
        left -= k
        chunk += 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_ler_chunk, tasks))
    else:
        results = [_ler_chunk(t) for t in tasks]
    return LerResult(shots, sum(r[0] for r in results), sum(r[1] for r in results))


# -- benchmarking -----------------------------------------------------------------


@dataclass
class BenchRow:
    size: int
    nodes: int
    shots: int
    mean_events: float
    seconds_per_shot: float

    @property
    def seconds_per_node(self) -> float:
        return self.seconds_per_shot / self.nodes

    @property
    def seconds_per_event(self) -> float:
        return self.seconds_per_shot / self.mean_events if self.mean_events else float("nan")


def build_family(family: str, size: int, p: float, rounds: Optional[int] = None) -> DetectorGraph:
    rounds = size if rounds is None else rounds
    if family == "lattice":
        return gen_lattice_graph(size, rounds, p)
    if family == "rep":
        return gen_repetition_graph(size, rounds, p)
    raise ValueError(f"unknown graph family {family!r}")


def bench_size(graph: DetectorGraph, size: int, shots: int, seed: int, decoder: str = "mwpm",
               stats: Optional[MatcherStats] = None, min_seconds: float = 0.0,
               queue: str = "radix") -> BenchRow:
    """Time decoding of sampled shots (sampling excluded from the timing)."""
    if decoder == "mwpm":
        dec = Decoder(graph, queue=queue, collect_stats=stats is not None)
    else:
        dec = make_decoder(graph, decoder)
    events, _ = sample_batch(graph, shots, seed)
    done = 0
    elapsed = 0.0
    total_events = 0
    # Repeat the batch until enough wall time has accumulated; statistics
    # come from the first pass only.
    while True:
        t0 = time.perf_counter()
        for ev in events:
            dec.decode(ev)
        elapsed += time.perf_counter() - t0
        done += len(events)
        total_events += sum(len(e) for e in events)
        if stats is not None and decoder == "mwpm" and dec.matcher.stats is not None:
            stats.merge(dec.stats)
            dec.matcher.stats = None
        if elapsed >= min_seconds or not events:
            break
    return BenchRow(size, graph.num_nodes, done, total_events / max(done, 1),
                    elapsed / max(done, 1))


def loglog_slope(x, y) -> float:
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def histogram_rows(stats: MatcherStats) -> list:
    rows = []
    for name, values in (("blossom_cycle_length", stats.blossom_cycle_lengths),
                         ("blossom_depth", stats.blossom_depths),
                         ("tree_size", stats.tree_sizes)):
        for value, count in sorted(Counter(values).items()):
            rows.append((name, value, count))
    return rows


# -- command handlers -------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_gen(args) -> int:
    if args.kind == "rep":
        g = gen_repetition_graph(args.d, args.rounds, args.p)
    else:
        g = gen_lattice_graph(args.size, args.rounds, args.p)
    _write(args.out, format_graph_file(g))
    return 0


def cmd_sample(args) -> int:
    g = parse_graph_file(_read(args.graph))
    events, truth = sample_batch(g, args.shots, args.seed)
    _write(args.out, format_shots(events, truth))
    return 0


def _decode_one(decoder, graph, kind, events, truth, verify, oracle_check) -> tuple:
    """Return ``(output_line, ok)`` for one shot."""
    try:
        if kind == "uf":
            pred = decoder.decode(events).predicted_observables
            weight = "-"
            sol = None
        else:
            sol = decoder.decode(events)
            pred = sol.predicted_observables
            weight = str(sol.total_weight)
    except UnmatchableSyndromeError as ex:
        return f"error: unmatchable ({ex})", False
    line = f"{pred:#x} {weight}"
    ok = True
    if truth is not None:
        line += " correct" if pred == truth else " incorrect"
    if verify and sol is not None:
        report = verify_solution(decoder.graph, events, sol)
        if not report.ok:
            line += f" verify-failed:{report.failure.replace(' ', '-')}"
            ok = False
    if oracle_check and sol is not None and len(events) <= DEFAULT_EVENT_BOUND:
        ref = oracle_decode(decoder.graph, events)
        if ref is None or ref.total_weight != sol.total_weight:
            line += " oracle-mismatch"
            ok = False
    return line, ok


def _decode_chunk(args) -> list:
    graph, kind, shots, verify, oracle_check = args
    dec = make_decoder(graph, kind)
    return [_decode_one(dec, graph, kind, ev, t, verify, oracle_check) for ev, t in shots]


def cmd_decode(args) -> int:
    g = parse_graph_file(_read(args.graph))
    shots = parse_shots(_read(args.shots))
    if args.workers > 1 and len(shots) > 1:
        size = max(1, math.ceil(len(shots) / (4 * args.workers)))
        tasks = [(g, args.decoder, shots[i:i + size], args.verify, args.oracle_check)
                 for i in range(0, len(shots), size)]
        with ProcessPoolExecutor(args.workers) as pool:
            results = [r for part in pool.map(_decode_chunk, tasks) for r in part]
    else:
        results = _decode_chunk((g, args.decoder, shots, args.verify, args.oracle_check))
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        for line, _ in results:
            out.write(line + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    bad = sum(not ok for _, ok in results)
    if bad:
        print(f"{bad} of {len(results)} shots failed a check or could not be decoded",
              file=sys.stderr)
    return 1 if bad else 0


def cmd_ler(args) -> int:
    g = parse_graph_file(_read(args.graph))
    res = run_ler(g, args.shots, args.seed, args.decoder, args.workers)
    lo, hi = res.interval()
    print("shots\tfailures\tler\tci_low\tci_high")
    print(f"{res.shots}\t{res.failures}\t{res.rate:.6g}\t{lo:.6g}\t{hi:.6g}")
    return 1 if res.errors else 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    stats = MatcherStats() if args.stats_out else None
    rows = []
    lines = ["size\tnodes\tshots\tmean_events\tsec_per_shot\tsec_per_node\tsec_per_event"]
    for size in sizes:
        g = build_family(args.family, size, args.p, args.rounds)
        row = bench_size(g, size, args.shots, args.seed, args.decoder, stats, args.min_seconds)
        rows.append(row)
        lines.append(f"{row.size}\t{row.nodes}\t{row.shots}\t{row.mean_events:.2f}\t"
                     f"{row.seconds_per_shot:.6g}\t{row.seconds_per_node:.6g}\t"
                     f"{row.seconds_per_event:.6g}")
    if len(rows) >= 2:
        nodes = [r.nodes for r in rows]
        lines.append(f"# loglog slope sec_per_shot vs nodes: "
                     f"{loglog_slope(nodes, [r.seconds_per_shot for r in rows]):.3f}")
        lines.append(f"# loglog slope sec_per_node vs nodes: "
                     f"{loglog_slope(nodes, [r.seconds_per_node for r in rows]):.3f}")
    _write(args.out, "\n".join(lines) + "\n")
    if stats is not None:
        text = "quantity\tvalue\tcount\n" + "".join(
            f"{q}\t{v}\t{c}\n" for q, v, c in histogram_rows(stats))
        _write(args.stats_out, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sparse-blossom", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic detector graph")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    rep = gen_sub.add_parser("rep", help="repetition code memory graph")
    rep.add_argument("--d", type=int, required=True, help="code distance")
    rep.add_argument("--rounds", type=int, required=True)
    rep.add_argument("--p", type=float, required=True, help="per-edge error probability")
    rep.add_argument("--out", "-o")
    lat = gen_sub.add_parser("lattice", help="periodic lattice stacked over rounds")
    lat.add_argument("--size", type=int, required=True)
    lat.add_argument("--rounds", type=int, required=True)
    lat.add_argument("--p", type=float, required=True)
    lat.add_argument("--out", "-o")
    gen.set_defaults(func=cmd_gen)

    smp = sub.add_parser("sample", help="sample shots into a syndrome file")
    smp.add_argument("--graph", required=True)
    smp.add_argument("--shots", type=int, required=True)
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--out", "-o")
    smp.set_defaults(func=cmd_sample)

    dec = sub.add_parser("decode", help="decode a syndrome file")
    dec.add_argument("--graph", required=True)
    dec.add_argument("--shots", required=True, help="syndrome file ('-' for stdin)")
    dec.add_argument("--decoder", choices=("mwpm", "uf"), default="mwpm")
    dec.add_argument("--workers", type=int, default=1)
    dec.add_argument("--verify", action="store_true", help="check every solution independently")
    dec.add_argument("--oracle-check", action="store_true",
                     help=f"compare weights with the exact oracle (<= {DEFAULT_EVENT_BOUND} events)")
    dec.add_argument("--out", "-o")
    dec.set_defaults(func=cmd_decode)

    ler = sub.add_parser("ler", help="estimate the logical error rate by sampling")
    ler.add_argument("--graph", required=True)
    ler.add_argument("--shots", type=int, required=True)
    ler.add_argument("--seed", type=int, default=0)
    ler.add_argument("--decoder", choices=("mwpm", "uf"), default="mwpm")
    ler.add_argument("--workers", type=int, default=1)
    ler.set_defaults(func=cmd_ler)

    bench = sub.add_parser("bench", help="time decoding across graph sizes")
    bench.add_argument("--family", choices=("lattice", "rep"), default="lattice")
    bench.add_argument("--sizes", required=True, help="comma-separated sizes")
    bench.add_argument("--rounds", type=int, help="rounds (default: equal to size)")
    bench.add_argument("--p", type=float, required=True)
    bench.add_argument("--shots", type=int, default=100)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--decoder", choices=("mwpm", "uf"), default="mwpm")
    bench.add_argument("--min-seconds", type=float, default=0.0,
                       help="repeat each size until this much decode time accumulates")
    bench.add_argument("--stats-out", help="write blossom/tree size histograms (TSV)")
    bench.add_argument("--out", "-o")
    bench.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, CannotSampleError, ValueError, OSError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
