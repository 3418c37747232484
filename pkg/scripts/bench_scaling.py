"""Decoding time per shot and per detector node across lattice sizes.

Prints a TSV table and log-log slopes against the node count.
"""
import argparse

from sparse_blossom.cli import bench_size, build_family, loglog_slope


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,6,9,13,19")
    ap.add_argument("--p", type=float, nargs="+", default=[0.005, 0.05])
    ap.add_argument("--family", choices=("lattice", "rep"), default="lattice")
    ap.add_argument("--shot-budget", type=int, default=20000,
                    help="shots per size are max(4, budget // nodes)")
    ap.add_argument("--min-seconds", type=float, default=1.0)
    ap.add_argument("--queue", choices=("radix", "binary"), default="radix")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    print("p\tsize\tnodes\tshots\tmean_events\tsec_per_shot\tsec_per_node")
    for p in args.p:
        rows = []
        for size in sizes:
            g = build_family(args.family, size, p)
            shots = max(4, args.shot_budget // g.num_nodes)
            row = bench_size(g, size, shots, args.seed, min_seconds=args.min_seconds,
                             queue=args.queue)
            rows.append(row)
            print(f"{p}\t{size}\t{row.nodes}\t{row.shots}\t{row.mean_events:.2f}\t"
                  f"{row.seconds_per_shot:.4g}\t{row.seconds_per_node:.4g}", flush=True)
        nodes = [r.nodes for r in rows]
        print(f"# p={p} slope per shot {loglog_slope(nodes, [r.seconds_per_shot for r in rows]):.3f}"
              f", per node {loglog_slope(nodes, [r.seconds_per_node for r in rows]):.3f}")


if __name__ == "__main__":
    main()
