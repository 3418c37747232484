"""Histograms of blossom cycle lengths, blossom nesting depths and
alternating tree sizes on a sampled lattice."""
import argparse
from collections import Counter

from sparse_blossom.decoder import Decoder
from sparse_blossom.graph import gen_lattice_graph
from sparse_blossom.sampler import sample_batch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=12)
    ap.add_argument("--rounds", type=int)
    ap.add_argument("--p", type=float, default=0.02)
    ap.add_argument("--shots", type=int, default=600)
    ap.add_argument("--seed", type=int, default=21)
    args = ap.parse_args()

    g = gen_lattice_graph(args.size, args.rounds or args.size, args.p)
    dec = Decoder(g, collect_stats=True)
    events, _ = sample_batch(g, args.shots, args.seed)
    for ev in events:
        dec.decode(ev)
    for name, values in (("blossom_cycle_length", dec.stats.blossom_cycle_lengths),
                         ("blossom_depth", dec.stats.blossom_depths),
                         ("tree_size", dec.stats.tree_sizes)):
        print(f"# {name}")
        for value, count in sorted(Counter(values).items()):
            print(f"{value}\t{count}")


if __name__ == "__main__":
    main()
