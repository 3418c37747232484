"""Logical error rate of the matching and union-find decoders over a grid
of lattice sizes and error probabilities."""
import argparse

from sparse_blossom.cli import run_ler
from sparse_blossom.graph import gen_lattice_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,6,8")
    ap.add_argument("--p", type=float, nargs="+", default=[0.01, 0.02, 0.03, 0.05])
    ap.add_argument("--shots", type=int, default=2000)
    ap.add_argument("--decoders", default="mwpm,uf")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("decoder\tsize\tp\tshots\tfailures\tler\tci_low\tci_high")
    for kind in args.decoders.split(","):
        for size in (int(s) for s in args.sizes.split(",")):
            for p in args.p:
                g = gen_lattice_graph(size, size, p)
                res = run_ler(g, args.shots, args.seed, kind, args.workers)
                lo, hi = res.interval()
                print(f"{kind}\t{size}\t{p}\t{res.shots}\t{res.failures}\t{res.rate:.4g}\t"
                      f"{lo:.4g}\t{hi:.4g}", flush=True)


if __name__ == "__main__":
    main()
