"""Worst-cased Grover Max-Cut bound on complete bipartite graphs as the edge count grows."""
from __future__ import annotations

import argparse
import math

import networkx as nx

from qaoa_rounds.bounds import maxcut_grover_bound


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sides", type=int, nargs="+", default=[2, 5, 10, 30, 100, 300])
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args(argv)
    print(f"{'side':>5} {'|E|':>7} {'bound':>9} {'(2l-1)sqrt(E)/4pi':>18}")
    for side in args.sides:
        g = nx.complete_bipartite_graph(side, side)
        e = g.number_of_edges()
        rep = maxcut_grover_bound(args.lam, e, e)
        closed = max(2 * args.lam - 1, 0) * math.sqrt(e) / (4 * math.pi)
        print(f"{side:>5} {e:>7} {rep.p_lower:>9.4f} {closed:>18.4f}")


if __name__ == "__main__":
    main()
