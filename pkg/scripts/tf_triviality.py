"""Transverse-field a-priori bound on random 3-regular Max-Cut: it never reaches one round."""
from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from qaoa_rounds.bounds import BoundInputs, tf_objective_bound
from qaoa_rounds.certify import dense_tf_norm
from qaoa_rounds.mixers import s_star_witness
from qaoa_rounds.problems import maxcut_cost, random_regular_graph


@dataclass
class Config:
    sizes: tuple[int, ...] = (6, 8, 10, 12)
    per_size: int = 3
    seed: int = 0


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--per-size", type=int, default=Config.per_size)
    ap.add_argument("--seed", type=int, default=Config.seed)
    args = ap.parse_args(argv)
    cfg = Config(per_size=args.per_size, seed=args.seed)
    rng = np.random.default_rng(cfg.seed)
    print(f"{'n':>3} {'|E|':>4} {'C_max':>5} {'norm':>8} {'witness':>8} {'||H_C`||':>8} {'bound':>7}")
    for n in cfg.sizes:
        for _ in range(cfg.per_size):
            g = random_regular_graph(n, 3, int(rng.integers(0, 2**31)))
            h, c = maxcut_cost(g)
            norm = dense_tf_norm(c)
            w = s_star_witness(h)
            b = tf_objective_bound(BoundInputs(1.0, c_max=c.c_max, c_avg=float(c.c_avg), comm_norm=norm, n=n))
            print(f"{n:>3} {g.n_edges:>4} {c.c_max:>5} {norm:>8.4f} {w.value:>8.4f} {w.traceless_norm:>8.4f} "
                  f"{b.p_lower:>7.4f}")


if __name__ == "__main__":
    main()
