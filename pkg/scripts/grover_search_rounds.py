"""Fixed-angle Grover runs on single-target search: success vs. the round lower bounds."""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass

from qaoa_rounds.bounds import grover_search_bound, search_overlap_bound
from qaoa_rounds.mixers import MixerSpec
from qaoa_rounds.problems import SearchSet, search_cost
from qaoa_rounds.sim import grover_fixed_schedule, grover_success_closed_form, run_qaoa


@dataclass
class Config:
    n_min: int = 4
    n_max: int = 14
    marked: int = 1


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-min", type=int, default=Config.n_min)
    ap.add_argument("--n-max", type=int, default=Config.n_max)
    args = ap.parse_args(argv)
    cfg = Config(args.n_min, args.n_max)
    print(f"{'n':>3} {'p*':>4} {'success':>9} {'closed':>9} {'search':>8} {'overlap':>8}")
    for n in range(cfg.n_min, cfg.n_max + 1):
        N = 1 << n
        c = search_cost(SearchSet(n, tuple(range(cfg.marked))))
        mixer = MixerSpec.grover(c.feasible)
        # first peak of the rotation, then simulate it
        p = max(1, round(math.pi / (4 * math.asin(math.sqrt(cfg.marked / N))) - 0.5))
        lam = run_qaoa(c, mixer, grover_fixed_schedule(p)).success_probability
        lo1 = grover_search_bound(lam, N, cfg.marked).p_lower
        lo2 = search_overlap_bound(lam, N, cfg.marked).p_lower
        print(f"{n:>3} {p:>4} {lam:>9.6f} {grover_success_closed_form(N, cfg.marked, p):>9.6f} "
              f"{lo1:>8.3f} {lo2:>8.3f}")


if __name__ == "__main__":
    main()
