"""Soundness sweep with a per-formula summary of how close each bound comes to the rounds used."""
from __future__ import annotations

import argparse
from collections import defaultdict

import numpy as np

from qaoa_rounds.certify import case_spectrum, random_case, applicable_bounds
from qaoa_rounds.mixers import MixerSpec, grover_commutator_norm
from qaoa_rounds.sim import run_qaoa


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    ratios: dict[str, list[float]] = defaultdict(list)
    for _ in range(args.runs):
        case = random_case(rng)
        c = case_spectrum(case)
        mixer = MixerSpec.grover(c.feasible) if case["mixer"] == "grover" else MixerSpec.tf(c.n)
        r = run_qaoa(c, mixer, case["schedule"])
        if case["p"] == 0:
            continue
        for rep in applicable_bounds(case, r, c, grover_commutator_norm):
            ratios[f"{rep.formula}/{case['mixer']}"].append(rep.p_lower / case["p"])
    print(f"{'formula/mixer':<28} {'count':>5} {'max bound/p':>12} {'mean':>8}")
    for key in sorted(ratios):
        v = np.array(ratios[key])
        print(f"{key:<28} {v.size:>5} {v.max():>12.4f} {v.mean():>8.4f}")
    assert all(max(v) <= 1 + 1e-9 for v in ratios.values()), "a bound exceeded the round count"


if __name__ == "__main__":
    main()
