"""Certification harness: closed forms against numerics, and bounds against simulated runs.

Each ``check_*`` function is deterministic under its seed and returns a
:class:`CheckResult`.  A failing check carries a minimal reproducer record:
the first offending instance, serialised so it can be rerun in isolation.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable

import networkx as nx
import numpy as np

from . import bounds as B
from .mixers import (
    MixerSpec,
    commutator_norm,
    dense_tf_commutator_from_values,
    grover_commutator_norm,
    hypercube_layer_adjacency,
    numeric_commutator_norm,
    s_star_witness,
    spectral_radius,
    star_adjacency,
    tf_hamming_k_norm,
    tf_search_dist3_norm,
)
from .problems import (
    CostSpectrum,
    FeasibleSet,
    Graph,
    ShortfallWarning,
    SearchSet,
    cost_stats_bruteforce,
    cost_stats_from_coefficients,
    gen_dist3_set,
    gen_hamming_k_set,
    maxcut_cost,
    random_graph,
    random_klocal_cost,
    random_regular_graph,
    search_cost,
)
from .sim import (
    AngleSchedule,
    SimResult,
    grover_fixed_schedule,
    grover_success_closed_form,
    optimize_angles,
    run_qaoa,
    xj_bound_check,
)
from .statevector import same_state

SCHEMA = 1
SOUND_SLACK = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    count: int
    max_error: float = 0.0
    detail: dict[str, Any] = field(default_factory=dict)
    reproducer: dict[str, Any] | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.count} cases, max error {self.max_error:.3e}"

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class CertifyConfig:
    seed: int = 0
    spectra: int = 50
    spectra_max_n: int = 8
    graphs: int = 30
    graphs_max_n: int = 12
    klocal: int = 50
    klocal_max_n: int = 10
    klocal_max_k: int = 4
    radius_max_n: int = 10
    tf_search_max_n: int = 8
    soundness_runs: int = 100
    regular_graphs: int = 10
    rescaling_pairs: int = 20


def _spectrum_record(c: CostSpectrum) -> dict:
    return {"feasible": c.feasible.to_json(), "values": c.values.tolist()}


def _nonempty(g: Graph) -> Graph:
    return g if g.n_edges else Graph(g.n_vertices, ((0, 1),))


def _graph_record(g: Graph) -> dict:
    return {"n": g.n_vertices, "edges": [list(e) for e in g.edges]}


# --------------------------------------------------------------------------
# Closed forms against independent numerics


def check_grover_norm(seed: int = 0, count: int = 50, max_n: int = 8,
                      norm_fn: Callable[[CostSpectrum], float] = grover_commutator_norm,
                      atol: float = 1e-9) -> CheckResult:
    """Grover commutator closed form against a dense eigensolve on random integer spectra."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        if n >= 3 and rng.random() < 0.25:
            f = FeasibleSet.weight(n, int(rng.integers(1, n)))
        else:
            f = FeasibleSet.full(n)
        c = CostSpectrum(f, rng.integers(0, 20, size=f.size))
        got, ref = norm_fn(c), numeric_commutator_norm(MixerSpec.grover(f), c)
        err = abs(got - ref)
        worst = max(worst, err)
        if not err <= atol:
            return CheckResult("grover-norm", False, i + 1, worst,
                               reproducer={"case": i, "spectrum": _spectrum_record(c),
                                           "closed_form": got, "dense": ref})
    return CheckResult("grover-norm", True, count, worst)


def check_maxcut_stats(seed: int = 0, count: int = 30, max_n: int = 12) -> CheckResult:
    """Enumerated Max-Cut mean and variance equal ``|E|/2`` and ``|E|/4`` as fractions."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(2, max_n + 1))
        g = _nonempty(random_graph(n, float(rng.uniform(0.2, 0.9)), int(rng.integers(0, 2**31))))
        _, c = maxcut_cost(g)
        e = g.n_edges
        if c.c_avg != Fraction(e, 2) or c.variance != Fraction(e, 4):
            return CheckResult("maxcut-stats", False, i + 1, math.inf,
                               reproducer={"case": i, "graph": _graph_record(g), "c_avg": str(c.c_avg),
                                           "variance": str(c.variance)})
    return CheckResult("maxcut-stats", True, count, 0.0)


def check_klocal_stats(seed: int = 0, count: int = 50, max_n: int = 10, max_k: int = 4,
                       atol: float = 1e-9) -> CheckResult:
    """Coefficient-route mean and sigma against brute-force enumeration."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        k = int(rng.integers(1, max_k + 1))
        n = int(rng.integers(k, max_n + 1))
        h = random_klocal_cost(n, k, int(rng.integers(1, 3 * n + 1)), int(rng.integers(0, 2**31)))
        avg, sigma = cost_stats_from_coefficients(h)
        ref = cost_stats_bruteforce(h.spectrum())
        err = max(abs(sigma - ref.sigma_c), abs(avg - float(ref.c_avg)))
        worst = max(worst, err)
        if not err <= atol:
            return CheckResult("klocal-stats", False, i + 1, worst,
                               reproducer={"case": i, "cost": h.to_json(), "coefficient": [avg, sigma],
                                           "bruteforce": [float(ref.c_avg), ref.sigma_c]})
    return CheckResult("klocal-stats", True, count, worst)


def check_radii(max_n: int = 10, atol: float = 1e-8) -> CheckResult:
    """Star and hypercube-layer spectral radii against dense eigensolves."""
    worst, count = 0.0, 0
    for n in range(1, max_n + 1):
        cases = [("star", n, None, math.sqrt(n), star_adjacency(n))]
        cases += [("layer", n, k, math.sqrt(2 * k * (n - k) + n), hypercube_layer_adjacency(n, k))
                  for k in range(1, n)]
        for kind, n_, k, closed, adj in cases:
            ref = spectral_radius(adj)
            err = abs(closed - ref)
            worst = max(worst, err)
            count += 1
            if not err <= atol:
                return CheckResult("radii", False, count, worst,
                                   reproducer={"graph": kind, "n": n_, "k": k, "closed_form": closed, "dense": ref})
    return CheckResult("radii", True, count, worst)


def check_tf_search_norms(seed: int = 0, max_n: int = 8, max_m: int = 4, atol: float = 1e-8) -> CheckResult:
    """Transverse-field search commutator norms against dense eigensolves."""
    worst, count = 0.0, 0
    cases: list[tuple[SearchSet, float]] = []
    for n in range(1, max_n + 1):
        for m in range(1, max_m + 1):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ShortfallWarning)
                s = gen_dist3_set(n, m, seed + 31 * n + m)
            if s.m == m:
                cases.append((s, tf_search_dist3_norm(n)))
        cases += [(gen_hamming_k_set(n, k), tf_hamming_k_norm(n, k)) for k in range(1, n)]
    for s, closed in cases:
        ref = numeric_commutator_norm(MixerSpec.tf(s.n), search_cost(s))
        err = abs(closed - ref)
        worst = max(worst, err)
        count += 1
        if not err <= atol:
            return CheckResult("tf-search-norms", False, count, worst,
                               reproducer={"search": s.to_json(), "closed_form": closed, "dense": ref})
    return CheckResult("tf-search-norms", True, count, worst,
                       detail={"max_dist3_m": max((s.m for s, _ in cases if s.tag == "dist3"), default=0)})


def dense_tf_norm(c: CostSpectrum) -> float:
    """``||[H_C, H_TF]||`` from the eigenvalues of the real symmetric ``A^T A``."""
    a = dense_tf_commutator_from_values(c.values, c.n)
    return float(math.sqrt(max(np.max(np.linalg.eigvalsh(a.T @ a)), 0.0)))


def check_witness_and_triviality(seed: int = 0, count: int = 10, sizes=(6, 8, 10, 12),
                                 atol: float = 1e-9) -> CheckResult:
    """3-regular Max-Cut: a-priori transverse-field bound below one round; witness sandwich."""
    rng = np.random.default_rng(seed)
    worst, rows = 0.0, []
    for i in range(count):
        n = int(sizes[i % len(sizes)])
        g = random_regular_graph(n, 3, int(rng.integers(0, 2**31)))
        h, c = maxcut_cost(g)
        norm = dense_tf_norm(c)
        b = B.tf_objective_bound(B.BoundInputs(1.0, c_max=c.c_max, c_avg=float(c.c_avg), comm_norm=norm, n=n))
        w = s_star_witness(h)
        eq_err = abs(w.value - w.traceless_norm)
        worst = max(worst, eq_err)
        ok = b.p_lower < 1 and norm >= w.value - atol and w.value >= w.traceless_norm - atol and eq_err <= atol
        rows.append({"n": n, "bound": b.p_lower, "norm": norm, "witness": w.value, "traceless": w.traceless_norm})
        if not ok:
            return CheckResult("tf-triviality-witness", False, i + 1, worst,
                               reproducer={"case": i, "graph": _graph_record(g), **rows[-1]})
    return CheckResult("tf-triviality-witness", True, count, worst,
                       detail={"max_bound": max(r["bound"] for r in rows)})


# --------------------------------------------------------------------------
# Simulator-backed checks


def check_rescaling(seed: int = 0, count: int = 20, alphas=(2, 3, 5), atol: float = 1e-10) -> CheckResult:
    """Scaling costs by ``alpha`` and gammas by ``1/alpha`` leaves the final state unchanged.

    The endpoint evaluation of the rescaled bound is also compared with a
    ratio-grid scan, which must not beat it and must come within one grid step.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        n = int(rng.integers(2, 8))
        if rng.random() < 0.5:
            _, c = maxcut_cost(_nonempty(random_graph(n, 0.6, int(rng.integers(0, 2**31)))))
        else:
            c = random_klocal_cost(n, min(3, n), 2 * n, int(rng.integers(0, 2**31))).spectrum()
        mixer = MixerSpec.grover(c.feasible) if rng.random() < 0.5 else MixerSpec.tf(n)
        sched = AngleSchedule.random(int(rng.integers(1, 5)), rng)
        alpha = int(alphas[i % len(alphas)])
        base = run_qaoa(c, mixer, sched)
        scaled = run_qaoa(c.scaled(alpha), mixer,
                          AngleSchedule(tuple(g / alpha for g in sched.gammas), sched.betas))
        err = 1 - abs(base.state.overlap(scaled.state))
        norm = commutator_norm(mixer, spectrum=c).value
        h1_delta = base.lambda_achieved * c.c_max - float(c.c_avg)
        end = B.rescaled_bound(base.h0_expectation, h1_delta, norm)
        scan, _, res = B.rescaled_ratio_scan(base.h0_expectation, h1_delta, norm)
        scan_gap = end.raw - scan
        worst = max(worst, err)
        if not (same_state(base.state, scaled.state, atol) and -1e-12 <= scan_gap <= res + 1e-12):
            return CheckResult("rescaling", False, i + 1, worst,
                               reproducer={"case": i, "spectrum": _spectrum_record(c), "mixer": mixer.kind,
                                           "schedule": sched.to_json(), "alpha": alpha, "overlap_defect": err,
                                           "endpoint": end.raw, "scan": scan, "resolution": res})
    return CheckResult("rescaling", True, count, worst)


def grover_certification(n: int = 10, p: int = 25) -> dict:
    """Fixed-angle Grover on one marked string, with the search bounds at the achieved ratio."""
    s = SearchSet(n, (0,))
    c = search_cost(s)
    r = run_qaoa(c, MixerSpec.grover(c.feasible), grover_fixed_schedule(p))
    N = 1 << n
    lam = r.success_probability
    return {
        "success": lam,
        "closed_form": grover_success_closed_form(N, 1, p),
        "grover_search": B.grover_search_bound(lam, N, 1).p_lower,
        "search_overlap": B.search_overlap_bound(lam, N, 1).p_lower,
        "search_overlap_lambda1": B.search_overlap_bound(1.0, N, 1).p_lower,
        "p": p,
    }


def check_grover_certification(n: int = 10, p: int = 25) -> CheckResult:
    d = grover_certification(n, p)
    err = abs(d["success"] - d["closed_form"])
    ok = (d["success"] >= 0.999 and err <= 1e-6
          and abs(d["grover_search"] - 5.08) <= 0.01 and abs(d["search_overlap"] - 5.09) <= 0.01
          and abs(d["search_overlap_lambda1"] - 5.09) <= 0.01
          and d["grover_search"] <= p and d["search_overlap"] <= p)
    return CheckResult("grover-certification", ok, 1, err, detail=d, reproducer=None if ok else d)


def check_bipartite(edge_counts=(100, 10000), atol: float = 1e-4) -> CheckResult:
    """Complete bipartite graphs: cut every edge, then the worst-cased Grover Max-Cut bound."""
    worst, rows = 0.0, []
    for e in edge_counts:
        side = math.isqrt(e)
        kb = nx.complete_bipartite_graph(side, side)
        left = {v for v, d in kb.nodes(data="bipartite") if d == 0}
        c_max = sum(1 for u, v in kb.edges if (u in left) != (v in left))
        rep = B.maxcut_grover_bound(1.0, c_max, kb.number_of_edges())
        target = (2 * 1.0 - 1) * math.sqrt(e) / (4 * math.pi)
        err = abs(rep.p_lower - target)
        worst = max(worst, err)
        rows.append({"edges": e, "bound": rep.p_lower, "target": target})
        if not (side * side == e and c_max == e and err <= atol):
            return CheckResult("bipartite-maxcut", False, len(rows), worst, reproducer=rows[-1])
    return CheckResult("bipartite-maxcut", True, len(rows), worst, detail={"rows": rows})


# --------------------------------------------------------------------------
# Soundness sweep


def random_case(rng: np.random.Generator) -> dict:
    """One corpus item: instance, mixer and schedule, drawn from the seeded stream."""
    family = "maxcut" if rng.random() < 0.5 else "search"
    mixer_kind = "grover" if rng.random() < 0.5 else "tf"
    p = int(rng.integers(1, 6))
    case: dict[str, Any] = {"family": family, "mixer": mixer_kind, "p": p}
    if family == "maxcut":
        n = int(rng.integers(3, 11))
        g = _nonempty(random_graph(n, float(rng.uniform(0.3, 0.9)), int(rng.integers(0, 2**31))))
        case["graph"] = g
        if mixer_kind == "grover" and rng.random() < 0.25:
            case["feasible"] = FeasibleSet.weight(n, int(rng.integers(1, n)))
    else:
        n = int(rng.integers(3, 13))
        kind = rng.choice(["single", "dist3", "hamming"])
        if kind == "dist3":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ShortfallWarning)
                s = gen_dist3_set(n, int(rng.integers(1, 5)), int(rng.integers(0, 2**31)))
        elif kind == "hamming" and n <= 10:
            s = gen_hamming_k_set(n, int(rng.integers(1, n)))
        else:
            s = SearchSet(n, (int(rng.integers(0, 1 << n)),))
        case["search"] = s
    if mixer_kind == "grover" and family == "search" and rng.random() < 0.5:
        case["schedule"] = grover_fixed_schedule(p)
    elif mixer_kind == "tf" and family == "search" and rng.random() < 0.4:
        # Random angles rarely push the transverse field past lambda = 1/2; optimise a small case instead.
        n = int(rng.integers(3, 6))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ShortfallWarning)
            s = gen_dist3_set(n, 1 + int(rng.random() < 0.5), int(rng.integers(0, 2**31)))
        p = min(p, 3)
        c = search_cost(s)
        case.update(search=s, p=p)
        case["schedule"], _ = optimize_angles(c, MixerSpec.tf(n), p, seed=int(rng.integers(0, 2**31)), restarts=1)
    else:
        case["schedule"] = AngleSchedule.random(p, rng)
    return case


def _case_record(case: dict) -> dict:
    out = {"family": case["family"], "mixer": case["mixer"], "p": case["p"],
           "schedule": case["schedule"].to_json()}
    if "graph" in case:
        out["graph"] = _graph_record(case["graph"])
    if "feasible" in case:
        out["feasible"] = case["feasible"].to_json()
    if "search" in case:
        out["search"] = case["search"].to_json()
    return out


def applicable_bounds(case: dict, r: SimResult, c: CostSpectrum,
                      sigma_fn: Callable[[CostSpectrum], float] = grover_commutator_norm) -> list[B.BoundReport]:
    """Every a-posteriori bound that applies to a finished run."""
    ap = B.APOSTERIORI
    lam, c_max, c_avg = r.lambda_achieved, c.c_max, float(c.c_avg)
    out: list[B.BoundReport] = []
    if c_max == 0 or sigma_fn(c) == 0:
        return out
    sigma = sigma_fn(c)
    if case["mixer"] == "grover":
        norm, prov = sigma, "closed-form:sigma_C"
    else:
        klocal = maxcut_cost(case["graph"])[0] if "graph" in case else None
        res = commutator_norm(MixerSpec.tf(c.n), spectrum=c, klocal=klocal, search=case.get("search"))
        norm, prov = res.value, res.provenance
    base = B.BoundInputs(lam, c_max=c_max, c_avg=c_avg, comm_norm=norm, mode=ap,
                         h0_expectation=r.h0_expectation, overlap_sq=r.overlap_sq,
                         sum_x_expectations=None if r.x_expectations is None else sum(r.x_expectations),
                         n=c.n, sigma_c=sigma, provenance={"comm_norm": prov})
    out.append(B.qaoa_round_bound(base))
    out.append(B.rescaled_bound(r.h0_expectation, lam * c_max - c_avg, norm))
    # Projector onto the initial state commutes with either mixer; its commutator with H_C has norm sigma_C.
    out.append(B.overlap_bound(r.overlap_sq, 1.0, sigma))
    if case["mixer"] == "grover":
        if c.feasible.is_full:
            base.provenance["feasible"] = "full"
        else:
            base.provenance["feasible"] = "constrained"
        out.append(B.grover_objective_bound(base))
        if "graph" in case and c.feasible.is_full:
            h = maxcut_cost(case["graph"])[0]
            out.append(B.grover_klocal_bound(base, h.sum_alpha_sq))
            out.append(B.maxcut_grover_bound(lam, c_max, case["graph"].n_edges, r.overlap_sq))
    else:
        out.append(B.tf_objective_bound(base))
    if "search" in case:
        s: SearchSet = case["search"]
        N = 1 << s.n
        out.append(B.search_overlap_bound(lam, N, s.m))
        if case["mixer"] == "grover":
            out.append(B.grover_search_bound(lam, N, s.m))
        elif lam > 0.5:
            if s.tag == "dist3":
                out.append(B.tf_search_dist3_bound(lam, s.n, s.m))
            k = s.hamming_k
            if k is not None and 0 < k < s.n:
                out.append(B.tf_search_hamming_bound(lam, s.n, k, s.m))
    return out


def case_spectrum(case: dict) -> CostSpectrum:
    if "graph" in case:
        _, c = maxcut_cost(case["graph"])
        if "feasible" in case:
            f = case["feasible"]
            c = CostSpectrum(f, c.values[f.indices])
        return c
    return search_cost(case["search"])


def check_soundness(seed: int = 0, runs: int = 100,
                    sigma_fn: Callable[[CostSpectrum], float] = grover_commutator_norm) -> CheckResult:
    """Every applicable a-posteriori bound stays at or below the number of rounds used.

    The angle-sum form is also checked: the total angle must cover the
    annealing-time bound.
    """
    rng = np.random.default_rng(seed)
    worst = -math.inf
    counts = {"bounds": 0, "xj_checks": 0}
    for i in range(runs):
        case = random_case(rng)
        c = case_spectrum(case)
        mixer = MixerSpec.grover(c.feasible) if case["mixer"] == "grover" else MixerSpec.tf(c.n)
        r = run_qaoa(c, mixer, case["schedule"])
        reports = applicable_bounds(case, r, c, sigma_fn)
        if reports:
            norm = reports[0].denominator / B.FOUR_PI
            t = B.annealing_time_bound(r.h0_expectation, c.c_max - float(c.c_avg),
                                       c.c_max * (1 - r.lambda_achieved), norm)
            t.extra["limit"] = case["schedule"].angle_sum
            reports.append(t)
        for rep in reports:
            limit = rep.extra.get("limit", case["p"])
            margin = rep.p_lower - limit
            worst = max(worst, margin)
            counts["bounds"] += 1
            if margin > SOUND_SLACK:
                return CheckResult("soundness", False, i + 1, margin, detail=counts,
                                   reproducer={"case": i, **_case_record(case), "formula": rep.formula,
                                               "bound": rep.p_lower, "limit": limit, "run": r.to_json()})
        s = case.get("search")
        if case["mixer"] == "tf" and s is not None and s.tag == "dist3" and r.success_probability > 0.5:
            chk = xj_bound_check(r.state, s)
            counts["xj_checks"] += 1
            if not chk.ok:
                return CheckResult("soundness", False, i + 1, -min(chk.margins), detail=counts,
                                   reproducer={"case": i, **_case_record(case), "check": "xj", "margins": chk.margins})
    return CheckResult("soundness", True, runs, max(worst, 0.0) if worst > 0 else 0.0,
                       detail={**counts, "largest_margin": worst})


# --------------------------------------------------------------------------


def run_all(cfg: CertifyConfig | None = None) -> list[CheckResult]:
    cfg = cfg or CertifyConfig()
    s = cfg.seed
    return [
        check_grover_norm(s, cfg.spectra, cfg.spectra_max_n),
        check_maxcut_stats(s, cfg.graphs, cfg.graphs_max_n),
        check_klocal_stats(s, cfg.klocal, cfg.klocal_max_n, cfg.klocal_max_k),
        check_radii(cfg.radius_max_n),
        check_tf_search_norms(s, cfg.tf_search_max_n),
        check_grover_certification(),
        check_soundness(s, cfg.soundness_runs),
        check_witness_and_triviality(s, cfg.regular_graphs),
        check_rescaling(s, cfg.rescaling_pairs),
        check_bipartite(),
    ]


def summary(results: list[CheckResult], cfg: CertifyConfig) -> dict:
    return {
        "schema": SCHEMA,
        "config": asdict(cfg),
        "passed": all(r.passed for r in results),
        "checks": [r.to_json() for r in results],
    }


def summary_bytes(results: list[CheckResult], cfg: CertifyConfig) -> bytes:
    return (json.dumps(summary(results, cfg), sort_keys=True, indent=2) + "\n").encode()
