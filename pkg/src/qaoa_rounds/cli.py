"""Command-line front end: ``stats``, ``bound``, ``simulate`` and ``certify``.

Exit codes: 0 ok, 1 usage or inapplicable request, 2 invariant violation,
3 size limit exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import bounds as B
from .certify import CertifyConfig, run_all, summary_bytes
from .mixers import MixerError, MixerSpec, commutator_norm
from .pauli import DENSE_MAX_QUBITS
from .problems import (
    ENUM_MAX_QUBITS,
    CostSpectrum,
    FeasibleSet,
    Instance,
    ProblemError,
    c_max_upper_bound,
    cost_stats_from_coefficients,
    load_instance,
    search_stats,
)
from .sim import (
    OPT_MAX_QUBITS,
    OPT_MAX_ROUNDS,
    SIM_MAX_QUBITS,
    AngleSchedule,
    SimError,
    grover_fixed_schedule,
    optimize_angles,
    run_qaoa,
)

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_LIMITS = 0, 1, 2, 3
STATS_RTOL = 1e-9


class UsageError(Exception):
    pass


class LimitError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    inputs: list[str] = field(default_factory=list)
    mixer: str = "grover"
    lambdas: list[float] = field(default_factory=list)
    p_values: list[int] = field(default_factory=list)
    seed: int | None = None
    dense_max: int = DENSE_MAX_QUBITS
    enum_max: int = ENUM_MAX_QUBITS
    opt_max_p: int = OPT_MAX_ROUNDS
    out: str | None = None
    fmt: str | None = None

    def __post_init__(self):
        for name, val, cap in (("--dense-max", self.dense_max, DENSE_MAX_QUBITS),
                               ("--enum-max", self.enum_max, ENUM_MAX_QUBITS),
                               ("--opt-max-p", self.opt_max_p, OPT_MAX_ROUNDS)):
            if not 0 <= val <= cap:
                raise LimitError(f"{name}={val} outside [0, {cap}]")


# --------------------------------------------------------------------------
# Argument parsing


def parse_lambda_grid(text: str) -> list[float]:
    try:
        a, b, num = text.split(":")
        grid = np.linspace(float(a), float(b), int(num))
    except ValueError:
        raise UsageError(f"--lambda-grid expects a:b:num, got {text!r}") from None
    return [float(x) for x in grid]


def parse_p_range(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(t) for t in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise UsageError(f"--p expects an integer or lo:hi, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qaoa-rounds", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], dest="fmt")
        p.add_argument("--enum-max", type=int, default=ENUM_MAX_QUBITS, help="largest n to enumerate")
        p.add_argument("--dense-max", type=int, default=DENSE_MAX_QUBITS)
        p.add_argument("--feasible-weight", type=int, help="restrict to strings of this Hamming weight")

    st = sub.add_parser("stats", help="objective statistics and commutator norms")
    st.add_argument("--input", action="append", required=True)
    common(st)

    bd = sub.add_parser("bound", help="evaluate lower bounds on the round count")
    bd.add_argument("--input", action="append", default=[])
    bd.add_argument("--formula", required=True, help=f"comma list from: {', '.join(B.FORMULAS)}")
    lam = bd.add_mutually_exclusive_group(required=True)
    lam.add_argument("--lambda", dest="lam", type=float, action="append")
    lam.add_argument("--lambda-grid")
    bd.add_argument("--mixer", choices=["grover", "tf"], default="grover")
    bd.add_argument("--mode", choices=[B.APRIORI, B.APOSTERIORI], default=B.APRIORI)
    for flag in ("--c-max", "--c-avg", "--sigma-c", "--comm-norm", "--sum-alpha-sq", "--h0", "--overlap",
                 "--sum-x", "--p0-final", "--p0-initial", "--h1-delta"):
        bd.add_argument(flag, type=float)
    for flag in ("--N", "--m", "--n", "--k", "--edges"):
        bd.add_argument(flag, type=int)
    common(bd)

    sm = sub.add_parser("simulate", help="exact QAOA statevector runs, logged as JSON lines")
    sm.add_argument("--input", action="append", required=True)
    sm.add_argument("--mixer", choices=["grover", "tf"], default="grover")
    sm.add_argument("--p", default="1", help="round count or inclusive range lo:hi")
    src = sm.add_mutually_exclusive_group()
    src.add_argument("--grover-fixed", action="store_true", help="all angles equal to pi")
    src.add_argument("--schedule", help="JSON file or inline JSON with gammas and betas")
    src.add_argument("--optimize", choices=["grid", "coordinate"])
    sm.add_argument("--restarts", type=int, default=4)
    sm.add_argument("--seed", type=int)
    sm.add_argument("--opt-max-p", type=int, default=OPT_MAX_ROUNDS)
    common(sm)

    ce = sub.add_parser("certify", help="closed forms against numerics and bound soundness")
    ce.add_argument("--seed", type=int, default=0, help="corpus seed (the default corpus uses 0)")
    ce.add_argument("--runs", type=int, default=CertifyConfig.soundness_runs, help="soundness runs")
    ce.add_argument("--quick", action="store_true", help="small corpus for smoke testing")
    ce.add_argument("--out")
    return ap


# --------------------------------------------------------------------------
# Shared helpers


def _restrict(c: CostSpectrum | None, weight: int | None) -> CostSpectrum | None:
    if c is None or weight is None:
        return c
    if not c.feasible.is_full:
        raise UsageError("instance is already constrained")
    f = FeasibleSet.weight(c.n, weight)
    if f.size == 0:
        raise UsageError(f"no strings of weight {weight}")
    return CostSpectrum(f, c.values[f.indices])


def _load(path: str, cfg: RunConfig) -> Instance:
    return load_instance(path, enumerate_limit=cfg.enum_max)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _mixer_for(kind: str, c: CostSpectrum | None, n: int) -> MixerSpec:
    if kind == "tf":
        if c is not None and not c.feasible.is_full:
            raise UsageError("the transverse-field mixer does not preserve a constrained feasible set")
        return MixerSpec.tf(n)
    return MixerSpec.grover(c.feasible if c is not None else FeasibleSet.full(n))


def _norm_for(kind: str, inst: Instance, c: CostSpectrum | None, dense_max: int) -> tuple[float, str]:
    mixer = _mixer_for(kind, c, inst.n)
    if kind == "tf" and inst.search is None and inst.n > dense_max + 6:
        raise LimitError(f"n={inst.n} too large for a numeric transverse-field norm")
    method = "auto"
    if kind == "tf" and inst.n > dense_max:
        method = "iterative"
    res = commutator_norm(mixer, spectrum=c, klocal=inst.klocal if c is None or c.feasible.is_full else None,
                          search=inst.search, method=method)
    return res.value, res.provenance


# --------------------------------------------------------------------------
# stats


def cmd_stats(args, cfg: RunConfig) -> tuple[int, str]:
    reports = []
    status = EXIT_OK
    for path in cfg.inputs:
        inst = _load(path, cfg)
        c = _restrict(inst.spectrum, args.feasible_weight)
        rep: dict[str, Any] = {"input": path, "kind": inst.kind, "n": inst.n, "notes": list(inst.notes)}
        enum = coeff = None
        if c is not None:
            st = c.stats()
            enum = {"c_max": st.c_max, "c_avg": float(st.c_avg), "c_avg_exact": str(st.c_avg),
                    "sigma_c": st.sigma_c, "variance_exact": str(st.variance), "feasible_size": c.size}
            rep["enumeration"] = enum
        if c is None or c.feasible.is_full:
            if inst.klocal is not None:
                avg, sigma = cost_stats_from_coefficients(inst.klocal)
                coeff = {"c_avg": avg, "sigma_c": sigma, "c_max_upper": c_max_upper_bound(inst.klocal)}
            elif inst.search is not None:
                c_max, avg, sigma = search_stats(1 << inst.n, inst.search.m)
                coeff = {"c_max": c_max, "c_avg": float(avg), "sigma_c": sigma}
            if coeff is not None:
                rep["coefficient"] = coeff
        if enum is None and coeff is None:
            raise LimitError(f"{path}: n={inst.n} exceeds the enumeration limit and no coefficient route exists")
        if enum is None:
            rep["flags"] = ["coefficient-only"]
        if enum is not None and coeff is not None:
            agree = (math.isclose(enum["c_avg"], coeff["c_avg"], rel_tol=STATS_RTOL, abs_tol=STATS_RTOL)
                     and math.isclose(enum["sigma_c"], coeff["sigma_c"], rel_tol=STATS_RTOL, abs_tol=STATS_RTOL))
            rep["agreement"] = agree
            if not agree:
                status = EXIT_VIOLATION
        norms = {}
        for kind in ("grover", "tf"):
            try:
                val, prov = _norm_for(kind, inst, c, cfg.dense_max)
                norms[kind] = {"value": val, "provenance": prov}
            except (UsageError, MixerError, LimitError) as exc:
                norms[kind] = {"error": str(exc)}
        rep["commutator_norms"] = norms
        reports.append(rep)
    return status, _dump({"schema": SCHEMA, "command": "stats", "reports": reports})


# --------------------------------------------------------------------------
# bound


def _ingredients(args, cfg: RunConfig, mixers: set[str]) -> tuple[dict[str, Any], dict[str, str]]:
    """Resolve bound ingredients from an instance, then apply explicit flags on top.

    Commutator norms are stored per mixer under ``comm_norm:<kind>``;
    ``--comm-norm`` overrides every one of them.
    """
    ing: dict[str, Any] = {}
    prov: dict[str, str] = {}
    if cfg.inputs:
        if len(cfg.inputs) > 1:
            raise UsageError("bound takes at most one --input")
        inst = _load(cfg.inputs[0], cfg)
        c = _restrict(inst.spectrum, args.feasible_weight)
        ing["n"] = inst.n
        prov["n"] = "instance"
        if c is not None:
            ing.update(c_max=c.c_max, c_avg=float(c.c_avg), sigma_c=c.sigma_c, N=c.size)
            prov.update(c_max="enumerated", c_avg="enumerated", sigma_c="enumerated", N="instance")
            prov["feasible"] = "full" if c.feasible.is_full else "constrained"
        elif inst.klocal is not None:
            avg, sigma = cost_stats_from_coefficients(inst.klocal)
            ing.update(c_avg=avg, sigma_c=sigma, N=1 << inst.n)
            prov.update(c_avg="closed-form:coefficients", sigma_c="closed-form:sqrt(sum alpha^2)")
        if inst.klocal is not None:
            ing["sum_alpha_sq"] = inst.klocal.sum_alpha_sq
            prov["sum_alpha_sq"] = "closed-form:coefficients"
        if inst.graph is not None:
            ing["edges"] = inst.graph.n_edges
            prov["edges"] = "instance"
        if inst.search is not None:
            ing["m"] = inst.search.m
            prov["m"] = "instance"
            if inst.search.hamming_k is not None:
                ing["k"] = inst.search.hamming_k
                prov["k"] = "instance"
        for kind in mixers:
            key = f"comm_norm:{kind}"
            try:
                ing[key], prov[key] = _norm_for(kind, inst, c, cfg.dense_max)
            except (MixerError, UsageError) as exc:
                prov[key] = f"unavailable: {exc}"
    flags = {"c_max": args.c_max, "c_avg": args.c_avg, "sigma_c": args.sigma_c, "comm_norm": args.comm_norm,
             "sum_alpha_sq": args.sum_alpha_sq, "h0": args.h0, "overlap": args.overlap, "sum_x": args.sum_x,
             "p0_final": args.p0_final, "p0_initial": args.p0_initial, "h1_delta": args.h1_delta,
             "N": args.N, "m": args.m, "n": args.n, "k": args.k, "edges": args.edges}
    for key, val in flags.items():
        if val is not None:
            ing[key] = val
            prov[key] = "user-supplied"
    if args.comm_norm is not None:
        for kind in mixers:
            ing[f"comm_norm:{kind}"] = args.comm_norm
            prov[f"comm_norm:{kind}"] = "user-supplied"
    if "N" not in ing and "n" in ing:
        ing["N"] = 1 << int(ing["n"])
        prov["N"] = "derived:2^n"
    return ing, prov


def _need(ing: dict, *names: str):
    missing = [n for n in names if ing.get(n) is None]
    if missing:
        raise B.BoundError(f"missing ingredient(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def evaluate_formula(formula: str, lam: float, ing: dict, prov: dict, mode: str,
                     mixer: str = "grover") -> B.BoundReport:
    post = mode == B.APOSTERIORI
    kind = "tf" if formula == "tf-objective" else mixer
    ing = {**ing, "comm_norm": ing.get(f"comm_norm:{kind}", ing.get("comm_norm"))}
    prov = {**{k: v for k, v in prov.items() if not k.startswith("comm_norm:")},
            "comm_norm": prov.get(f"comm_norm:{kind}", prov.get("comm_norm", "missing"))}

    def inputs() -> B.BoundInputs:
        return B.BoundInputs(lam, c_max=ing.get("c_max"), c_avg=ing.get("c_avg"), sigma_c=ing.get("sigma_c"),
                             comm_norm=ing.get("comm_norm"), mode=mode, h0_expectation=ing.get("h0"),
                             overlap_sq=ing.get("overlap"), sum_x_expectations=ing.get("sum_x"),
                             n=ing.get("n"), N=ing.get("N"), m=ing.get("m"), k=ing.get("k"),
                             provenance=dict(prov))

    if formula == "qaoa-round":
        return B.qaoa_round_bound(inputs())
    if formula == "grover-objective":
        return B.grover_objective_bound(inputs())
    if formula == "grover-klocal":
        _need(ing, "sum_alpha_sq")
        return B.grover_klocal_bound(inputs(), ing["sum_alpha_sq"])
    if formula == "maxcut-grover":
        _need(ing, "c_max", "edges")
        if post:
            _need(ing, "overlap")
        return B.maxcut_grover_bound(lam, ing["c_max"], int(ing["edges"]), ing.get("overlap") if post else None)
    if formula == "tf-objective":
        return B.tf_objective_bound(inputs())
    if formula == "grover-search":
        _need(ing, "N", "m")
        return B.grover_search_bound(lam, int(ing["N"]), int(ing["m"]))
    if formula == "search-overlap":
        _need(ing, "N", "m")
        return B.search_overlap_bound(lam, int(ing["N"]), int(ing["m"]))
    if formula == "tf-search-dist3":
        _need(ing, "n", "m")
        return B.tf_search_dist3_bound(lam, int(ing["n"]), int(ing["m"]))
    if formula == "tf-search-hamming":
        _need(ing, "n", "k", "m")
        return B.tf_search_hamming_bound(lam, int(ing["n"]), int(ing["k"]), int(ing["m"]))
    if formula == "overlap":
        _need(ing, "p0_final", "comm_norm")
        return B.overlap_bound(ing["p0_final"], ing.get("p0_initial", 1.0), ing["comm_norm"])
    if formula == "rescaled":
        _need(ing, "comm_norm")
        delta = ing.get("h1_delta")
        if delta is None:
            _need(ing, "c_max", "c_avg")
            delta = lam * ing["c_max"] - ing["c_avg"]
        h0 = ing.get("h0") if post else 0.0
        if h0 is None:
            _need(ing, "h0")
        return B.rescaled_bound(h0, delta, ing["comm_norm"])
    if formula == "annealing-time":
        _need(ing, "c_max", "c_avg", "comm_norm")
        h0 = ing.get("h0") if post else 0.0
        if h0 is None:
            _need(ing, "h0")
        return B.annealing_time_bound(h0, ing["c_max"] - ing["c_avg"], ing["c_max"] * (1 - lam), ing["comm_norm"])
    raise UsageError(f"unknown formula {formula!r}; choose from {', '.join(B.FORMULAS)}")


def cmd_bound(args, cfg: RunConfig) -> tuple[int, str]:
    formulas = [f.strip() for f in args.formula.split(",") if f.strip()]
    unknown = [f for f in formulas if f not in B.FORMULAS]
    if unknown:
        raise UsageError(f"unknown formula(s) {', '.join(unknown)}; choose from {', '.join(B.FORMULAS)}")
    mixers = {cfg.mixer} | ({"tf"} if "tf-objective" in formulas else set())
    ing, prov = _ingredients(args, cfg, mixers)
    rows = []
    for f in formulas:
        for lam in cfg.lambdas:
            try:
                rep = evaluate_formula(f, lam, ing, prov, args.mode, cfg.mixer)
                row = {"lambda": lam, **rep.to_json()}
            except B.BoundError as exc:
                row = {"lambda": lam, "formula": f, "error": str(exc)}
            rows.append(row)
    status = EXIT_USAGE if all("error" in r for r in rows) else EXIT_OK
    fmt = cfg.fmt or ("csv" if len(cfg.lambdas) > 1 else "json")
    if fmt == "csv":
        buf = io.StringIO()
        cols = ["formula", "lambda", "p_lower", "raw", "denominator", "mode", "trivial", "error"]
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: r.get(c, "") for c in cols})
        return status, buf.getvalue()
    return status, _dump({"schema": SCHEMA, "command": "bound", "ingredients": ing,
                          "provenance": prov, "results": rows})


# --------------------------------------------------------------------------
# simulate


def _load_schedule(text: str) -> AngleSchedule:
    path = Path(text)
    raw = path.read_text() if not text.lstrip().startswith("{") and path.exists() else text
    try:
        return AngleSchedule.from_json(json.loads(raw))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"bad schedule: {exc}") from None


def cmd_simulate(args, cfg: RunConfig) -> tuple[int, str]:
    if args.optimize and cfg.seed is None:
        raise UsageError("--optimize is randomized; pass --seed")
    lines = []
    for path in cfg.inputs:
        inst = _load(path, cfg)
        if inst.n > SIM_MAX_QUBITS or inst.spectrum is None:
            raise LimitError(f"{path}: n={inst.n} exceeds the simulator limit {SIM_MAX_QUBITS}")
        c = _restrict(inst.spectrum, args.feasible_weight)
        mixer = _mixer_for(cfg.mixer, c, inst.n)
        fixed = _load_schedule(args.schedule) if args.schedule else None
        p_values = [fixed.p] if fixed is not None else cfg.p_values
        for p in p_values:
            record: dict[str, Any] = {"schema": SCHEMA, "input": path, "mixer": cfg.mixer, "p": p}
            if args.optimize:
                if p > cfg.opt_max_p or inst.n > OPT_MAX_QUBITS:
                    raise LimitError(f"optimizer limits are p <= {cfg.opt_max_p}, n <= {OPT_MAX_QUBITS}")
                sched, res = optimize_angles(c, mixer, p, strategy=args.optimize, seed=cfg.seed,
                                             restarts=args.restarts, max_rounds=cfg.opt_max_p)
                record["optimizer"] = {"strategy": args.optimize, "seed": cfg.seed, "restarts": args.restarts}
            else:
                if fixed is not None:
                    sched = fixed
                elif p == 0:
                    sched = AngleSchedule((), ())
                elif args.grover_fixed:
                    sched = grover_fixed_schedule(p)
                else:
                    raise UsageError("choose a schedule: --grover-fixed, --schedule or --optimize (or --p 0)")
                res = run_qaoa(c, mixer, sched)
            record["schedule"] = sched.to_json()
            record["result"] = res.to_json()
            lines.append(json.dumps(record))
    return EXIT_OK, "".join(line + "\n" for line in lines)


# --------------------------------------------------------------------------
# certify


def cmd_certify(args, cfg: RunConfig) -> tuple[int, str]:
    if args.quick:
        cc = CertifyConfig(seed=cfg.seed, spectra=10, graphs=10, klocal=10, soundness_runs=min(args.runs, 20),
                           regular_graphs=2, rescaling_pairs=5)
    else:
        cc = CertifyConfig(seed=cfg.seed, soundness_runs=args.runs)
    results = run_all(cc)
    for r in results:
        sys.stderr.write(r.line() + "\n")
        if r.reproducer is not None:
            sys.stderr.write("  reproducer: " + json.dumps(r.reproducer, sort_keys=True, default=str) + "\n")
    status = EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION
    return status, summary_bytes(results, cc).decode()


COMMANDS = {"stats": cmd_stats, "bound": cmd_bound, "simulate": cmd_simulate, "certify": cmd_certify}


def _config(args) -> RunConfig:
    lambdas: list[float] = []
    if getattr(args, "lam", None):
        lambdas = list(args.lam)
    elif getattr(args, "lambda_grid", None):
        lambdas = parse_lambda_grid(args.lambda_grid)
    return RunConfig(
        subcommand=args.command,
        inputs=list(getattr(args, "input", None) or []),
        mixer=getattr(args, "mixer", "grover"),
        lambdas=lambdas,
        p_values=parse_p_range(args.p) if getattr(args, "p", None) is not None else [],
        seed=getattr(args, "seed", None),
        dense_max=getattr(args, "dense_max", DENSE_MAX_QUBITS),
        enum_max=getattr(args, "enum_max", ENUM_MAX_QUBITS),
        opt_max_p=getattr(args, "opt_max_p", OPT_MAX_ROUNDS),
        out=args.out,
        fmt=getattr(args, "fmt", None),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config(args)
        status, text = COMMANDS[args.command](args, cfg)
    except LimitError as exc:
        sys.stderr.write(f"limit: {exc}\n")
        return EXIT_LIMITS
    except (UsageError, ProblemError, MixerError, SimError, B.BoundError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    _emit(text, cfg.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
