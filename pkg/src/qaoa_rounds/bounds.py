"""Lower bounds on the number of QAOA rounds.

Every evaluator returns a :class:`BoundReport`.  Negative values are clamped
to zero (``raw`` keeps the unclamped number) and any value below one round is
flagged ``trivial``.

Two modes exist for the state-dependent terms.  ``"apriori"`` replaces each
one by the value that makes the bound smallest, as forced by the operator
spectra: ``<H_0>_p -> 0``, ``|<psi0|psi_p>|^2 -> 1``, ``sum_j <X_j> -> n``.
``"aposteriori"`` reads the values from a finished run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

APRIORI = "apriori"
APOSTERIORI = "aposteriori"
TWO_PI = 2 * math.pi
FOUR_PI = 4 * math.pi


class BoundError(ValueError):
    """Bound not applicable (missing ingredient, out-of-domain ratio, zero norm)."""


@dataclass
class BoundInputs:
    lam: float
    c_max: float | None = None
    c_avg: float | None = None
    sigma_c: float | None = None
    comm_norm: float | None = None
    mode: str = APRIORI
    h0_expectation: float | None = None
    overlap_sq: float | None = None
    sum_x_expectations: float | None = None
    n: int | None = None
    N: int | None = None
    m: int | None = None
    k: int | None = None
    provenance: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0 + 1e-12:
            raise BoundError(f"lambda={self.lam} outside [0, 1]")
        if self.mode not in (APRIORI, APOSTERIORI):
            raise BoundError(f"unknown mode {self.mode!r}")
        if self.overlap_sq is not None and not -1e-12 <= self.overlap_sq <= 1 + 1e-12:
            raise BoundError(f"overlap {self.overlap_sq} outside [0, 1]")


@dataclass
class BoundReport:
    formula: str
    p_lower: float
    raw: float
    numerator: dict[str, float]
    denominator: float
    mode: str
    provenance: dict[str, str] = field(default_factory=dict)
    worst_cased: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def trivial(self) -> bool:
        return self.p_lower < 1.0

    def to_json(self) -> dict:
        out = {
            "formula": self.formula,
            "p_lower": self.p_lower,
            "raw": self.raw,
            "numerator": dict(self.numerator),
            "denominator": self.denominator,
            "mode": self.mode,
            "provenance": dict(self.provenance),
            "trivial": self.trivial,
        }
        if self.worst_cased:
            out["worst_cased"] = list(self.worst_cased)
        if self.extra:
            out["extra"] = dict(self.extra)
        return out


def _report(formula, numerator: dict, denominator: float, mode: str, **kw) -> BoundReport:
    if not denominator > 0:
        raise BoundError(f"{formula}: denominator must be positive, got {denominator}")
    raw = sum(numerator.values()) / denominator
    return BoundReport(formula, max(raw, 0.0), raw, numerator, denominator, mode, **kw)


def _need(b: BoundInputs, *names: str):
    missing = [n for n in names if getattr(b, n) is None]
    if missing:
        raise BoundError(f"missing ingredient(s): {', '.join(missing)}")


def annealing_time_bound(h0_tf: float, h1_0: float, h1_tf: float, comm_norm: float) -> BoundReport:
    """Lower bound on the total evolution time (sum of all angles), not on rounds."""
    return _report(
        "annealing-time",
        {"h0_final": h0_tf, "h1_initial": h1_0, "-h1_final": -h1_tf},
        comm_norm,
        APOSTERIORI,
    )


def qaoa_round_bound(b: BoundInputs) -> BoundReport:
    _need(b, "c_max", "c_avg", "comm_norm")
    worst = []
    if b.mode == APRIORI:
        h0 = 0.0
        worst.append("h0_expectation")
    else:
        _need(b, "h0_expectation")
        h0 = b.h0_expectation
    num = {"h0_expectation": h0, "lambda*c_max": b.lam * b.c_max, "-c_avg": -b.c_avg}
    return _report("qaoa-round", num, FOUR_PI * b.comm_norm, b.mode, provenance=dict(b.provenance), worst_cased=worst)


def rescaled_bound(h0_term: float, h1_delta: float, comm_norm: float) -> BoundReport:
    """Best rescaling of the two driving Hamiltonians.

    The rescaled expression is a weighted mean of the two terms, so its
    maximum over weights sits at an endpoint.
    """
    endpoint = "h0-dominant" if h0_term >= h1_delta else "h1-dominant"
    num = {"h0_term": h0_term} if endpoint == "h0-dominant" else {"h1_delta": h1_delta}
    rep = _report("rescaled", num, TWO_PI * comm_norm, APOSTERIORI)
    rep.extra["endpoint"] = endpoint
    return rep


def rescaled_ratio_scan(h0_term: float, h1_delta: float, comm_norm: float, points: int = 10_000,
                        log_range: float = 8.0) -> tuple[float, float, float]:
    """Scan ``alpha_1/alpha_0`` on a log grid; returns (best, best ratio, resolution)."""
    if not comm_norm > 0:
        raise BoundError("comm_norm must be positive")
    ratios = np.logspace(-log_range, log_range, points)
    w = ratios / (1.0 + ratios)
    vals = ((1 - w) * h0_term + w * h1_delta) / (TWO_PI * comm_norm)
    i = int(np.argmax(vals))
    gaps = np.diff(np.concatenate([[0.0], w, [1.0]]))
    resolution = float(np.max(gaps)) * abs(h1_delta - h0_term) / (TWO_PI * comm_norm)
    return float(vals[i]), float(ratios[i]), resolution


def _grover_core(formula: str, b: BoundInputs, sigma: float, provenance: dict) -> BoundReport:
    _need(b, "c_max", "c_avg")
    if not sigma > 0:
        raise BoundError("sigma_C is zero: the cost is constant and every ratio is free")
    worst = []
    if b.mode == APRIORI:
        ov = 1.0
        worst.append("overlap_sq")
    else:
        _need(b, "overlap_sq")
        ov = b.overlap_sq
    num = {"1-overlap_sq": 1.0 - ov, "lambda*c_max": b.lam * b.c_max, "-c_avg": -b.c_avg}
    return _report(formula, num, FOUR_PI * sigma, b.mode, provenance=provenance, worst_cased=worst)


def grover_objective_bound(b: BoundInputs) -> BoundReport:
    _need(b, "sigma_c")
    prov = {"sigma_c": "closed-form:sigma_C", **b.provenance}
    rep = _grover_core("grover-objective", b, b.sigma_c, prov)
    if prov.get("feasible", "full") != "full":
        rep.extra["label"] = "constrained extension"
    return rep


def grover_klocal_bound(b: BoundInputs, sum_alpha_sq: float) -> BoundReport:
    prov = {"sigma_c": "closed-form:sqrt(sum alpha^2)", **b.provenance}
    if prov.get("feasible", "full") != "full":
        raise BoundError("coefficient form only holds for unconstrained costs")
    return _grover_core("grover-klocal", b, math.sqrt(sum_alpha_sq), prov)


def maxcut_grover_bound(lam: float, c_max: float, e_count: int, overlap_sq: float | None = None) -> BoundReport:
    if e_count < 1:
        raise BoundError("graph needs at least one edge")
    mode = APRIORI if overlap_sq is None else APOSTERIORI
    ov = 1.0 if overlap_sq is None else overlap_sq
    num = {"1-overlap_sq": 1.0 - ov, "lambda*c_max": lam * c_max, "-|E|/2": -e_count / 2}
    return _report("maxcut-grover", num, TWO_PI * math.sqrt(e_count), mode,
                   worst_cased=["overlap_sq"] if overlap_sq is None else [])


def tf_objective_bound(b: BoundInputs) -> BoundReport:
    _need(b, "c_max", "c_avg", "n")
    if b.comm_norm is None:
        raise BoundError("missing ingredient: comm_norm for [H_C, H_TF]")
    worst = []
    if b.mode == APRIORI:
        sx = float(b.n)
        worst.append("sum_x_expectations")
    else:
        _need(b, "sum_x_expectations")
        sx = b.sum_x_expectations
    num = {"n/2-sum_x/2": b.n / 2 - sx / 2, "lambda*c_max": b.lam * b.c_max, "-c_avg": -b.c_avg}
    return _report("tf-objective", num, FOUR_PI * b.comm_norm, b.mode,
                   provenance=dict(b.provenance), worst_cased=worst)


def search_overlap_max(lam: float, N: int, m: int) -> float:
    """Largest ``|<psi0|psi>|^2`` over states with success probability ``lam``."""
    return (math.sqrt(lam * m) + math.sqrt((1 - lam) * (N - m))) ** 2 / N


def _check_search(lam: float, N: int, m: int):
    if m < 1:
        raise BoundError("search needs at least one marked string")
    if m > N:
        raise BoundError(f"m={m} exceeds N={N}")
    if not 0 <= lam <= 1:
        raise BoundError(f"lambda={lam} outside [0, 1]")


def grover_search_bound(lam: float, N: int, m: int) -> BoundReport:
    _check_search(lam, N, m)
    if m == N:
        return BoundReport("grover-search", 0.0, 0.0, {}, 0.0, APRIORI, extra={"note": "every string marked"})
    num = {
        "lambda*sqrt((N-m)/m)": lam * math.sqrt((N - m) / m),
        "-sqrt(lambda(1-lambda))": -math.sqrt(lam * (1 - lam)),
    }
    rep = _report("grover-search", num, TWO_PI, APRIORI, provenance={"overlap_sq": "maximal overlap at lambda"})
    rep.extra["overlap_sq"] = search_overlap_max(lam, N, m)
    return rep


def _tf_search_numerator(lam: float, n: int, m: int) -> dict[str, float]:
    if not lam > 0.5:
        raise BoundError(f"lambda={lam} <= 1/2: the <X_j> estimate needs lambda > 1/2")
    N = 1 << n
    return {
        "n(1-2sqrt(lambda(1-lambda)))": n * (1 - 2 * math.sqrt(lam * (1 - lam))),
        "2lambda": 2 * lam,
        "-2m/N": -2 * m / N,
    }


def tf_search_dist3_bound(lam: float, n: int, m: int) -> BoundReport:
    num = _tf_search_numerator(lam, n, m)
    return _report("tf-search-dist3", num, FOUR_PI * math.sqrt(n), APRIORI,
                   provenance={"comm_norm": "closed-form:star"})


def tf_search_hamming_bound(lam: float, n: int, k: int, m: int) -> BoundReport:
    if not 0 < k < n:
        raise BoundError(f"k={k} must satisfy 0 < k < n")
    if m != math.comb(n, k):
        raise BoundError(f"m={m} but the weight-{k} layer has {math.comb(n, k)} strings")
    num = _tf_search_numerator(lam, n, m)
    return _report("tf-search-hamming", num, FOUR_PI * math.sqrt(2 * k * (n - k) + n), APRIORI,
                   provenance={"comm_norm": "closed-form:hamming-layer"})


def overlap_bound(p0_final: float, p0_initial: float, comm_norm: float) -> BoundReport:
    for v in (p0_final, p0_initial):
        if not -1e-12 <= v <= 1 + 1e-12:
            raise BoundError(f"projector expectation {v} outside [0, 1]")
    return _report("overlap", {"|dP0|": abs(p0_final - p0_initial)}, TWO_PI * comm_norm, APOSTERIORI)


def search_overlap_bound(lam: float, N: int, m: int) -> BoundReport:
    _check_search(lam, N, m)
    if m == N:
        return BoundReport("search-overlap", 0.0, 0.0, {}, 0.0, APRIORI, extra={"note": "every string marked"})
    root = math.sqrt(m * (N - m))
    num = {
        "lambda(N-2m)": lam * (N - 2 * m),
        "m": float(m),
        "-2sqrt(lambda(1-lambda)m(N-m))": -2 * math.sqrt(lam * (1 - lam)) * root,
    }
    return _report("search-overlap", num, TWO_PI * root, APRIORI, provenance={"overlap_sq": "maximal overlap at lambda"})


FORMULAS = (
    "qaoa-round", "rescaled", "grover-objective", "grover-klocal", "maxcut-grover", "tf-objective",
    "grover-search", "tf-search-dist3", "tf-search-hamming", "overlap", "search-overlap", "annealing-time",
)
