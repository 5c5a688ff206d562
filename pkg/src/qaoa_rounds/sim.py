"""Exact statevector QAOA with Grover or transverse-field mixers.

One round applies ``exp(-i gamma H_1)`` with ``H_1 = C_max - H_C`` and then
``exp(-i beta H_0)``.  Both Hamiltonians have integer spectra starting at 0,
so all angles are reduced into ``[0, 2 pi)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .mixers import MixerError, MixerSpec
from .problems import CostSpectrum, ProblemError, SearchSet
from .statevector import StateVector, init_uniform

TWO_PI = 2 * math.pi
SIM_MAX_QUBITS = 20
OPT_MAX_QUBITS = 14
OPT_MAX_ROUNDS = 6
GRID_MAX_POINTS = 1 << 20


class SimError(ValueError):
    """Simulation request outside the simulator's contract or limits."""


@dataclass(frozen=True)
class AngleSchedule:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas):
            raise SimError(f"{len(self.gammas)} gammas but {len(self.betas)} betas")
        object.__setattr__(self, "gammas", tuple(float(g) % TWO_PI for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) % TWO_PI for b in self.betas))

    @property
    def p(self) -> int:
        return len(self.gammas)

    @property
    def angle_sum(self) -> float:
        return sum(self.gammas) + sum(self.betas)

    def padded(self, p: int) -> "AngleSchedule":
        extra = p - self.p
        if extra < 0:
            raise SimError("cannot pad to fewer rounds")
        return AngleSchedule(self.gammas + (0.0,) * extra, self.betas + (0.0,) * extra)

    def to_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)

    @classmethod
    def from_vector(cls, v) -> "AngleSchedule":
        v = list(v)
        p = len(v) // 2
        return cls(tuple(v[:p]), tuple(v[p:]))

    @classmethod
    def random(cls, p: int, rng: np.random.Generator) -> "AngleSchedule":
        return cls(tuple(rng.uniform(0, TWO_PI, p)), tuple(rng.uniform(0, TWO_PI, p)))

    def to_json(self) -> dict:
        return {"gammas": list(self.gammas), "betas": list(self.betas)}

    @classmethod
    def from_json(cls, d: dict) -> "AngleSchedule":
        return cls(tuple(d["gammas"]), tuple(d["betas"]))


@dataclass
class SimResult:
    p: int
    lambda_achieved: float
    cost_expectation: float
    h0_expectation: float
    overlap_sq: float
    success_probability: float
    x_expectations: list[float] | None = None
    state: StateVector | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        d = {
            "p": self.p,
            "lambda": self.lambda_achieved,
            "cost_expectation": self.cost_expectation,
            "h0_expectation": self.h0_expectation,
            "overlap_sq": self.overlap_sq,
            "success_probability": self.success_probability,
        }
        if self.x_expectations is not None:
            d["x_expectations"] = list(self.x_expectations)
        return d


def _check_feasible(s: StateVector, c: CostSpectrum):
    if s.feasible != c.feasible:
        raise SimError("state and cost live on different feasible sets")


def apply_phase_separator(s: StateVector, c: CostSpectrum, gamma: float) -> StateVector:
    _check_feasible(s, c)
    phases = np.exp(-1j * gamma * (c.c_max - c.values))
    return StateVector(s.feasible, s.amplitudes * phases)


def apply_grover_mixer(s: StateVector, beta: float) -> StateVector:
    """``exp(-i beta (I - |psi0><psi0|))`` via one inner product and a rank-1 update."""
    amps = s.amplitudes
    root = math.sqrt(s.feasible.size)
    a0 = amps.sum() / root
    along = np.full(amps.shape, a0 / root)
    return StateVector(s.feasible, np.exp(-1j * beta) * (amps - along) + along)


def apply_tf_mixer(s: StateVector, beta: float) -> StateVector:
    """``prod_j exp(-i beta (1 - X_j)/2)``."""
    if not s.feasible.is_full:
        raise SimError("transverse-field mixer needs the full space")
    n = s.n
    c, sn = math.cos(beta / 2), math.sin(beta / 2)
    amps = np.array(s.amplitudes)
    for j in range(n):
        a = amps.reshape(-1, 2, 1 << j)
        lo, hi = a[:, 0, :].copy(), a[:, 1, :].copy()
        a[:, 0, :] = c * lo + 1j * sn * hi
        a[:, 1, :] = c * hi + 1j * sn * lo
    return StateVector(s.feasible, np.exp(-0.5j * beta * n) * amps)


def x_expectations(s: StateVector) -> list[float]:
    """``<X_j>`` for each qubit by pairing amplitudes across bit flips."""
    if not s.feasible.is_full:
        raise SimError("<X_j> needs the full space")
    idx = np.arange(s.feasible.size)
    a = s.amplitudes
    return [float(np.vdot(a, a[idx ^ (1 << j)]).real) for j in range(s.n)]


def observe(s: StateVector, c: CostSpectrum, mixer: MixerSpec, p: int) -> SimResult:
    probs = s.probabilities
    cost = float(np.dot(probs, c.values))
    lam = cost / c.c_max if c.c_max > 0 else 1.0
    overlap = abs(s.amplitudes.sum()) ** 2 / s.feasible.size
    xs = x_expectations(s) if s.feasible.is_full else None
    if mixer.kind == "grover":
        h0 = 1.0 - overlap
    else:
        h0 = s.n / 2 - 0.5 * sum(xs)
    success = float(probs[c.optimal_mask()].sum())
    return SimResult(p, min(max(lam, 0.0), 1.0), cost, float(h0), float(min(overlap, 1.0)), success, xs, s)


def run_qaoa(c: CostSpectrum, mixer: MixerSpec, a: AngleSchedule) -> SimResult:
    if c.n > SIM_MAX_QUBITS:
        raise SimError(f"n={c.n} exceeds simulator limit {SIM_MAX_QUBITS}")
    if mixer.kind == "tf" and not c.feasible.is_full:
        raise SimError("transverse-field mixer does not preserve a constrained feasible set")
    if mixer.kind == "grover" and mixer.feasible != c.feasible:
        raise SimError("Grover mixer and cost use different feasible sets")
    mix = apply_grover_mixer if mixer.kind == "grover" else apply_tf_mixer
    s = init_uniform(c.feasible)
    for g, b in zip(a.gammas, a.betas):
        s = mix(apply_phase_separator(s, c, g), b)
    return observe(s, c, mixer, a.p)


def grover_fixed_schedule(p: int) -> AngleSchedule:
    if p < 1:
        raise SimError("p must be at least 1")
    return AngleSchedule((math.pi,) * p, (math.pi,) * p)


def grover_success_closed_form(N: int, m: int, p: int) -> float:
    theta = math.asin(math.sqrt(m / N))
    return math.sin((2 * p + 1) * theta) ** 2


def _objective(c, mixer):
    def f(vec):
        return -run_qaoa(c, mixer, AngleSchedule.from_vector(vec)).lambda_achieved
    return f


def _coordinate_descent(f, x0: np.ndarray, sweeps: int = 20, tol: float = 1e-9) -> tuple[np.ndarray, float]:
    x = np.array(x0, dtype=float)
    best = f(x)
    for _ in range(sweeps):
        start = best
        for i in range(x.size):
            def g(t, i=i):
                y = x.copy()
                y[i] = t
                return f(y)
            res = minimize_scalar(g, bounds=(0.0, TWO_PI), method="bounded", options={"xatol": 1e-7})
            if res.fun < best:
                best, x[i] = float(res.fun), float(res.x)
        if start - best < tol:
            break
    return x, best


def optimize_angles(
    c: CostSpectrum,
    mixer: MixerSpec,
    p: int,
    strategy: str = "coordinate",
    seed: int = 0,
    resolution: float = math.pi / 16,
    restarts: int = 4,
    init: AngleSchedule | None = None,
    max_rounds: int = OPT_MAX_ROUNDS,
) -> tuple[AngleSchedule, SimResult]:
    """Best-effort search for angles maximising the approximation ratio.

    ``strategy`` is ``"grid"`` (exhaustive over ``[0, 2 pi)`` at ``resolution``)
    or ``"coordinate"`` (multistart coordinate descent; ``init`` adds a start).
    """
    if p > max_rounds:
        raise SimError(f"p={p} exceeds optimizer limit {max_rounds}")
    if c.n > OPT_MAX_QUBITS:
        raise SimError(f"n={c.n} exceeds optimizer limit {OPT_MAX_QUBITS}")
    if p == 0:
        sched = AngleSchedule((), ())
        return sched, run_qaoa(c, mixer, sched)
    f = _objective(c, mixer)
    if strategy == "grid":
        ticks = np.arange(0.0, TWO_PI - 1e-12, resolution)
        if ticks.size ** (2 * p) > GRID_MAX_POINTS:
            raise SimError(f"grid of {ticks.size}^{2 * p} points exceeds {GRID_MAX_POINTS}")
        best_vec, best_val = None, math.inf
        for vec in itertools.product(ticks, repeat=2 * p):
            val = f(np.array(vec))
            if val < best_val - 1e-12:
                best_vec, best_val = np.array(vec), val
    elif strategy == "coordinate":
        rng = np.random.default_rng(seed)
        starts = [init.padded(p).to_vector()] if init is not None else []
        starts += [rng.uniform(0, TWO_PI, 2 * p) for _ in range(restarts)]
        best_vec, best_val = None, math.inf
        for x0 in starts:
            x, val = _coordinate_descent(f, x0)
            if val < best_val:
                best_vec, best_val = x, val
    else:
        raise SimError(f"unknown strategy {strategy!r}")
    sched = AngleSchedule.from_vector(best_vec)
    return sched, run_qaoa(c, mixer, sched)


def optimize_nested(c: CostSpectrum, mixer: MixerSpec, p_max: int, seed: int = 0,
                    restarts: int = 2) -> list[tuple[AngleSchedule, SimResult]]:
    """Round-by-round optimisation; each ``p`` also starts from the padded ``p-1`` optimum."""
    out = [optimize_angles(c, mixer, 0)]
    for p in range(1, p_max + 1):
        out.append(optimize_angles(c, mixer, p, seed=seed + p, restarts=restarts, init=out[-1][0]))
    return out


@dataclass
class XjCheck:
    lam: float
    threshold: float
    x_expectations: list[float]
    margins: list[float]

    @property
    def ok(self) -> bool:
        return all(m >= -1e-10 for m in self.margins)


def xj_bound_check(s: StateVector, marked: SearchSet) -> XjCheck:
    """Check ``<X_j> <= 2 sqrt(lam (1 - lam))`` for every qubit when ``lam > 1/2``."""
    if not (marked.tag == "dist3" or marked.hamming_k is not None):
        raise SimError("check applies to distance-3 or full Hamming-layer marked sets")
    if s.n != marked.n or not s.feasible.is_full:
        raise ProblemError("state and marked set disagree")
    lam = float(s.probabilities[list(marked.marked)].sum())
    if not lam > 0.5:
        raise SimError(f"success probability {lam} <= 1/2: check not applicable")
    thr = 2 * math.sqrt(lam * (1 - lam))
    xs = x_expectations(s)
    return XjCheck(lam, thr, xs, [thr - x for x in xs])


__all__ = [
    "AngleSchedule", "SimResult", "SimError", "apply_phase_separator", "apply_grover_mixer",
    "apply_tf_mixer", "run_qaoa", "grover_fixed_schedule", "optimize_angles", "optimize_nested",
    "xj_bound_check", "x_expectations", "init_uniform", "MixerError", "grover_success_closed_form",
    "observe", "XjCheck", "SIM_MAX_QUBITS",
]
