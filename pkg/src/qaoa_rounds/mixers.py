"""Grover and transverse-field mixers and their commutator norms with a cost."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import pauli
from .pauli import PauliSum, commutator, spectral_norm
from .problems import CostSpectrum, FeasibleSet, KLocalCost, ProblemError, SearchSet
from .statevector import StateVector, product_state

GROVER_DENSE_MAX = 1 << 14
MIXER_PERIOD = 2 * math.pi


class MixerError(ValueError):
    """No route to a commutator norm, or a mixer used outside its domain."""


@dataclass(frozen=True)
class MixerSpec:
    kind: str
    n: int
    feasible: FeasibleSet | None = None

    def __post_init__(self):
        if self.kind == "grover":
            if self.feasible is None:
                object.__setattr__(self, "feasible", FeasibleSet.full(self.n))
            elif self.feasible.n != self.n:
                raise MixerError("feasible set and mixer disagree on n")
        elif self.kind == "tf":
            if self.feasible is not None and not self.feasible.is_full:
                raise MixerError("the transverse field does not preserve a constrained feasible set")
            object.__setattr__(self, "feasible", FeasibleSet.full(self.n))
        else:
            raise MixerError(f"unknown mixer kind {self.kind!r}")

    @property
    def period(self) -> float:
        return MIXER_PERIOD

    @classmethod
    def grover(cls, feasible: FeasibleSet) -> "MixerSpec":
        return cls("grover", feasible.n, feasible)

    @classmethod
    def tf(cls, n: int) -> "MixerSpec":
        return cls("tf", n)

    def to_json(self) -> dict:
        if self.kind == "grover":
            return {"kind": "grover", "feasible": self.feasible.to_json()}
        return {"kind": "tf", "n": self.n}

    @classmethod
    def from_json(cls, d: dict) -> "MixerSpec":
        if d["kind"] == "grover":
            return cls.grover(FeasibleSet.from_json(d["feasible"]))
        if d["kind"] == "tf":
            return cls.tf(int(d["n"]))
        raise MixerError(f"unknown mixer kind {d['kind']!r}")


def tf_hamiltonian(n: int) -> PauliSum:
    """``n/2 - (1/2) sum_j X_j``; integer spectrum ``0..n``."""
    terms = {(0, 0): n / 2}
    for j in range(n):
        terms[(1 << j, 0)] = -0.5
    return PauliSum(n, terms)


def grover_hamiltonian_dense(feasible: FeasibleSet) -> np.ndarray:
    n = feasible.size
    if n > GROVER_DENSE_MAX:
        raise MixerError(f"|F|={n} too large to densify the Grover mixer")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def tf_hamiltonian_dense(n: int) -> np.ndarray:
    dim = 1 << n
    idx = np.arange(dim)
    h = (n / 2) * np.eye(dim)
    for j in range(n):
        h[idx ^ (1 << j), idx] -= 0.5
    return h


def grover_commutator_norm(c: CostSpectrum) -> float:
    """``||[H_C, I - |psi0><psi0|]||`` from the rank-2 skew-symmetric closed form."""
    alpha, beta, n = c.value_sum, c.square_sum, c.size
    return math.sqrt(beta * n - alpha * alpha) / n


def tf_commutator(h: KLocalCost) -> PauliSum:
    """``[H_C, H_TF]``: ``2 * sum_nu alpha_nu * sum_l (+/- i/2) Y_l Z_rest`` terms."""
    out = commutator(h.to_pauli(), tf_hamiltonian(h.n))
    assert len(out) <= h.locality * h.m
    return out


def tf_search_dist3_norm(n: int) -> float:
    """Commutator norm for a distance-3 marked set: disjoint stars ``K_{1,n}``, halved."""
    if n < 1:
        raise MixerError("n must be positive")
    return math.sqrt(n) / 2


def tf_hamming_k_norm(n: int, k: int) -> float:
    """Commutator norm when the whole weight-``k`` layer is marked."""
    if not 0 < k < n:
        raise MixerError(f"k={k} must satisfy 0 < k < n={n}")
    return math.sqrt(2 * k * (n - k) + n) / 2


# --------------------------------------------------------------------------
# Hypercube spectra (cross-check utilities)


def star_adjacency(n: int) -> np.ndarray:
    a = np.zeros((n + 1, n + 1))
    a[0, 1:] = a[1:, 0] = 1
    return a


def hypercube_layer_adjacency(n: int, k: int) -> np.ndarray:
    """Induced subgraph of ``Q_n`` on weights ``k-1, k, k+1``."""
    verts = [z for z in range(1 << n) if abs(bin(z).count("1") - k) <= 1]
    pos = {z: i for i, z in enumerate(verts)}
    a = np.zeros((len(verts), len(verts)))
    for z in verts:
        for j in range(n):
            y = z ^ (1 << j)
            if y in pos:
                a[pos[z], pos[y]] = 1
    return a


def spectral_radius(adj: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(adj))))


def dense_tf_commutator_from_values(values: np.ndarray, n: int) -> np.ndarray:
    """Real antisymmetric ``[diag(C), H_TF]`` on the full space."""
    h = tf_hamiltonian_dense(n)
    c = np.asarray(values, dtype=float)
    return c[:, None] * h - h * c[None, :]


def _tf_commutator_matvec(values: np.ndarray, n: int):
    c = np.asarray(values, dtype=float)
    idx = np.arange(1 << n)

    def h_tf(v):
        out = (n / 2) * v
        for j in range(n):
            out = out - 0.5 * v[idx ^ (1 << j)]
        return out

    def mv(v):
        return c * h_tf(v) - h_tf(c * v)

    def rmv(v):
        return -mv(v)

    return mv, rmv


# --------------------------------------------------------------------------
# Witness state for strictly k-local costs


class Witness(NamedTuple):
    state: StateVector
    value: float
    traceless_norm: float
    predicted: float
    eigenstring: int


def s_star_witness(h: KLocalCost, k: int | None = None) -> Witness:
    """Product state whose commutator expectation certifies ``||[H_C, H_TF]|| >= ||H_C'||``.

    The eigenstring maximising ``|<s|H_C'|s>|`` is found by enumeration, ties
    broken by the smallest integer.
    """
    k = h.locality if k is None else k
    if k < 2:
        raise MixerError("witness angle is undefined for k = 1")
    if not h.is_strictly_k_local(k):
        raise MixerError(f"cost is not strictly {k}-local")
    idx = np.arange(1 << h.n)
    vals = h.traceless().evaluate(idx)
    s = int(np.argmax(np.abs(vals)))
    norm_hp = float(abs(vals[s]))
    theta = -0.5 * math.atan(math.sqrt(1 / (k - 1)))
    c, sn = math.cos(theta), math.sin(theta)
    qubits = []
    for j in range(h.n):
        if (s >> j) & 1:
            qubits.append(np.array([-1j * sn, c]))
        else:
            qubits.append(np.array([c, -1j * sn]))
    state = product_state(qubits)
    comm = tf_commutator(h)
    val = abs(np.vdot(state.amplitudes, comm.apply(state.amplitudes)))
    predicted = norm_hp * math.sqrt(k) * ((k - 1) / k) ** ((k - 1) / 2)
    return Witness(state, float(val), norm_hp, predicted, s)


# --------------------------------------------------------------------------
# Dispatch


class NormResult(NamedTuple):
    value: float
    provenance: str


def commutator_norm(
    mixer: MixerSpec,
    spectrum: CostSpectrum | None = None,
    klocal: KLocalCost | None = None,
    search: SearchSet | None = None,
    method: str = "auto",
) -> NormResult:
    """``||[H_C, H_0]||`` by closed form when the structure allows, else numerically."""
    if mixer.kind == "grover":
        if spectrum is not None:
            if spectrum.feasible != mixer.feasible:
                raise MixerError("spectrum and Grover mixer use different feasible sets")
            tag = "closed-form:sigma_C" if mixer.feasible.is_full else "closed-form:sigma_C(constrained)"
            return NormResult(grover_commutator_norm(spectrum), tag)
        if klocal is not None and mixer.feasible.is_full:
            return NormResult(math.sqrt(klocal.sum_alpha_sq), "closed-form:sqrt(sum alpha^2)")
        raise MixerError("Grover commutator norm needs a spectrum or a k-local cost")
    if search is not None:
        if search.tag == "dist3":
            return NormResult(tf_search_dist3_norm(search.n), "closed-form:star")
        k = search.hamming_k
        if k is not None and 0 < k < search.n:
            return NormResult(tf_hamming_k_norm(search.n, k), "closed-form:hamming-layer")
    if klocal is not None:
        comm = tf_commutator(klocal)
        return NormResult(spectral_norm(comm, method=method), "numeric:pauli")
    if spectrum is not None:
        n = spectrum.n
        if method == "dense" or (method == "auto" and n <= pauli.DENSE_EIG_AUTO_QUBITS):
            return NormResult(spectral_norm(dense_tf_commutator_from_values(spectrum.values, n)), "numeric:dense")
        if n > pauli.DENSE_MAX_QUBITS + 6:
            raise MixerError(f"n={n} too large for the numeric commutator norm")
        mv, rmv = _tf_commutator_matvec(spectrum.values, n)
        return NormResult(pauli.iterative_norm(mv, rmv, 1 << n), "numeric:lanczos")
    raise MixerError("no route to the transverse-field commutator norm")


def numeric_commutator_norm(mixer: MixerSpec, spectrum: CostSpectrum) -> float:
    """Dense reference value, independent of every closed form."""
    c = spectrum.values.astype(float)
    if mixer.kind == "grover":
        h0 = grover_hamiltonian_dense(spectrum.feasible)
    else:
        h0 = tf_hamiltonian_dense(spectrum.n)
    comm = c[:, None] * h0 - h0 * c[None, :]
    return spectral_norm(comm)

