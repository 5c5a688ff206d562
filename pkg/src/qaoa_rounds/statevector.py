from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import FeasibleSet, ProblemError

NORM_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm amplitudes indexed by ``feasible.indices``."""

    feasible: FeasibleSet
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.feasible.size,):
            raise ProblemError(f"{amps.shape} amplitudes for a feasible set of size {self.feasible.size}")
        if abs(np.vdot(amps, amps).real - 1.0) > NORM_ATOL:
            raise ProblemError("state is not normalised")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return self.feasible.n

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def init_uniform(f: FeasibleSet) -> StateVector:
    if f.size < 1:
        raise ProblemError("empty feasible set")
    return StateVector(f, np.full(f.size, 1 / np.sqrt(f.size), dtype=complex))


def basis_state(f: FeasibleSet, z: int) -> StateVector:
    pos = np.searchsorted(f.indices, z)
    if pos >= f.size or f.indices[pos] != z:
        raise ProblemError(f"string {z} is not feasible")
    amps = np.zeros(f.size, dtype=complex)
    amps[pos] = 1.0
    return StateVector(f, amps)


def product_state(qubit_states: list[np.ndarray]) -> StateVector:
    """Tensor product; entry ``j`` is the 2-vector of qubit ``j``."""
    amps = np.array([1.0 + 0j])
    for v in qubit_states:
        amps = np.kron(np.asarray(v, dtype=complex), amps)
    return StateVector(FeasibleSet.full(len(qubit_states)), amps)


def same_state(a: StateVector, b: StateVector, atol: float = NORM_ATOL) -> bool:
    """Equality up to global phase: ``|<a|b>| >= 1 - atol``."""
    return a.feasible == b.feasible and abs(a.overlap(b)) >= 1 - atol
