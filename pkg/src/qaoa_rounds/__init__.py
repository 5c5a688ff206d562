"""Lower bounds on QAOA round counts, their ingredients, and an exact simulator to check them."""
from __future__ import annotations

from .bounds import BoundInputs, BoundReport
from .mixers import MixerSpec, commutator_norm
from .pauli import PauliString, PauliSum, commutator, spectral_norm
from .problems import CostSpectrum, FeasibleSet, Graph, KLocalCost, SearchSet
from .sim import AngleSchedule, SimResult, run_qaoa
from .statevector import StateVector

__all__ = [
    "AngleSchedule", "BoundInputs", "BoundReport", "CostSpectrum", "FeasibleSet", "Graph", "KLocalCost",
    "MixerSpec", "PauliString", "PauliSum", "SearchSet", "SimResult", "StateVector", "commutator",
    "commutator_norm", "run_qaoa", "spectral_norm",
]
