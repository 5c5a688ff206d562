from __future__ import annotations

from functools import reduce

import numpy as np
from hypothesis import strategies as st

from qaoa_rounds.pauli import PauliString, PauliSum

PAULI_2X2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_label(label: str) -> np.ndarray:
    """Independent dense oracle: character j is qubit j, which is bit j of the index."""
    return reduce(np.kron, [PAULI_2X2[ch] for ch in reversed(label)], np.eye(1, dtype=complex))


def kron_sum(a: PauliSum) -> np.ndarray:
    out = np.zeros((1 << a.n, 1 << a.n), dtype=complex)
    for s in a.strings():
        out += s.coeff * kron_label(s.label)
    return out


def pauli_labels(n: int):
    return st.text(alphabet="IXYZ", min_size=n, max_size=n)


@st.composite
def pauli_sums(draw, n: int | None = None, max_terms: int = 6, hermitian: bool = False):
    n = draw(st.integers(1, 6)) if n is None else n
    k = draw(st.integers(0, max_terms))
    coeff = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
    strings = []
    for _ in range(k):
        label = draw(pauli_labels(n))
        c = complex(draw(coeff), 0.0 if hermitian else draw(coeff))
        strings.append(PauliString.from_label(label, c))
    return PauliSum.from_strings(n, strings)
