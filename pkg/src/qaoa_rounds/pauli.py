"""Bit-mask Pauli algebra, dense operators and spectral norms.

A Pauli string on ``n`` qubits is stored as a pair of integer masks
``(x_mask, z_mask)`` plus a complex coefficient.  Bit ``j`` of a mask refers
to qubit ``j``, and qubit ``j`` is bit ``j`` of a computational basis index
(little endian), so ``Z_j |b> = (-1)^{b_j} |b>``.  A qubit with both bits set
carries a ``Y`` factor; the coefficient multiplies the Hermitian string, so a
sum is Hermitian exactly when every coefficient is real.

Sign convention for commutators: ``commutator(a, b) = ab - ba`` with the
operator products above.  For the transverse field this gives
``[Z_u Z_v, X_u] = 2i Y_u Z_v``; the overall sign differs from some texts
but no norm depends on it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

# Tolerance policy, reused everywhere.
ATOL = 1e-10
NORM_RTOL = 1e-8
DENSE_MAX_QUBITS = 14
DENSE_EIG_AUTO_QUBITS = 10
ITER_TOL = 1e-13
ITER_SEED = 12345
ITER_DENSE_DIM = 16
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000

_ZERO_COEFF = 1e-14
_I_POW = (1, 1j, -1, -1j)


class PauliError(ValueError):
    """Invalid Pauli input (qubit mismatch, bad masks, size limits)."""


class NormError(ArithmeticError):
    """Spectral norm could not be computed (non-normal input or no convergence)."""


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _product_phase(x1: int, z1: int, x2: int, z2: int) -> complex:
    # P = i^{|x&z|} X^x Z^z; moving Z^{z1} past X^{x2} gives (-1)^{|z1&x2|}.
    e = _popcount(x1 & z1) + _popcount(x2 & z2) - _popcount((x1 ^ x2) & (z1 ^ z2))
    e += 2 * _popcount(z1 & x2)
    return _I_POW[e % 4]


@dataclass(frozen=True)
class PauliString:
    n: int
    x_mask: int = 0
    z_mask: int = 0
    coeff: complex = 1.0

    def __post_init__(self):
        limit = 1 << self.n
        if self.n < 0 or not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise PauliError(f"masks do not fit in {self.n} qubits")

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliString":
        """Build from a label such as ``"XIZY"``; character ``j`` is qubit ``j``."""
        x = z = 0
        for j, ch in enumerate(label.upper()):
            if ch not in "IXYZ":
                raise PauliError(f"bad Pauli letter {ch!r}")
            if ch in "XY":
                x |= 1 << j
            if ch in "ZY":
                z |= 1 << j
        return cls(len(label), x, z, coeff)

    @property
    def label(self) -> str:
        out = []
        for j in range(self.n):
            xb, zb = (self.x_mask >> j) & 1, (self.z_mask >> j) & 1
            out.append("IXZY"[xb + 2 * zb])
        return "".join(out)

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        return PauliString(self.n, self.x_mask, self.z_mask, self.coeff * other)

    __rmul__ = __mul__


def multiply(a: PauliString, b: PauliString) -> PauliString:
    if a.n != b.n:
        raise PauliError(f"qubit-count mismatch: {a.n} vs {b.n}")
    phase = _product_phase(a.x_mask, a.z_mask, b.x_mask, b.z_mask)
    return PauliString(a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, phase * a.coeff * b.coeff)


def anticommute(x1: int, z1: int, x2: int, z2: int) -> bool:
    return (_popcount(x1 & z2) + _popcount(z1 & x2)) % 2 == 1


@dataclass(frozen=True)
class PauliSum:
    """Canonical weighted sum of Pauli strings keyed by ``(x_mask, z_mask)``."""

    n: int
    terms: Mapping[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        limit = 1 << self.n
        clean = {}
        for (x, z), c in self.terms.items():
            if not (0 <= x < limit and 0 <= z < limit):
                raise PauliError(f"masks ({x}, {z}) do not fit in {self.n} qubits")
            c = complex(c)
            if abs(c) > _ZERO_COEFF:
                clean[(int(x), int(z))] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def from_strings(cls, n: int, strings: Iterable[PauliString]) -> "PauliSum":
        acc: dict[tuple[int, int], complex] = {}
        for s in strings:
            if s.n != n:
                raise PauliError(f"qubit-count mismatch: {s.n} vs {n}")
            key = (s.x_mask, s.z_mask)
            acc[key] = acc.get(key, 0) + s.coeff
        return cls(n, acc)

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, {(0, 0): coeff})

    def strings(self) -> list[PauliString]:
        return [PauliString(self.n, x, z, c) for (x, z), c in self.terms.items()]

    def __len__(self) -> int:
        return len(self.terms)

    def _check(self, other: "PauliSum"):
        if self.n != other.n:
            raise PauliError(f"qubit-count mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, PauliSum):
            other = PauliSum.identity(self.n, other)
        self._check(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0) + c
        return PauliSum(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return PauliSum(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check(other)
            acc: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in self.terms.items():
                for (x2, z2), c2 in other.terms.items():
                    key = (x1 ^ x2, z1 ^ z2)
                    acc[key] = acc.get(key, 0) + _product_phase(x1, z1, x2, z2) * c1 * c2
            return PauliSum(self.n, acc)
        return PauliSum(self.n, {k: c * other for k, c in self.terms.items()})

    def __rmul__(self, other):
        return PauliSum(self.n, {k: c * other for k, c in self.terms.items()})

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n, {k: c.conjugate() for k, c in self.terms.items()})

    def is_hermitian(self, atol: float = ATOL) -> bool:
        return all(abs(c.imag) <= atol for c in self.terms.values())

    def is_antihermitian(self, atol: float = ATOL) -> bool:
        return all(abs(c.real) <= atol for c in self.terms.values())

    def is_diagonal(self) -> bool:
        return all(x == 0 for x, _ in self.terms)

    def without_identity(self) -> "PauliSum":
        return PauliSum(self.n, {k: c for k, c in self.terms.items() if k != (0, 0)})

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-free product with a length ``2**n`` vector."""
        vec = np.asarray(vec, dtype=complex)
        dim = 1 << self.n
        if vec.shape != (dim,):
            raise PauliError(f"vector of length {vec.shape} does not match 2^{self.n}")
        idx = np.arange(dim, dtype=np.int64)
        out = np.zeros(dim, dtype=complex)
        for (x, z), c in self.terms.items():
            out[idx ^ x] += _basis_phases(idx, x, z) * c * vec
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"x_mask": x, "z_mask": z, "re": c.real, "im": c.imag}
                for (x, z), c in self.terms.items()
            ],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "PauliSum":
        if isinstance(data, str):
            data = json.loads(data)
        terms: dict[tuple[int, int], complex] = {}
        for t in data["terms"]:
            key = (int(t["x_mask"]), int(t["z_mask"]))
            terms[key] = terms.get(key, 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls(int(data["n"]), terms)


def _basis_phases(idx: np.ndarray, x: int, z: int) -> np.ndarray:
    # P|b> = i^{|x&z|} (-1)^{|z&b|} |b ^ x>
    signs = 1 - 2 * (np.bitwise_count(idx & z).astype(np.int64) & 1)
    return _I_POW[_popcount(x & z) % 4] * signs


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """``ab - ba`` in canonical form; only anticommuting pairs contribute."""
    if a.n != b.n:
        raise PauliError(f"qubit-count mismatch: {a.n} vs {b.n}")
    acc: dict[tuple[int, int], complex] = {}
    for (x1, z1), c1 in a.terms.items():
        for (x2, z2), c2 in b.terms.items():
            if anticommute(x1, z1, x2, z2):
                key = (x1 ^ x2, z1 ^ z2)
                acc[key] = acc.get(key, 0) + 2 * _product_phase(x1, z1, x2, z2) * c1 * c2
    return PauliSum(a.n, acc)


@dataclass(frozen=True)
class DenseOperator:
    """Explicit matrix over a declared index space (``2**n`` or a feasible set)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PauliError(f"dense operator must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, atol: float = ATOL) -> bool:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0)) <= atol

    def is_antihermitian(self, atol: float = ATOL) -> bool:
        return float(np.max(np.abs(self.matrix + self.matrix.conj().T), initial=0.0)) <= atol


def to_dense(a: PauliSum, max_qubits: int = DENSE_MAX_QUBITS) -> DenseOperator:
    if a.n > max_qubits:
        raise PauliError(f"{a.n} qubits exceeds dense limit {max_qubits}")
    dim = 1 << a.n
    idx = np.arange(dim, dtype=np.int64)
    m = np.zeros((dim, dim), dtype=complex)
    for (x, z), c in a.terms.items():
        m[idx ^ x, idx] += c * _basis_phases(idx, x, z)
    return DenseOperator(m)


def _dense_norm(m: np.ndarray, atol: float) -> float:
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if np.max(np.abs(m - m.conj().T), initial=0.0) <= atol * scale:
        return float(np.max(np.abs(np.linalg.eigvalsh(m)), initial=0.0))
    if np.max(np.abs(m + m.conj().T), initial=0.0) <= atol * scale:
        return float(np.max(np.abs(np.linalg.eigvalsh(1j * m)), initial=0.0))
    mh = m.conj().T
    if np.max(np.abs(m @ mh - mh @ m), initial=0.0) > atol * scale * scale * m.shape[0]:
        raise NormError("operator is not normal")
    return float(np.max(np.abs(np.linalg.eigvals(m)), initial=0.0))


def iterative_norm(
    matvec: Callable[[np.ndarray], np.ndarray],
    rmatvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float = ITER_TOL,
    seed: int = ITER_SEED,
) -> float:
    """Largest singular value from the top eigenvalue of ``a^dagger a`` (Lanczos).

    The start vector is seeded so repeated calls return identical bits.
    """
    if dim <= ITER_DENSE_DIM:
        cols = [rmatvec(matvec(e)) for e in np.eye(dim, dtype=complex)]
        gram = np.array(cols).T
        return float(np.sqrt(max(np.max(np.linalg.eigvalsh((gram + gram.conj().T) / 2)), 0.0)))
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    op = LinearOperator((dim, dim), matvec=lambda v: rmatvec(matvec(v)), dtype=complex)
    try:
        top = eigsh(op, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise NormError(f"Lanczos iteration did not converge: {exc}") from None
    return float(np.sqrt(max(top[0], 0.0)))


def power_norm(
    matvec: Callable[[np.ndarray], np.ndarray],
    rmatvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    seed: int = ITER_SEED,
) -> float:
    """Plain power iteration on ``a^dagger a``; stops on a relative Rayleigh-quotient change below ``tol``.

    Kept as a cross-check for :func:`iterative_norm`.  With a small relative
    gap at the top of the spectrum it can stop a few parts in 1e9 early.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    prev = None
    for _ in range(max_iter):
        w = rmatvec(matvec(v))
        rho = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        if prev is not None and abs(rho - prev) <= tol * max(abs(rho), 1e-300):
            return float(np.sqrt(max(rho, 0.0)))
        prev = rho
        v = w / nw
    raise NormError(f"power iteration did not converge in {max_iter} iterations")


def spectral_norm(
    a: PauliSum | DenseOperator | np.ndarray,
    method: str = "auto",
    atol: float = ATOL,
    dense_auto_qubits: int = DENSE_EIG_AUTO_QUBITS,
    **iter_kw,
) -> float:
    """Spectral norm of a normal operator.

    ``method`` is ``"dense"`` (exact eigensolve), ``"iterative"`` (Lanczos,
    PauliSum only), ``"power"`` (plain power iteration) or ``"auto"``, which picks dense for up to
    ``dense_auto_qubits`` qubits.
    """
    if isinstance(a, np.ndarray):
        a = DenseOperator(a)
    if isinstance(a, DenseOperator):
        return _dense_norm(a.matrix, atol)
    if len(a.terms) == 0:
        return 0.0
    if len(a.terms) == 1:
        return abs(next(iter(a.terms.values())))
    normal = a.is_hermitian(atol) or a.is_antihermitian(atol)
    if method == "auto":
        method = "dense" if a.n <= dense_auto_qubits else "iterative"
    if method == "dense":
        return _dense_norm(to_dense(a).matrix, atol)
    if method not in ("iterative", "power"):
        raise ValueError(f"unknown norm method {method!r}")
    if not normal:
        raise NormError("iterative path requires a Hermitian or anti-Hermitian sum")
    adag = a.dagger()
    solver = iterative_norm if method == "iterative" else power_norm
    return solver(a.apply, adag.apply, 1 << a.n, **iter_kw)


def expectation(a: PauliSum, state) -> float:
    """``<s|a|s>`` for a Hermitian sum; ``state`` is a StateVector or an array.

    On a constrained feasible set only diagonal sums are accepted.
    """
    if not a.is_hermitian():
        raise PauliError("expectation requires a Hermitian operator")
    amps = np.asarray(getattr(state, "amplitudes", state), dtype=complex)
    feasible = getattr(state, "feasible", None)
    if feasible is not None and not feasible.is_full:
        if not a.is_diagonal():
            raise PauliError("non-diagonal operator on a constrained feasible set")
        idx = feasible.indices
        diag = np.zeros(len(idx))
        for (_, z), c in a.terms.items():
            diag += c.real * (1 - 2 * (np.bitwise_count(idx & z).astype(np.int64) & 1))
        return float(np.sum(diag * np.abs(amps) ** 2))
    if amps.shape != (1 << a.n,):
        raise PauliError(f"state of length {amps.shape[0]} does not match 2^{a.n}")
    val = np.vdot(amps, a.apply(amps))
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise PauliError(f"expectation has imaginary part {val.imag}")
    return float(val.real)


def z_string(n: int, support: int, coeff: complex = 1.0) -> PauliSum:
    return PauliSum(n, {(0, support): coeff})


def single(n: int, letter: str, qubit: int, coeff: complex = 1.0) -> PauliSum:
    label = ["I"] * n
    label[qubit] = letter
    s = PauliString.from_label("".join(label), coeff)
    return PauliSum(n, {(s.x_mask, s.z_mask): s.coeff})
