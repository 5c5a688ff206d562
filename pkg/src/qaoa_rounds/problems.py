"""Cost functions, feasible sets and their objective statistics.

Bit strings are integers; qubit ``j`` is bit ``j``.  When written as text
(``"0101"``), character ``j`` is qubit ``j``.  A k-local cost reads

    C(z) = constant - sum_nu alpha_nu * prod_{j in support_nu} (-1)^{z_j},

so for unconstrained problems ``constant`` is the mean over all ``2**n``
strings and the variance is ``sum_nu alpha_nu**2``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import NamedTuple, Sequence

import networkx as nx
import numpy as np

from .pauli import PauliSum

ENUM_MAX_QUBITS = 20
ENUM_MAX_FEASIBLE = 1 << 20


class ProblemError(ValueError):
    """Invalid instance, or a statistic requested outside its domain."""


class ParseError(ProblemError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ShortfallWarning(UserWarning):
    """A generator could not reach the requested number of marked strings."""


def bits_to_str(z: int, n: int) -> str:
    return "".join(str((z >> j) & 1) for j in range(n))


def str_to_bits(s: str) -> int:
    if not s or set(s) - {"0", "1"}:
        raise ProblemError(f"not a bit string: {s!r}")
    return sum(1 << j for j, ch in enumerate(s) if ch == "1")


def z_signs(idx: np.ndarray, support: int) -> np.ndarray:
    """Eigenvalue of ``prod_{j in support} Z_j`` on each basis index."""
    return 1 - 2 * (np.bitwise_count(np.asarray(idx, dtype=np.int64) & support).astype(np.int64) & 1)


# --------------------------------------------------------------------------
# Graphs


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        seen = set()
        norm = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            w = e[2] if len(e) > 2 else 1
            if w != int(w):
                raise ProblemError(f"edge ({u}, {v}) has non-integer weight {w}")
            if u == v:
                raise ProblemError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ProblemError(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ProblemError(f"duplicate edge {key}")
            seen.add(key)
            norm.append((key[0], key[1], int(w)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges)

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        mapping = {v: i for i, v in enumerate(sorted(g.nodes))}
        return cls(len(mapping), tuple((mapping[u], mapping[v], d.get("weight", 1)) for u, v, d in g.edges(data=True)))


def parse_graph(text: str) -> Graph:
    """Edge list: first line ``"n m"``, then ``m`` lines ``"u v [w]"`` (0-indexed)."""
    lines = [(i + 1, ln.split("#")[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise ParseError("empty graph file", 1)
    lineno, head = lines[0]
    try:
        n, m = (int(t) for t in head.split())
    except ValueError:
        raise ParseError(f"expected 'n m', got {head!r}", lineno) from None
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"header declares {m} edges, found {len(body)}", lineno)
    edges = []
    for lineno, ln in body:
        parts = ln.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {ln!r}", lineno)
        try:
            edge = tuple(int(p) for p in parts)
        except ValueError:
            raise ParseError(f"non-integer field in {ln!r}", lineno) from None
        edges.append(edge)
    try:
        return Graph(n, tuple(edges))
    except ProblemError as exc:
        raise ParseError(str(exc), None) from None


def format_graph(g: Graph) -> str:
    rows = [f"{g.n_vertices} {g.n_edges}"]
    rows += [f"{u} {v}" if w == 1 else f"{u} {v} {w}" for u, v, w in g.edges]
    return "\n".join(rows) + "\n"


def random_graph(n: int, p: float, seed: int) -> Graph:
    return Graph.from_networkx(nx.gnp_random_graph(n, p, seed=seed))


def random_regular_graph(n: int, d: int, seed: int) -> Graph:
    return Graph.from_networkx(nx.random_regular_graph(d, n, seed=seed))


# --------------------------------------------------------------------------
# Feasible sets and spectra


@dataclass(frozen=True)
class FeasibleSet:
    n: int
    kind: str = "full"
    q: int | None = None
    explicit: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ProblemError(f"negative qubit count {self.n}")
        if self.kind == "weight":
            if self.q is None or not 0 <= self.q <= self.n:
                raise ProblemError(f"Hamming weight {self.q} out of range for n={self.n}")
        elif self.kind == "explicit":
            vals = tuple(sorted(set(int(z) for z in self.explicit or ())))
            if len(vals) != len(self.explicit or ()):
                raise ProblemError("explicit feasible set contains duplicates")
            if vals and not (0 <= vals[0] and vals[-1] < (1 << self.n)):
                raise ProblemError("explicit feasible string out of range")
            object.__setattr__(self, "explicit", vals)
        elif self.kind != "full":
            raise ProblemError(f"unknown feasible-set kind {self.kind!r}")

    @classmethod
    def full(cls, n: int) -> "FeasibleSet":
        return cls(n)

    @classmethod
    def weight(cls, n: int, q: int) -> "FeasibleSet":
        return cls(n, "weight", q=q)

    @classmethod
    def from_list(cls, n: int, strings: Sequence[int]) -> "FeasibleSet":
        return cls(n, "explicit", explicit=tuple(strings))

    @property
    def is_full(self) -> bool:
        return self.kind == "full"

    @property
    def size(self) -> int:
        if self.kind == "full":
            return 1 << self.n
        if self.kind == "weight":
            return math.comb(self.n, self.q)
        return len(self.explicit)

    @cached_property
    def indices(self) -> np.ndarray:
        if self.size > ENUM_MAX_FEASIBLE:
            raise ProblemError(f"feasible set of size {self.size} exceeds enumeration limit")
        if self.kind == "full":
            return np.arange(1 << self.n, dtype=np.int64)
        if self.kind == "weight":
            vals = [sum(1 << j for j in c) for c in combinations(range(self.n), self.q)]
            return np.array(sorted(vals), dtype=np.int64)
        return np.array(self.explicit, dtype=np.int64)

    def to_json(self) -> dict:
        if self.kind == "full":
            return {"kind": "full", "n": self.n}
        if self.kind == "weight":
            return {"kind": "weight", "n": self.n, "q": self.q}
        return {"kind": "explicit", "n": self.n, "strings": [bits_to_str(z, self.n) for z in self.explicit]}

    @classmethod
    def from_json(cls, d: dict) -> "FeasibleSet":
        kind = d.get("kind", "full")
        if kind == "full":
            return cls.full(int(d["n"]))
        if kind == "weight":
            return cls.weight(int(d["n"]), int(d["q"]))
        if kind == "explicit":
            return cls.from_list(int(d["n"]), [str_to_bits(s) for s in d["strings"]])
        raise ProblemError(f"unknown feasible-set kind {kind!r}")


class CostStats(NamedTuple):
    c_max: int
    c_avg: Fraction
    sigma_c: float
    variance: Fraction


@dataclass(frozen=True, eq=False)
class CostSpectrum:
    """Objective values over a feasible set, aligned with ``feasible.indices``."""

    feasible: FeasibleSet
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (self.feasible.size,):
            raise ProblemError(f"{vals.shape[0]} values for a feasible set of size {self.feasible.size}")
        if vals.size == 0:
            raise ProblemError("empty feasible set")
        ints = np.rint(vals)
        if np.any(np.abs(vals - ints) > 1e-9) or np.any(ints < 0):
            raise ProblemError("objective values must be non-negative integers")
        ints = ints.astype(np.int64)
        ints.setflags(write=False)
        object.__setattr__(self, "values", ints)

    @property
    def n(self) -> int:
        return self.feasible.n

    @property
    def size(self) -> int:
        return self.feasible.size

    @cached_property
    def value_sum(self) -> int:
        return int(sum(int(v) for v in self.values))

    @cached_property
    def square_sum(self) -> int:
        return int(sum(int(v) * int(v) for v in self.values))

    @cached_property
    def c_max(self) -> int:
        return int(self.values.max())

    @cached_property
    def c_avg(self) -> Fraction:
        return Fraction(self.value_sum, self.size)

    @cached_property
    def variance(self) -> Fraction:
        n = self.size
        return Fraction(self.square_sum * n - self.value_sum**2, n * n)

    @property
    def sigma_c(self) -> float:
        return math.sqrt(self.variance)

    def stats(self) -> CostStats:
        return CostStats(self.c_max, self.c_avg, self.sigma_c, self.variance)

    def scaled(self, factor: int) -> "CostSpectrum":
        return CostSpectrum(self.feasible, self.values * int(factor))

    def optimal_mask(self) -> np.ndarray:
        return self.values == self.c_max


def cost_stats_bruteforce(c: CostSpectrum) -> CostStats:
    return c.stats()


# --------------------------------------------------------------------------
# k-local costs


@dataclass(frozen=True, eq=False)
class KLocalCost:
    """``C = constant - sum alpha_nu Z_{support_nu}`` on ``n`` bits (unconstrained)."""

    n: int
    constant: float
    terms: tuple[tuple[float, int], ...] = ()

    def __post_init__(self):
        merged: dict[int, float] = {}
        for alpha, support in self.terms:
            support = int(support)
            if support <= 0 or support >= (1 << self.n):
                raise ProblemError(f"support mask {support} is empty or outside {self.n} bits")
            merged[support] = merged.get(support, 0.0) + float(alpha)
        clean = tuple((a, s) for s, a in sorted(merged.items()) if a != 0.0)
        object.__setattr__(self, "terms", clean)

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def locality(self) -> int:
        return max((bin(s).count("1") for _, s in self.terms), default=0)

    @property
    def max_occurrence(self) -> int:
        counts = [sum((s >> j) & 1 for _, s in self.terms) for j in range(self.n)]
        return max(counts, default=0)

    @property
    def sum_alpha_sq(self) -> float:
        return float(sum(a * a for a, _ in self.terms))

    @property
    def sum_abs_alpha(self) -> float:
        return float(sum(abs(a) for a, _ in self.terms))

    def is_strictly_k_local(self, k: int) -> bool:
        return self.m > 0 and all(bin(s).count("1") == k for _, s in self.terms)

    def evaluate(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        out = np.full(idx.shape, float(self.constant))
        for alpha, support in self.terms:
            out -= alpha * z_signs(idx, support)
        return out

    def spectrum(self, feasible: FeasibleSet | None = None) -> CostSpectrum:
        feasible = feasible or FeasibleSet.full(self.n)
        if feasible.n != self.n:
            raise ProblemError("feasible set on a different number of bits")
        return CostSpectrum(feasible, self.evaluate(feasible.indices))

    def to_pauli(self) -> PauliSum:
        terms = {(0, 0): self.constant}
        for alpha, support in self.terms:
            terms[(0, support)] = -alpha
        return PauliSum(self.n, terms)

    def traceless(self) -> "KLocalCost":
        return KLocalCost(self.n, 0.0, self.terms)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "constant": self.constant,
            "terms": [{"alpha": a, "qubits": [j for j in range(self.n) if (s >> j) & 1]} for a, s in self.terms],
        }

    @classmethod
    def from_json(cls, d: dict) -> "KLocalCost":
        terms = []
        for i, t in enumerate(d.get("terms", [])):
            qs = [int(q) for q in t["qubits"]]
            if len(set(qs)) != len(qs):
                raise ProblemError(f"term {i}: repeated qubit in {qs}")
            terms.append((float(t["alpha"]), sum(1 << q for q in qs)))
        return cls(int(d["n"]), float(d.get("constant", 0.0)), tuple(terms))


def cost_stats_from_coefficients(h: KLocalCost, feasible: FeasibleSet | None = None) -> tuple[float, float]:
    """Mean and standard deviation read off the Pauli-Z coefficients."""
    if feasible is not None and not feasible.is_full:
        raise ProblemError("coefficient statistics only hold on the full space")
    return float(h.constant), math.sqrt(h.sum_alpha_sq)


def c_max_upper_bound(h: KLocalCost) -> float:
    return float(h.constant) + h.sum_abs_alpha


def klocal_from_spectrum(c: CostSpectrum, atol: float = 1e-12) -> KLocalCost:
    """Pauli-Z expansion of a full-space cost by a fast Walsh-Hadamard transform."""
    if not c.feasible.is_full:
        raise ProblemError("Z expansion needs the full space")
    a = c.values.astype(float).copy()
    h = 1
    while h < a.size:
        a = a.reshape(-1, 2, h)
        a = np.concatenate([a[:, :1] + a[:, 1:], a[:, :1] - a[:, 1:]], axis=1).reshape(-1)
        h *= 2
    a /= a.size
    terms = tuple((-float(a[s]), s) for s in range(1, a.size) if abs(a[s]) > atol)
    return KLocalCost(c.n, float(a[0]), terms)


def maxcut_cost(g: Graph, enumerate_limit: int = ENUM_MAX_QUBITS) -> tuple[KLocalCost, CostSpectrum | None]:
    terms = tuple((w / 2.0, (1 << u) | (1 << v)) for u, v, w in g.edges)
    h = KLocalCost(g.n_vertices, g.total_weight / 2.0, terms)
    spectrum = None
    if g.n_vertices <= enumerate_limit:
        idx = np.arange(1 << g.n_vertices, dtype=np.int64)
        vals = np.zeros(idx.size, dtype=np.int64)
        for u, v, w in g.edges:
            vals += w * (((idx >> u) ^ (idx >> v)) & 1)
        spectrum = CostSpectrum(FeasibleSet.full(g.n_vertices), vals)
    return h, spectrum


def random_klocal_cost(n: int, k: int, n_clauses: int, seed: int, max_weight: int = 3) -> KLocalCost:
    """Weighted Max-k-SAT style cost: each clause pays ``w`` unless its literals are all false.

    Values are non-negative integers by construction.
    """
    rng = np.random.default_rng(seed)
    acc: dict[int, float] = {}
    const = 0.0
    for _ in range(n_clauses):
        width = int(rng.integers(1, k + 1))
        qubits = rng.choice(n, size=width, replace=False)
        neg = rng.integers(0, 2, size=width)
        w = int(rng.integers(1, max_weight + 1))
        # Clause violated iff every literal is false: prod_j (1 + s_j Z_j)/2.
        const += w
        for r in range(width + 1):
            for sub in combinations(range(width), r):
                coeff = -w / 2**width
                mask = 0
                for t in sub:
                    coeff *= -1 if neg[t] else 1
                    mask |= 1 << int(qubits[t])
                if mask == 0:
                    const += coeff
                else:
                    # C has "- alpha Z", so alpha = -coeff
                    acc[mask] = acc.get(mask, 0.0) - coeff
    return KLocalCost(n, const, tuple((a, s) for s, a in acc.items()))


# --------------------------------------------------------------------------
# Search sets


@dataclass(frozen=True)
class SearchSet:
    n: int
    marked: tuple[int, ...]
    tag: str = "generic"

    def __post_init__(self):
        vals = tuple(sorted(set(int(z) for z in self.marked)))
        if len(vals) != len(self.marked):
            raise ProblemError("marked set contains duplicates")
        if any(z < 0 or z >= (1 << self.n) for z in vals):
            raise ProblemError("marked string out of range")
        object.__setattr__(self, "marked", vals)
        if self.tag == "dist3":
            if not is_distance3(vals):
                raise ProblemError("dist3 tag but some pair is within Hamming distance 2")
        elif self.tag.startswith("hamming-"):
            k = int(self.tag.split("-", 1)[1])
            if any(bin(z).count("1") != k for z in vals) or len(vals) != math.comb(self.n, k):
                raise ProblemError(f"{self.tag} tag but the set is not the full weight-{k} layer")
        elif self.tag != "generic":
            raise ProblemError(f"unknown search-set tag {self.tag!r}")

    @property
    def m(self) -> int:
        return len(self.marked)

    @property
    def hamming_k(self) -> int | None:
        return int(self.tag.split("-", 1)[1]) if self.tag.startswith("hamming-") else None

    def to_json(self) -> dict:
        return {"n": self.n, "marked": [bits_to_str(z, self.n) for z in self.marked], "tag": self.tag}


def is_distance3(marked: Sequence[int]) -> bool:
    return all(bin(a ^ b).count("1") >= 3 for a, b in combinations(marked, 2))


def search_cost(s: SearchSet) -> CostSpectrum:
    if s.m == 0:
        raise ProblemError("empty marked set")
    vals = np.zeros(1 << s.n, dtype=np.int64)
    vals[list(s.marked)] = 1
    return CostSpectrum(FeasibleSet.full(s.n), vals)


def search_stats(n_space: int, m: int) -> tuple[int, Fraction, float]:
    """Closed-form ``(C_max, C_avg, sigma_C)`` of an ``m``-of-``N`` indicator."""
    return 1, Fraction(m, n_space), math.sqrt(m * (n_space - m)) / n_space


def _lexicode_d3(n: int) -> list[int]:
    blocked = np.zeros(1 << n, dtype=bool)
    ball = [0] + [1 << i for i in range(n)] + [(1 << i) | (1 << j) for i, j in combinations(range(n), 2)]
    ball = np.array(ball, dtype=np.int64)
    code = []
    for z in range(1 << n):
        if not blocked[z]:
            code.append(z)
            blocked[z ^ ball] = True
    return code


def gen_dist3_set(n: int, m_target: int, seed: int) -> SearchSet:
    """Random distance-3 set: a lexicographic code moved by a random isometry.

    Warns with ``ShortfallWarning`` when fewer than ``m_target`` strings fit.
    """
    if m_target < 1:
        raise ProblemError("m_target must be at least 1")
    if n > ENUM_MAX_QUBITS:
        raise ProblemError(f"n={n} exceeds enumeration limit")
    rng = np.random.default_rng(seed)
    code = np.array(_lexicode_d3(n), dtype=np.int64)
    perm = rng.permutation(n)
    shift = int(rng.integers(0, 1 << n))
    moved = np.zeros_like(code)
    for j, pj in enumerate(perm):
        moved |= ((code >> j) & 1) << int(pj)
    moved ^= shift
    chosen = rng.permutation(moved)[: min(m_target, moved.size)]
    if chosen.size < m_target:
        warnings.warn(f"only {chosen.size} of {m_target} distance-3 strings fit in n={n}", ShortfallWarning, stacklevel=2)
    return SearchSet(n, tuple(int(z) for z in chosen), "dist3")


def gen_hamming_k_set(n: int, k: int) -> SearchSet:
    if not 0 <= k <= n:
        raise ProblemError(f"k={k} out of range for n={n}")
    return SearchSet(n, tuple(FeasibleSet.weight(n, k).indices.tolist()), f"hamming-{k}")


def search_set_from_json(d: dict) -> SearchSet:
    n = int(d["n"])
    gen = d.get("generator")
    if gen is None:
        return SearchSet(n, tuple(str_to_bits(s) for s in d["marked"]), d.get("tag", "generic"))
    if gen == "hamming-k":
        return gen_hamming_k_set(n, int(d["k"]))
    if gen == "dist3":
        return gen_dist3_set(n, int(d["m"]), int(d["seed"]))
    raise ProblemError(f"unknown generator {gen!r}")


@dataclass
class Instance:
    """A loaded problem: the spectrum plus whatever structure it came with."""

    kind: str
    spectrum: CostSpectrum | None
    klocal: KLocalCost | None = None
    graph: Graph | None = None
    search: SearchSet | None = None
    source: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        for obj in (self.klocal, self.graph, self.search):
            if obj is not None:
                return obj.n_vertices if isinstance(obj, Graph) else obj.n
        return self.spectrum.n


def load_instance(path: str | Path, enumerate_limit: int = ENUM_MAX_QUBITS) -> Instance:
    """Read a graph edge list, a k-local JSON cost or a search-set JSON file."""
    path = Path(path)
    text = path.read_text()
    stripped = text.lstrip()
    if not stripped.startswith("{"):
        g = parse_graph(text)
        h, spectrum = maxcut_cost(g, enumerate_limit)
        return Instance("maxcut", spectrum, klocal=h, graph=g, source=str(path))
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if "terms" in d:
        h = KLocalCost.from_json(d)
        spectrum = h.spectrum() if h.n <= enumerate_limit else None
        inst = Instance("klocal", spectrum, klocal=h, source=str(path))
        if spectrum is not None and abs(float(spectrum.c_avg) - h.constant) > 1e-9:
            inst.notes.append("constant differs from enumerated mean")
        return inst
    if "marked" in d or "generator" in d:
        s = search_set_from_json(d)
        return Instance("search", search_cost(s), search=s, source=str(path))
    raise ParseError("unrecognised instance JSON (need 'terms', 'marked' or 'generator')", 1)
