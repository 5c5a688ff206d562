from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_sum
from qaoa_rounds.mixers import (
    MixerError,
    MixerSpec,
    commutator_norm,
    dense_tf_commutator_from_values,
    grover_commutator_norm,
    grover_hamiltonian_dense,
    hypercube_layer_adjacency,
    numeric_commutator_norm,
    s_star_witness,
    spectral_radius,
    star_adjacency,
    tf_commutator,
    tf_hamiltonian,
    tf_hamiltonian_dense,
    tf_hamming_k_norm,
    tf_search_dist3_norm,
)
from qaoa_rounds.pauli import expectation, single, spectral_norm
from qaoa_rounds.problems import (
    CostSpectrum,
    FeasibleSet,
    Graph,
    KLocalCost,
    SearchSet,
    ShortfallWarning,
    gen_dist3_set,
    gen_hamming_k_set,
    maxcut_cost,
    random_klocal_cost,
    random_regular_graph,
    search_cost,
)

P3 = Graph(3, ((0, 1), (1, 2)))


def dense_commutator_norm(values, h0):
    """Oracle: build diag(C) explicitly and take singular values."""
    c = np.diag(np.asarray(values, dtype=float))
    return float(np.linalg.svd(c @ h0 - h0 @ c, compute_uv=False)[0])


def test_mixer_descriptor():
    f = FeasibleSet.weight(4, 2)
    g = MixerSpec.grover(f)
    assert g.period == 2 * math.pi
    assert MixerSpec.from_json(g.to_json()) == g
    assert MixerSpec.from_json(MixerSpec.tf(3).to_json()) == MixerSpec.tf(3)
    with pytest.raises(MixerError):
        MixerSpec("tf", 4, f)
    with pytest.raises(MixerError):
        MixerSpec("xy", 4)


@pytest.mark.parametrize("f", [FeasibleSet.full(3), FeasibleSet.weight(5, 2)])
def test_grover_mixer_spectrum(f):
    eig = np.sort(np.linalg.eigvalsh(grover_hamiltonian_dense(f)))
    assert eig[0] == pytest.approx(0, abs=1e-12)
    assert np.allclose(eig[1:], 1)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_tf_spectrum_integer(n):
    eig = np.linalg.eigvalsh(tf_hamiltonian_dense(n))
    assert np.allclose(np.sort(eig), np.sort([bin(z).count("1") for z in range(1 << n)]))
    assert np.allclose(kron_sum(tf_hamiltonian(n)), tf_hamiltonian_dense(n))


def test_grover_norm_examples():
    assert grover_commutator_norm(CostSpectrum(FeasibleSet.full(3), [4] * 8)) == 0
    _, c = maxcut_cost(P3)
    assert grover_commutator_norm(c) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert dense_commutator_norm(c.values, grover_hamiltonian_dense(c.feasible)) == pytest.approx(math.sqrt(0.5))
    c = search_cost(SearchSet(2, (3,)))
    assert grover_commutator_norm(c) == pytest.approx(math.sqrt(3) / 4)
    assert dense_commutator_norm(c.values, grover_hamiltonian_dense(c.feasible)) == pytest.approx(math.sqrt(3) / 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31))
def test_grover_norm_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    c = CostSpectrum(FeasibleSet.full(n), rng.integers(0, 30, size=1 << n))
    ref = dense_commutator_norm(c.values, grover_hamiltonian_dense(c.feasible))
    assert abs(grover_commutator_norm(c) - ref) <= 1e-9
    assert grover_commutator_norm(c) == pytest.approx(c.sigma_c, abs=1e-12)


def test_grover_norm_constrained():
    rng = np.random.default_rng(2)
    f = FeasibleSet.weight(6, 3)
    c = CostSpectrum(f, rng.integers(0, 10, size=f.size))
    ref = dense_commutator_norm(c.values, grover_hamiltonian_dense(f))
    assert grover_commutator_norm(c) == pytest.approx(ref, abs=1e-9)


def test_tf_commutator_examples():
    one = KLocalCost(1, 1.0, ((1.0, 1),))
    comm = tf_commutator(one)
    assert len(comm) == 1 and comm.is_antihermitian()
    (key, coeff), = comm.terms.items()
    assert key == (1, 1) and abs(coeff) == 1
    h, c = maxcut_cost(P3)
    comm = tf_commutator(h)
    assert len(comm) == 4
    dense = kron_sum(comm)
    hd, td = np.diag(c.values.astype(complex)), tf_hamiltonian_dense(3)
    assert np.allclose(dense, hd @ td - td @ hd)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4).flatmap(lambda k: st.tuples(st.just(k), st.integers(k, 7))),
       st.integers(1, 12), st.integers(0, 2**31))
def test_tf_commutator_term_count(kn, clauses, seed):
    k, n = kn
    h = random_klocal_cost(n, k, clauses, seed)
    comm = tf_commutator(h)
    assert len(comm) <= h.locality * h.m
    ref = dense_commutator_norm(h.spectrum().values, tf_hamiltonian_dense(n))
    assert spectral_norm(comm) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("n,expected", [(4, 1.0), (9, 1.5), (1, 0.5)])
def test_dist3_norm_values(n, expected):
    assert tf_search_dist3_norm(n) == expected


def test_dist3_norm_single_marked_dense():
    c = search_cost(SearchSet(4, (5,)))
    assert dense_commutator_norm(c.values, tf_hamiltonian_dense(4)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", range(1, 9))
def test_dist3_norm_independent_of_m(n):
    for m in range(1, 5):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ShortfallWarning)
            s = gen_dist3_set(n, m, seed=n * 10 + m)
        ref = numeric_commutator_norm(MixerSpec.tf(n), search_cost(s))
        assert abs(ref - tf_search_dist3_norm(n)) <= 1e-8


def test_hamming_norm_examples():
    assert tf_hamming_k_norm(4, 2) == pytest.approx(math.sqrt(12) / 2)
    assert tf_hamming_k_norm(2, 1) == 1.0
    assert dense_commutator_norm(search_cost(gen_hamming_k_set(4, 2)).values,
                                 tf_hamiltonian_dense(4)) == pytest.approx(math.sqrt(12) / 2)
    with pytest.raises(MixerError):
        tf_hamming_k_norm(4, 0)
    with pytest.raises(MixerError):
        tf_hamming_k_norm(4, 4)


@pytest.mark.parametrize("n", range(2, 11))
def test_hamming_norm_all_layers(n):
    for k in range(1, n):
        assert tf_hamming_k_norm(n, k) == tf_hamming_k_norm(n, n - k)
        ref = numeric_commutator_norm(MixerSpec.tf(n), search_cost(gen_hamming_k_set(n, k)))
        assert abs(ref - tf_hamming_k_norm(n, k)) <= 1e-8


@pytest.mark.parametrize("n", range(1, 11))
def test_radii(n):
    assert spectral_radius(star_adjacency(n)) == pytest.approx(math.sqrt(n), abs=1e-8)
    for k in range(1, n):
        radius = spectral_radius(hypercube_layer_adjacency(n, k))
        assert radius == pytest.approx(math.sqrt(2 * k * (n - k) + n), abs=1e-8)


def test_witness_p3():
    h, c = maxcut_cost(P3)
    w = s_star_witness(h)
    assert w.traceless_norm == pytest.approx(1.0)
    assert spectral_norm(kron_sum(h.traceless().to_pauli())) == pytest.approx(1.0)
    assert w.value == pytest.approx(w.traceless_norm, abs=1e-12)
    assert w.predicted == pytest.approx(w.value, abs=1e-12)
    assert numeric_commutator_norm(MixerSpec.tf(3), c) >= w.value - 1e-12


def test_witness_qubit_y_matches_z():
    h, _ = maxcut_cost(random_regular_graph(6, 3, seed=1))
    w = s_star_witness(h)
    for j in range(h.n):
        y = expectation(single(h.n, "Y", j), w.state)
        z = expectation(single(h.n, "Z", j), w.state)
        z_s = 1 - 2 * ((w.eigenstring >> j) & 1)
        assert z * z_s == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert y == pytest.approx(z_s / math.sqrt(2), abs=1e-12)


def test_witness_three_local_term():
    h = KLocalCost(3, 1.0, ((1.0, 0b111),))
    w = s_star_witness(h)
    assert w.value / w.traceless_norm == pytest.approx(math.sqrt(3) * 2 / 3, abs=1e-12)
    dense = numeric_commutator_norm(MixerSpec.tf(3), h.spectrum())
    assert dense >= w.value >= w.traceless_norm


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**31))
def test_witness_sandwich(k, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(k, 8))
    terms = []
    for _ in range(int(rng.integers(1, 6))):
        support = sum(1 << int(q) for q in rng.choice(n, size=k, replace=False))
        terms.append((0.5 * int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1), support))
    h = KLocalCost(n, 0.0, tuple(terms))
    if h.m == 0 or not h.is_strictly_k_local(k):
        return
    w = s_star_witness(h)
    tl = h.traceless()
    ref = dense_commutator_norm(tl.evaluate(np.arange(1 << n)), tf_hamiltonian_dense(n))
    assert ref >= w.value - 1e-9
    assert w.value >= w.traceless_norm - 1e-9
    assert w.value == pytest.approx(w.predicted, abs=1e-9)


def test_witness_rejects():
    with pytest.raises(MixerError):
        s_star_witness(KLocalCost(2, 0.0, ((1.0, 1),)))
    with pytest.raises(MixerError):
        s_star_witness(KLocalCost(3, 0.0, ((1.0, 3), (1.0, 7))))


def test_dispatch():
    _, c = maxcut_cost(P3)
    h, _ = maxcut_cost(P3)
    res = commutator_norm(MixerSpec.grover(c.feasible), spectrum=c)
    assert res.provenance == "closed-form:sigma_C" and res.value == pytest.approx(math.sqrt(0.5))
    assert commutator_norm(MixerSpec.grover(c.feasible), klocal=h).provenance.startswith("closed-form")
    s = gen_dist3_set(6, 3, seed=0)
    assert commutator_norm(MixerSpec.tf(6), search=s).provenance == "closed-form:star"
    s = gen_hamming_k_set(5, 2)
    assert commutator_norm(MixerSpec.tf(5), search=s).provenance == "closed-form:hamming-layer"
    res = commutator_norm(MixerSpec.tf(3), klocal=h)
    assert res.provenance.startswith("numeric") and res.value >= s_star_witness(h).value
    f = FeasibleSet.weight(3, 1)
    res = commutator_norm(MixerSpec.grover(f), spectrum=CostSpectrum(f, c.values[f.indices]))
    assert "constrained" in res.provenance
    with pytest.raises(MixerError):
        commutator_norm(MixerSpec.tf(3))
    with pytest.raises(MixerError):
        commutator_norm(MixerSpec.grover(FeasibleSet.full(3)))


def test_numeric_routes_agree():
    h, c = maxcut_cost(random_regular_graph(12, 3, seed=5))
    mixer = MixerSpec.tf(12)
    lanczos = commutator_norm(mixer, spectrum=c)
    pauli = commutator_norm(mixer, klocal=h)
    assert lanczos.provenance == "numeric:lanczos"
    a = dense_tf_commutator_from_values(c.values, 12)
    dense = math.sqrt(np.max(np.linalg.eigvalsh(a.T @ a)))
    assert lanczos.value == pytest.approx(dense, rel=1e-8)
    assert pauli.value == pytest.approx(dense, rel=1e-8)
