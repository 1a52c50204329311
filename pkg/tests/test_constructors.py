from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from helpers import example, m2_base
from hypothesis import given, settings
from hypothesis import strategies as st

from mqg.algebra import MultiMatrixAlgebra, StructureError, Weight, opnorm
from mqg.constructors import (WeakHopfAlgebra, build_example, check_isomorphic, check_weak_hopf, cyclic_group,
                              direct_sum, from_group_algebra, from_groupoid_commutative, from_groupoid_symmetric,
                              from_weak_hopf, group_weak_hopf, groupoid_weak_hopf, matrix_groupoid_weak_hopf,
                              pair_groupoid, pairs_quantum_groupoid, permutation_isomorphism,
                              quantum_space_quantum_groupoid, shipped_examples, solve_haar, symmetric_group,
                              tensor_product, to_weak_hopf, trivial_groupoid)
from mqg.hopf import check_all
from mqg.modulus import check_uniqueness

# ---------------------------------------------------------------------------
# finite groupoids
# ---------------------------------------------------------------------------


def test_pair_groupoid_shape():
    gr = pair_groupoid(3)
    gr.validate()
    assert len(gr.elements) == 9 and len(gr.units) == 3
    assert len(gr.composable()) == 27


def test_groupoid_validation_rejects_broken_tables():
    gr = pair_groupoid(2, [1.0, 2.0])
    with pytest.raises(StructureError):
        dataclasses.replace(gr, measure={u: 0.0 for u in gr.units}).validate()
    inv = dict(gr.inverse)
    a = next(x for x in gr.elements if gr.src[x] != gr.rng[x])
    inv[a] = a
    with pytest.raises(StructureError):
        dataclasses.replace(gr, inverse=inv).validate()
    comp = dict(gr.compose)
    comp.pop(next(iter(comp)))
    with pytest.raises(StructureError):
        dataclasses.replace(gr, compose=comp).validate()
    with pytest.raises(StructureError):
        dataclasses.replace(gr, units=(), elements=()).validate()


def test_symmetric_group_table():
    els, mult, e = symmetric_group(3)
    assert len(els) == 6 and all(mult[(e, x)] == x == mult[(x, e)] for x in els)
    # S3 is non-abelian
    assert any(mult[(x, y)] != mult[(y, x)] for x in els for y in els)


@settings(max_examples=10)
@given(st.lists(st.floats(0.05, 20.0), min_size=1, max_size=3))
def test_groupoid_constructions_any_measure(mu):
    gr = pair_groupoid(len(mu), mu)
    assert check_all(from_groupoid_commutative(gr, check=False)).passed
    assert check_all(from_groupoid_symmetric(gr, check=False)).passed


def test_trivial_groupoid():
    g = from_groupoid_commutative(trivial_groupoid())
    assert g.M.dim == 1 and g.N.dim == 1


# ---------------------------------------------------------------------------
# weak Hopf algebras and Haar measure
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("factory", [
    lambda: matrix_groupoid_weak_hopf(2),
    lambda: matrix_groupoid_weak_hopf(3),
    lambda: group_weak_hopf(*symmetric_group(3)),
    lambda: groupoid_weak_hopf(pair_groupoid(2)),
])
def test_weak_hopf_axioms(factory):
    w = factory()
    rep = check_weak_hopf(w)
    assert rep.passed, rep.summary()


def test_haar_matrix_groupoid():
    w = matrix_groupoid_weak_hopf(3)
    h = solve_haar(w)
    expected = np.array([1.0 if i == j else 0.0 for (_, i, j) in w.algebra.labels])
    assert np.max(np.abs(h - expected)) < 1e-12


def test_haar_symmetric_group_plancherel():
    """``h(E^k_ij) = m_k δ_ij / |G|`` on ``ℂ[S_3]``."""
    w = group_weak_hopf(*symmetric_group(3))
    m = w.algebra
    assert sorted(m.block_dims) == [1, 1, 2]
    h = solve_haar(w)
    expected = np.array([m.block_dims[k] / 6 if i == j else 0.0 for (k, i, j) in m.labels])
    assert np.max(np.abs(h - expected)) < 1e-12


def test_weak_hopf_broken_antipode_detected():
    w = matrix_groupoid_weak_hopf(2)
    bad = WeakHopfAlgebra(w.algebra, w.coproduct, w.counit, np.eye(w.algebra.dim, dtype=complex))
    assert not check_weak_hopf(bad).passed


@pytest.mark.parametrize("factory", [
    lambda: matrix_groupoid_weak_hopf(2),
    lambda: group_weak_hopf(*symmetric_group(3)),
    lambda: group_weak_hopf(*cyclic_group(4)),
])
def test_weak_hopf_round_trip(factory):
    w = factory()
    g = from_weak_hopf(w)
    back = to_weak_hopf(g)
    assert np.max(np.abs(back.coproduct - w.coproduct)) < 1e-8
    assert np.max(np.abs(back.counit - w.counit)) < 1e-8
    assert np.max(np.abs(back.antipode - w.antipode)) < 1e-8


def test_weak_hopf_shape_validation():
    m = MultiMatrixAlgebra([2])
    with pytest.raises(StructureError):
        WeakHopfAlgebra(m, np.zeros((4, 2, 2)), np.zeros(4), np.eye(4))


# ---------------------------------------------------------------------------
# pairs, quantum space, sums and tensors
# ---------------------------------------------------------------------------


def test_pairs_concrete_embedding_is_faithful():
    B, nu = m2_base()
    g = pairs_quantum_groupoid(B, nu)
    assert g.M.embedding_residual() < 1e-12
    assert g.M.block_dims == (4,)


def test_quantum_space_rejects_bad_trace_weights():
    b = MultiMatrixAlgebra([1, 2])
    nu = Weight(b, np.diag([0.5, 0.2, 0.3]).astype(complex))
    with pytest.raises(StructureError):
        quantum_space_quantum_groupoid(b, nu, trace_weights=[1.0])
    with pytest.raises(StructureError):
        quantum_space_quantum_groupoid(b, nu, trace_weights=[1.0, -1.0])


def test_direct_sum_blocks():
    g = direct_sum([example("z2"), example("pair2")])
    assert g.M.block_dims == (1,) * 6
    assert g.N.dim == 3
    with pytest.raises(StructureError):
        direct_sum([])


def test_tensor_z2_z3_is_z6():
    z6 = from_group_algebra(*cyclic_group(6))
    rep = check_isomorphic(example("tensor_z2_z3"), z6)
    assert rep.passed, rep.summary()
    assert rep["isomorphism.explicit_permutation"].passed


def test_non_isomorphic_pairs_detected():
    assert not check_isomorphic(example("z3"), example("z2")).passed
    rep = check_isomorphic(example("pair2"), from_groupoid_commutative(pair_groupoid(2)))
    assert not rep.passed
    assert not rep["invariant.nu_spectrum"].passed


def test_tensor_with_trivial_is_identity():
    triv = from_groupoid_commutative(trivial_groupoid())
    rep = check_isomorphic(tensor_product(example("pair2"), triv), example("pair2"))
    assert rep.passed


def test_pairs_over_diagonal_base_is_pair_groupoid():
    """Bimodules agree; the left weights differ by ``β(μ)``."""
    p2 = example("pair2")
    B = MultiMatrixAlgebra([1, 1])
    pq = pairs_quantum_groupoid(B, Weight(B, np.diag([1 / 3, 2 / 3]).astype(complex)))
    assert check_isomorphic(pq, p2, weights=False).passed
    assert not check_isomorphic(pq, p2).passed
    perm, q = permutation_isomorphism(pq, p2, weights=False)
    n = p2.M.dim
    P = np.zeros((n, n))
    P[perm, np.arange(n)] = 1.0
    res = check_uniqueness(p2, P @ pq.T_L @ P.T)
    assert res.report.passed
    mu = np.zeros(2)
    mu[q] = [1 / 3, 2 / 3]
    assert np.max(np.abs(np.diag(res.h).real - mu)) < 1e-9


def test_unknown_example():
    with pytest.raises(StructureError):
        build_example("nope")


@pytest.mark.parametrize("name", shipped_examples())
def test_examples_are_verified(name):
    g = example(name)
    assert g.verified and g.name == name


def test_invariants_with_modulus():
    rep = check_isomorphic(example("pairs_m2"), pairs_quantum_groupoid(*m2_base()), with_modulus=True)
    assert rep.passed
    assert opnorm(example("pairs_m2").nu.density - m2_base()[1].density) == 0.0
