from __future__ import annotations

import numpy as np
import pytest
from helpers import MU3, antipode, example, m2_base, pair3_groupoid
from oracles import PairsModel

from mqg.algebra import opnorm, tensor_algebra
from mqg.antipode import build_antipode, check_antipode
from mqg.constructors import (_tensor_index, from_groupoid_commutative, from_weak_hopf, group_weak_hopf,
                              pairs_quantum_groupoid, shipped_examples, symmetric_group, to_weak_hopf)


@pytest.mark.parametrize("name", shipped_examples())
def test_antipode_suite(name):
    g = example(name)
    gop, anti = antipode(name)
    rep = check_antipode(g, gop, anti, tol=1e-8)
    assert rep.passed, rep.summary()


@pytest.fixture(scope="module")
def pairs():
    B, nu = m2_base()
    g = pairs_quantum_groupoid(B, nu)
    gop, anti = build_antipode(g)
    return B, nu, g, gop, anti, PairsModel(g, B, nu)


def test_pairs_identification_is_unitary_intertwiner(pairs):
    B, nu, g, gop, anti, model = pairs
    v = model.V
    assert opnorm(v.conj().T @ v - np.eye(g.M.dim)) < 1e-12
    worst = max(opnorm(v @ g.M.left_action(e) @ v.conj().T - g.M.embedding[a])
                for a, e in enumerate(g.M.standard_basis))
    assert worst < 1e-12


def test_pairs_polar_parts(pairs):
    _, _, _, gop, anti, model = pairs
    assert opnorm(gop.matrix - model.G) < 1e-9
    assert opnorm(anti.polar.D - model.D) < 1e-9
    assert opnorm(anti.polar.I.matrix - model.I) < 1e-9


@pytest.mark.parametrize("t", (1.0, -0.3, 2.5))
def test_pairs_scaling_group(pairs, t):
    _, _, g, _, anti, model = pairs
    worst = max(opnorm(g.M.concrete(anti.tau(t, e)) - model.tau_concrete(t, g.M.embedding[a]))
                for a, e in enumerate(g.M.standard_basis))
    assert worst < 1e-9


def test_pairs_antipode_closed_form(pairs):
    """``S(ē ⊗ m*) = conj(σ_{i/2}(m)) ⊗ σ_{-i/2}(e*)`` on ``B^o ⊗ B``."""
    B, nu, g, _, anti, _ = pairs
    C, perm = tensor_algebra(B, B)

    def tens(x, y):
        return np.kron(x, y)[np.ix_(perm, perm)]

    worst = 0.0
    for e in B.standard_basis:
        for m in B.standard_basis:
            lhs = anti.S_of(tens(np.conj(e), m.conj().T))
            rhs = tens(np.conj(nu.sigma(0.5j, m)), nu.sigma(-0.5j, e.conj().T))
            worst = max(worst, opnorm(lhs - rhs))
    assert worst < 1e-9


def test_groupoid_antipode_is_inversion():
    """On ``L^∞(G)``: ``S(f)(x) = f(x⁻¹)``, ``τ`` trivial and ``R = S``."""
    gr = pair3_groupoid()
    g = from_groupoid_commutative(gr)
    _, anti = build_antipode(g)
    els = list(gr.elements)
    perm = np.zeros((len(els), len(els)))
    for i, x in enumerate(els):
        perm[els.index(gr.inverse[x]), i] = 1.0
    assert np.max(np.abs(anti.S - perm)) < 1e-9
    assert np.max(np.abs(anti.R - perm)) < 1e-9
    assert np.max(np.abs(anti.tau.superop(0.7) - np.eye(len(els)))) < 1e-9
    assert MU3 == tuple(gr.measure[u] for u in gr.units)


def test_group_algebra_antipode_matches_inversion():
    w = group_weak_hopf(*symmetric_group(3))
    g = from_weak_hopf(w)
    gop, anti = build_antipode(g)
    back = to_weak_hopf(g, antipode=anti)
    assert np.max(np.abs(back.antipode - w.antipode)) < 1e-9
    assert opnorm(anti.polar.D - np.eye(g.M.dim)) < 1e-9
    assert np.max(np.abs(anti.R - anti.S)) < 1e-9


def test_tensor_index_covers_all_pairs():
    B, _ = m2_base()
    C, perm = tensor_algebra(B, B)
    idx = _tensor_index(B, B, C, perm)
    assert sorted(idx.reshape(-1)) == list(range(C.dim))
