from __future__ import annotations

import numpy as np
import pytest
from helpers import MU3, example
from hypothesis import given
from hypothesis import strategies as st

from mqg.algebra import StructureError, opnorm
from mqg.constructors import from_groupoid_commutative, pair_groupoid, shipped_examples
from mqg.hopf import (MeasuredQuantumGroupoid, check_all, check_bimodule, check_left_invariant,
                      check_right_invariant, opposite, pair_coefficients, tensor_apply)
from mqg.hopf import pair_element


@pytest.mark.parametrize("name", shipped_examples())
def test_shipped_examples_satisfy_axioms(name):
    rep = check_all(example(name))
    assert rep.passed, rep.summary()


@pytest.mark.parametrize("name", ("pair3", "pairs_m2", "z3", "qspace_c_m2"))
def test_opposite_is_a_measured_quantum_groupoid(name):
    assert check_all(opposite(example(name))).passed


@pytest.mark.parametrize("name", ("pair3", "pairs_m2", "tensor_z2_z3"))
def test_coproduct_is_star_homomorphism(name, rng):
    g = example(name)
    x, y = g.M.random_element(rng), g.M.random_element(rng)
    assert opnorm(g.gamma(x @ y) - g.gamma(x) @ g.gamma(y)) < 1e-9
    assert opnorm(g.gamma(x.conj().T) - g.gamma(x).conj().T) < 1e-9
    assert opnorm(g.gamma(g.M.unit()) - g.e) < 1e-12


@given(st.integers(1, 3), st.integers(0, 10_000))
def test_pair_coefficients_round_trip(m, seed):
    from mqg.algebra import MultiMatrixAlgebra

    alg = MultiMatrixAlgebra([m, 1])
    c = np.random.default_rng(seed).standard_normal((alg.dim, alg.dim)) + 0j
    assert np.array_equal(pair_coefficients(alg, pair_element(alg, c)), c)


def test_tensor_apply_identity():
    g = example("pairs_m2")
    x = g.gamma(g.M.standard_basis[3])
    assert np.allclose(tensor_apply(g.M, x, None, None), x)


@pytest.mark.parametrize("name", ("pair3", "pairs_m2"))
def test_corrupted_coproduct_is_flagged(name):
    g = example(name)
    cop = g.coproduct.copy()
    i, j = np.argwhere(np.abs(cop[1]) > 0.1)[0]
    cop[1, i, j] += 1e-3
    rep = check_bimodule(g.replace(coproduct=cop))
    assert not rep.passed
    assert rep.max_residual() >= 1e-4


def test_non_invariant_weight_is_flagged():
    g = example("pair3")
    bumped = g.T_L.copy()
    bumped[:, 4] *= 1.5
    rep = check_all(g.replace(T_L=bumped))
    assert not rep.passed


def test_scaled_T_L_is_still_invariant():
    g = example("pair3")
    assert check_left_invariant(g.replace(T_L=2 * g.T_L)).passed
    assert check_right_invariant(g).passed


def test_T_L_outside_alpha_is_reported():
    g = example("pair3")
    rep = check_all(g.replace(T_L=g.T_R))
    assert not rep.passed


def test_build_raises_on_invalid_structure():
    g = example("pair2")
    cop = g.coproduct.copy()
    cop[0] *= 2
    with pytest.raises(StructureError):
        MeasuredQuantumGroupoid.build(g.N, g.M, g.alpha, g.beta, cop, g.nu, g.T_L, g.T_R)


@given(st.lists(st.floats(0.05, 20.0), min_size=2, max_size=3))
def test_pair_groupoid_any_measure(mu):
    g = from_groupoid_commutative(pair_groupoid(len(mu), mu), check=False)
    assert check_all(g).passed


def test_phi_and_psi_values_pair3():
    """``Φ(δ_g) = μ(s(g))`` and ``Ψ(δ_g) = μ(r(g))`` for ``L^∞(G)``."""
    gr = pair_groupoid(3, MU3)
    g = example("pair3")
    phi = g.Phi.values().real
    psi = g.Psi.values().real
    exp_phi = np.array([gr.measure[gr.src[x]] for x in gr.elements])
    exp_psi = np.array([gr.measure[gr.rng[x]] for x in gr.elements])
    assert np.allclose(sorted(phi / psi), sorted(exp_phi / exp_psi))
