from __future__ import annotations

import numpy as np
import pytest
from helpers import example
from hypothesis import given
from hypothesis import strategies as st
from oracles import groupoid_W_G_ambient

from mqg.algebra import opnorm
from mqg.constructors import from_groupoid_commutative, group_as_groupoid, pair_groupoid, shipped_examples, symmetric_group
from mqg.reltensor import transfer
from mqg.unitary import (PseudoMultiplicativeUnitary, build_U, build_W, build_W_prime, check_cofixed_vector,
                         check_commutations, check_coproduct_implemented, check_generation, check_pentagon,
                         check_unitary)

SMALL = [n for n in shipped_examples() if example(n).M.dim ** 3 <= 2000]


@pytest.mark.parametrize("name", shipped_examples())
def test_W_and_W_prime_unitary(name):
    g = example(name)
    for w in (build_W(g), build_W_prime(g)):
        assert check_unitary(w, 1e-9).passed


@pytest.mark.parametrize("name", shipped_examples())
def test_coproduct_implemented_and_commutations(name):
    g = example(name)
    u = build_U(g)
    assert check_coproduct_implemented(g, u) < 1e-9
    assert check_commutations(g, u).passed
    assert check_cofixed_vector(g, u).passed


@pytest.mark.parametrize("name", shipped_examples())
def test_generation(name):
    g = example(name)
    rep = check_generation(g, build_W_prime(g), build_U(g))
    assert rep.passed, rep.summary()


@pytest.mark.parametrize("name", SMALL)
def test_pentagon(name):
    g = example(name)
    assert check_pentagon(g) < 1e-9


def test_pentagon_refuses_large_ambient():
    with pytest.raises(ValueError):
        check_pentagon(example("pairs_m2"), max_ambient=100)


@given(st.lists(st.floats(0.1, 10.0), min_size=2, max_size=2))
def test_U_is_transported_W_G_pair2(mu):
    gr = pair_groupoid(2, mu)
    g = from_groupoid_commutative(gr, check=False)
    u = build_U(g)
    op, defect = transfer(u.source, u.target, groupoid_W_G_ambient(gr))
    assert defect < 1e-9
    assert opnorm(op - u.matrix) < 1e-9


def test_U_is_transported_W_G_symmetric_group():
    gr = group_as_groupoid(*symmetric_group(3))
    g = from_groupoid_commutative(gr)
    u = build_U(g)
    op, defect = transfer(u.source, u.target, groupoid_W_G_ambient(gr))
    assert defect < 1e-9
    assert opnorm(op - u.matrix) < 1e-9


def test_perturbed_unitary_detected():
    g = example("pair2")
    w = build_W(g)
    bad = PseudoMultiplicativeUnitary(w.matrix * 1.001, w.source, w.target, "W", w.isometry_defect)
    rep = check_unitary(bad, 1e-9)
    assert not rep.passed
    assert check_pentagon(g, bad) > 1e-6
