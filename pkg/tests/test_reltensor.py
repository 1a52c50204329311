from __future__ import annotations

import numpy as np
import pytest
from helpers import example

from mqg.algebra import StructureError, opnorm
from mqg.reltensor import (RelativeTensorSpace, flip, gram_from_brackets, leg_operator, make_basis, op_tensor,
                           permutation_operator, relative_tensor, slice_left, slice_right)

EXAMPLES = ("pair2", "pairs_m2", "qspace_c_m2", "z3")


@pytest.mark.parametrize("name", EXAMPLES)
def test_gram_closed_form_matches_brackets(name):
    g = example(name)
    t = g.T_ba
    slow = gram_from_brackets(g.beta_H, g.alpha_H, g.nu)
    assert opnorm(t.Q - slow) < 1e-10 * max(1.0, opnorm(slow))


@pytest.mark.parametrize("name", EXAMPLES)
def test_quotient_coordinates(name):
    t = example(name).T_ba
    assert opnorm(t.P.conj().T @ t.P - t.Q) < 1e-10 * max(1.0, opnorm(t.Q))
    assert t.dim == np.linalg.matrix_rank(t.Q, tol=1e-9 * opnorm(t.Q))
    assert opnorm(t.P @ t.P_pinv - np.eye(t.dim)) < 1e-10


def test_trivial_base_is_plain_tensor_product():
    g = example("z3")
    t = g.T_ba
    assert t.dim == t.h * t.k
    xi, eta = np.arange(t.h) + 1j, np.ones(t.k)
    v = t.vector(xi, eta)
    assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(xi) * np.linalg.norm(eta), rel=1e-12)


def test_wrong_leg_kinds_rejected():
    g = example("pair2")
    with pytest.raises(StructureError):
        RelativeTensorSpace(g.alpha_H, g.alpha_H, g.nu)


@pytest.mark.parametrize("name", ("pair2", "pairs_m2"))
def test_flip_is_unitary_and_involutive(name):
    t = example(name).T_ba
    f, back = flip(t)
    assert opnorm(f.conj().T @ f - np.eye(t.dim)) < 1e-10
    f2, _ = flip(back, t)
    assert opnorm(f2 @ f - np.eye(t.dim)) < 1e-10


@pytest.mark.parametrize("name", ("pair2", "pairs_m2"))
def test_op_tensor_multiplicative(name, rng):
    g = example(name)
    t = g.T_ba
    xs = g.beta_H.commutant.concrete_basis
    ys = g.alpha_H.commutant.concrete_basis
    x1, x2 = (np.einsum("a,aij->ij", rng.standard_normal(len(xs)), xs) for _ in range(2))
    y1, y2 = (np.einsum("a,aij->ij", rng.standard_normal(len(ys)), ys) for _ in range(2))
    lhs = op_tensor(x1, y1, t) @ op_tensor(x2, y2, t)
    assert opnorm(lhs - op_tensor(x1 @ x2, y1 @ y2, t)) < 1e-9
    assert opnorm(op_tensor(x1, y1, t).conj().T - op_tensor(x1.conj().T, y1.conj().T, t)) < 1e-9


def test_op_tensor_rejects_non_commutant():
    g = example("pair2")
    t = g.T_ba
    bad = np.random.default_rng(0).standard_normal((t.h, t.h))
    with pytest.raises(StructureError):
        op_tensor(bad, np.eye(t.k), t)


@pytest.mark.parametrize("name", EXAMPLES)
def test_make_basis(name):
    rep = example(name).alpha_H
    basis = make_basis(rep)
    assert basis.completeness_residual() < 1e-9
    assert basis.orthogonality_residual() < 1e-9


def test_slices_of_identity(rng):
    t = example("pairs_m2").T_ba
    xi1, xi2 = rng.standard_normal(t.h), rng.standard_normal(t.h)
    eta1, eta2 = rng.standard_normal(t.k), rng.standard_normal(t.k)
    one = np.eye(t.dim)
    # (ω_{ξ1,ξ2} ⋆ id)(1) = λ_{ξ2}* λ_{ξ1} and the matrix element identity
    s = slice_left(t, xi1, xi2, one)
    assert np.vdot(eta2, s @ eta1) == pytest.approx(np.vdot(t.vector(xi2, eta2), t.vector(xi1, eta1)))
    s2 = slice_right(t, eta1, eta2, one)
    assert np.vdot(xi2, s2 @ xi1) == pytest.approx(np.vdot(t.vector(xi2, eta2), t.vector(xi1, eta1)))


def test_leg_and_permutation_operators():
    rng = np.random.default_rng(0)
    a, b, c = rng.standard_normal((2, 2)), rng.standard_normal((3, 3)), rng.standard_normal((4, 4))
    dims = (2, 3, 4)
    assert np.allclose(leg_operator(np.kron(a, c), [0, 2], dims) @ leg_operator(b, [1], dims), np.kron(np.kron(a, b), c))
    v = [rng.standard_normal(d) for d in dims]
    p = permutation_operator([2, 0, 1], dims)
    assert np.allclose(p @ np.kron(np.kron(v[0], v[1]), v[2]), np.kron(np.kron(v[2], v[0]), v[1]))


def test_relative_tensor_default_weight():
    g = example("pair2")
    t = relative_tensor(g.beta_H, g.alpha_H, g.nu)
    assert opnorm(t.Q - g.T_ba.Q) == 0.0
