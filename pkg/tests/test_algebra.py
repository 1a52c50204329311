from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mqg.algebra import (BranchCutError, MultiMatrixAlgebra, StructureError, Weight, commutant, connes_cocycle,
                         decompose, gns, matrix_log_principal, modular_data, opnorm, tensor_algebra)

block_dims = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=3)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def random_density(alg: MultiMatrixAlgebra, rng: np.random.Generator) -> np.ndarray:
    x = alg.random_element(rng)
    return x @ x.conj().T + 0.2 * alg.unit()


# ---------------------------------------------------------------------------
# multi-matrix algebras
# ---------------------------------------------------------------------------


def test_matrix_units_multiply():
    alg = MultiMatrixAlgebra([2, 1])
    for (k, i, j) in alg.labels:
        for (l, p, q) in alg.labels:
            prod = alg.matrix_unit(k, i, j) @ alg.matrix_unit(l, p, q)
            expected = alg.matrix_unit(k, i, q) if (k == l and j == p) else alg.zero()
            assert np.array_equal(prod, expected)


def test_dimensions():
    alg = MultiMatrixAlgebra([1, 2, 3])
    assert alg.D == 6
    assert alg.dim == 1 + 4 + 9
    assert not alg.is_commutative()
    assert MultiMatrixAlgebra([1, 1]).is_commutative()


@given(block_dims, seeds)
def test_coefficients_round_trip(dims, seed):
    alg = MultiMatrixAlgebra(dims)
    x = alg.random_element(np.random.default_rng(seed))
    assert np.array_equal(alg.element(alg.coefficients(x)), x)
    assert alg.membership_residual(x) == 0.0


@given(block_dims, seeds)
def test_actions_are_representations(dims, seed):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(dims)
    x, y, z = (alg.random_element(rng) for _ in range(3))
    cz = alg.coefficients(z)
    assert np.allclose(alg.left_action(x) @ cz, alg.coefficients(x @ z))
    assert np.allclose(alg.right_action(y) @ cz, alg.coefficients(z @ y))
    assert np.allclose(alg.left_action(x) @ alg.left_action(y), alg.left_action(x @ y))
    assert np.allclose(alg.right_action(x) @ alg.right_action(y), alg.right_action(y @ x))
    assert np.allclose(alg.from_left_action(alg.left_action(x)), x)


def test_transpose_index_is_involution():
    alg = MultiMatrixAlgebra([3, 2])
    t = alg.transpose_index
    assert np.array_equal(t[t], np.arange(alg.dim))
    for a, b in enumerate(t):
        assert np.array_equal(alg.standard_basis[a].T, alg.standard_basis[b])


def test_tensor_algebra_blocks():
    c, perm = tensor_algebra(MultiMatrixAlgebra([1, 2]), MultiMatrixAlgebra([2, 1]))
    assert c.block_dims == (2, 1, 4, 2)
    assert sorted(perm) == list(range(c.D))


def test_opnorm_is_spectral_norm():
    x = np.random.default_rng(3).standard_normal((5, 4))
    assert opnorm(x) == pytest.approx(np.linalg.svd(x, compute_uv=False)[0], rel=1e-14)
    assert opnorm(np.zeros((0, 0))) == 0.0


def test_decompose_recovers_block_structure():
    rng = np.random.default_rng(1)
    gens = [np.kron(rng.standard_normal((2, 2)), np.eye(2)) for _ in range(2)]
    a = decompose(gens)
    assert a.block_dims == (2,)
    assert a.embedding_residual() < 1e-12
    c = commutant(a)
    assert c.block_dims == (2,)
    worst = max(opnorm(x @ y - y @ x) for x in a.concrete_basis for y in c.concrete_basis)
    assert worst < 1e-12


def test_decompose_commutative():
    gens = [np.diag([1.0, 1.0, 2.0, 3.0])]
    a = decompose(gens)
    assert sorted(a.block_dims) == [1, 1, 1]


# ---------------------------------------------------------------------------
# weights and modular theory
# ---------------------------------------------------------------------------


def test_weight_rejects_bad_densities():
    alg = MultiMatrixAlgebra([2])
    with pytest.raises(StructureError):
        Weight(alg, np.diag([1.0, 0.0]))
    with pytest.raises(StructureError):
        Weight(alg, np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(StructureError):
        Weight(alg, np.eye(3))
    with pytest.raises(StructureError):
        Weight(MultiMatrixAlgebra([1, 1]), np.ones((2, 2)))


@given(block_dims, seeds)
def test_kms_condition(dims, seed):
    """``φ(x σ_{-i}(y)) = φ(y x)``."""
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(dims)
    phi = Weight(alg, random_density(alg, rng))
    x, y = alg.random_element(rng), alg.random_element(rng)
    lhs = phi(x @ phi.sigma(-1j, y))
    assert lhs == pytest.approx(phi(y @ x), rel=1e-9, abs=1e-9)


@given(block_dims, seeds)
def test_tomita_relation(dims, seed):
    """``J Δ^{1/2} Λ(x) = Λ(x*)`` and ``J`` is an involution."""
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(dims)
    phi = Weight(alg, random_density(alg, rng))
    h = gns(phi)
    md = modular_data(phi)
    x = alg.random_element(rng)
    lhs = md.j(md.delta_power(0.5) @ h.lambda_map(x))
    assert np.allclose(lhs, h.lambda_map(x.conj().T), atol=1e-9)
    assert np.allclose(md.j.square(), np.eye(alg.dim))
    assert np.allclose(md.delta, md.delta_power(1.0), atol=1e-10)


@given(block_dims, seeds)
def test_gns_inner_product(dims, seed):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(dims)
    phi = Weight(alg, random_density(alg, rng))
    h = gns(phi)
    x, y = alg.random_element(rng), alg.random_element(rng)
    assert h.inner(h.lambda_map(x), h.lambda_map(y)) == pytest.approx(phi(y.conj().T @ x), rel=1e-9, abs=1e-9)
    assert np.allclose(h.lambda_inverse(h.lambda_map(x)), x)


@given(block_dims, seeds, st.floats(-2, 2), st.floats(-2, 2))
def test_connes_cocycle_identity(dims, seed, s, t):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(dims)
    phi = Weight(alg, random_density(alg, rng))
    psi = Weight(alg, random_density(alg, rng))
    u = connes_cocycle(phi, psi)
    assert u.cocycle_residual(s, t) < 1e-9
    assert opnorm(u(s) @ u(s).conj().T - alg.unit()) < 1e-9
    # intertwining: σ^φ_t = Ad u_t ∘ σ^ψ_t
    x = alg.random_element(rng)
    assert opnorm(phi.sigma(t, x) - u(t) @ psi.sigma(t, x) @ u(t).conj().T) < 1e-9


def test_connes_cocycle_commuting_densities():
    alg = MultiMatrixAlgebra([1, 2])
    a, b = np.diag([1.0, 2.0, 3.0]), np.diag([0.5, 4.0, 1.0])
    u = connes_cocycle(Weight(alg, a), Weight(alg, b))
    expected = np.diag(np.exp(0.7j * np.log(np.diag(a) / np.diag(b))))
    assert opnorm(u(0.7) - expected) < 1e-14


def test_matrix_log_principal():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    u = q @ np.diag(np.exp(1j * np.array([0.1, -0.5, 1.0, 2.0]))) @ q.conj().T
    log = matrix_log_principal(u)
    w = np.linalg.eigvals(log)
    assert np.allclose(sorted(w.imag), [-0.5, 0.1, 1.0, 2.0])
    with pytest.raises(BranchCutError):
        matrix_log_principal(-np.eye(2, dtype=complex) * np.exp(1e-9j))
    pos = np.diag([1.0, 4.0])
    assert np.allclose(matrix_log_principal(pos), np.diag(np.log([1.0, 4.0])))
