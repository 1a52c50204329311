"""Factories for measured quantum groupoids in finite dimension.

Covers finite groupoids (function algebra and convolution algebra), weak
Hopf C*-algebras in both directions, group algebras, the pairs and
quantum-space constructions, direct sums and tensor products.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from ._config import default_tol
from .algebra import (MultiMatrixAlgebra, StructureError, Weight, decompose, opnorm,
                      tensor_algebra)
from .hopf import (MeasuredQuantumGroupoid, PairBlocks, multiplicative_residual, pair_coefficients,
                   superop_of)
from .report import Report

__all__ = [
    "FiniteGroupoid",
    "EXAMPLES",
    "WeakHopfAlgebra",
    "build_example",
    "check_isomorphic",
    "check_weak_hopf",
    "compare_invariants",
    "cyclic_group",
    "direct_sum",
    "from_group_algebra",
    "from_groupoid_commutative",
    "from_groupoid_symmetric",
    "from_weak_hopf",
    "group_as_groupoid",
    "group_weak_hopf",
    "groupoid_weak_hopf",
    "isomorphism_invariants",
    "matrix_groupoid_weak_hopf",
    "pair_groupoid",
    "pairs_quantum_groupoid",
    "permutation_isomorphism",
    "quantum_space_quantum_groupoid",
    "shipped_examples",
    "solve_haar",
    "symmetric_group",
    "tensor_product",
    "to_weak_hopf",
    "trivial_groupoid",
]


# ============================================================================
# Finite groupoids
# ============================================================================


@dataclass(frozen=True)
class FiniteGroupoid:
    """Finite groupoid; each unit doubles as the id of its identity arrow.

    ``compose[(g, h)] = gh`` is defined exactly when ``src[g] == rng[h]``.
    """

    units: tuple[str, ...]
    elements: tuple[str, ...]
    src: Mapping[str, str]
    rng: Mapping[str, str]
    compose: Mapping[tuple[str, str], str]
    inverse: Mapping[str, str]
    measure: Mapping[str, float]

    def composable(self) -> list[tuple[str, str]]:
        return [(g, h) for g in self.elements for h in self.elements if self.src[g] == self.rng[h]]

    def validate(self) -> None:
        """Exhaustive category and groupoid axioms; raises with the offending data."""
        if not self.elements or not self.units:
            raise StructureError("groupoid must have at least one unit and one element")
        els = set(self.elements)
        if len(els) != len(self.elements) or len(set(self.units)) != len(self.units):
            raise StructureError("duplicate ids")
        for u in self.units:
            if u not in els:
                raise StructureError(f"unit {u!r} is not an element")
            if self.src.get(u) != u or self.rng.get(u) != u:
                raise StructureError(f"identity arrow {u!r} must have source and range {u!r}")
        for g in self.elements:
            if self.src.get(g) not in self.units or self.rng.get(g) not in self.units:
                raise StructureError(f"element {g!r} has invalid source or range")
        for key in self.compose:
            g, h = key
            if self.src[g] != self.rng[h]:
                raise StructureError(f"composition defined on non-composable pair {key!r}")
        for g, h in self.composable():
            gh = self.compose.get((g, h))
            if gh not in els:
                raise StructureError(f"missing composition for ({g!r}, {h!r})")
            if self.rng[gh] != self.rng[g] or self.src[gh] != self.src[h]:
                raise StructureError(f"r(gh)=r(g), s(gh)=s(h) fails for ({g!r}, {h!r})")
        for g, h in self.composable():
            for k in self.elements:
                if self.src[h] == self.rng[k]:
                    left = self.compose[(self.compose[(g, h)], k)]
                    right = self.compose[(g, self.compose[(h, k)])]
                    if left != right:
                        raise StructureError(f"associativity fails on ({g!r}, {h!r}, {k!r})")
        for g in self.elements:
            if self.compose[(self.rng[g], g)] != g or self.compose[(g, self.src[g])] != g:
                raise StructureError(f"unit law fails for {g!r}")
            gi = self.inverse.get(g)
            if gi not in els:
                raise StructureError(f"missing inverse for {g!r}")
            if self.compose.get((g, gi)) != self.rng[g] or self.compose.get((gi, g)) != self.src[g]:
                raise StructureError(f"inverse law fails for {g!r}")
        for u in self.units:
            if not self.measure.get(u, 0) > 0:
                raise StructureError(f"measure must be strictly positive on unit {u!r}")

    def modular_function(self) -> dict[str, float]:
        """``g -> μ(s(g)) / μ(r(g))`` for counting Haar systems."""
        return {g: self.measure[self.src[g]] / self.measure[self.rng[g]] for g in self.elements}


def trivial_groupoid() -> FiniteGroupoid:
    return FiniteGroupoid(("u",), ("u",), {"u": "u"}, {"u": "u"}, {("u", "u"): "u"}, {"u": "u"}, {"u": 1.0})


def pair_groupoid(n: int, measure: Sequence[float] | None = None) -> FiniteGroupoid:
    """``X × X`` with ``(x,y)(y,z) = (x,z)``, ``r(x,y) = x``, ``s(x,y) = y``."""
    pts = [str(i + 1) for i in range(n)]
    mu = [1.0] * n if measure is None else [float(m) for m in measure]

    def name(x: str, y: str) -> str:
        return x if x == y else f"{x}{y}"

    elements = list(pts) + [name(x, y) for x in pts for y in pts if x != y]
    src, rng, inv = {}, {}, {}
    for x in pts:
        for y in pts:
            g = name(x, y)
            rng[g], src[g], inv[g] = x, y, name(y, x)
    comp = {(name(x, y), name(y, z)): name(x, z) for x in pts for y in pts for z in pts}
    return FiniteGroupoid(tuple(pts), tuple(elements), src, rng, comp, inv, dict(zip(pts, mu)))


def group_as_groupoid(elements: Sequence[str], mult: Mapping[tuple[str, str], str], identity: str,
                      *, measure: float = 1.0) -> FiniteGroupoid:
    """A finite group as a one-unit groupoid (the identity is the unit)."""
    els = [identity] + [g for g in elements if g != identity]
    inv = {g: next(h for h in els if mult[(g, h)] == identity) for g in els}
    return FiniteGroupoid((identity,), tuple(els), {g: identity for g in els}, {g: identity for g in els},
                          dict(mult), inv, {identity: measure})


def cyclic_group(n: int) -> tuple[list[str], dict[tuple[str, str], str], str]:
    els = [f"g{i}" for i in range(n)]
    mult = {(f"g{i}", f"g{j}"): f"g{(i + j) % n}" for i in range(n) for j in range(n)}
    return els, mult, "g0"


def symmetric_group(n: int) -> tuple[list[str], dict[tuple[str, str], str], str]:
    """Permutations of ``0..n-1``; product ``(στ)(i) = σ(τ(i))``."""
    perms = list(itertools.permutations(range(n)))
    label = {p: "".join(map(str, p)) for p in perms}
    mult = {(label[p], label[q]): label[tuple(p[q[i]] for i in range(n))] for p in perms for q in perms}
    return [label[p] for p in perms], mult, label[tuple(range(n))]


def _diag(values: Sequence[float]) -> np.ndarray:
    return np.diag(np.asarray(values, dtype=complex))


def from_groupoid_commutative(g: FiniteGroupoid, *, check: bool = True, tol: float | None = None
                              ) -> MeasuredQuantumGroupoid:
    """Function algebra ``L^∞(G)`` with ``Γ(f)(x, y) = f(xy)``."""
    g.validate()
    els, units = list(g.elements), list(g.units)
    ei = {x: i for i, x in enumerate(els)}
    N = MultiMatrixAlgebra([1] * len(units))
    M = MultiMatrixAlgebra([1] * len(els))
    alpha = np.array([_diag([1.0 if g.rng[x] == u else 0.0 for x in els]) for u in units])
    beta = np.array([_diag([1.0 if g.src[x] == u else 0.0 for x in els]) for u in units])
    n = len(els)
    cop = np.zeros((n, n * n, n * n), dtype=complex)
    for (x, y), xy in g.compose.items():
        idx = ei[x] * n + ei[y]
        cop[ei[xy], idx, idx] = 1.0
    ui = {u: i for i, u in enumerate(units)}
    T_L = np.zeros((n, n), dtype=complex)
    T_R = np.zeros((n, n), dtype=complex)
    for x in els:
        T_L[:, ei[x]] = np.diag(alpha[ui[g.rng[x]]])
        T_R[:, ei[x]] = np.diag(beta[ui[g.src[x]]])
    nu = Weight(N, _diag([g.measure[u] for u in units]))
    ctor = MeasuredQuantumGroupoid.build if check else MeasuredQuantumGroupoid.unchecked
    return ctor(N, M, alpha, beta, cop, nu, T_L, T_R, name="groupoid", tol=tol)


def from_groupoid_symmetric(g: FiniteGroupoid, *, check: bool = True, tol: float | None = None
                            ) -> MeasuredQuantumGroupoid:
    """Convolution algebra ``L(G)`` on ``ℓ²(G)`` with ``Γ(λ_x) = λ_x ⊗ λ_x``.

    ``α = β`` embed functions on units as ``λ`` of identity arrows, and both
    operator-valued weights are the conditional expectation onto them,
    weighted by ``μ``.
    """
    g.validate()
    els, units = list(g.elements), list(g.units)
    ei = {x: i for i, x in enumerate(els)}
    n = len(els)

    def lam(x: str) -> np.ndarray:
        op = np.zeros((n, n), dtype=complex)
        for y in els:
            if g.src[x] == g.rng[y]:
                op[ei[g.compose[(x, y)]], ei[y]] = 1.0
        return op

    lams = np.array([lam(x) for x in els])
    M = decompose(lams)
    N = MultiMatrixAlgebra([1] * len(units))
    abs_lams = np.array([M.abstract(op) for op in lams])
    alpha = np.array([abs_lams[ei[u]] for u in units])
    beta = alpha.copy()
    # coefficients of matrix units in the λ basis
    flat = abs_lams.reshape(n, -1).T
    coeffs = np.linalg.lstsq(flat, M.standard_basis.reshape(M.dim, -1).T, rcond=None)[0]  # (n, dim)
    cop = np.array([sum(coeffs[x, a] * np.kron(abs_lams[x], abs_lams[x]) for x in range(n))
                    for a in range(M.dim)])
    # conditional expectation onto span{λ_u}, then multiply by nothing: T(λ_x) = δ_{x unit} λ_x
    def T(x: np.ndarray) -> np.ndarray:
        c = np.linalg.lstsq(flat, x.reshape(-1), rcond=None)[0]
        return sum(c[ei[u]] * abs_lams[ei[u]] for u in units)

    T_mat = superop_of(M, T)
    nu = Weight(N, _diag([g.measure[u] for u in units]))
    ctor = MeasuredQuantumGroupoid.build if check else MeasuredQuantumGroupoid.unchecked
    return ctor(N, M, alpha, beta, cop, nu, T_mat, T_mat.copy(), name="groupoid_symmetric", tol=tol)


# ============================================================================
# Shared helpers
# ============================================================================


def _ctor(check: bool):
    return MeasuredQuantumGroupoid.build if check else MeasuredQuantumGroupoid.unchecked


def _support_projection(N: MultiMatrixAlgebra, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    scale = np.array([1.0 / N.block_dims[k] for (k, _, _) in N.labels])
    return sum(scale[a] * np.kron(beta[a], alpha[N.transpose_index[a]]) for a in range(N.dim))


def _unit_lookup(alg: MultiMatrixAlgebra) -> np.ndarray:
    table = -np.ones((alg.D, alg.D), dtype=int)
    table[alg.rows, alg.cols] = np.arange(alg.dim)
    return table


def _tensor_index(a: MultiMatrixAlgebra, b: MultiMatrixAlgebra, c: MultiMatrixAlgebra,
                  perm: np.ndarray) -> np.ndarray:
    """``idx[p, q]``: coefficient index of ``E_p ⊗ E_q`` in the standard form of ``a ⊗ b``."""
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    table = _unit_lookup(c)
    r = inv[a.rows[:, None] * b.D + b.rows[None, :]]
    s = inv[a.cols[:, None] * b.D + b.cols[None, :]]
    return table[r, s]


def _tensor_elements(a: MultiMatrixAlgebra, b: MultiMatrixAlgebra, perm: np.ndarray):
    def tensor(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.kron(x, y)[np.ix_(perm, perm)]
    return tensor


def _pair_tensor(x: np.ndarray, y: np.ndarray, d1: int, d2: int, perm: np.ndarray) -> np.ndarray:
    """Regroup ``x ∈ M1⊗M1`` and ``y ∈ M2⊗M2`` as an element of ``M⊗M`` for ``M = M1⊗M2``."""
    x4 = x.reshape(d1, d1, d1, d1)
    y4 = y.reshape(d2, d2, d2, d2)
    # rows (p1, q1), (p2, q2) -> ((p1, p2), (q1, q2))
    t = np.einsum("abcd,efgh->aebfcgdh", x4, y4)
    d = d1 * d2
    t = t.reshape(d, d, d, d)
    t = t[np.ix_(perm, perm, perm, perm)]
    return t.reshape(d * d, d * d)


# ============================================================================
# Pairs and quantum space
# ============================================================================


def pairs_quantum_groupoid(B: MultiMatrixAlgebra, nu: Weight, *, check: bool = True,
                           tol: float | None = None) -> MeasuredQuantumGroupoid:
    """Pairs quantum groupoid over ``(B, ν)``: algebra ``B' ⊗ B`` on ``L²(B) ⊗ L²(B)``.

    ``B'`` is identified with ``B`` through ``x -> right multiplication by x^T``,
    so the abstract algebra is ``B ⊗ B``.  The concrete embedding (kept on
    the result) sends ``E_a ⊗ E_b`` to ``R(E_a^T) ⊗ L(E_b)``.
    """
    if B.embedding is not None:
        B = MultiMatrixAlgebra(B.block_dims)
    C, perm = tensor_algebra(B, B)
    idx = _tensor_index(B, B, C, perm)
    tensor = _tensor_elements(B, B, perm)
    emb = np.zeros((C.dim, B.dim * B.dim, B.dim * B.dim), dtype=complex)
    tb = B.transpose_index
    for p in range(B.dim):
        for q in range(B.dim):
            emb[idx[p, q]] = np.kron(B.right_basis[tb[p]], B.left_basis[q])
    M = MultiMatrixAlgebra(C.block_dims, emb, tol=tol)
    one = B.unit()
    basis = B.standard_basis
    alpha = np.array([tensor(one, basis[q]) for q in range(B.dim)])
    beta = np.array([tensor(basis[tb[p]], one) for p in range(B.dim)])
    left_part = np.array([tensor(basis[p], one) for p in range(B.dim)])
    e = _support_projection(B, alpha, beta)
    cop = np.zeros((M.dim, M.D ** 2, M.D ** 2), dtype=complex)
    T_L = np.zeros((M.dim, M.dim), dtype=complex)
    T_R = np.zeros((M.dim, M.dim), dtype=complex)
    vals = nu.values()
    for p in range(B.dim):
        for q in range(B.dim):
            c = idx[p, q]
            cop[c] = np.kron(alpha[q], left_part[p]) @ e
            T_L[:, c] = vals[tb[p]] * M.coefficients(alpha[q])
            T_R[:, c] = vals[q] * M.coefficients(left_part[p])
    return _ctor(check)(B, M, alpha, beta, cop, nu, T_L, T_R, name="pairs", tol=tol)


def quantum_space_quantum_groupoid(B: MultiMatrixAlgebra, nu: Weight,
                                   trace_weights: Sequence[float] | None = None, *,
                                   check: bool = True, tol: float | None = None
                                   ) -> MeasuredQuantumGroupoid:
    """Quantum space quantum groupoid ``B' ⊗_{Z(B)} B``.

    The trace on the centre is given by its values ``t_k`` on the central
    projections (default 1).  The algebra splits over the blocks of ``B``;
    block ``k`` is the pairs construction on ``M_{m_k}`` with ``T_L, T_R``
    divided by ``t_k``, which realizes ``T_R = id ⋆ T`` with ``ν = tr ∘ T``.
    """
    if B.embedding is not None:
        B = MultiMatrixAlgebra(B.block_dims)
    t = [1.0] * len(B.block_dims) if trace_weights is None else [float(x) for x in trace_weights]
    if len(t) != len(B.block_dims) or any(not x > 0 for x in t):
        raise StructureError("trace weights must be positive, one per block")
    parts = []
    for k, m in enumerate(B.block_dims):
        bk = MultiMatrixAlgebra([m])
        o = B.offsets[k]
        rho = nu.density[o:o + m, o:o + m]
        g = pairs_quantum_groupoid(bk, Weight(bk, rho, nu.tol), check=False, tol=tol)
        parts.append(g.replace(T_L=g.T_L / t[k], T_R=g.T_R / t[k]))
    out = direct_sum(parts, check=check, tol=tol)
    out.name = "qspace"
    return out


# ============================================================================
# Direct sums and tensor products
# ============================================================================


def _block_sum(algs: Sequence[MultiMatrixAlgebra]) -> MultiMatrixAlgebra:
    return MultiMatrixAlgebra([m for a in algs for m in a.block_dims])


def direct_sum(groupoids: Sequence[MeasuredQuantumGroupoid], *, check: bool = True,
               tol: float | None = None) -> MeasuredQuantumGroupoid:
    """Block-diagonal sum; every structure map acts on the diagonal."""
    if not groupoids:
        raise StructureError("direct sum of an empty family")
    N = _block_sum([g.N for g in groupoids])
    M = _block_sum([g.M for g in groupoids])
    D = M.D
    alpha = np.zeros((N.dim, D, D), dtype=complex)
    beta = np.zeros_like(alpha)
    cop = np.zeros((M.dim, D * D, D * D), dtype=complex)
    T_L = np.zeros((M.dim, M.dim), dtype=complex)
    T_R = np.zeros_like(T_L)
    rho = np.zeros((N.D, N.D), dtype=complex)
    n_off = m_off = n_dim = m_dim = 0
    for g in groupoids:
        d = g.M.D
        sl = slice(m_off, m_off + d)
        alpha[n_dim:n_dim + g.N.dim, sl, sl] = g.alpha
        beta[n_dim:n_dim + g.N.dim, sl, sl] = g.beta
        pos = (m_off + np.arange(d))
        pair = (pos[:, None] * D + pos[None, :]).reshape(-1)
        cop[m_dim:m_dim + g.M.dim][:, pair[:, None], pair[None, :]] = g.coproduct
        cs = slice(m_dim, m_dim + g.M.dim)
        T_L[cs, cs] = g.T_L
        T_R[cs, cs] = g.T_R
        rho[n_off:n_off + g.N.D, n_off:n_off + g.N.D] = g.nu.density
        n_off += g.N.D
        n_dim += g.N.dim
        m_off += d
        m_dim += g.M.dim
    name = "(" + " + ".join(g.name for g in groupoids) + ")"
    return _ctor(check)(N, M, alpha, beta, cop, Weight(N, rho), T_L, T_R, name=name, tol=tol)


def tensor_product(g1: MeasuredQuantumGroupoid, g2: MeasuredQuantumGroupoid, *, check: bool = True,
                   tol: float | None = None) -> MeasuredQuantumGroupoid:
    """``(N1⊗N2, M1⊗M2, α1⊗α2, β1⊗β2, Γ1⊗Γ2, ν1⊗ν2, T_L1⊗T_L2, T_R1⊗T_R2)``."""
    N, pn = tensor_algebra(g1.N, g2.N)
    M, pm = tensor_algebra(g1.M, g2.M)
    ni = _tensor_index(g1.N, g2.N, N, pn)
    mi = _tensor_index(g1.M, g2.M, M, pm)
    tens = _tensor_elements(g1.M, g2.M, pm)
    alpha = np.zeros((N.dim, M.D, M.D), dtype=complex)
    beta = np.zeros_like(alpha)
    for a in range(g1.N.dim):
        for b in range(g2.N.dim):
            alpha[ni[a, b]] = tens(g1.alpha[a], g2.alpha[b])
            beta[ni[a, b]] = tens(g1.beta[a], g2.beta[b])
    cop = np.zeros((M.dim, M.D ** 2, M.D ** 2), dtype=complex)
    flat = mi.reshape(-1)
    for a in range(g1.M.dim):
        for b in range(g2.M.dim):
            cop[mi[a, b]] = _pair_tensor(g1.coproduct[a], g2.coproduct[b], g1.M.D, g2.M.D, pm)
    T_L = np.zeros((M.dim, M.dim), dtype=complex)
    T_R = np.zeros_like(T_L)
    T_L[np.ix_(flat, flat)] = np.kron(g1.T_L, g2.T_L)
    T_R[np.ix_(flat, flat)] = np.kron(g1.T_R, g2.T_R)
    rho = np.kron(g1.nu.density, g2.nu.density)[np.ix_(pn, pn)]
    name = f"({g1.name} x {g2.name})"
    return _ctor(check)(N, M, alpha, beta, cop, Weight(N, rho), T_L, T_R, name=name, tol=tol)


# ============================================================================
# Weak Hopf C*-algebras
# ============================================================================


@dataclass(frozen=True, eq=False)
class WeakHopfAlgebra:
    """``(M, Γ, κ, ε)`` in a matrix-unit basis of ``M``.

    * ``coproduct``: ``(dim, D², D²)`` kron-form images ``Γ(E_a)``;
    * ``counit``: ``(dim,)`` values ``ε(E_a)``;
    * ``antipode``: ``(dim, dim)`` coefficient matrix of ``κ``.
    """

    algebra: MultiMatrixAlgebra
    coproduct: np.ndarray
    counit: np.ndarray
    antipode: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        m = self.algebra
        if self.coproduct.shape != (m.dim, m.D ** 2, m.D ** 2):
            raise StructureError("coproduct must have shape (dim, D², D²)")
        if self.counit.shape != (m.dim,) or self.antipode.shape != (m.dim, m.dim):
            raise StructureError("counit must be (dim,) and antipode (dim, dim)")

    @cached_property
    def structure(self) -> np.ndarray:
        """``g[a, p, q]`` with ``Γ(E_a) = Σ g[a,p,q] E_p ⊗ E_q``."""
        return np.array([pair_coefficients(self.algebra, x) for x in self.coproduct])

    @cached_property
    def products(self) -> np.ndarray:
        """``P[a, b, c] = 1`` iff ``E_a E_b = E_c``."""
        m = self.algebra
        out = np.zeros((m.dim, m.dim, m.dim))
        for a, (k, i, j) in enumerate(m.labels):
            for l in range(m.block_dims[k]):
                out[a, m.index(k, j, l), m.index(k, i, l)] = 1.0
        return out

    def gamma(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", self.algebra.coefficients(x), self.coproduct)

    def eps(self, x: np.ndarray) -> complex:
        return complex(self.counit @ self.algebra.coefficients(x))

    def kappa(self, x: np.ndarray) -> np.ndarray:
        m = self.algebra
        return m.element(self.antipode @ m.coefficients(x))

    @cached_property
    def _kappa_left(self) -> np.ndarray:
        """``[a, b, c]``: coefficient ``c`` of ``κ(E_a) E_b``."""
        return np.einsum("ka,kbc->abc", self.antipode, self.products)

    @cached_property
    def _left_kappa(self) -> np.ndarray:
        """``[a, b, c]``: coefficient ``c`` of ``E_a κ(E_b)``."""
        return np.einsum("kb,akc->abc", self.antipode, self.products)

    @cached_property
    def eps_t_matrix(self) -> np.ndarray:
        """Coefficient matrix of ``ε_t = m(id ⊗ κ)Γ``."""
        return np.einsum("xab,abc->cx", self.structure, self._left_kappa)

    @cached_property
    def eps_s_matrix(self) -> np.ndarray:
        """Coefficient matrix of ``ε_s = m(κ ⊗ id)Γ``."""
        return np.einsum("xab,abc->cx", self.structure, self._kappa_left)

    def eps_t(self, x: np.ndarray) -> np.ndarray:
        m = self.algebra
        return m.element(self.eps_t_matrix @ m.coefficients(x))

    def eps_s(self, x: np.ndarray) -> np.ndarray:
        m = self.algebra
        return m.element(self.eps_s_matrix @ m.coefficients(x))


def _coeff_norm(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def check_weak_hopf(w: WeakHopfAlgebra, tol: float | None = None) -> Report:
    """Weak Hopf C*-algebra axioms, plus ``κ² = id`` on ``ε_t(M)``.

    Residuals are largest coefficient deviations over matrix units.
    """
    t = default_tol() if tol is None else tol
    rep = Report()
    m = w.algebra
    g = w.structure
    P = w.products
    K = w.antipode
    pb = PairBlocks(m)
    rep.add("gamma.in_tensor", pb.outside(w.coproduct), t)
    # Γ multiplicative: Γ(E_a)Γ(E_b) = Γ(E_a E_b), computed in coefficients
    rep.add("gamma.multiplicative", multiplicative_residual(m, w.coproduct, pb), t)
    rep.add("gamma.star", _coeff_norm(g[m.transpose_index] - g.conj()[:, m.transpose_index][:, :, m.transpose_index]), t)
    left = np.einsum("xar,apq->xpqr", g, g)
    right = np.einsum("xpb,bqr->xpqr", g, g)
    rep.add("gamma.coassociative", _coeff_norm(left - right), t)
    eye = np.eye(m.dim)
    rep.add("counit.left", _coeff_norm(np.einsum("a,xab->bx", w.counit, g) - eye), t)
    rep.add("counit.right", _coeff_norm(np.einsum("b,xab->ax", w.counit, g) - eye), t)
    # (ε⊗ε)((x⊗1)Γ(1)(1⊗y)) = ε(xy)
    one = m.coefficients(m.unit())
    g1 = np.einsum("a,apq->pq", one, g)
    eps_pair = np.einsum("xpc,pq,qyd,c,d->xy", P, g1, P, w.counit, w.counit, optimize=True)
    eps_prod = np.einsum("xyc,c->xy", P, w.counit)
    rep.add("counit.weak_multiplicative", _coeff_norm(eps_pair - eps_prod), t)
    # κ anti-multiplicative and anti-comultiplicative
    kp = np.einsum("abc,kc->abk", P, K)          # κ(E_a E_b)
    pk = np.einsum("ka,lb,lkc->abc", K, K, P)     # κ(E_b) κ(E_a)
    rep.add("kappa.antimultiplicative", _coeff_norm(kp - pk), t)
    gk = np.einsum("ka,kpq->apq", K, g)           # Γ(κ(E_a))
    kkg = np.einsum("pr,qs,asr->apq", K, K, g)     # (κ⊗κ)ςΓ(E_a)
    rep.add("kappa.anticomultiplicative", _coeff_norm(gk - kkg), t)
    # (κ∘*)² = id, with * acting on coefficients by transpose-conjugate
    tr = m.transpose_index
    star = np.zeros((m.dim, m.dim))
    star[tr, np.arange(m.dim)] = 1.0
    ks = K @ star                                    # antilinear: v -> K star conj(v)
    rep.add("kappa.star_involutive", _coeff_norm(ks @ ks.conj() - eye), t)
    # m(κ⊗id⊗id)(Γ⊗id)Γ(x) = (1⊗x)Γ(1)
    c3 = np.einsum("xar,apq->xpqr", g, g)
    lhs = np.einsum("xpqr,pqs->xsr", c3, w._kappa_left)
    rhs = np.einsum("pq,xqs->xps", g1, P)          # (1⊗E_x)Γ(1)
    rep.add("kappa.weak_antipode", _coeff_norm(lhs - rhs), t)
    # κ² = id on ε_t(M)
    et = w.eps_t_matrix
    rep.add("kappa.square_on_target", _coeff_norm(K @ K @ et - et), t)
    return rep


def solve_haar(w: WeakHopfAlgebra, *, tol: float | None = None) -> np.ndarray:
    """Normalized Haar measure as its values ``h(E_a)``.

    Linear system: ``(id⊗h)Γ(1) = 1``, ``h∘κ = h`` and
    ``(id⊗h)((1⊗y)Γ(x)) = κ((id⊗h)(Γ(y)(1⊗x)))`` over matrix units; the
    unique solution must be a faithful positive functional.
    """
    t = default_tol() if tol is None else tol
    m = w.algebra
    g, P, K = w.structure, w.products, w.antipode
    one = m.coefficients(m.unit())
    g1 = np.einsum("a,apq->pq", one, g)
    rows, rhs = [g1], [one]
    rows.append(K.T - np.eye(m.dim))
    rhs.append(np.zeros(m.dim))
    # (id⊗h)((1⊗E_y)Γ(E_x)) = Σ_a E_a Σ_{b} g[x,a,b] h(E_y E_b)
    lhs = np.einsum("xab,ybc->xyac", g, P)
    # κ((id⊗h)(Γ(E_y)(1⊗E_x))) = Σ_a κ(E_a) Σ_b g[y,a,b] h(E_b E_x)
    inner = np.einsum("yab,bxc->xyac", g, P)
    right = np.einsum("ka,xyac->xykc", K, inner)
    rows.append((lhs - right).reshape(-1, m.dim))
    rhs.append(np.zeros(m.dim ** 3))
    A = np.concatenate(rows)
    b = np.concatenate(rhs).astype(complex)
    h, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = float(np.linalg.norm(A @ h - b))
    if res > 1e3 * t:
        raise StructureError(f"Haar measure equations are inconsistent (residual {res:.3e})")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size < m.dim or sv[m.dim - 1] <= 1e-9 * sv[0]:
        raise StructureError("Haar measure is not unique")
    density = m.element(h[m.transpose_index])
    herm = opnorm(density - density.conj().T)
    wmin = np.linalg.eigvalsh((density + density.conj().T) / 2).min()
    if herm > 1e3 * t or wmin <= t:
        raise StructureError(f"Haar solution is not a faithful positive functional (min eig {wmin:.3e})")
    return h


def from_weak_hopf(w: WeakHopfAlgebra, *, check: bool = True, tol: float | None = None,
                   haar: np.ndarray | None = None) -> MeasuredQuantumGroupoid:
    """``(ε_t(M), M, id, κ|, Γ, h∘α, E^t_h, E^s_h)``.

    Requires ``Γ(1)`` to equal the canonical support projection of the fiber
    product, so that ``Γ`` is its own compression.
    """
    m = w.algebra
    h = solve_haar(w, tol=tol) if haar is None else np.asarray(haar, dtype=complex)
    images = np.array([w.eps_t(e) for e in m.standard_basis])
    N_emb = decompose(images, tol=tol)
    span_rank = np.linalg.matrix_rank(images.reshape(m.dim, -1), tol=1e-8)
    if N_emb.dim != span_rank:
        raise StructureError("ε_t(M) is not a *-subalgebra")
    N = MultiMatrixAlgebra(N_emb.block_dims)
    alpha = np.array(N_emb.concrete_basis)
    beta = np.array([w.kappa(a) for a in alpha])
    e = _support_projection(N, alpha, beta)
    g1 = w.gamma(m.unit())
    if opnorm(g1 - e) > 1e3 * (default_tol() if tol is None else tol):
        raise StructureError("Γ(1) differs from the canonical fiber-product projection")
    g = w.structure
    T_L = np.einsum("xab,b->ax", g, h)
    T_R = np.einsum("xab,a->bx", g, h)
    nu_vals = np.array([h @ m.coefficients(a) for a in alpha])
    nu = Weight(N, N.element(nu_vals[N.transpose_index]))
    return _ctor(check)(N, m, alpha, beta, w.coproduct, nu, T_L, T_R, name=w.name or "weak_hopf", tol=tol)


def to_weak_hopf(g: MeasuredQuantumGroupoid, *, antipode=None, tol: float | None = None) -> WeakHopfAlgebra:
    """``(M, Γ, κ, ε)`` from a finite-dimensional measured quantum groupoid.

    ``Γ`` is the stored coproduct (already realized inside ``M⊗M``), ``ε``
    solves ``(ε⊗id)Γ = id = (id⊗ε)Γ`` and ``κ`` is ``S`` dressed by
    ``a = n_o^{1/2} d^{1/2}``: ``κ(x) = α(a^{-1})β(a) S(x) α(a)β(a^{-1})``.
    """
    from .antipode import build_antipode

    t = g.tol if tol is None else tol
    m, n = g.M, g.N
    if antipode is None:
        _, antipode = build_antipode(g)
    gc = g.gamma_coefficients
    eye = np.eye(m.dim)
    # (ε⊗id)Γ = id: Σ_a g[x,a,b] ε_a = δ_bx;  (id⊗ε)Γ = id: Σ_b g[x,a,b] ε_b = δ_ax
    A = np.concatenate([gc.transpose(2, 0, 1).reshape(m.dim * m.dim, m.dim),
                        gc.transpose(1, 0, 2).reshape(m.dim * m.dim, m.dim)])
    b = np.concatenate([eye.reshape(-1), eye.reshape(-1)]).astype(complex)
    eps, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = float(np.linalg.norm(A @ eps - b))
    if res > 1e3 * t:
        raise StructureError(f"no counit solves the counit equations (residual {res:.3e})")
    # dressing element a = n_o^{1/2} d^{1/2} is ρ_ν^{1/2}/√m_k blockwise
    scale = n.from_blocks([np.eye(mk) / np.sqrt(mk) for mk in n.block_dims])
    a = n.power(g.nu.density, 0.5) @ scale
    a_inv = np.linalg.inv(a)
    left = g.alpha_of(a_inv) @ g.beta_of(a)
    right = g.alpha_of(a) @ g.beta_of(a_inv)
    S = antipode.S
    kappa = np.array([m.coefficients(left @ m.element(S[:, c]) @ right) for c in range(m.dim)]).T
    return WeakHopfAlgebra(m, g.coproduct.copy(), eps, kappa, name=g.name)


def matrix_groupoid_weak_hopf(n: int) -> WeakHopfAlgebra:
    """``M_n`` with ``Γ(e_ij) = e_ij ⊗ e_ij``, ``ε(e_ij) = 1``, ``κ(e_ij) = e_ji``."""
    m = MultiMatrixAlgebra([n])
    cop = np.array([np.kron(e, e) for e in m.standard_basis])
    kappa = np.zeros((m.dim, m.dim), dtype=complex)
    kappa[m.transpose_index, np.arange(m.dim)] = 1.0
    return WeakHopfAlgebra(m, cop, np.ones(m.dim, dtype=complex), kappa, name=f"M{n}")


def groupoid_weak_hopf(gr: FiniteGroupoid, *, seed: int = 0) -> WeakHopfAlgebra:
    """Convolution algebra of a finite groupoid: ``Γ(λ_x) = λ_x⊗λ_x``, ``ε(λ_x) = 1``, ``κ(λ_x) = λ_{x⁻¹}``."""
    gr.validate()
    els = list(gr.elements)
    ei = {x: i for i, x in enumerate(els)}
    n = len(els)
    lams = np.zeros((n, n, n), dtype=complex)
    for (x, y), xy in gr.compose.items():
        lams[ei[x], ei[xy], ei[y]] = 1.0
    emb = decompose(lams, seed=seed)
    m = MultiMatrixAlgebra(emb.block_dims)
    abs_lams = np.array([emb.abstract(op) for op in lams])
    flat = np.array([m.coefficients(x) for x in abs_lams]).T       # (dim, n)
    coeffs = np.linalg.solve(flat, np.eye(m.dim))                   # E_a = Σ_x coeffs[x, a] λ_x
    cop = np.einsum("xa,xij->aij", coeffs, np.array([np.kron(l, l) for l in abs_lams]))
    counit = coeffs.sum(axis=0)
    inv = np.array([ei[gr.inverse[x]] for x in els])
    kappa = flat[:, inv] @ coeffs
    return WeakHopfAlgebra(m, cop, counit, kappa, name="groupoid_algebra")


def group_weak_hopf(elements: Sequence[str], mult: Mapping[tuple[str, str], str], identity: str,
                    *, seed: int = 0) -> WeakHopfAlgebra:
    """Group algebra ``ℂ[G]`` as a (genuine) Hopf C*-algebra."""
    out = groupoid_weak_hopf(group_as_groupoid(elements, mult, identity), seed=seed)
    return WeakHopfAlgebra(out.algebra, out.coproduct, out.counit, out.antipode, name="group_algebra")


def from_group_algebra(elements: Sequence[str], mult: Mapping[tuple[str, str], str], identity: str,
                       *, check: bool = True, tol: float | None = None, seed: int = 0
                       ) -> MeasuredQuantumGroupoid:
    """Measured quantum groupoid (quantum group, ``N = ℂ``) of ``ℂ[G]`` with its Haar state."""
    return from_weak_hopf(group_weak_hopf(elements, mult, identity, seed=seed), check=check, tol=tol)


# ============================================================================
# Isomorphism checks
# ============================================================================


def _sorted_spectrum(x: np.ndarray) -> np.ndarray:
    return np.sort(np.linalg.eigvalsh((x + x.conj().T) / 2))


def isomorphism_invariants(g: MeasuredQuantumGroupoid, *, with_modulus: bool = False,
                           weights: bool = True) -> dict:
    """Invariants preserved by isomorphisms of measured quantum groupoids.

    Matrix-unit coordinates are Hilbert-Schmidt orthonormal and every
    *-isomorphism preserves the canonical trace, so singular values of ``Γ``,
    ``T_L`` and ``T_R`` in these coordinates are invariant.  With
    ``weights=False`` only the Hopf bimodule ``(N, M, α, β, Γ, ν)`` is compared.
    """
    span = np.concatenate([g.alpha, g.beta]).reshape(2 * g.N.dim, -1)
    inv = {
        "N_blocks": sorted(g.N.block_dims),
        "M_blocks": sorted(g.M.block_dims),
        "alpha_beta_span": int(np.linalg.matrix_rank(span, tol=1e-8)),
        "nu_spectrum": _sorted_spectrum(g.nu.density),
        "gamma_singular_values": np.linalg.svd(g.gamma_coefficients.reshape(g.M.dim, -1), compute_uv=False),
    }
    if weights:
        inv["phi_spectrum"] = _sorted_spectrum(g.Phi.density)
        inv["psi_spectrum"] = _sorted_spectrum(g.Psi.density)
        inv["T_L_singular_values"] = np.linalg.svd(g.T_L, compute_uv=False)
        inv["T_R_singular_values"] = np.linalg.svd(g.T_R, compute_uv=False)
    if with_modulus:
        from .antipode import build_antipode
        from .modulus import extract_modulus

        anti = build_antipode(g)[1]
        md = extract_modulus(g, anti)
        inv["delta_spectrum"] = _sorted_spectrum(md.delta)
        inv["lambda_spectrum"] = _sorted_spectrum(md.lam)
        inv["D_spectrum"] = _sorted_spectrum(anti.polar.D)
    return inv


def compare_invariants(g1: MeasuredQuantumGroupoid, g2: MeasuredQuantumGroupoid, *, tol: float | None = None,
                       with_modulus: bool = False, weights: bool = True) -> Report:
    t = default_tol() if tol is None else tol
    a = isomorphism_invariants(g1, with_modulus=with_modulus, weights=weights)
    b = isomorphism_invariants(g2, with_modulus=with_modulus, weights=weights)
    rep = Report()
    for key in a:
        x, y = a[key], b[key]
        if isinstance(x, np.ndarray):
            ok = x.shape == y.shape
            res = float(np.max(np.abs(x - y), initial=0.0)) if ok else np.inf
            rep.add(f"invariant.{key}", res, t)
        else:
            rep.flag(f"invariant.{key}", x == y, detail=f"{x} vs {y}")
    return rep


def _atom_signature(g: MeasuredQuantumGroupoid, a: int, digits: int, weights: bool) -> tuple:
    c = g.gamma_coefficients
    sig = (tuple(np.round(np.sort(np.abs(c[a]).ravel()), digits)),)
    if weights:
        phi, psi = g.Phi.values(), g.Psi.values()
        sig += (round(phi[a].real, digits), round(psi[a].real, digits),
                tuple(np.round(np.sort(np.abs(g.T_L[:, a])), digits)))
    return sig


def permutation_isomorphism(g1: MeasuredQuantumGroupoid, g2: MeasuredQuantumGroupoid, *,
                            tol: float | None = None, max_dim: int = 9, weights: bool = True
                            ) -> tuple[np.ndarray, np.ndarray] | None:
    """Explicit isomorphism for commutative ``M`` as permutations of minimal projections.

    Returns ``(p, q)`` with ``p`` acting on atoms of ``M`` and ``q`` on atoms of
    ``N``, or ``None`` when no isomorphism exists.
    """
    t = default_tol() if tol is None else tol
    m1, m2 = g1.M, g2.M
    if not (m1.is_commutative() and m2.is_commutative()):
        raise StructureError("permutation search needs commutative M")
    if m1.dim != m2.dim or g1.N.dim != g2.N.dim:
        return None
    n = m1.dim
    if n > max_dim:
        raise StructureError(f"permutation search limited to dim M ≤ {max_dim}")
    digits = max(1, int(-np.log10(t)) - 1)
    sig1 = [_atom_signature(g1, a, digits, weights) for a in range(n)]
    sig2 = [_atom_signature(g2, a, digits, weights) for a in range(n)]
    c1, c2 = g1.gamma_coefficients, g2.gamma_coefficients
    t1, t2 = g1.T_L, g2.T_L
    r1, r2 = g1.T_R, g2.T_R
    perm = -np.ones(n, dtype=int)
    used = np.zeros(n, dtype=bool)

    def consistent(k: int) -> bool:
        idx = np.arange(k + 1)
        img = perm[: k + 1]
        sub1 = c1[np.ix_(idx, idx, idx)]
        sub2 = c2[np.ix_(img, img, img)]
        if np.max(np.abs(sub1 - sub2)) > t:
            return False
        if not weights:
            return True
        for a1, a2 in ((t1, t2), (r1, r2)):
            if np.max(np.abs(a1[np.ix_(idx, idx)] - a2[np.ix_(img, img)])) > t:
                return False
        return True

    def search(k: int) -> bool:
        if k == n:
            return True
        for cand in range(n):
            if used[cand] or sig1[k] != sig2[cand]:
                continue
            perm[k], used[cand] = cand, True
            if consistent(k) and search(k + 1):
                return True
            perm[k], used[cand] = -1, False
        return False

    if not search(0):
        return None
    # ν, α, β: match the atoms of N through the images of its matrix units
    a1 = np.array([np.diag(x).real for x in g1.alpha])
    a2 = np.array([np.diag(x).real for x in g2.alpha])[:, perm]
    b1 = np.array([np.diag(x).real for x in g1.beta])
    b2 = np.array([np.diag(x).real for x in g2.beta])[:, perm]
    nu1, nu2 = g1.nu.values().real, g2.nu.values().real
    q = -np.ones(g1.N.dim, dtype=int)
    for u in range(g1.N.dim):
        for v in range(g2.N.dim):
            if (np.max(np.abs(a1[u] - a2[v])) <= t and np.max(np.abs(b1[u] - b2[v])) <= t
                    and abs(nu1[u] - nu2[v]) <= t):
                q[u] = v
                break
        if q[u] < 0:
            return None
    return perm, q


def check_isomorphic(g1: MeasuredQuantumGroupoid, g2: MeasuredQuantumGroupoid, *, tol: float | None = None,
                     with_modulus: bool = False, weights: bool = True) -> Report:
    """Invariant comparison, plus an explicit permutation isomorphism for small commutative ``M``."""
    rep = compare_invariants(g1, g2, tol=tol, with_modulus=with_modulus, weights=weights)
    if g1.M.is_commutative() and g2.M.is_commutative() and g1.M.dim <= 9:
        found = permutation_isomorphism(g1, g2, tol=tol, weights=weights)
        rep.flag("isomorphism.explicit_permutation", found is not None)
    return rep


# ============================================================================
# Shipped examples
# ============================================================================


def _m2_pairs() -> MeasuredQuantumGroupoid:
    b = MultiMatrixAlgebra([2])
    return pairs_quantum_groupoid(b, Weight(b, _diag([1 / 3, 2 / 3])))


def _qspace() -> MeasuredQuantumGroupoid:
    b = MultiMatrixAlgebra([1, 2])
    nu = Weight(b, b.from_blocks([np.array([[0.5]]), np.diag([0.2, 0.3])]))
    return quantum_space_quantum_groupoid(b, nu, trace_weights=[2.0, 0.5])


def _z2() -> MeasuredQuantumGroupoid:
    return from_group_algebra(*cyclic_group(2))


def _z3() -> MeasuredQuantumGroupoid:
    return from_group_algebra(*cyclic_group(3))


EXAMPLES: dict[str, tuple[str, object]] = {
    "trivial": ("one-element groupoid", lambda: from_groupoid_commutative(trivial_groupoid())),
    "pair2": ("pair groupoid on {1,2}, μ = (1/3, 2/3)",
              lambda: from_groupoid_commutative(pair_groupoid(2, [1 / 3, 2 / 3]))),
    "pair3": ("pair groupoid on {1,2,3}, μ = (1/6, 1/3, 1/2)",
              lambda: from_groupoid_commutative(pair_groupoid(3, [1 / 6, 1 / 3, 1 / 2]))),
    "pair2_convolution": ("convolution algebra of the pair groupoid on {1,2}",
                          lambda: from_groupoid_symmetric(pair_groupoid(2, [1 / 3, 2 / 3]))),
    "z2": ("group algebra of Z/2", _z2),
    "z3": ("group algebra of Z/3", _z3),
    "m2_weak_hopf": ("M_2 pair-groupoid weak Hopf algebra", lambda: from_weak_hopf(matrix_groupoid_weak_hopf(2))),
    "pairs_m2": ("pairs quantum groupoid over (M_2, diag(1/3, 2/3))", _m2_pairs),
    "qspace_c_m2": ("quantum space quantum groupoid over C ⊕ M_2", _qspace),
    "sum_z2_pair2": ("direct sum Z/2 ⊕ pair groupoid on {1,2}",
                     lambda: direct_sum([_z2(), from_groupoid_commutative(pair_groupoid(2, [1 / 3, 2 / 3]))])),
    "tensor_z2_z3": ("tensor product Z/2 ⊗ Z/3", lambda: tensor_product(_z2(), _z3())),
}


def shipped_examples() -> list[str]:
    return list(EXAMPLES)


def build_example(name: str) -> MeasuredQuantumGroupoid:
    try:
        desc, factory = EXAMPLES[name]
    except KeyError:
        raise StructureError(f"unknown example {name!r}; known: {', '.join(EXAMPLES)}") from None
    g = factory()
    g.name = name
    return g
