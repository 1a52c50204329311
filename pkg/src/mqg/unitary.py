"""Fundamental unitaries ``W`` and ``W'`` and their verification.

``U_H: H ⊗_{α,β̂,ν^o} H_Φ -> H ⊗_{β,α,ν} H_Φ`` is assembled from
``U_H(v ⊗ Λ_Φ(a)) = Σ_i ξ_i ⊗ Λ_Φ((ω_{v,ξ_i} ⋆ id)Γ(a))`` over a basis
``(ξ_i)`` of ``H_β``, and ``W = U_H*``.  Similarly
``U'_H(Λ_Ψ(a) ⊗ v) = Σ_i Λ_Ψ((id ⋆ ω_{v,η_i})Γ(a)) ⊗ η_i`` over a basis of
``_αH`` gives ``W' = U'_H: H ⊗_{α̂,β,ν^o} H -> H ⊗_{β,α,ν} H``.

The pentagon is evaluated on three-leg quotients of ``H ⊗ H ⊗ H`` whose Gram
operator is the product of the link Grams; leg flips are then plain
permutations of tensor factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import StructureError, opnorm
from .hopf import MeasuredQuantumGroupoid
from .reltensor import MultiLegSpace, RelBasis, RelativeTensorSpace, make_basis, op_tensor, transfer
from .report import Report

__all__ = [
    "PseudoMultiplicativeUnitary",
    "build_U",
    "build_W",
    "build_W_prime",
    "check_cofixed_vector",
    "check_commutations",
    "check_coproduct_implemented",
    "check_generation",
    "check_pentagon",
    "check_unitary",
    "slices_left",
]


@dataclass(frozen=True)
class PseudoMultiplicativeUnitary:
    """Unitary ``matrix: source -> target`` between relative tensor quotients."""

    matrix: np.ndarray
    source: RelativeTensorSpace
    target: RelativeTensorSpace
    label: str
    isometry_defect: float

    @property
    def adjoint(self) -> np.ndarray:
        return self.matrix.conj().T


def _omega_inverse_columns(g: MeasuredQuantumGroupoid, weight_sqrt_inv: np.ndarray) -> np.ndarray:
    """Stack ``Γ(Λ^{-1}(e_q))`` over coordinate vectors ``e_q``."""
    m = g.M
    linv = m.right_action(weight_sqrt_inv)  # coefficients of Λ^{-1}(e_q) are columns
    return np.einsum("aq,aij->qij", linv, g.gamma_c)


def build_U(g: MeasuredQuantumGroupoid, basis: RelBasis | None = None) -> PseudoMultiplicativeUnitary:
    """The fundamental isometry ``U_H`` (unitary in finite dimension)."""
    src, tgt = g.T_ab_hat, g.T_ba
    h = g.M.dim
    if basis is None:
        basis = make_basis(g.beta_H)
    lams = [tgt.lam(xi) for xi in basis.vectors]
    proj = sum(l_ @ l_.conj().T for l_ in lams)
    gam = _omega_inverse_columns(g, g.Phi.inv_sqrt)
    omega = g.H.omega
    left = np.einsum("spk,k->sp", tgt.P3, omega)  # λ_{e_p} Λ_Φ(1)
    cols = np.einsum("qst,tp->spq", gam, left).reshape(tgt.dim, h * h)
    lin = proj @ cols
    defect = opnorm(lin.conj().T @ lin - src.P.conj().T @ src.P) / max(1.0, opnorm(src.Q))
    if defect > 1e3 * g.tol:
        raise StructureError(f"U_H is not isometric (defect {defect:.3e}); check invariance of T_L")
    u = lin @ src.P_pinv
    return PseudoMultiplicativeUnitary(u, src, tgt, "U_H", defect)


def build_W(g: MeasuredQuantumGroupoid, basis: RelBasis | None = None) -> PseudoMultiplicativeUnitary:
    """``W = U_H*: H ⊗_{β,α,ν} H -> H ⊗_{α,β̂,ν^o} H``."""
    u = build_U(g, basis)
    return PseudoMultiplicativeUnitary(u.adjoint, u.target, u.source, "W", u.isometry_defect)


def build_W_prime(g: MeasuredQuantumGroupoid, basis: RelBasis | None = None) -> PseudoMultiplicativeUnitary:
    """``W' = U'_H: H ⊗_{α̂,β,ν^o} H -> H ⊗_{β,α,ν} H``."""
    src, tgt = g.T_ahat_b, g.T_ba
    h = g.M.dim
    if basis is None:
        basis = make_basis(g.alpha_H)
    rhos = [tgt.rho(eta) for eta in basis.vectors]
    proj = sum(r_ @ r_.conj().T for r_ in rhos)
    gam = _omega_inverse_columns(g, g.Psi.inv_sqrt)
    omega = g.H_Psi.omega
    right = np.einsum("skq,k->sq", tgt.P3, omega)  # ρ_{e_q} Λ_Ψ(1)
    cols = np.einsum("pst,tq->spq", gam, right).reshape(tgt.dim, h * h)
    lin = proj @ cols
    defect = opnorm(lin.conj().T @ lin - src.P.conj().T @ src.P) / max(1.0, opnorm(src.Q))
    if defect > 1e3 * g.tol:
        raise StructureError(f"U'_H is not isometric (defect {defect:.3e}); check invariance of T_R")
    u = lin @ src.P_pinv
    return PseudoMultiplicativeUnitary(u, src, tgt, "W'", defect)


# ============================================================================
# Checks
# ============================================================================


def check_unitary(w: PseudoMultiplicativeUnitary, tol: float) -> Report:
    rep = Report()
    m = w.matrix
    rep.add(f"{w.label}.isometry", opnorm(m.conj().T @ m - np.eye(m.shape[1])), tol)
    rep.add(f"{w.label}.coisometry", opnorm(m @ m.conj().T - np.eye(m.shape[0])), tol)
    return rep


def check_commutations(g: MeasuredQuantumGroupoid, u: PseudoMultiplicativeUnitary, tol: float | None = None
                       ) -> Report:
    """Leg relations of ``U_H`` on matrix units of ``N``.

    ``U(1⊗α(n)) = (α(n)⊗1)U``, ``U(1⊗β(n)) = (1⊗β(n))U``,
    ``U(β(n)⊗1) = (1⊗β̂(n))U`` and ``U(β̂(n)⊗1) = (β̂(n)⊗1)U``.
    """
    t = g.tol if tol is None else tol
    src, tgt, U = u.source, u.target, u.matrix
    one = np.eye(g.M.dim)
    worst = [0.0, 0.0, 0.0, 0.0]
    for a, b, bh in zip(g.alpha_H.images, g.beta_H.images, g.beta_hat.images):
        pairs = [
            (op_tensor(one, a, src), op_tensor(a, one, tgt)),
            (op_tensor(one, b, src), op_tensor(one, b, tgt)),
            (op_tensor(b, one, src), op_tensor(one, bh, tgt)),
            (op_tensor(bh, one, src), op_tensor(bh, one, tgt)),
        ]
        for i, (x, y) in enumerate(pairs):
            worst[i] = max(worst[i], opnorm(U @ x - y @ U))
    rep = Report()
    for name, w in zip(("U(1⊗α)=(α⊗1)U", "U(1⊗β)=(1⊗β)U", "U(β⊗1)=(1⊗β̂)U", "U(β̂⊗1)=(β̂⊗1)U"), worst):
        rep.add(f"commutation {name}", w, t)
    return rep


def check_coproduct_implemented(g: MeasuredQuantumGroupoid, u: PseudoMultiplicativeUnitary,
                                tol: float | None = None) -> float:
    """Max over matrix units of ``‖Γ(m) − U_H (1 ⊗ m) U_H*‖``."""
    one = np.eye(g.M.dim)
    worst = 0.0
    for a, op in enumerate(g.pi_basis):
        rhs = u.matrix @ op_tensor(one, op, u.source) @ u.adjoint
        worst = max(worst, opnorm(g.gamma_c[a] - rhs))
    return worst


def slices_left(w: PseudoMultiplicativeUnitary, vectors: np.ndarray) -> np.ndarray:
    """``(ω_{v,w} ⋆ id)(W) = λ_w^* W λ_v`` for all pairs of ``vectors`` (rows)."""
    out = []
    for v in vectors:
        lv = w.source.lam(v)
        wl = w.matrix @ lv
        for x in vectors:
            out.append(w.target.lam(x).conj().T @ wl)
    return np.array(out)


def slices_right(w: PseudoMultiplicativeUnitary, vectors: np.ndarray) -> np.ndarray:
    """``(id ⋆ ω_{v,w})(W) = ρ_w^* W ρ_v`` for all pairs of ``vectors``."""
    out = []
    for v in vectors:
        wr = w.matrix @ w.source.rho(v)
        for x in vectors:
            out.append(w.target.rho(x).conj().T @ wr)
    return np.array(out)


def _span_basis(ops: np.ndarray) -> np.ndarray:
    """Orthonormal basis (Hilbert-Schmidt) of the span of ``ops``."""
    flat = ops.reshape(ops.shape[0], -1)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    r = int(np.sum(s > 1e-8 * max(1.0, s[0]))) if s.size else 0
    return vh[:r].reshape(r, *ops.shape[1:])


def _span_rank(ops: np.ndarray) -> int:
    return len(_span_basis(ops))


def check_generation(g: MeasuredQuantumGroupoid, w_prime: PseudoMultiplicativeUnitary,
                     u: PseudoMultiplicativeUnitary | None = None, *, vectors: np.ndarray | None = None,
                     tol: float | None = None) -> Report:
    """Leg-slice spans of ``W'`` (and of ``U_H``) equal ``M``; the dual leg span is an algebra."""
    t = g.tol if tol is None else tol
    rep = Report()
    vecs = np.eye(g.M.dim) if vectors is None else vectors
    sl = slices_left(w_prime, vecs)
    rank = _span_rank(sl)
    c = np.einsum("aij,sij->sa", g.pi_basis.conj(), sl) / g.M._left_norms
    recon = np.einsum("sa,aij->sij", c, g.pi_basis)
    worst = max((opnorm(x) for x in recon - sl), default=0.0)
    rep.add("generation.W'.membership", worst, t)
    rep.flag("generation.W'.rank", rank == g.M.dim, detail=f"rank {rank}, dim M {g.M.dim}")
    if u is not None:
        sl_u = slices_left(u, vecs)
        rank_u = _span_rank(sl_u)
        rep.flag("generation.W.rank", rank_u == g.M.dim, detail=f"rank {rank_u}, dim M {g.M.dim}")
        basis = _span_basis(slices_right(u, vecs))
        prods = np.einsum("aij,bjk->abik", basis, basis).reshape(-1, *basis.shape[1:])
        r_alg = _span_rank(np.concatenate([basis, prods, basis.conj().transpose(0, 2, 1)]))
        rep.flag("generation.dual.closed", r_alg == len(basis), detail=f"span {len(basis)}, closure {r_alg}")
    return rep


def check_cofixed_vector(g: MeasuredQuantumGroupoid, u: PseudoMultiplicativeUnitary,
                         tol: float | None = None) -> Report:
    """``U_H(v ⊗ Λ_Φ(1)) = v ⊗ Λ_Φ(1)`` when ``T_L(1) = 1``."""
    t = g.tol if tol is None else tol
    rep = Report()
    m = g.M
    if opnorm(g.apply_T_L(m.unit()) - m.unit()) > t:
        rep.flag("cofixed.applicable", True, detail="not applicable: T_L(1) != 1")
        return rep
    omega = g.H.omega
    worst = 0.0
    for v in np.eye(m.dim):
        worst = max(worst, opnorm(u.matrix @ u.source.vector(v, omega) - u.target.vector(v, omega)))
    rep.add("cofixed.vector", worst, t)
    from .reltensor import bracket

    b = bracket(omega, omega, g.alpha_H)
    rep.add("cofixed.alpha_bracket", opnorm(b - g.N.unit()), t)
    if opnorm(g.apply_T_R(m.unit()) - m.unit()) <= t:
        b2 = bracket(omega, omega, g.beta_H.opposite().opposite())
        rep.add("cofixed.beta_bracket", opnorm(b2 - g.N.unit()), t)
    return rep


def check_pentagon(g: MeasuredQuantumGroupoid, w: PseudoMultiplicativeUnitary | None = None, *,
                   max_ambient: int = 2000) -> float:
    """Residual of ``W_{12} W_{13} W_{23} = W_{23} W_{12}`` on three-leg quotients.

    Legs are tensor factors of ``H ⊗ H ⊗ H``; ``W_{ij}`` acts with leg ``i``
    as first factor.  A link ``H_2 ⊗_{α,β,ν^o} H_1`` has the same Gram
    operator as ``H_1 ⊗_{β,α,ν} H_2``, which is how flips enter.
    """
    if w is None:
        w = build_W(g)
    h = g.M.dim
    if h ** 3 > max_ambient:
        raise ValueError(f"ambient dimension {h ** 3} exceeds max_ambient={max_ambient}")
    tba, tab = g.T_ba, g.T_ab_hat
    dims = (h, h, h)
    s0 = MultiLegSpace(dims, [(0, 1, tba), (1, 2, tba)])
    r1 = MultiLegSpace(dims, [(0, 1, tab), (1, 2, tba)])
    s2 = MultiLegSpace(dims, [(0, 1, tab), (1, 2, tab)])
    l1 = MultiLegSpace(dims, [(0, 2, tba), (1, 2, tab)])
    l2 = MultiLegSpace(dims, [(0, 2, tab), (0, 1, tba)])

    def step(src: MultiLegSpace, tgt: MultiLegSpace, legs: tuple[int, int]) -> np.ndarray:
        amb = src_lift(legs)
        op, defect = transfer(src, tgt, amb)
        if defect > 1e3 * g.tol:
            raise StructureError(f"leg operator on {legs} is not well defined (defect {defect:.3e})")
        return op

    def src_lift(legs: tuple[int, int]) -> np.ndarray:
        return s0.lift(w.matrix, w.source, w.target, legs)

    rhs = step(r1, s2, (1, 2)) @ step(s0, r1, (0, 1))
    lhs = step(l2, s2, (0, 1)) @ step(l1, l2, (0, 2)) @ step(s0, l1, (1, 2))
    return opnorm(lhs - rhs)
