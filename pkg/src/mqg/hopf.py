"""Measured quantum groupoids over finite-dimensional algebras and their axiom checks.

The coproduct is stored as a unital *-homomorphism ``Γ̂: M -> e (M ⊗ M) e``
with ``e = Σ_k (1/m_k) Σ_{ij} β(E^k_{ij}) ⊗ α(E^k_{ji})``.  Elements of
``M ⊗ M`` are ``D² x D²`` matrices ``kron(x, y)`` of standard forms.  The
fiber-product realization on ``H_Φ ⊗_{β,α,ν} H_Φ`` is obtained by compressing
with the canonical isometry of that space; ``e`` does not depend on ``ν``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Callable

import numpy as np

from . import _kernels
from ._config import T_GRID, default_tol
from .algebra import (GnsSpace, MultiMatrixAlgebra, StructureError, Weight, modular_data, opnorm,
                      tensor_algebra)
from .reltensor import BasisRep, RelativeTensorSpace, op_tensor, relative_tensor, slice_weight
from .report import Report

__all__ = [
    "MeasuredQuantumGroupoid",
    "OperatorValuedWeight",
    "check_adapted",
    "check_all",
    "check_bimodule",
    "check_coinvolution",
    "check_counit_subspace",
    "check_left_invariant",
    "check_right_invariant",
    "opposite",
    "pair_coefficients",
    "tensor_apply",
]


# ============================================================================
# Helpers on M ⊗ M
# ============================================================================


def pair_coefficients(alg: MultiMatrixAlgebra, x: np.ndarray) -> np.ndarray:
    """Coefficients ``c[a, b]`` with ``x = Σ c[a,b] E_a ⊗ E_b``."""
    d = alg.D
    x4 = np.asarray(x).reshape(d, d, d, d)
    r, c = alg.rows, alg.cols
    return x4[r[:, None], r[None, :], c[:, None], c[None, :]]


def pair_element(alg: MultiMatrixAlgebra, coeffs: np.ndarray) -> np.ndarray:
    d = alg.D
    out = np.zeros((d, d, d, d), dtype=complex)
    r, c = alg.rows, alg.cols
    out[r[:, None], r[None, :], c[:, None], c[None, :]] = coeffs
    return out.reshape(d * d, d * d)


def tensor_apply(alg: MultiMatrixAlgebra, x: np.ndarray, left: np.ndarray | None,
                 right: np.ndarray | None) -> np.ndarray:
    """``(f ⊗ g)(x)`` for linear maps given as stacks of images of matrix units.

    ``left``/``right`` have shape ``(dim, p, p)``; ``None`` means identity.
    """
    c = pair_coefficients(alg, x)
    lb = alg.standard_basis if left is None else left
    rb = alg.standard_basis if right is None else right
    rows, cols = np.nonzero(np.abs(c) > 0)
    if rows.size == 0:
        p, q = lb.shape[1], rb.shape[1]
        return np.zeros((p * q, p * q), dtype=complex)
    return _kernels.kron_sum(lb[rows] * c[rows, cols][:, None, None], rb[cols])


def flip_pair(alg: MultiMatrixAlgebra, x: np.ndarray) -> np.ndarray:
    """``ς(x)`` on ``M ⊗ M``."""
    d = alg.D
    return np.asarray(x).reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)


def superop_images(alg: MultiMatrixAlgebra, mat: np.ndarray) -> np.ndarray:
    """Images of matrix units under a coefficient superoperator."""
    return np.einsum("ba,bij->aij", mat, alg.standard_basis)


def superop_of(alg: MultiMatrixAlgebra, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Coefficient matrix of a linear map on standard-form elements."""
    return np.array([alg.coefficients(f(e)) for e in alg.standard_basis]).T



class PairBlocks:
    """Block layout of ``M ⊗ M`` used to multiply kron-form elements blockwise."""

    def __init__(self, alg: MultiMatrixAlgebra) -> None:
        self.algebra = alg
        c, perm = tensor_algebra(alg, alg)
        self.pair_algebra = c
        self.perm = perm
        groups: dict[int, list[int]] = {}
        for m, o in zip(c.block_dims, c.offsets[:-1]):
            groups.setdefault(m, []).append(o)
        self.groups = [(m, np.asarray(offs)[:, None] + np.arange(m)) for m, offs in sorted(groups.items())]

    def split(self, stack: np.ndarray) -> list[np.ndarray]:
        """Blocks of a stack ``(n, D², D²)`` as arrays ``(n, nb, s, s)`` per block size ``s``."""
        y = np.asarray(stack)[:, self.perm][:, :, self.perm]
        return [y[:, idx[:, :, None], idx[:, None, :]] for _, idx in self.groups]

    def outside(self, stack: np.ndarray) -> float:
        """Largest norm of the part of each element lying outside ``M ⊗ M``."""
        y = np.asarray(stack)[:, self.perm][:, :, self.perm].copy()
        for _, idx in self.groups:
            y[:, idx[:, :, None], idx[:, None, :]] = 0
        return max((opnorm(v) for v in y), default=0.0)


def block_norm(blocks: list[np.ndarray]) -> np.ndarray:
    """Operator norms of block-diagonal elements given by :meth:`PairBlocks.split`."""
    out = None
    for b in blocks:
        if b.shape[-1] == 1:
            n = np.abs(b[..., 0, 0])
        else:
            n = np.linalg.norm(b, 2, axis=(-2, -1))
        n = n.max(axis=-1)
        out = n if out is None else np.maximum(out, n)
    return out



def multiplicative_residual(alg: MultiMatrixAlgebra, cop: np.ndarray, pb: PairBlocks | None = None) -> float:
    """``max ‖Γ(E_a)Γ(E_b) - Γ(E_a E_b)‖`` over matrix units, computed blockwise."""
    pb = PairBlocks(alg) if pb is None else pb
    cb = pb.split(cop)
    target = -np.ones((alg.dim, alg.dim), dtype=int)
    for a, (k, i, j) in enumerate(alg.labels):
        for l in range(alg.block_dims[k]):
            target[a, alg.index(k, j, l)] = alg.index(k, i, l)
    worst = 0.0
    for a in range(alg.dim):
        diff = []
        for b in cb:
            tb = np.where(target[a][:, None, None, None] >= 0, b[np.maximum(target[a], 0)], 0)
            diff.append(b[a][None] @ b - tb)
        worst = max(worst, float(block_norm(diff).max()))
    return worst


# ============================================================================
# Operator-valued weights
# ============================================================================


class OperatorValuedWeight:
    """Linear map ``M -> target`` given as a coefficient superoperator."""

    def __init__(self, algebra: MultiMatrixAlgebra, matrix: np.ndarray, target: np.ndarray) -> None:
        self.algebra = algebra
        self.matrix = np.asarray(matrix, dtype=complex)
        self.target = np.asarray(target, dtype=complex)  # images of basis units of N in M

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.algebra.element(self.matrix @ self.algebra.coefficients(x))

    def check(self, tol: float, *, rng_seed: int = 0, name: str = "T") -> Report:
        rep = Report()
        alg = self.algebra
        rng = np.random.default_rng(rng_seed)
        # range lies in the target subalgebra
        span = self.target.reshape(self.target.shape[0], -1).T
        worst = 0.0
        for e in alg.standard_basis:
            y = self(e).reshape(-1)
            coef, *_ = np.linalg.lstsq(span, y, rcond=None)
            worst = max(worst, float(np.linalg.norm(span @ coef - y)))
        rep.add(f"{name}.range", worst, tol)
        # bimodule law on matrix units of the target
        worst = 0.0
        for n1 in self.target:
            for e in alg.standard_basis[:: max(1, alg.dim // 16)]:
                for n2 in self.target:
                    worst = max(worst, opnorm(self(n1 @ e @ n2) - n1 @ self(e) @ n2))
        rep.add(f"{name}.bimodule", worst, tol)
        # positivity and faithfulness on a positive spanning family
        worst_neg = 0.0
        min_pos = np.inf
        samples = [e for e, (k, i, j) in zip(alg.standard_basis, alg.labels) if i == j]
        samples += [(lambda x: x.conj().T @ x)(alg.random_element(rng)) for _ in range(8)]
        for x in samples:
            y = self(x)
            w = np.linalg.eigvalsh((y + y.conj().T) / 2)
            worst_neg = max(worst_neg, float(max(0.0, -w.min())))
            min_pos = min(min_pos, float(np.trace(y).real))
        rep.add(f"{name}.positive", worst_neg, tol)
        rep.flag(f"{name}.faithful", min_pos > tol, detail=f"min trace of T(x*x) = {min_pos:.3e}")
        return rep


# ============================================================================
# The bundle
# ============================================================================


class MeasuredQuantumGroupoid:
    """``(N, M, α, β, Γ, ν, T_L, T_R)`` in finite dimension.

    Build through :meth:`build` (runs :func:`check_all`) or explicitly through
    :meth:`unchecked`.  Arrays:

    * ``alpha``, ``beta``: ``(dim N, D_M, D_M)`` images of matrix units of N;
    * ``coproduct``: ``(dim M, D_M², D_M²)`` images ``Γ̂(E_a)``;
    * ``T_L``, ``T_R``: ``(dim M, dim M)`` coefficient superoperators.
    """

    def __init__(self, N: MultiMatrixAlgebra, M: MultiMatrixAlgebra, alpha: np.ndarray, beta: np.ndarray,
                 coproduct: np.ndarray, nu: Weight, T_L: np.ndarray, T_R: np.ndarray, *,
                 name: str = "", tol: float | None = None, verified: bool = False) -> None:
        self.N = N
        self.M = M
        self.alpha = np.asarray(alpha, dtype=complex)
        self.beta = np.asarray(beta, dtype=complex)
        self.coproduct = np.asarray(coproduct, dtype=complex)
        self.nu = nu
        self.T_L = np.asarray(T_L, dtype=complex)
        self.T_R = np.asarray(T_R, dtype=complex)
        self.name = name
        self.tol = default_tol() if tol is None else tol
        self.verified = verified
        d = M.D
        if self.alpha.shape != (N.dim, d, d) or self.beta.shape != (N.dim, d, d):
            raise StructureError("α and β must have shape (dim N, D_M, D_M)")
        if self.coproduct.shape != (M.dim, d * d, d * d):
            raise StructureError("coproduct must have shape (dim M, D_M², D_M²)")
        if self.T_L.shape != (M.dim, M.dim) or self.T_R.shape != (M.dim, M.dim):
            raise StructureError("operator-valued weights must be (dim M, dim M)")
        if not nu.algebra.same_shape(N):
            raise StructureError("ν is not a weight on N")

    @classmethod
    def unchecked(cls, *args, **kwargs) -> "MeasuredQuantumGroupoid":
        """Construct without verification (``verified`` stays False)."""
        kwargs["verified"] = False
        return cls(*args, **kwargs)

    @classmethod
    def build(cls, *args, **kwargs) -> "MeasuredQuantumGroupoid":
        """Construct and run :func:`check_all`; raises on failure."""
        g = cls(*args, **kwargs)
        rep = check_all(g)
        if not rep.passed:
            names = ", ".join(f"{r.name} ({r.residual:.2e})" for r in rep.failures)
            raise StructureError(f"measured quantum groupoid axioms fail: {names}")
        g.verified = True
        return g

    def replace(self, **changes) -> "MeasuredQuantumGroupoid":
        fields = dict(N=self.N, M=self.M, alpha=self.alpha, beta=self.beta, coproduct=self.coproduct,
                      nu=self.nu, T_L=self.T_L, T_R=self.T_R, name=self.name, tol=self.tol)
        fields.update(changes)
        return MeasuredQuantumGroupoid(**fields)

    def __repr__(self) -> str:
        return (f"MeasuredQuantumGroupoid(name={self.name!r}, N={self.N.block_dims}, "
                f"M={self.M.block_dims})")

    # -- maps ------------------------------------------------------------------
    def alpha_of(self, n: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", self.N.coefficients(n), self.alpha)

    def beta_of(self, n: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", self.N.coefficients(n), self.beta)

    def _inverse(self, images: np.ndarray, x: np.ndarray, label: str) -> np.ndarray:
        span = images.reshape(images.shape[0], -1).T
        coef, *_ = np.linalg.lstsq(span, np.asarray(x).reshape(-1), rcond=None)
        res = float(np.linalg.norm(span @ coef - np.asarray(x).reshape(-1)))
        if res > 1e3 * self.tol * max(1.0, opnorm(x)):
            raise StructureError(f"element is not in the range of {label} (residual {res:.3e})")
        return self.N.element(coef)

    def alpha_inverse(self, x: np.ndarray) -> np.ndarray:
        return self._inverse(self.alpha, x, "α")

    def beta_inverse(self, x: np.ndarray) -> np.ndarray:
        return self._inverse(self.beta, x, "β")

    def apply_T_L(self, x: np.ndarray) -> np.ndarray:
        return self.M.element(self.T_L @ self.M.coefficients(x))

    def apply_T_R(self, x: np.ndarray) -> np.ndarray:
        return self.M.element(self.T_R @ self.M.coefficients(x))

    def gamma(self, x: np.ndarray) -> np.ndarray:
        """``Γ̂(x)`` in ``e (M ⊗ M) e``."""
        return np.einsum("a,aij->ij", self.M.coefficients(x), self.coproduct)

    @cached_property
    def e(self) -> np.ndarray:
        """Support projection of the fiber product inside ``M ⊗ M``."""
        n = self.N
        scale = np.array([1.0 / n.block_dims[k] for (k, _, _) in n.labels])
        return _kernels.kron_sum(self.beta * scale[:, None, None], self.alpha[n.transpose_index])

    # -- weights ---------------------------------------------------------------
    def _weight_from(self, values: np.ndarray) -> Weight:
        rho = self.M.element(np.asarray(values)[self.M.transpose_index])
        return Weight(self.M, rho, self.tol)

    @cached_property
    def Phi(self) -> Weight:
        """``Φ = ν ∘ α^{-1} ∘ T_L``."""
        vals = [self.nu(self.alpha_inverse(self.apply_T_L(e))) for e in self.M.standard_basis]
        return self._weight_from(np.array(vals))

    @cached_property
    def Psi(self) -> Weight:
        """``Ψ = ν ∘ β^{-1} ∘ T_R``."""
        vals = [self.nu(self.beta_inverse(self.apply_T_R(e))) for e in self.M.standard_basis]
        return self._weight_from(np.array(vals))

    @cached_property
    def nu_op(self) -> Weight:
        """``ν^o`` transported to ``N`` (density transposed)."""
        return self.nu.with_density(self.nu.density.T)

    # -- standard form ---------------------------------------------------------
    @cached_property
    def H(self) -> GnsSpace:
        """``H_Φ = L²(M)``; ``Λ_Ψ`` uses the same coordinates."""
        return GnsSpace(self.Phi)

    @cached_property
    def H_Psi(self) -> GnsSpace:
        return GnsSpace(self.Psi)

    @cached_property
    def J(self) -> np.ndarray:
        """Matrix ``K`` of the conjugation ``J v = K conj(v)`` (same for every weight)."""
        return modular_data(self.Phi).j.matrix

    def pi(self, x: np.ndarray) -> np.ndarray:
        return self.M.left_action(x)

    @cached_property
    def pi_basis(self) -> np.ndarray:
        return self.M.left_basis

    @cached_property
    def alpha_H(self) -> BasisRep:
        return BasisRep(self.N, self.nu, np.array([self.pi(a) for a in self.alpha]), "rep")

    @cached_property
    def beta_H(self) -> BasisRep:
        return BasisRep(self.N, self.nu, np.array([self.pi(b) for b in self.beta]), "antirep")

    @cached_property
    def beta_hat(self) -> BasisRep:
        """``β̂(n) = J α(n*) J``: right multiplication by ``α(n)``."""
        return BasisRep(self.N, self.nu, np.array([self.M.right_action(a) for a in self.alpha]), "antirep")

    @cached_property
    def alpha_hat(self) -> BasisRep:
        """``α̂(n) = J β(n*) J``: right multiplication by ``β(n)``."""
        return BasisRep(self.N, self.nu, np.array([self.M.right_action(b) for b in self.beta]), "rep")

    @cached_property
    def T_ba(self) -> RelativeTensorSpace:
        """``H ⊗_{β,α,ν} H``: target of ``U_H`` and home of ``Γ``."""
        return relative_tensor(self.beta_H, self.alpha_H, self.nu, tol=self.tol)

    @cached_property
    def T_ab_hat(self) -> RelativeTensorSpace:
        """``H ⊗_{α,β̂,ν^o} H``: source of ``U_H``."""
        return relative_tensor(self.alpha_H.opposite(), self.beta_hat.opposite(), self.nu_op, tol=self.tol)

    @cached_property
    def T_ahat_b(self) -> RelativeTensorSpace:
        """``H ⊗_{α̂,β,ν^o} H``: source of ``U'_H``."""
        return relative_tensor(self.alpha_hat.opposite(), self.beta_H.opposite(), self.nu_op, tol=self.tol)

    @cached_property
    def pair_blocks(self) -> PairBlocks:
        return PairBlocks(self.M)

    @cached_property
    def gamma_coefficients(self) -> np.ndarray:
        """``c[a, p, q]`` with ``Γ̂(E_a) = Σ c[a,p,q] E_p ⊗ E_q``."""
        return np.array([pair_coefficients(self.M, x) for x in self.coproduct])

    def pi2(self, x: np.ndarray) -> np.ndarray:
        """``(π ⊗ π)(x)`` on ``H ⊗ H``."""
        return tensor_apply(self.M, x, self.pi_basis, self.pi_basis)

    @cached_property
    def gamma_c(self) -> np.ndarray:
        """Compressed coproduct: stack of ``Γ(E_a)`` acting on ``T_ba``."""
        u = self.T_ba.canonical_isometry
        return np.array([u.conj().T @ self.pi2(g) @ u for g in self.coproduct])

    def gamma_compressed(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", self.M.coefficients(x), self.gamma_c)


# ============================================================================
# Checks
# ============================================================================


def _tol(g: MeasuredQuantumGroupoid, tol: float | None) -> float:
    return g.tol if tol is None else tol


def check_bimodule(g: MeasuredQuantumGroupoid, tol: float | None = None) -> Report:
    """Hopf-bimodule laws for ``(α, β, Γ)``."""
    t = _tol(g, tol)
    rep = Report()
    m, n = g.M, g.N
    e = g.e
    cop = g.coproduct
    # (iii) unital *-homomorphism into e(M⊗M)e
    rep.add("gamma.unit", opnorm(g.gamma(m.unit()) - e), t)
    pb = g.pair_blocks
    rep.add("gamma.in_tensor", pb.outside(cop), t)
    cb = pb.split(cop)
    eb = pb.split(e[None])
    adj = [b.conj().swapaxes(-1, -2) for b in cb]
    worst_star = float(block_norm([a - b[m.transpose_index] for a, b in zip(adj, cb)]).max())
    worst_support = float(block_norm([e_ @ b @ e_ - b for e_, b in zip(eb, cb)]).max())
    worst_mult = multiplicative_residual(m, cop, pb)
    rep.add("gamma.multiplicative", worst_mult, t)
    rep.add("gamma.star", worst_star, t)
    rep.add("gamma.support", worst_support, t)
    # (i) Γ(α(n)β(m)) = α(n) ⊗_N β(m)
    prods = np.array([an @ bm for an in g.alpha for bm in g.beta])
    lhs = np.einsum("xa,aij->xij", np.array([m.coefficients(p) for p in prods]), cop)
    rhs = np.array([np.kron(an, bm) for an in g.alpha for bm in g.beta]) @ e
    rep.add("gamma.alpha_beta", float(block_norm(pb.split(lhs - rhs)).max()), t)
    # (ii) coassociativity, in Hilbert-Schmidt coordinates of M⊗M⊗M
    gc = g.gamma_coefficients
    left = np.einsum("xar,apq->xpqr", gc, gc)
    right = np.einsum("xpb,bqr->xpqr", gc, gc)
    worst = float(np.sqrt(np.max(np.sum(np.abs(left - right) ** 2, axis=(1, 2, 3)))))
    rep.add("gamma.coassociative", worst, t)
    return rep


def check_left_invariant(g: MeasuredQuantumGroupoid, tol: float | None = None) -> Report:
    """``(id ⋆ Φ) Γ(x) = T_L(x)`` over matrix units."""
    t = _tol(g, tol)
    rep = Report()
    worst = 0.0
    for a, e in enumerate(g.M.standard_basis):
        lhs = slice_weight(g.T_ba, g.Phi, g.pi_basis, g.gamma_c[a], leg="right")
        worst = max(worst, opnorm(lhs - g.pi(g.apply_T_L(e))))
    rep.add("left_invariance", worst, t)
    return rep


def check_right_invariant(g: MeasuredQuantumGroupoid, tol: float | None = None) -> Report:
    """``(Ψ ⋆ id) Γ(x) = T_R(x)`` over matrix units."""
    t = _tol(g, tol)
    rep = Report()
    worst = 0.0
    for a, e in enumerate(g.M.standard_basis):
        lhs = slice_weight(g.T_ba, g.Psi, g.pi_basis, g.gamma_c[a], leg="left")
        worst = max(worst, opnorm(lhs - g.pi(g.apply_T_R(e))))
    rep.add("right_invariance", worst, t)
    return rep


def check_adapted(g: MeasuredQuantumGroupoid, tol: float | None = None) -> Report:
    """``σ^Φ_t ∘ β = β ∘ σ^ν_{-t}`` and ``σ^Ψ_t ∘ α = α ∘ σ^ν_t`` on the t-grid."""
    t = _tol(g, tol)
    rep = Report()
    wb = wa = 0.0
    for s in T_GRID:
        for e in g.N.standard_basis:
            wb = max(wb, opnorm(g.Phi.sigma(s, g.beta_of(e)) - g.beta_of(g.nu.sigma(-s, e))))
            wa = max(wa, opnorm(g.Psi.sigma(s, g.alpha_of(e)) - g.alpha_of(g.nu.sigma(s, e))))
    rep.add("beta_adapted", wb, t)
    rep.add("alpha_adapted", wa, t)
    return rep


def check_coinvolution(g: MeasuredQuantumGroupoid, r: np.ndarray, tol: float | None = None) -> Report:
    """``R ∘ α = β``, ``R² = id``, ``ς (R ⋆ R) Γ = Γ R`` and anti-multiplicativity.

    ``r`` is the coefficient superoperator of a linear map on ``M``.
    """
    t = _tol(g, tol)
    rep = Report()
    m = g.M
    imgs = superop_images(m, r)

    def apply(x: np.ndarray) -> np.ndarray:
        return m.element(r @ m.coefficients(x))

    rep.add("R.alpha_to_beta", max(opnorm(apply(a) - b) for a, b in zip(g.alpha, g.beta)), t)
    rep.add("R.involutive", opnorm(r @ r - np.eye(m.dim)), t)
    worst = 0.0
    for a, ea in enumerate(m.standard_basis):
        worst = max(worst, opnorm(apply(ea).conj().T - apply(ea.conj().T)))
        for b, eb in enumerate(m.standard_basis):
            worst = max(worst, opnorm(apply(ea @ eb) - apply(eb) @ apply(ea)))
    rep.add("R.anti_multiplicative", worst, t)
    worst = 0.0
    for a, ea in enumerate(m.standard_basis):
        lhs = flip_pair(m, tensor_apply(m, g.coproduct[a], imgs, imgs))
        rhs = g.gamma(apply(ea))
        worst = max(worst, opnorm(lhs - rhs))
    rep.add("R.coproduct", worst, t)
    return rep


def check_counit_subspace(g: MeasuredQuantumGroupoid, tol: float | None = None) -> Report:
    """``{x ∈ M ∩ α(N)' : Γ(x) = 1 ⊗_N x}`` equals ``β(N)``."""
    t = _tol(g, tol)
    rep = Report()
    m = g.M
    rows = []
    for a in g.alpha:
        rows.append(np.array([m.coefficients(e @ a - a @ e) for e in m.standard_basis]).T)
        # commutator coefficients; membership in M keeps it block-diagonal
    cond = np.array([(g.coproduct[b] - np.kron(m.unit(), e) @ g.e).reshape(-1)
                     for b, e in enumerate(m.standard_basis)]).T
    sys_mat = np.concatenate(rows + [cond], axis=0)
    _, s, vh = np.linalg.svd(sys_mat)
    rank = int(np.sum(s > 1e-8 * max(1.0, s[0])))
    sol = vh[rank:].conj().T  # columns: coefficient vectors of solutions
    beta_span = np.array([m.coefficients(b) for b in g.beta]).T
    r_beta = np.linalg.matrix_rank(beta_span, tol=1e-8)
    r_both = np.linalg.matrix_rank(np.concatenate([sol, beta_span], axis=1), tol=1e-8)
    ok = sol.shape[1] == r_beta == r_both
    rep.flag("counit_subspace", ok, detail=f"solutions {sol.shape[1]}, dim β(N) {r_beta}, joint {r_both}")
    return rep


def check_all(g: MeasuredQuantumGroupoid, tol: float | None = None) -> Report:
    """All structural axioms of a measured quantum groupoid."""
    t = _tol(g, tol)
    rep = Report()
    # α, β: faithful, (anti-)multiplicative, commuting ranges
    n = g.N
    for label, imgs, kind in (("alpha", g.alpha, "rep"), ("beta", g.beta, "antirep")):
        r = BasisRep(n, g.nu, imgs, kind)
        rep.add(f"{label}.law", r.law_residual(), t)
        rank = np.linalg.matrix_rank(imgs.reshape(n.dim, -1), tol=1e-8)
        rep.flag(f"{label}.faithful", rank == n.dim, detail=f"rank {rank} of {n.dim}")
    rep.add("ranges_commute", _kernels.max_commutator(g.alpha, g.beta), t)
    rep.extend(check_bimodule(g, t))
    try:
        g.Phi, g.Psi
    except StructureError as exc:
        rep.flag("weights.faithful", False, detail=str(exc))
        return rep
    rep.extend(OperatorValuedWeight(g.M, g.T_L, g.alpha).check(t, name="T_L"))
    rep.extend(OperatorValuedWeight(g.M, g.T_R, g.beta).check(t, name="T_R"))
    rep.add("gamma.fiber_unit", opnorm(g.gamma_compressed(g.M.unit()) - np.eye(g.T_ba.dim)), t)
    rep.extend(check_left_invariant(g, t))
    rep.extend(check_right_invariant(g, t))
    rep.extend(check_adapted(g, t))
    return rep


def opposite(g: MeasuredQuantumGroupoid) -> MeasuredQuantumGroupoid:
    """``(N^o, M, β, α, ς Γ, ν^o, T_R, T_L)`` with ``N^o`` transported by transposition."""
    tr = g.N.transpose_index
    cop = np.array([flip_pair(g.M, c) for c in g.coproduct])
    return MeasuredQuantumGroupoid(g.N, g.M, g.beta[tr], g.alpha[tr], cop, g.nu_op, g.T_R, g.T_L,
                                   name=f"{g.name}^op" if g.name else "", tol=g.tol)


def compressed_alpha_beta_residual(g: MeasuredQuantumGroupoid) -> float:
    """``Γ(α(n)β(m)) = α(n) ⊗_N β(m)`` in the fiber-product realization."""
    worst = 0.0
    for an in g.alpha:
        for bm in g.beta:
            lhs = g.gamma_compressed(an @ bm)
            rhs = op_tensor(g.pi(an), g.pi(bm), g.T_ba)
            worst = max(worst, opnorm(lhs - rhs))
    return worst
