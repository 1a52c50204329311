"""Relative tensor products over a finite-dimensional basis algebra.

Representations of the basis ``N`` on a space ``H`` are stored as the images
of the matrix units of ``N`` (:class:`BasisRep`).  The relative tensor product
``H ⊗_ψ K`` is realized as the quotient of ``H ⊗ K`` by the kernel of the Gram
operator ``Q``; its coordinates are ``P = Λ^{1/2} V*`` where ``Q = V Λ V*``.

Opposite algebras are never materialized: ``N^o`` is identified with ``N``
through transposition ``n^o -> n^T``, so an anti-representation of ``N^o`` is
stored as an anti-representation of ``N`` precomposed with the transpose and
the weight ``ψ^o`` has density ``d^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Sequence

import numpy as np

from . import _kernels
from ._config import RANK_CUTOFF, default_tol
from .algebra import MultiMatrixAlgebra, StructureError, Weight, decompose, commutant, opnorm

__all__ = [
    "BasisRep",
    "BoundedVectorOp",
    "MultiLegSpace",
    "RelBasis",
    "RelativeTensorSpace",
    "bounded_op",
    "bracket",
    "fiber_product",
    "flip",
    "gram_from_brackets",
    "leg_operator",
    "make_basis",
    "op_tensor",
    "relative_tensor",
    "slice_left",
    "slice_right",
    "slice_weight",
    "transfer",
]

Kind = Literal["rep", "antirep"]


# ============================================================================
# Representations of the basis
# ============================================================================


@dataclass(frozen=True)
class BasisRep:
    """(Anti-)representation of ``N`` given by images of its matrix units."""

    base: MultiMatrixAlgebra
    weight: Weight
    images: np.ndarray
    kind: Kind

    def __post_init__(self) -> None:
        if self.kind not in ("rep", "antirep"):
            raise ValueError(f"unknown kind {self.kind!r}")
        imgs = np.asarray(self.images, dtype=complex)
        if imgs.ndim != 3 or imgs.shape[0] != self.base.dim:
            raise StructureError("images must have shape (dim N, h, h)")
        object.__setattr__(self, "images", imgs)

    @property
    def space_dim(self) -> int:
        return int(self.images.shape[1])

    def __call__(self, n: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", self.base.coefficients(n), self.images)

    def opposite(self) -> "BasisRep":
        """Same operators viewed over ``N^o ≅ N`` (transpose); kind flips."""
        kind: Kind = "antirep" if self.kind == "rep" else "rep"
        w = self.weight.with_density(self.weight.density.T)
        return BasisRep(self.base, w, self.images[self.base.transpose_index], kind)

    def law_residual(self) -> float:
        """Defect of the (anti-)representation laws on matrix units."""
        n = self.base
        worst = opnorm(self(n.unit()) - np.eye(self.space_dim))
        for a, (k, i, j) in enumerate(n.labels):
            worst = max(worst, opnorm(self.images[a].conj().T - self.images[n.transpose_index[a]]))
            for l in range(n.block_dims[k]):
                b = n.index(k, j, l)
                c = n.index(k, i, l)
                prod = self.images[a] @ self.images[b] if self.kind == "rep" else self.images[b] @ self.images[a]
                worst = max(worst, opnorm(prod - self.images[c]))
        return worst

    @cached_property
    def generated(self) -> MultiMatrixAlgebra:
        """The image algebra as an embedded multi-matrix algebra."""
        return decompose(self.images, close=True)

    @cached_property
    def commutant(self) -> MultiMatrixAlgebra:
        return commutant(self.generated)

    def commutator_residual(self, x: np.ndarray) -> float:
        return _kernels.max_commutator(x[None], self.images)


# ============================================================================
# Bounded vectors and brackets
# ============================================================================


@dataclass(frozen=True)
class BoundedVectorOp:
    """``R(ξ): H_ψ -> H`` in Hilbert-Schmidt coordinates of ``N``."""

    vector: np.ndarray
    matrix: np.ndarray


def bounded_op(rep: BasisRep, xi: np.ndarray) -> BoundedVectorOp:
    """The bounded-vector operator of ``ξ``.

    For an anti-representation ``β``: ``R(J_ψ Λ_ψ(y)) = β(y*) ξ`` and ``R``
    intertwines right multiplication with ``β``.  For a representation ``α``:
    ``R(Λ_ψ(y)) = α(y) ξ``.
    """
    n = rep.base
    d_is = rep.weight.inv_sqrt
    cols = []
    for e in n.standard_basis:
        arg = d_is @ e if rep.kind == "antirep" else e @ d_is
        cols.append(rep(arg) @ xi)
    return BoundedVectorOp(np.asarray(xi), np.array(cols).T)


def bracket(xi: np.ndarray, eta: np.ndarray, rep: BasisRep, *, tol: float | None = None) -> np.ndarray:
    """Element ``n`` of ``N`` with ``R(η)* R(ξ)`` equal to ``n`` acting on ``H_ψ``.

    For an anti-representation the product is a left multiplication on
    ``L²(N)``; for a representation it is a right multiplication, and the
    returned ``n`` is the element it multiplies by.
    """
    r_xi = bounded_op(rep, xi).matrix
    r_eta = bounded_op(rep, eta).matrix
    op = r_eta.conj().T @ r_xi
    if rep.kind == "antirep":
        return rep.base.from_left_action(op, tol=tol)
    return rep.base.from_right_action(op, tol=tol)


# ============================================================================
# Relative tensor product
# ============================================================================


def _gram_closed_form(left: BasisRep, right: BasisRep, weight: Weight) -> np.ndarray:
    """``Q = Σ_k Σ_{r,t} β(d^{-1/2} E_{rt} d^{-1/2}) ⊗ α(E_{tr})``."""
    n = left.base
    d_is = weight.inv_sqrt
    a_stack = np.array([left(d_is @ e @ d_is) for e in n.standard_basis])
    b_stack = right.images[n.transpose_index]
    return _kernels.kron_sum(a_stack, b_stack)


def gram_from_brackets(left: BasisRep, right: BasisRep, weight: Weight | None = None) -> np.ndarray:
    """Gram operator assembled entry by entry from brackets (slow oracle)."""
    if weight is not None:
        left = BasisRep(left.base, weight, left.images, left.kind)
    h, k = left.space_dim, right.space_dim
    eye_h, eye_k = np.eye(h), np.eye(k)
    q = np.zeros((h * k, h * k), dtype=complex)
    for p1 in range(h):
        for p2 in range(h):
            n = bracket(eye_h[p1], eye_h[p2], left)
            a = right(n)
            for q1 in range(k):
                for q2 in range(k):
                    # B(e_p1⊗e_q1, e_p2⊗e_q2) = <α(n) e_q1, e_q2>
                    q[p2 * k + q2, p1 * k + q1] = a[q2, q1]
    return q


class RelativeTensorSpace:
    """``H ⊗_{β,α,ψ} K`` realized as a Gram quotient of ``H ⊗ K``."""

    def __init__(self, left: BasisRep, right: BasisRep, weight: Weight, *, tol: float | None = None) -> None:
        if left.kind != "antirep" or right.kind != "rep":
            raise StructureError("left leg needs an anti-representation, right leg a representation")
        if not (left.base.same_shape(right.base) and left.base.same_shape(weight.algebra)):
            raise StructureError("legs are over different basis algebras")
        self.tol = default_tol() if tol is None else tol
        self.left = left
        self.right = right
        self.weight = weight
        self.h = left.space_dim
        self.k = right.space_dim
        q = _gram_closed_form(left, right, weight)
        q = (q + q.conj().T) / 2
        self.Q = q
        w, v = np.linalg.eigh(q)
        top = float(max(w.max(), 0.0)) if w.size else 0.0
        if w.size and w.min() < -1e3 * self.tol * max(1.0, top):
            raise StructureError(f"Gram operator has negative eigenvalue {w.min():.3e}")
        keep = w > RANK_CUTOFF * max(top, 1e-300)
        self.V = v[:, keep]
        self.eigenvalues = w[keep]
        self.P = (np.sqrt(self.eigenvalues)[:, None] * self.V.conj().T)
        self.P_pinv = self.V / np.sqrt(self.eigenvalues)[None, :]
        self.dim = int(keep.sum())

    def __repr__(self) -> str:
        return f"RelativeTensorSpace(h={self.h}, k={self.k}, dim={self.dim})"

    # -- vectors ---------------------------------------------------------------
    @property
    def support(self) -> np.ndarray:
        return self.V @ self.V.conj().T

    @property
    def iso(self) -> np.ndarray:
        return self.V

    def vector(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Coordinates of ``ξ ⊗_ψ η``."""
        return self.P @ np.kron(xi, eta)

    def lam(self, xi: np.ndarray) -> np.ndarray:
        """``λ_ξ: K -> T``, ``η -> ξ ⊗ η``."""
        return self.P @ np.kron(np.asarray(xi)[:, None], np.eye(self.k))

    def rho(self, eta: np.ndarray) -> np.ndarray:
        """``ρ_η: H -> T``, ``ξ -> ξ ⊗ η``."""
        return self.P @ np.kron(np.eye(self.h), np.asarray(eta)[:, None])

    @cached_property
    def P3(self) -> np.ndarray:
        """``P`` reshaped to ``(dim, h, k)``."""
        return self.P.reshape(self.dim, self.h, self.k)

    # -- operators -------------------------------------------------------------
    def compress(self, x: np.ndarray) -> np.ndarray:
        """Quotient operator of an ambient operator commuting with ``Q``."""
        return self.P @ x @ self.P_pinv

    def op_tensor(self, x: np.ndarray, y: np.ndarray, *, check: bool = True) -> np.ndarray:
        return op_tensor(x, y, self, check=check)

    # -- canonical identification with e(H⊗K) ------------------------------------
    @cached_property
    def canonical_projection(self) -> np.ndarray:
        """``e = Σ_k (1/m_k) Σ_{ij} β(E^k_{ij}) ⊗ α(E^k_{ji})``."""
        n = self.left.base
        scale = np.array([1.0 / n.block_dims[k] for (k, _, _) in n.labels])
        a_stack = self.left.images * scale[:, None, None]
        b_stack = self.right.images[n.transpose_index]
        return _kernels.kron_sum(a_stack, b_stack)

    @cached_property
    def canonical_map(self) -> np.ndarray:
        """Ambient operator ``ξ⊗η -> e(β(n_o^{-1/2}) ξ ⊗ α(d^{-1/2}) η)``.

        ``d`` is the density of ``ψ`` relative to ``τ = Tr_K ∘ α`` and
        ``n_o = Σ (c_k/m_k) p_k`` with ``c_k = Tr_K α(E^k_{11})``.  Its
        square ``canonical_map* canonical_map`` equals ``Q``.
        """
        n = self.left.base
        c = np.array([np.trace(self.right.images[n.index(k, 0, 0)]).real for k in range(len(n.block_dims))])
        if np.any(c <= 0):
            raise StructureError("right representation is not faithful")
        n_o = sum((c[k] / m) * p for k, (m, p) in enumerate(zip(n.block_dims, n.central_projections)))
        tau_density = sum(c[k] * p for k, p in enumerate(n.central_projections))
        d_rel = np.linalg.solve(tau_density, self.weight.density)
        z = n.power(n_o, -0.5)
        d_is = n.power(d_rel, -0.5)
        return self.canonical_projection @ np.kron(self.left(z), self.right(d_is))

    @cached_property
    def canonical_isometry(self) -> np.ndarray:
        """Isometry from quotient coordinates onto ``e (H ⊗ K)``."""
        return self.canonical_map @ self.P_pinv


def relative_tensor(left: BasisRep, right: BasisRep, weight: Weight | None = None, *,
                    tol: float | None = None) -> RelativeTensorSpace:
    return RelativeTensorSpace(left, right, left.weight if weight is None else weight, tol=tol)


def op_tensor(x: np.ndarray, y: np.ndarray, t: RelativeTensorSpace, *, check: bool = True) -> np.ndarray:
    """``x ⊗_N y`` for ``x ∈ β(N)'`` and ``y ∈ α(N)'``."""
    if check:
        cx = t.left.commutator_residual(x)
        cy = t.right.commutator_residual(y)
        scale = max(1.0, opnorm(x), opnorm(y))
        if cx > 1e3 * t.tol * scale:
            raise StructureError(f"left factor does not commute with β(N) (commutator norm {cx:.3e})")
        if cy > 1e3 * t.tol * scale:
            raise StructureError(f"right factor does not commute with α(N) (commutator norm {cy:.3e})")
    return t.compress(np.kron(x, y))


def transfer(src: "RelativeTensorSpace | MultiLegSpace", tgt: "RelativeTensorSpace | MultiLegSpace",
             ambient: np.ndarray) -> tuple[np.ndarray, float]:
    """Operator induced on quotients by an ambient map; returns ``(op, defect)``.

    ``defect`` measures how far ``ambient`` is from mapping the Gram kernel of
    ``src`` into that of ``tgt`` (zero means the induced map is well defined).
    """
    op = tgt.P @ ambient @ src.P_pinv
    defect = opnorm(op @ src.P - tgt.P @ ambient)
    scale = max(1.0, opnorm(tgt.P @ ambient))
    return op, defect / scale


def flip(t: RelativeTensorSpace, target: RelativeTensorSpace | None = None) -> tuple[np.ndarray, RelativeTensorSpace]:
    """Flip ``ξ ⊗_{β,α,ψ} η -> η ⊗_{α,β,ψ^o} ξ`` as a unitary between quotients."""
    if target is None:
        w = t.weight.with_density(t.weight.density.T)
        target = RelativeTensorSpace(t.right.opposite(), t.left.opposite(), w, tol=t.tol)
    swap = np.zeros((t.h * t.k, t.h * t.k))
    for i in range(t.h):
        for j in range(t.k):
            swap[j * t.h + i, i * t.k + j] = 1.0
    op, defect = transfer(t, target, swap)
    if defect > 1e3 * t.tol:
        raise StructureError(f"flip is not well defined (defect {defect:.3e})")
    return op, target


def fiber_product(m1: MultiMatrixAlgebra, m2: MultiMatrixAlgebra, t: RelativeTensorSpace) -> MultiMatrixAlgebra:
    """``M1 ⋆_N M2``: commutant on ``T`` of ``{x' ⊗_N y'}``."""
    c1 = commutant(m1).concrete_basis
    c2 = commutant(m2).concrete_basis
    gens = [op_tensor(x, np.eye(t.k), t) for x in c1] + [op_tensor(np.eye(t.h), y, t) for y in c2]
    gen_alg = decompose(np.array(gens))
    return commutant(gen_alg)


# ============================================================================
# Bases
# ============================================================================


@dataclass(frozen=True)
class RelBasis:
    """Family ``(ξ_i)`` with partial-isometry ``R(ξ_i)`` and ``Σ R R* = 1``."""

    rep: BasisRep
    vectors: tuple[np.ndarray, ...]
    ops: tuple[np.ndarray, ...]

    def completeness_residual(self) -> float:
        s = sum(r @ r.conj().T for r in self.ops)
        return opnorm(s - np.eye(self.rep.space_dim))

    def orthogonality_residual(self) -> float:
        worst = 0.0
        for i, ri in enumerate(self.ops):
            worst = max(worst, opnorm(ri @ ri.conj().T @ ri - ri))
            for j, rj in enumerate(self.ops):
                if i != j:
                    worst = max(worst, opnorm(rj.conj().T @ ri))
        return worst


def make_basis(rep: BasisRep, *, tol: float | None = None, max_iter: int | None = None) -> RelBasis:
    """Greedy construction of a basis for the module ``rep``.

    Keeps the projection ``p`` onto the part of ``H`` not yet covered; each
    step takes the standard basis vector whose ``p``-compressed bounded
    operator has the largest norm and keeps the partial isometry of its polar
    decomposition.  Vectors are recovered as ``R Λ_ψ(1)`` (or ``R J Λ_ψ(1)``).
    """
    t = default_tol() if tol is None else tol
    h = rep.space_dim
    n = rep.base
    omega = n.coefficients(rep.weight.sqrt)
    p = np.eye(h, dtype=complex)
    vectors, ops = [], []
    limit = max_iter or (h + 1)
    eye = np.eye(h)
    for _ in range(limit):
        if opnorm(p) < 0.5:
            break
        cands = [p @ bounded_op(rep, eye[:, i]).matrix for i in range(h)]
        norms = [opnorm(c) for c in cands]
        r = cands[int(np.argmax(norms))]
        u, s, vh = np.linalg.svd(r, full_matrices=False)
        keep = s > 1e-8 * s[0]
        iso = u[:, keep] @ vh[keep]
        vectors.append(iso @ omega)
        ops.append(iso)
        p = p - iso @ iso.conj().T
        p = (p + p.conj().T) / 2
    else:
        if opnorm(p) >= 0.5:
            raise StructureError("basis construction did not exhaust the space")
    basis = RelBasis(rep, tuple(vectors), tuple(ops))
    # the recovered vectors must reproduce the partial isometries
    for v, op in zip(vectors, ops):
        if opnorm(bounded_op(rep, v).matrix - op) > 1e3 * t:
            raise StructureError("basis vector does not reproduce its partial isometry")
    return basis


# ============================================================================
# Slice maps
# ============================================================================


def slice_left(t: RelativeTensorSpace, xi1: np.ndarray, xi2: np.ndarray, a: np.ndarray,
               target: RelativeTensorSpace | None = None) -> np.ndarray:
    """``(ω_{ξ1,ξ2} ⋆ id)(A) = λ_{ξ2}* A λ_{ξ1}`` (``A: t -> target``)."""
    target = t if target is None else target
    return target.lam(xi2).conj().T @ a @ t.lam(xi1)


def slice_right(t: RelativeTensorSpace, eta1: np.ndarray, eta2: np.ndarray, a: np.ndarray,
                target: RelativeTensorSpace | None = None) -> np.ndarray:
    """``(id ⋆ ω_{η1,η2})(A) = ρ_{η2}* A ρ_{η1}``."""
    target = t if target is None else target
    return target.rho(eta2).conj().T @ a @ t.rho(eta1)


def _density_operator(weight: Weight, rep_images: np.ndarray) -> np.ndarray:
    """Positive ``ϱ`` on the space with ``Tr(ϱ π(x)) = φ(x)``."""
    alg = weight.algebra
    out = np.zeros(rep_images.shape[1:], dtype=complex)
    for k, m in enumerate(alg.block_dims):
        mult = np.trace(rep_images[alg.index(k, 0, 0)]).real
        blk = weight.density[alg.offsets[k]:alg.offsets[k + 1], alg.offsets[k]:alg.offsets[k + 1]]
        for i in range(m):
            for j in range(m):
                out += blk[i, j] * rep_images[alg.index(k, i, j)] / mult
    return out


def slice_weight(t: RelativeTensorSpace, weight: Weight, rep_images: np.ndarray, a: np.ndarray,
                 *, leg: Literal["left", "right"] = "left") -> np.ndarray:
    """Slice ``A`` by a weight on the algebra represented on one leg.

    The weight is written ``Σ_j λ_j ω_{v_j}`` through the spectral
    decomposition of its density operator on that leg.
    """
    rho = _density_operator(weight, rep_images)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    out = 0
    for lam_j, vec in zip(w, v.T):
        if abs(lam_j) < 1e-15:
            continue
        if leg == "left":
            out = out + lam_j * slice_left(t, vec, vec, a)
        else:
            out = out + lam_j * slice_right(t, vec, vec, a)
    return out


# ============================================================================
# Multi-leg spaces
# ============================================================================


def leg_operator(op: np.ndarray, legs: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Place ``op`` (acting on the tensor product of ``legs`` in that order) into ``⊗ dims``."""
    legs = list(legs)
    n = len(dims)
    rest = [i for i in range(n) if i not in legs]
    d_rest = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(d_rest))
    order = legs + rest
    shape = [dims[i] for i in order]
    full = full.reshape(shape + shape)
    inv = [order.index(i) for i in range(n)]
    full = full.transpose(inv + [n + i for i in inv])
    total = int(np.prod(dims))
    return full.reshape(total, total)


def permutation_operator(order: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Unitary sending ``v_0 ⊗ ... ⊗ v_{n-1}`` to ``v_{order[0]} ⊗ v_{order[1]} ⊗ ...``."""
    n = len(dims)
    total = int(np.prod(dims))
    eye = np.eye(total).reshape(list(dims) + [total])
    out = eye.transpose(list(order) + [n])
    return out.reshape(total, total)


class MultiLegSpace:
    """Quotient of ``H_0 ⊗ ... ⊗ H_{n-1}`` by a product of commuting link Grams.

    Each link is ``(i, j, T)`` where ``T`` relates leg ``i`` (anti-rep side)
    to leg ``j`` (rep side).
    """

    def __init__(self, dims: Sequence[int], links: Sequence[tuple[int, int, RelativeTensorSpace]],
                 *, tol: float | None = None) -> None:
        self.tol = default_tol() if tol is None else tol
        self.dims = tuple(int(d) for d in dims)
        self.links = tuple(links)
        total = int(np.prod(self.dims))
        grams = [leg_operator(t.Q, [i, j], self.dims) for i, j, t in self.links]
        g = np.eye(total, dtype=complex)
        for q in grams:
            g = g @ q
        self.commutation_defect = max(
            [opnorm(a @ b - b @ a) for x, a in enumerate(grams) for b in grams[x + 1:]] or [0.0])
        if self.commutation_defect > 1e3 * self.tol * max(1.0, max(opnorm(t.Q) for _, _, t in self.links) ** 2):
            raise StructureError(f"link Grams do not commute ({self.commutation_defect:.3e})")
        g = (g + g.conj().T) / 2
        self.G = g
        w, v = np.linalg.eigh(g)
        top = float(max(w.max(), 0.0))
        keep = w > RANK_CUTOFF * top
        self.V = v[:, keep]
        self.eigenvalues = w[keep]
        self.P = np.sqrt(self.eigenvalues)[:, None] * self.V.conj().T
        self.P_pinv = self.V / np.sqrt(self.eigenvalues)[None, :]
        self.dim = int(keep.sum())

    def lift(self, op: np.ndarray, src2: RelativeTensorSpace, tgt2: RelativeTensorSpace,
             legs: Sequence[int]) -> np.ndarray:
        """Ambient operator acting as ``op: src2 -> tgt2`` on ``legs``, identity elsewhere."""
        amb = tgt2.P_pinv @ op @ src2.P
        return leg_operator(amb, legs, self.dims)
