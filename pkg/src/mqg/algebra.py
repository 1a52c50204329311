"""Finite-dimensional von Neumann algebras, weights and modular theory.

An algebra is ``⊕_k M_{m_k}``.  Elements are stored in *standard form*: a
block-diagonal ``D x D`` matrix with ``D = sum(m_k)``.  The matrix units
``E^k_{ij}`` are enumerated block by block in row-major order and form an
orthonormal basis for the Hilbert-Schmidt inner product, so coefficient
vectors (length ``dim = sum(m_k**2)``) double as GNS coordinates.

An algebra may carry an *embedding*: concrete matrices on an ambient space,
one per abstract matrix unit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from ._config import default_tol

__all__ = [
    "AntilinearOp",
    "BranchCutError",
    "CocycleCurve",
    "GnsSpace",
    "ModularData",
    "MultiMatrixAlgebra",
    "StructureError",
    "Weight",
    "commutant",
    "connes_cocycle",
    "decompose",
    "gns",
    "matrix_log_principal",
    "modular_data",
    "opnorm",
    "tensor_algebra",
]


class StructureError(ValueError):
    """Input data violates a structural requirement (non-faithful, not closed, ...)."""


class BranchCutError(ValueError):
    """A logarithm was requested too close to the branch cut."""


def opnorm(x: np.ndarray) -> float:
    """Operator (spectral) norm; zero for empty arrays.

    For matrices larger than 128 whose Frobenius norm is below 1e-6 the
    Frobenius norm is returned instead: it bounds the operator norm from
    above and avoids a full SVD for residuals that are already negligible.
    """
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    if x.ndim == 1:
        return float(np.linalg.norm(x))
    if min(x.shape) > 128:
        fro = float(np.linalg.norm(x))
        if fro < 1e-6:
            return fro
    return float(np.linalg.norm(x, 2))


def _hermitian_function(x: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    return (v * f(w)) @ v.conj().T


# ============================================================================
# Multi-matrix algebras
# ============================================================================


class MultiMatrixAlgebra:
    """The algebra ``⊕_k M_{m_k}`` with an optional concrete embedding."""

    def __init__(
        self,
        block_dims: Sequence[int],
        embedding: np.ndarray | None = None,
        *,
        tol: float | None = None,
        check: bool = True,
    ) -> None:
        dims = tuple(int(m) for m in block_dims)
        if not dims or any(m <= 0 for m in dims):
            raise StructureError(f"block dimensions must be positive, got {block_dims!r}")
        self.block_dims = dims
        self.D = sum(dims)
        self.dim = sum(m * m for m in dims)
        offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        self.offsets = tuple(int(o) for o in offsets)
        coeff_offsets = np.concatenate([[0], np.cumsum([m * m for m in dims])]).astype(int)
        self.coeff_offsets = tuple(int(o) for o in coeff_offsets)
        labels, rows, cols = [], [], []
        for k, m in enumerate(dims):
            for i in range(m):
                for j in range(m):
                    labels.append((k, i, j))
                    rows.append(self.offsets[k] + i)
                    cols.append(self.offsets[k] + j)
        self.labels = tuple(labels)
        self.rows = np.array(rows, dtype=int)
        self.cols = np.array(cols, dtype=int)
        self._index = {lab: a for a, lab in enumerate(labels)}
        if embedding is not None:
            embedding = np.asarray(embedding, dtype=complex)
            if embedding.ndim != 3 or embedding.shape[0] != self.dim or embedding.shape[1] != embedding.shape[2]:
                raise StructureError("embedding must have shape (dim, n, n)")
        self.embedding = embedding
        if check and embedding is not None:
            res = self.embedding_residual()
            t = default_tol() if tol is None else tol
            if res > 1e3 * t:
                raise StructureError(f"embedding is not a unital *-homomorphism (residual {res:.3e})")

    # -- identity ------------------------------------------------------------
    def __repr__(self) -> str:
        return f"MultiMatrixAlgebra(block_dims={self.block_dims}, ambient_dim={self.ambient_dim})"

    def same_shape(self, other: "MultiMatrixAlgebra") -> bool:
        return self.block_dims == other.block_dims

    @property
    def ambient_dim(self) -> int:
        return self.D if self.embedding is None else int(self.embedding.shape[1])

    def index(self, k: int, i: int, j: int) -> int:
        return self._index[(k, i, j)]

    @cached_property
    def transpose_index(self) -> np.ndarray:
        """Permutation sending the index of ``E_ij`` to that of ``E_ji``."""
        return np.array([self._index[(k, j, i)] for (k, i, j) in self.labels], dtype=int)

    # -- standard form -------------------------------------------------------
    @cached_property
    def standard_basis(self) -> np.ndarray:
        basis = np.zeros((self.dim, self.D, self.D), dtype=complex)
        basis[np.arange(self.dim), self.rows, self.cols] = 1.0
        basis.setflags(write=False)
        return basis

    def matrix_unit(self, k: int, i: int, j: int) -> np.ndarray:
        return self.standard_basis[self.index(k, i, j)].copy()

    def unit(self) -> np.ndarray:
        return np.eye(self.D, dtype=complex)

    def zero(self) -> np.ndarray:
        return np.zeros((self.D, self.D), dtype=complex)

    def element(self, coeffs: np.ndarray) -> np.ndarray:
        """Standard-form element with the given matrix-unit coefficients."""
        coeffs = np.asarray(coeffs, dtype=complex)
        x = np.zeros((self.D, self.D), dtype=complex)
        x[self.rows, self.cols] = coeffs
        return x

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=complex)[self.rows, self.cols].copy()

    def membership_residual(self, x: np.ndarray) -> float:
        """Norm of the part of ``x`` outside the block-diagonal pattern."""
        return opnorm(np.asarray(x) - self.element(self.coefficients(x)))

    def blocks(self, x: np.ndarray) -> list[np.ndarray]:
        return [x[a:b, a:b] for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    def from_blocks(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        return sla.block_diag(*blocks).astype(complex)

    def trace(self, x: np.ndarray) -> complex:
        """Canonical non-normalized trace."""
        return complex(np.trace(x))

    def random_element(self, rng: np.random.Generator, *, hermitian: bool = False) -> np.ndarray:
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        x = self.element(c)
        return (x + x.conj().T) / 2 if hermitian else x

    @cached_property
    def central_projections(self) -> tuple[np.ndarray, ...]:
        out = []
        for a, b in zip(self.offsets[:-1], self.offsets[1:]):
            p = np.zeros((self.D, self.D), dtype=complex)
            p[a:b, a:b] = np.eye(b - a)
            out.append(p)
        return tuple(out)

    def is_commutative(self) -> bool:
        return all(m == 1 for m in self.block_dims)

    # -- functional calculus -------------------------------------------------
    def hermitian_function(self, x: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return self.from_blocks([_hermitian_function(b, f) for b in self.blocks(x)])

    def power(self, x: np.ndarray, p: complex) -> np.ndarray:
        """``x**p`` for positive invertible ``x`` (complex exponents allowed)."""
        return self.hermitian_function(x, lambda w: np.exp(p * np.log(w.astype(complex))))

    # -- GNS coordinate actions ---------------------------------------------
    @cached_property
    def _action_index(self) -> tuple[np.ndarray, ...]:
        """Scatter indices for the left and right actions (per-block kron patterns)."""
        lr, lc, ls, lt, rr, rc, rs, rt = ([] for _ in range(8))
        c = 0
        for m, o in zip(self.block_dims, self.offsets[:-1]):
            i, l_, j = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
            i, l_, j = i.ravel(), l_.ravel(), j.ravel()
            # (x y)_{ij} = x_{il} y_{lj};  (y x)_{ij} = y_{il} x_{lj}
            lr.append(c + i * m + j), lc.append(c + l_ * m + j), ls.append(o + i), lt.append(o + l_)
            rr.append(c + i * m + j), rc.append(c + i * m + l_), rs.append(o + l_), rt.append(o + j)
            c += m * m
        return tuple(np.concatenate(v) for v in (lr, lc, ls, lt, rr, rc, rs, rt))

    def left_action(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``y -> x y`` in coefficient coordinates."""
        lr, lc, ls, lt = self._action_index[:4]
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[lr, lc] = np.asarray(x)[ls, lt]
        return out

    def right_action(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``y -> y x`` in coefficient coordinates."""
        rr, rc, rs, rt = self._action_index[4:]
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[rr, rc] = np.asarray(x)[rs, rt]
        return out

    @cached_property
    def left_basis(self) -> np.ndarray:
        """Stack of ``left_action(E_a)``."""
        out = np.stack([self.left_action(e) for e in self.standard_basis])
        out.setflags(write=False)
        return out

    @cached_property
    def right_basis(self) -> np.ndarray:
        out = np.stack([self.right_action(e) for e in self.standard_basis])
        out.setflags(write=False)
        return out

    @cached_property
    def _left_norms(self) -> np.ndarray:
        return np.array([self.block_dims[k] for (k, _, _) in self.labels], dtype=float)

    def from_left_action(self, op: np.ndarray, *, tol: float | None = None) -> np.ndarray:
        """Invert :meth:`left_action`; raises if ``op`` is not a left multiplication."""
        c = np.einsum("aij,ij->a", self.left_basis.conj(), op) / self._left_norms
        x = self.element(c)
        res = opnorm(self.left_action(x) - op)
        t = default_tol() if tol is None else tol
        if res > 1e3 * t * max(1.0, opnorm(op)):
            raise StructureError(f"operator is not a left multiplication (residual {res:.3e})")
        return x

    def from_right_action(self, op: np.ndarray, *, tol: float | None = None) -> np.ndarray:
        c = np.einsum("aij,ij->a", self.right_basis.conj(), op) / self._left_norms
        x = self.element(c)
        res = opnorm(self.right_action(x) - op)
        t = default_tol() if tol is None else tol
        if res > 1e3 * t * max(1.0, opnorm(op)):
            raise StructureError(f"operator is not a right multiplication (residual {res:.3e})")
        return x

    # -- embedding ------------------------------------------------------------
    @cached_property
    def concrete_basis(self) -> np.ndarray:
        if self.embedding is None:
            return self.standard_basis
        return self.embedding

    def concrete(self, x: np.ndarray) -> np.ndarray:
        """Image of a standard-form element under the embedding."""
        return np.einsum("a,aij->ij", self.coefficients(x), self.concrete_basis)

    def abstract(self, y: np.ndarray, *, tol: float | None = None) -> np.ndarray:
        """Standard-form preimage of an ambient operator lying in the image."""
        basis = self.concrete_basis
        norms = np.einsum("aij,aij->a", basis.conj(), basis).real
        c = np.einsum("aij,ij->a", basis.conj(), y) / norms
        res = opnorm(np.einsum("a,aij->ij", c, basis) - y)
        t = default_tol() if tol is None else tol
        if res > 1e3 * t * max(1.0, opnorm(y)):
            raise StructureError(f"operator does not lie in the algebra (residual {res:.3e})")
        return self.element(c)

    def concrete_membership_residual(self, y: np.ndarray) -> float:
        basis = self.concrete_basis
        norms = np.einsum("aij,aij->a", basis.conj(), basis).real
        c = np.einsum("aij,ij->a", basis.conj(), y) / norms
        return opnorm(np.einsum("a,aij->ij", c, basis) - y)

    def embedding_residual(self) -> float:
        """Max defect of the embedding as a unital *-homomorphism."""
        e = self.concrete_basis
        worst = 0.0
        for a, (k, i, j) in enumerate(self.labels):
            worst = max(worst, opnorm(e[a].conj().T - e[self.transpose_index[a]]))
            for l in range(self.block_dims[k]):
                prod = e[a] @ e[self._index[(k, j, l)]]
                worst = max(worst, opnorm(prod - e[self._index[(k, i, l)]]))
        # products across mismatched indices vanish
        diag = [self._index[(k, i, i)] for k, m in enumerate(self.block_dims) for i in range(m)]
        unit = e[diag].sum(axis=0)
        worst = max(worst, opnorm(unit - np.eye(unit.shape[0])))
        p = e[diag]
        for x in range(len(diag)):
            for y in range(len(diag)):
                if x != y:
                    worst = max(worst, opnorm(p[x] @ p[y]))
        return worst


def tensor_algebra(a: MultiMatrixAlgebra, b: MultiMatrixAlgebra) -> tuple[MultiMatrixAlgebra, np.ndarray]:
    """Standard-form tensor product ``a ⊗ b``.

    Returns the algebra with blocks ``m_k n_l`` (lexicographic in ``(k, l)``)
    and an index permutation ``perm`` such that the standard form of
    ``x ⊗ y`` is ``kron(x, y)[perm][:, perm]``.
    """
    dims = [m * n for m in a.block_dims for n in b.block_dims]
    c = MultiMatrixAlgebra(dims)
    perm = np.empty(a.D * b.D, dtype=int)
    pos = 0
    for k, m in enumerate(a.block_dims):
        for l, n in enumerate(b.block_dims):
            for i in range(m):
                for p in range(n):
                    perm[pos] = (a.offsets[k] + i) * b.D + (b.offsets[l] + p)
                    pos += 1
    return c, perm


# ============================================================================
# Decomposition of concrete *-algebras
# ============================================================================


def _orthonormal_span(mats: np.ndarray, cutoff: float) -> np.ndarray:
    n = mats.shape[1]
    flat = mats.reshape(mats.shape[0], n * n)
    if flat.shape[0] == 0:
        return np.zeros((0, n, n), dtype=complex)
    u, s, vh = np.linalg.svd(flat, full_matrices=False)
    keep = s > cutoff * max(1.0, s[0])
    return vh[keep].reshape(-1, n, n)


def _hermitian_basis(mats: np.ndarray, cutoff: float) -> np.ndarray:
    """Real-orthonormal basis of the hermitian parts of the span of ``mats``."""
    n = mats.shape[1]
    adj = mats.conj().transpose(0, 2, 1)
    herm = np.concatenate([(mats + adj) / 2, (mats - adj) / 2j])
    flat = herm.reshape(herm.shape[0], n * n)
    real = np.concatenate([flat.real, flat.imag], axis=1)
    _, s, vh = np.linalg.svd(real, full_matrices=False)
    keep = s > cutoff * max(1.0, s[0])
    out = (vh[keep, : n * n] + 1j * vh[keep, n * n:]).reshape(-1, n, n)
    return (out + out.conj().transpose(0, 2, 1)) / 2


def _generate(gens: np.ndarray, cutoff: float, max_rounds: int = 64) -> np.ndarray:
    """Orthonormal basis of the *-algebra generated by ``gens`` (plus identity)."""
    n = gens.shape[1]
    cur = np.concatenate([gens, gens.conj().transpose(0, 2, 1), np.eye(n)[None]], axis=0)
    basis = _orthonormal_span(cur, cutoff)
    for _ in range(max_rounds):
        prods = np.einsum("aij,bjk->abik", basis, basis).reshape(-1, n, n)
        new = _orthonormal_span(np.concatenate([basis, prods], axis=0), cutoff)
        if new.shape[0] == basis.shape[0]:
            return new
        basis = new
    raise StructureError("algebra generation did not stabilize")


def _cluster(values: np.ndarray, gap: float) -> list[np.ndarray]:
    order = np.argsort(values)
    groups: list[list[int]] = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] > gap:
            groups.append([int(cur)])
        else:
            groups[-1].append(int(cur))
    return [np.array(g) for g in groups]


def decompose(
    generators: Sequence[np.ndarray] | np.ndarray,
    *,
    seed: int = 0,
    tol: float | None = None,
    close: bool = True,
) -> MultiMatrixAlgebra:
    """Matrix-unit decomposition of the unital *-algebra generated by ``generators``.

    Works on concrete operators on a common ambient space.  The unit of the
    result is the ambient identity.  A fixed ``seed`` makes the choice of
    matrix units reproducible.
    """
    t = default_tol() if tol is None else tol
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim == 2:
        gens = gens[None]
    n = gens.shape[1]
    cutoff = 1e-9
    basis = _generate(gens, cutoff) if close else _orthonormal_span(
        np.concatenate([gens, np.eye(n)[None]]), cutoff)
    rng = np.random.default_rng(seed)
    r = basis.shape[0]
    herm = _hermitian_basis(basis, cutoff)

    def rand_herm() -> np.ndarray:
        c = rng.standard_normal(herm.shape[0])
        x = np.einsum("a,aij->ij", c, herm)
        return (x + x.conj().T) / 2

    # centre: elements commuting with a few random generic elements
    probes = [rand_herm() for _ in range(3)]
    rows = []
    for p in probes:
        comm = np.einsum("aij,jk->aik", basis, p) - np.einsum("ij,ajk->aik", p, basis)
        rows.append(comm.reshape(r, -1).T)
    sys_mat = np.concatenate(rows, axis=0)
    _, s, vh = np.linalg.svd(sys_mat, full_matrices=True)
    scale = max(1.0, s[0]) if s.size else 1.0
    rank = int(np.sum(s > 1e-8 * scale))
    null = vh[rank:].conj()
    centre = np.einsum("za,aij->zij", null, basis)
    centre_h = _hermitian_basis(centre, cutoff)
    zc = rng.standard_normal(centre_h.shape[0])
    z = np.einsum("a,aij->ij", zc, centre_h)
    z = (z + z.conj().T) / 2
    w, v = np.linalg.eigh(z)
    spread = max(1.0, float(np.max(np.abs(w))))
    groups = _cluster(w, 1e-7 * spread)
    blocks: list[tuple[int, np.ndarray]] = []  # (m_k, units array (m,m,n,n))
    for g in groups:
        frame = v[:, g]
        p = frame @ frame.conj().T
        pa = np.einsum("ij,ajk,kl->ail", p, basis, p)
        sub = _orthonormal_span(pa, cutoff)
        dk = sub.shape[0]
        m = int(round(np.sqrt(dk)))
        if m * m != dk:
            raise StructureError(f"central block has non-square dimension {dk}")
        if m == 1:
            units = p[None, None]
        else:
            c = rng.standard_normal(sub.shape[0])
            a = np.einsum("a,aij->ij", c, sub)
            a = (a + a.conj().T) / 2
            aw, av = np.linalg.eigh(frame.conj().T @ a @ frame)
            aspread = max(1.0, float(np.max(np.abs(aw))))
            agroups = _cluster(aw, 1e-7 * aspread)
            if len(agroups) != m:
                raise StructureError("failed to split a central block into minimal projections")
            diag = []
            for ag in agroups:
                vv = frame @ av[:, ag]
                diag.append(vv @ vv.conj().T)
            b = np.einsum("a,aij->ij", rng.standard_normal(sub.shape[0]) + 1j * rng.standard_normal(sub.shape[0]), sub)
            units = np.zeros((m, m, n, n), dtype=complex)
            units[0, 0] = diag[0]
            q = np.trace(diag[0]).real
            for i in range(1, m):
                x = diag[i] @ b @ diag[0]
                c_i = np.trace(x.conj().T @ x).real / q
                if c_i < 1e-12:
                    raise StructureError("degenerate random element while building matrix units")
                units[i, 0] = x / np.sqrt(c_i)
                units[0, i] = units[i, 0].conj().T
            for i in range(1, m):
                for j in range(1, m):
                    units[i, j] = units[i, 0] @ units[0, j]
        blocks.append((m, units))
    # deterministic order: by size, then by first ambient index carried
    def key(item: tuple[int, np.ndarray]) -> tuple[int, int]:
        m, units = item
        d = np.abs(np.diag(units[0, 0]))
        return (m, int(np.argmax(d > 0.5 * d.max())))

    blocks.sort(key=key)
    dims = [m for m, _ in blocks]
    emb = []
    for m, units in blocks:
        for i in range(m):
            for j in range(m):
                emb.append(units[i, j])
    alg = MultiMatrixAlgebra(dims, np.array(emb), tol=t, check=False)
    res = alg.embedding_residual()
    if res > 1e-6:
        raise StructureError(f"decomposition failed (residual {res:.3e})")
    if alg.dim != r:
        raise StructureError(f"decomposition lost dimensions ({alg.dim} != {r})")
    return alg


def commutant(a: MultiMatrixAlgebra, *, tol: float | None = None) -> MultiMatrixAlgebra:
    """Commutant of an embedded algebra in its ambient space, with block structure.

    Built from multiplicity spaces: if ``A ≅ ⊕ M_{m_k} ⊗ 1_{q_k}`` then
    ``A' ≅ ⊕ 1_{m_k} ⊗ M_{q_k}``; matrix units come from orthonormal frames of
    the ranges of ``E^k_{11}``.
    """
    e = a.concrete_basis
    n = e.shape[1]
    blocks_units = []
    dims = []
    for k, m in enumerate(a.block_dims):
        e11 = e[a.index(k, 0, 0)]
        w, v = np.linalg.eigh((e11 + e11.conj().T) / 2)
        frame = v[:, w > 0.5]
        q = frame.shape[1]
        if q == 0:
            raise StructureError("embedding is not faithful")
        units = np.zeros((q, q, n, n), dtype=complex)
        for s in range(q):
            for t_ in range(q):
                op = np.zeros((n, n), dtype=complex)
                rank_one = np.outer(frame[:, s], frame[:, t_].conj())
                for i in range(m):
                    op += e[a.index(k, i, 0)] @ rank_one @ e[a.index(k, 0, i)]
                units[s, t_] = op
        blocks_units.append(units)
        dims.append(q)
    unit = sum(e[a.index(k, i, i)] for k, m in enumerate(a.block_dims) for i in range(m))
    comp = np.eye(n) - unit
    if opnorm(comp) > 0.5:
        # non-unital image: the complement carries a full matrix block
        w, v = np.linalg.eigh((comp + comp.conj().T) / 2)
        frame = v[:, w > 0.5]
        q = frame.shape[1]
        units = np.einsum("is,jt->stij", frame, frame.conj())
        blocks_units.append(units)
        dims.append(q)
    emb = [u[s, t_] for u, q in zip(blocks_units, dims) for s in range(q) for t_ in range(q)]
    return MultiMatrixAlgebra(dims, np.array(emb), tol=tol)


# ============================================================================
# Antilinear operators
# ============================================================================


@dataclass(frozen=True)
class AntilinearOp:
    """Antilinear map ``v -> matrix @ conj(v)`` in a fixed orthonormal frame."""

    matrix: np.ndarray

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(v)

    def compose(self, other: "AntilinearOp") -> np.ndarray:
        """The linear operator ``self ∘ other``."""
        return self.matrix @ np.conj(other.matrix)

    def after_linear(self, lin: np.ndarray) -> "AntilinearOp":
        """``self ∘ lin`` as an antilinear operator."""
        return AntilinearOp(self.matrix @ np.conj(lin))

    def before_linear(self, lin: np.ndarray) -> "AntilinearOp":
        """``lin ∘ self``."""
        return AntilinearOp(lin @ self.matrix)

    def adjoint(self) -> "AntilinearOp":
        return AntilinearOp(self.matrix.T.copy())

    def square(self) -> np.ndarray:
        return self.compose(self)

    def conjugate_operator(self, x: np.ndarray) -> np.ndarray:
        """The linear operator ``self ∘ x ∘ self^{-1}`` when self is involutive."""
        return self.matrix @ np.conj(x) @ np.conj(self.matrix)


# ============================================================================
# Weights, GNS and modular data
# ============================================================================


@dataclass(frozen=True)
class Weight:
    """Faithful weight ``x -> Tr(density x)`` on a multi-matrix algebra."""

    algebra: MultiMatrixAlgebra
    density: np.ndarray
    tol: float = field(default_factory=default_tol)

    def __post_init__(self) -> None:
        rho = np.asarray(self.density, dtype=complex)
        if rho.shape != (self.algebra.D, self.algebra.D):
            raise StructureError("density has the wrong shape")
        if self.algebra.membership_residual(rho) > 1e3 * self.tol:
            raise StructureError("density does not lie in the algebra")
        if opnorm(rho - rho.conj().T) > 1e3 * self.tol * max(1.0, opnorm(rho)):
            raise StructureError("density is not self-adjoint")
        rho = self.algebra.element(self.algebra.coefficients((rho + rho.conj().T) / 2))
        w = np.linalg.eigvalsh(rho)
        if w.min() <= 1e-14 * max(1.0, w.max()):
            raise StructureError("weight is not faithful (density not invertible)")
        object.__setattr__(self, "density", rho)

    @classmethod
    def trace(cls, algebra: MultiMatrixAlgebra) -> "Weight":
        return cls(algebra, algebra.unit())

    def __call__(self, x: np.ndarray) -> complex:
        return complex(np.trace(self.density @ x))

    @cached_property
    def _eig(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.density)
        return w, v

    def power(self, p: complex) -> np.ndarray:
        w, v = self._eig
        return (v * np.exp(p * np.log(w.astype(complex)))) @ v.conj().T

    @cached_property
    def sqrt(self) -> np.ndarray:
        return self.power(0.5)

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        return self.power(-0.5)

    def sigma(self, t: complex, x: np.ndarray) -> np.ndarray:
        """Modular flow ``ρ^{it} x ρ^{-it}``; complex ``t`` gives the analytic extension."""
        return self.power(1j * t) @ x @ self.power(-1j * t)

    def values(self) -> np.ndarray:
        """Weight evaluated on every matrix unit."""
        return np.array([self(e) for e in self.algebra.standard_basis])

    def with_density(self, density: np.ndarray) -> "Weight":
        return Weight(self.algebra, density, self.tol)


@dataclass(frozen=True)
class GnsSpace:
    """GNS space ``L²(M, φ)``: ``Λ(x)`` = coefficients of ``x ρ^{1/2}``."""

    weight: Weight

    @property
    def algebra(self) -> MultiMatrixAlgebra:
        return self.weight.algebra

    @property
    def dimension(self) -> int:
        return self.algebra.dim

    def lambda_map(self, x: np.ndarray) -> np.ndarray:
        return self.algebra.coefficients(x @ self.weight.sqrt)

    def lambda_inverse(self, v: np.ndarray) -> np.ndarray:
        return self.algebra.element(v) @ self.weight.inv_sqrt

    @cached_property
    def lambda_matrix(self) -> np.ndarray:
        """Matrix of ``Λ`` from coefficient coordinates of ``x``."""
        return self.algebra.right_action(self.weight.sqrt)

    @cached_property
    def omega(self) -> np.ndarray:
        """``Λ(1)``."""
        return self.lambda_map(self.algebra.unit())

    def left_action(self, x: np.ndarray) -> np.ndarray:
        return self.algebra.left_action(x)

    def right_action(self, x: np.ndarray) -> np.ndarray:
        """Right multiplication ``ξ -> ξ x`` (equals ``J π(x*) J``)."""
        return self.algebra.right_action(x)

    def inner(self, v: np.ndarray, w: np.ndarray) -> complex:
        """``<v, w>``, linear in ``v``."""
        return complex(np.vdot(w, v))


def gns(weight: Weight) -> GnsSpace:
    return GnsSpace(weight)


@dataclass(frozen=True)
class ModularData:
    """Modular operator, conjugation and flow of a weight."""

    weight: Weight
    delta: np.ndarray
    j: AntilinearOp

    def sigma(self, t: complex, x: np.ndarray) -> np.ndarray:
        return self.weight.sigma(t, x)

    def delta_power(self, p: complex) -> np.ndarray:
        alg = self.weight.algebra
        rho = self.weight.density
        return alg.left_action(alg.power(rho, p)) @ alg.right_action(alg.power(rho, -p))


def conjugation_matrix(algebra: MultiMatrixAlgebra) -> np.ndarray:
    """Permutation ``K`` with ``J v = K conj(v)`` (adjoint of ``ξ`` as a matrix)."""
    k = np.zeros((algebra.dim, algebra.dim), dtype=complex)
    k[algebra.transpose_index, np.arange(algebra.dim)] = 1.0
    return k


def modular_data(weight: Weight) -> ModularData:
    """``Δ Λ(x) = Λ(ρ x ρ^{-1})`` and ``J Λ(x) = Λ(ρ^{1/2} x* ρ^{-1/2})``."""
    alg = weight.algebra
    rho = weight.density
    delta = alg.left_action(rho) @ alg.right_action(alg.power(rho, -1.0))
    return ModularData(weight, delta, AntilinearOp(conjugation_matrix(alg)))


# ============================================================================
# Cocycles and logarithms
# ============================================================================


@dataclass(frozen=True)
class CocycleCurve:
    """``t -> [Dφ:Dψ]_t = ρ_φ^{it} ρ_ψ^{-it}``."""

    phi: Weight
    psi: Weight

    def evaluate(self, t: float) -> np.ndarray:
        return self.phi.power(1j * t) @ self.psi.power(-1j * t)

    __call__ = evaluate

    def cocycle_residual(self, s: float, t: float) -> float:
        lhs = self.evaluate(s + t)
        rhs = self.evaluate(s) @ self.psi.sigma(s, self.evaluate(t))
        return opnorm(lhs - rhs)


def connes_cocycle(phi: Weight, psi: Weight) -> CocycleCurve:
    if not phi.algebra.same_shape(psi.algebra):
        raise StructureError("weights live on different algebras")
    return CocycleCurve(phi, psi)


def matrix_log_principal(u: np.ndarray, eps: float = 1e-6, *, guard: float = np.pi) -> np.ndarray:
    """Principal logarithm of a normal or positive matrix.

    Raises :class:`BranchCutError` if an eigenvalue has ``|arg| > guard - eps``;
    the caller should shrink the parameter step that produced ``u``.
    """
    u = np.asarray(u, dtype=complex)
    if u.size == 0:
        return u.copy()
    herm = opnorm(u - u.conj().T) <= 1e-12 * max(1.0, opnorm(u))
    if herm:
        w, v = np.linalg.eigh((u + u.conj().T) / 2)
        if w.min() <= 0:
            raise BranchCutError("positive matrix expected: non-positive eigenvalue")
        return (v * np.log(w)) @ v.conj().T
    t_mat, z = sla.schur(u, output="complex")
    lam = np.diag(t_mat)
    if np.any(np.abs(lam) < 1e-300) or np.max(np.abs(np.angle(lam))) > guard - eps:
        raise BranchCutError(
            "eigenvalue too close to the branch cut; retry with a smaller parameter step")
    off = t_mat - np.diag(lam)
    if opnorm(off) <= 1e-10 * max(1.0, opnorm(u)):
        return (z * np.log(lam)) @ z.conj().T
    return sla.logm(u)
