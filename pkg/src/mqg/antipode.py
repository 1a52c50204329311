"""The antilinear operator ``G``, its polar decomposition, the scaling group and the antipode.

``G`` is determined by its action on the vectors
``v(a,b,c,d) = λ*_{Λ_Ψ(σ^Ψ_{-i}(b*))} U_H (Λ_Ψ(a) ⊗ Λ_Φ((cd)*))``, which it
maps to ``v(c,d,a,b)``.  With ``G = I D^{1/2}`` we get ``R(m) = I m* I``,
``τ_t(x) = D^{-it} x D^{it}`` and ``S = R ∘ τ_{-i/2}`` where
``τ_{-i/2}(x) = D^{-1/2} x D^{1/2}``.

Linear maps on ``M`` are stored as coefficient superoperators in the
matrix-unit basis; ``G``, ``I`` act on ``H_Φ`` as ``v -> A conj(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._config import T_GRID
from .algebra import AntilinearOp, StructureError, modular_data, opnorm
from .hopf import MeasuredQuantumGroupoid, check_coinvolution, superop_images, tensor_apply
from .reltensor import transfer
from .report import Report
from .unitary import PseudoMultiplicativeUnitary, build_U, build_W_prime

__all__ = [
    "Antipode",
    "GOperator",
    "PolarData",
    "ScalingGroup",
    "antilinear_transfer",
    "build_G",
    "build_R_S",
    "build_antipode",
    "build_tau",
    "check_antipode",
    "left_slice",
    "polar_decompose",
    "right_slice",
]


@dataclass(frozen=True)
class GOperator:
    """``G`` with the diagnostics of its least-squares determination."""

    op: AntilinearOp
    span_rank: int
    solve_residual: float
    closability_residual: float
    involution_residual: float

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix


@dataclass(frozen=True)
class PolarData:
    """``G = I D^{1/2}`` with ``D = G*G``."""

    D: np.ndarray
    I: AntilinearOp
    reconstruction_residual: float

    def D_power(self, p: complex) -> np.ndarray:
        w, v = np.linalg.eigh(self.D)
        return (v * np.power(w.astype(complex), p)) @ v.conj().T


class ScalingGroup:
    """``τ_z(x) = D^{-iz} x D^{iz}``; complex ``z`` gives the analytic extension."""

    def __init__(self, g: MeasuredQuantumGroupoid, polar: PolarData) -> None:
        self.g = g
        self.polar = polar
        w, v = np.linalg.eigh(polar.D)
        if w.min() <= 0:
            raise StructureError("D is not invertible")
        self._w, self._v = w, v

    def _dpow(self, p: complex) -> np.ndarray:
        return (self._v * np.power(self._w.astype(complex), p)) @ self._v.conj().T

    def operator(self, z: complex, x_op: np.ndarray) -> np.ndarray:
        """``τ_z`` on operators on ``H_Φ``."""
        return self._dpow(-1j * z) @ x_op @ self._dpow(1j * z)

    def __call__(self, z: complex, x: np.ndarray) -> np.ndarray:
        m = self.g.M
        return m.from_left_action(self.operator(z, m.left_action(x)), tol=self.g.tol)

    def superop(self, z: complex) -> np.ndarray:
        m = self.g.M
        return np.array([m.coefficients(self(z, e)) for e in m.standard_basis]).T

    def membership_residual(self, z: complex) -> float:
        m = self.g.M
        worst = 0.0
        for op in self.g.pi_basis:
            y = self.operator(z, op)
            c = np.einsum("aij,ij->a", self.g.pi_basis.conj(), y) / m._left_norms
            worst = max(worst, opnorm(m.left_action(m.element(c)) - y))
        return worst


@dataclass
class Antipode:
    """``R``, ``τ`` and ``S = R τ_{-i/2}`` as coefficient superoperators on ``M``."""

    g: MeasuredQuantumGroupoid
    polar: PolarData
    tau: ScalingGroup
    R: np.ndarray

    @cached_property
    def S(self) -> np.ndarray:
        return self.R @ self.tau.superop(-0.5j)

    def apply(self, mat: np.ndarray, x: np.ndarray) -> np.ndarray:
        m = self.g.M
        return m.element(mat @ m.coefficients(x))

    def R_of(self, x: np.ndarray) -> np.ndarray:
        return self.apply(self.R, x)

    def S_of(self, x: np.ndarray) -> np.ndarray:
        return self.apply(self.S, x)


# ============================================================================
# Construction
# ============================================================================


def build_G(g: MeasuredQuantumGroupoid, u: PseudoMultiplicativeUnitary | None = None) -> GOperator:
    """Solve ``G v(a,b,c,d) = v(c,d,a,b)`` over all matrix-unit quadruples."""
    if u is None:
        u = build_U(g)
    m = g.M
    h = m.dim
    src, tgt = u.source, u.target
    z = (tgt.P.conj().T @ u.matrix @ src.P).reshape(h, h, h, h)
    lam_psi = m.right_action(g.Psi.sqrt)  # columns Λ_Ψ(E_a)
    lam_phi = m.right_action(g.Phi.sqrt)
    zeta = np.array([m.coefficients(g.Psi.sigma(-1j, e.conj().T)) for e in m.standard_basis]).T
    zeta = lam_psi @ zeta  # columns Λ_Ψ(σ^Ψ_{-i}(E_b*))
    y = lam_phi[:, m.transpose_index]  # columns Λ_Φ(E_f*)
    # vec[b, a, f, :] = λ*_{ζ_b} U (Λ_Ψ(E_a) ⊗ Λ_Φ(E_f*))
    vec = np.einsum("ib,ijkl,ka,lf->bafj", zeta.conj(), z, lam_psi, y, optimize=True)

    labels = m.labels
    composable = []
    broken = []
    for a, (k, i, j) in enumerate(labels):
        for b, (k2, i2, j2) in enumerate(labels):
            if k == k2 and j == i2:
                composable.append((a, b, m.index(k, i, j2)))
            else:
                broken.append((a, b))
    # v(a,b,c,d) = vec[b, a, cd]; for cd = 0 it vanishes, so ab = 0 forces vec[b, a, ·] = 0
    closability = max((float(np.abs(vec[b, a]).max()) for a, b in broken), default=0.0)
    lhs_cols, rhs_cols = [], []
    for a, b, ab in composable:
        for c, d, cd in composable:
            lhs_cols.append(vec[b, a, cd])
            rhs_cols.append(vec[d, c, ab])
    vmat = np.array(lhs_cols).T
    wmat = np.array(rhs_cols).T
    s = np.linalg.svd(vmat, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    if rank < h:
        raise StructureError(f"spanning set for G is rank deficient (rank {rank} < {h})")
    # A conj(V) = W  <=>  conj(V)^T A^T = W^T
    a_t = np.linalg.lstsq(vmat.conj().T, wmat.T, rcond=None)[0]
    a_mat = a_t.T
    scale = max(1.0, opnorm(wmat))
    residual = opnorm(a_mat @ vmat.conj() - wmat) / scale
    closability /= scale
    op = AntilinearOp(a_mat)
    invol = opnorm(op.square() - np.eye(h))
    if residual > 1e-8:
        raise StructureError(f"G system is inconsistent (relative residual {residual:.3e}); closability fails")
    return GOperator(op, rank, residual, closability, invol)


def polar_decompose(gop: GOperator | AntilinearOp, *, tol: float = 1e-9) -> PolarData:
    """``D = G*G`` and the antiunitary ``I = G D^{-1/2}``."""
    a = gop.matrix
    d = a.T @ a.conj()
    d = (d + d.conj().T) / 2
    w, v = np.linalg.eigh(d)
    if w.min() <= tol * max(1.0, w.max()):
        raise StructureError(f"D = G*G is singular (smallest eigenvalue {w.min():.3e})")
    d_mhalf = (v / np.sqrt(w)) @ v.conj().T
    d_half = (v * np.sqrt(w)) @ v.conj().T
    i_mat = a @ d_mhalf.conj()
    recon = opnorm(i_mat @ d_half.conj() - a)
    return PolarData(d, AntilinearOp(i_mat), recon)


def build_tau(g: MeasuredQuantumGroupoid, polar: PolarData, *, tol: float | None = None) -> ScalingGroup:
    t = g.tol if tol is None else tol
    tau = ScalingGroup(g, polar)
    worst = max(tau.membership_residual(s) for s in T_GRID)
    if worst > 1e3 * t:
        raise StructureError(f"τ does not preserve M (membership residual {worst:.3e})")
    return tau


def build_R_S(g: MeasuredQuantumGroupoid, polar: PolarData, tau: ScalingGroup | None = None,
              *, tol: float | None = None) -> Antipode:
    """``R(m) = I m* I`` and ``S = R τ_{-i/2}``."""
    t = g.tol if tol is None else tol
    if tau is None:
        tau = build_tau(g, polar, tol=t)
    m = g.M
    ai = polar.I.matrix
    cols = []
    for op in g.pi_basis:
        r_op = ai @ op.T @ ai.conj()
        cols.append(m.coefficients(m.from_left_action(r_op, tol=t)))
    r = np.array(cols).T
    worst = 0.0
    for a, ea in enumerate(m.standard_basis):
        for b, eb in enumerate(m.standard_basis):
            lhs = m.element(r @ m.coefficients(ea @ eb))
            rhs = m.element(r[:, b]) @ m.element(r[:, a])
            worst = max(worst, opnorm(lhs - rhs))
    if worst > 1e3 * t:
        raise StructureError(f"R is not anti-multiplicative (residual {worst:.3e})")
    return Antipode(g, polar, tau, r)


def build_antipode(g: MeasuredQuantumGroupoid, *, tol: float | None = None) -> tuple[GOperator, Antipode]:
    gop = build_G(g)
    polar = polar_decompose(gop)
    return gop, build_R_S(g, polar, tol=tol)


# ============================================================================
# Slices and antilinear transfer
# ============================================================================


def left_slice(t, x: np.ndarray, v: np.ndarray, w: np.ndarray, tgt=None) -> np.ndarray:
    """``(ω_{v,w} ⋆ id)(x) = λ_w* x λ_v`` for ``x: t -> tgt``."""
    tgt = t if tgt is None else tgt
    return tgt.lam(w).conj().T @ x @ t.lam(v)


def right_slice(t, x: np.ndarray, v: np.ndarray, w: np.ndarray, tgt=None) -> np.ndarray:
    """``(id ⋆ ω_{v,w})(x) = ρ_w* x ρ_v``."""
    tgt = t if tgt is None else tgt
    return tgt.rho(w).conj().T @ x @ t.rho(v)


def antilinear_transfer(src, tgt, ambient: np.ndarray) -> tuple[np.ndarray, float]:
    """Quotient matrix of the antilinear ambient map ``v -> ambient conj(v)``."""
    op = tgt.P @ ambient @ src.P_pinv.conj()
    defect = opnorm(op @ src.P.conj() - tgt.P @ ambient)
    return op, defect / max(1.0, opnorm(tgt.P @ ambient))


# ============================================================================
# Identities
# ============================================================================


def _sample_vectors(h: int, seed: int, n_random: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rand = rng.normal(size=(n_random, h)) + 1j * rng.normal(size=(n_random, h))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.concatenate([np.eye(h), rand])


def check_antipode(g: MeasuredQuantumGroupoid, gop: GOperator, anti: Antipode, *,
                   tol: float | None = None, seed: int = 0, n_random: int = 16,
                   w_prime: PseudoMultiplicativeUnitary | None = None,
                   u: PseudoMultiplicativeUnitary | None = None) -> Report:
    """All antipode identities over matrix units and sampled vectors."""
    t = g.tol if tol is None else tol
    rep = Report()
    m = g.M
    h = m.dim
    eye = np.eye(m.dim)
    polar, tau, R, S = anti.polar, anti.tau, anti.R, anti.S
    rep.add("G.solve", gop.solve_residual, t)
    rep.add("G.closability", gop.closability_residual, t)
    rep.add("G.involutive", gop.involution_residual, t)
    rep.flag("G.span_full", gop.span_rank == h, detail=f"rank {gop.span_rank}")
    ai = polar.I.matrix
    rep.add("polar.reconstruction", polar.reconstruction_residual, t)
    rep.add("I.antiunitary", opnorm(ai.conj().T @ ai - np.eye(h)), t)
    rep.add("I.selfadjoint", opnorm(ai.T - ai), t)
    rep.add("I.involutive", opnorm(ai @ ai.conj() - np.eye(h)), t)
    rep.add("IDI=D^-1", opnorm(ai @ polar.D.conj() @ ai.conj() - polar.D_power(-1)), t)

    # τ: group law, restriction to α(N), β(N)
    worst_group = worst_ab = 0.0
    for s in T_GRID:
        ts = tau.superop(s)
        worst_group = max(worst_group, opnorm(ts @ tau.superop(-s) - eye),
                          opnorm(tau.superop(2 * s) - ts @ ts))
        for n_e, a_e, b_e in zip(g.N.standard_basis, g.alpha, g.beta):
            sig = g.nu.sigma(s, n_e)
            worst_ab = max(worst_ab, opnorm(tau(s, a_e) - g.alpha_of(sig)),
                           opnorm(tau(s, b_e) - g.beta_of(sig)))
    rep.add("tau.group_law", worst_group, t)
    rep.add("tau.alpha_beta", worst_ab, t)

    rep.extend(check_coinvolution(g, R, t))
    # S identities
    worst = 0.0
    for e in m.standard_basis:
        sx = anti.S_of(e)
        worst = max(worst, opnorm(anti.S_of(sx.conj().T).conj().T - e))
    rep.add("S(S(x)*)*=x", worst, t)
    rep.add("S^2=tau_{-i}", opnorm(S @ S - tau.superop(-1j)), t)
    rep.add("SR=RS", opnorm(S @ R - R @ S), t)
    rep.add("tau.R_commute", max(opnorm(tau.superop(s) @ R - R @ tau.superop(s)) for s in T_GRID), t)

    # coproduct compatibilities (abstract, in M ⊗ M)
    worst_tt = worst_egal = worst_besoin = 0.0
    for s in T_GRID:
        ts, tms = tau.superop(s), tau.superop(-s)
        t_img, tm_img = superop_images(m, ts), superop_images(m, tms)
        sig_psi = np.array([g.Psi.sigma(s, e) for e in m.standard_basis])
        sig_phi = np.array([g.Phi.sigma(s, e) for e in m.standard_basis])
        for a, e in enumerate(m.standard_basis):
            cop = g.coproduct[a]
            worst_tt = max(worst_tt, opnorm(tensor_apply(m, cop, t_img, t_img) - g.gamma(tau(s, e))))
            worst_egal = max(worst_egal, opnorm(tensor_apply(m, cop, sig_psi, tm_img)
                                                - g.gamma(g.Psi.sigma(s, e))))
            worst_besoin = max(worst_besoin, opnorm(tensor_apply(m, cop, t_img, sig_phi)
                                                    - g.gamma(g.Phi.sigma(s, e))))
    rep.add("gamma.tau_equivariant", worst_tt, t)
    rep.add("gamma.sigma_psi_tau", worst_egal, t)
    rep.add("gamma.tau_sigma_phi", worst_besoin, t)

    # slice characterizations through W' and W
    if w_prime is None:
        w_prime = build_W_prime(g)
    if u is None:
        u = build_U(g)
    vecs = _sample_vectors(h, seed, n_random)
    src_p, tgt_p, wp = w_prime.source, w_prime.target, w_prime.matrix
    src_u, tgt_u, um = u.source, u.target, u.matrix
    worst_espoir = worst_invafort = 0.0
    for v in vecs:
        for w in vecs[: h]:
            x = m.from_left_action(left_slice(src_p, wp, w, v, tgt_p), tol=1.0)
            y = left_slice(tgt_p, wp.conj().T, w, v, src_p)
            worst_espoir = max(worst_espoir, opnorm(g.pi(anti.S_of(x)) - y))
            # W = U*: S((id ⋆ ω_{v,w})(W)) = (id ⋆ ω_{v,w})(W*)
            xw = m.from_left_action(right_slice(tgt_u, um.conj().T, v, w, src_u), tol=1.0)
            yw = right_slice(src_u, um, v, w, tgt_u)
            worst_invafort = max(worst_invafort, opnorm(g.pi(anti.S_of(xw)) - yw))
    rep.add("S.slice_W_prime", worst_espoir, t)
    rep.add("S.slice_W", worst_invafort, t)

    # Γ-slice antipode identity and the R slice formula
    tba = g.T_ba
    lam_psi = m.right_action(g.Psi.sqrt)
    jmat = g.J
    worst_gam = worst_defr = 0.0
    basis = m.standard_basis
    for a, ea in enumerate(basis):
        for b, eb in enumerate(basis):
            va, vb = lam_psi[:, a], lam_psi[:, b]
            ja, jb = jmat @ va.conj(), jmat @ vb.conj()
            lhs = left_slice(tba, g.gamma_compressed(eb.conj().T @ eb), ja, ja)
            rhs = left_slice(tba, g.gamma_compressed(ea.conj().T @ ea), jb, jb)
            worst_defr = max(worst_defr, opnorm(g.pi(anti.R_of(m.from_left_action(lhs, tol=1.0))) - rhs))
    for (a, b, c, d) in _quadruples(m, seed):
        ea, eb, ec, ed = basis[a], basis[b], basis[c], basis[d]
        x = left_slice(tba, g.gamma_compressed(ec @ ed), lam_psi[:, a], lam_psi[:, b])
        vd = lam_psi @ m.coefficients(g.Psi.sigma(-1j, ed.conj().T))
        y = left_slice(tba, g.gamma_compressed(g.Psi.sigma(1j, ea) @ eb.conj().T), lam_psi[:, c], vd)
        worst_gam = max(worst_gam, opnorm(g.pi(anti.S_of(m.from_left_action(x, tol=1.0))) - y))
    rep.add("S.gamma_slices", worst_gam, t)
    rep.add("R.slice_formula", worst_defr, t)

    # (I ⊗ J) W* = W (I ⊗ J) and (D^{-1} ⊗ Δ_Φ) U = U (D^{-1} ⊗ Δ_Φ)
    ij = np.kron(ai, jmat)
    x_ab, d1 = antilinear_transfer(src_u, tgt_u, ij)
    x_ba, d2 = antilinear_transfer(tgt_u, src_u, ij)
    rep.add("IJ.well_defined", max(d1, d2), t)
    rep.add("IJ.W_relation", opnorm(x_ba @ um.conj() - um.conj().T @ x_ab), t)
    delta = modular_data(g.Phi).delta
    dd = np.kron(polar.D_power(-1), delta)
    dd_src, e1 = transfer(src_u, src_u, dd)
    dd_tgt, e2 = transfer(tgt_u, tgt_u, dd)
    rep.add("DDelta.well_defined", max(e1, e2) / max(1.0, opnorm(dd)), t)
    rep.add("DDelta.W_relation", opnorm(dd_tgt @ um - um @ dd_src) / max(1.0, opnorm(dd)), t)
    return rep


def _quadruples(m, seed: int, limit: int = 4096) -> list[tuple[int, int, int, int]]:
    n = m.dim
    if n ** 4 <= limit:
        return [(a, b, c, d) for a in range(n) for b in range(n) for c in range(n) for d in range(n)]
    rng = np.random.default_rng(seed)
    return [tuple(int(v) for v in q) for q in rng.integers(0, n, size=(limit, 4))]
