"""Modulus, scaling operator, uniqueness of invariant weights, manageability and base-weight change.

``u_t = [DΦ∘R : DΦ]_t`` factors as ``λ^{it²/2} δ^{it}`` with ``λ`` central and
``δ`` commuting with ``α(N)`` and ``β(N)``.  Both generators are recovered
from two samples of the cocycle: ``u_{2ε} u_ε^{-2} = λ^{iε²}`` and
``δ^{iε} = λ^{-iε²/2} u_ε``.

The manageable operator acts on ``H_Φ`` by
``P^{it} Λ_Φ(x) = Λ_Φ(λ^{it/2} τ_t(x))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._config import T_GRID
from .algebra import BranchCutError, StructureError, Weight, matrix_log_principal, opnorm
from .antipode import Antipode, build_antipode, right_slice
from .hopf import MeasuredQuantumGroupoid, check_all, superop_of
from .reltensor import transfer
from .report import Report
from .unitary import PseudoMultiplicativeUnitary, _span_rank, build_U

__all__ = [
    "ManageableOp",
    "ModulusData",
    "RebaseResult",
    "build_P",
    "check_invariants",
    "check_manageability",
    "check_modulus_relations",
    "check_uniqueness",
    "check_weak_regularity",
    "extract_modulus",
    "perturb_T_L",
    "phi_after_R",
    "rebase_weight",
]

DEFAULT_EPSILON = 1.0 / 16
MAX_HALVINGS = 3
_VERIFY_GRID = (-1.0, -0.5, 0.5, 1.0)


# ============================================================================
# Helpers
# ============================================================================


def _hpow(x: np.ndarray, p: complex) -> np.ndarray:
    """Power of a positive matrix (Hermitian part taken first)."""
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    if w.min() <= 0:
        raise StructureError("positive invertible matrix expected")
    return (v * np.exp(p * np.log(w.astype(complex)))) @ v.conj().T


def _hexp(x: np.ndarray) -> np.ndarray:
    """``exp`` of the Hermitian part of ``x``."""
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    return (v * np.exp(w)) @ v.conj().T


def _generator(u: np.ndarray, step: float) -> np.ndarray:
    """Self-adjoint ``A`` with ``u = exp(i step A)`` via the guarded principal log."""
    a = matrix_log_principal(u, guard=np.pi / 2) / (1j * step)
    return (a + a.conj().T) / 2


def _commutator_residual(x: np.ndarray, ops: np.ndarray) -> float:
    return max((opnorm(x @ o - o @ x) for o in ops), default=0.0)


def _span_residual(images: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``x`` in the span of ``images`` and the residual."""
    span = images.reshape(images.shape[0], -1).T
    coef, *_ = np.linalg.lstsq(span, x.reshape(-1), rcond=None)
    return coef, float(np.linalg.norm(span @ coef - x.reshape(-1)))


def phi_after_R(g: MeasuredQuantumGroupoid, R: np.ndarray) -> Weight:
    """``Φ ∘ R`` from the coefficient superoperator ``R``."""
    phi_vals = g.Phi.values()
    vals = R.T @ phi_vals
    rho = g.M.element(vals[g.M.transpose_index])
    return Weight(g.M, rho, g.tol)


# ============================================================================
# Modulus and scaling operator
# ============================================================================


@dataclass(frozen=True)
class ModulusData:
    """``δ``, ``λ`` as elements of ``M`` with extraction diagnostics."""

    delta: np.ndarray
    lam: np.ndarray
    epsilon: float
    verification_residual: float
    cross_validation_residual: float
    self_consistency: float
    centrality_residual: float


def _extract_at(u, eps: float) -> tuple[np.ndarray, np.ndarray]:
    u1, u2 = u(eps), u(2 * eps)
    u1_inv = np.linalg.inv(u1)
    log_lam = _generator(u2 @ u1_inv @ u1_inv, eps * eps)
    lam = _hexp(log_lam)
    half = _hpow(lam, -0.5j * eps * eps)
    log_delta = _generator(half @ u1, eps)
    return _hexp(log_delta), lam


def _extract_retrying(u, eps: float) -> tuple[np.ndarray, np.ndarray, float]:
    for _ in range(MAX_HALVINGS + 1):
        try:
            delta, lam = _extract_at(u, eps)
            return delta, lam, eps
        except BranchCutError:
            eps /= 2
    raise BranchCutError("cocycle generator extraction failed after repeated step halving")


def _lambda_centrality(g: MeasuredQuantumGroupoid, lam: np.ndarray) -> float:
    res = _commutator_residual(lam, g.M.standard_basis)
    res = max(res, _span_residual(g.alpha, lam)[1], _span_residual(g.beta, lam)[1])
    return res / max(1.0, opnorm(lam))


def extract_modulus(g: MeasuredQuantumGroupoid, anti: Antipode | None = None, epsilon: float = DEFAULT_EPSILON,
                    *, tol: float | None = None) -> ModulusData:
    """Recover ``δ`` and ``λ`` from ``u_t = [DΦ∘R : DΦ]_t``."""
    t = g.tol if tol is None else tol
    if anti is None:
        anti = build_antipode(g, tol=tol)[1]
    phi_r = phi_after_R(g, anti.R)
    from .algebra import connes_cocycle

    u = connes_cocycle(phi_r, g.Phi)
    delta, lam, eps = _extract_retrying(u, epsilon)
    central = _lambda_centrality(g, lam)
    if central > 1e3 * t:
        raise StructureError(f"scaling operator is not central in M ∩ α(N) ∩ β(N) (residual {central:.3e})")
    verify = max(opnorm(u(s) - _hpow(lam, 0.5j * s * s) @ _hpow(delta, 1j * s)) for s in _VERIFY_GRID)
    cross = 0.0
    for s in _VERIFY_GRID:
        ds, dms = _hpow(delta, 1j * s), _hpow(delta, -1j * s)
        for e in g.M.standard_basis:
            cross = max(cross, opnorm(phi_r.sigma(s, e) - ds @ g.Phi.sigma(s, e) @ dms))
    d2, l2, _ = _extract_retrying(u, eps / 2)
    consistency = max(opnorm(l2 - lam) / opnorm(lam), opnorm(d2 - delta) / opnorm(delta))
    return ModulusData(delta, lam, eps, verify, cross, consistency, central)


def check_modulus_relations(g: MeasuredQuantumGroupoid, md: ModulusData, anti: Antipode, *,
                            tol: float | None = None) -> Report:
    """``R(λ)=λ``, ``R(δ)=δ^{-1}``, ``τ``-invariance, group-likeness and the commutation data."""
    t = g.tol if tol is None else tol
    rep = Report()
    delta, lam = md.delta, md.lam
    rep.add("modulus.cocycle_factorization", md.verification_residual, t)
    rep.add("modulus.cross_validation", md.cross_validation_residual, t)
    rep.add("modulus.self_consistency", md.self_consistency, max(t, 1e-8))
    rep.add("R(lambda)=lambda", opnorm(anti.R_of(lam) - lam), t)
    rep.add("R(delta)=delta^-1", opnorm(anti.R_of(delta) - np.linalg.inv(delta)), t)
    worst_d = max(opnorm(anti.tau(s, delta) - delta) for s in T_GRID)
    worst_l = max(opnorm(anti.tau(s, lam) - lam) for s in T_GRID)
    rep.add("tau(delta)=delta", worst_d, t)
    rep.add("tau(lambda)=lambda", worst_l, t)
    rep.add("gamma(delta)=delta(x)delta", opnorm(g.gamma(delta) - np.kron(delta, delta) @ g.e), t)
    rep.add("lambda.central", md.centrality_residual, t)
    rep.add("delta.commutes_alpha_beta",
            max(_commutator_residual(delta, g.alpha), _commutator_residual(delta, g.beta)), t)
    rep.add("delta.in_M", g.M.membership_residual(delta), t)
    return rep


# ============================================================================
# Uniqueness of invariant operator-valued weights
# ============================================================================


def perturb_T_L(g: MeasuredQuantumGroupoid, h: np.ndarray) -> np.ndarray:
    """Superoperator of ``x -> T_L(β(h)^{1/2} x β(h)^{1/2})``."""
    b = _hpow(g.beta_of(h), 0.5)
    return superop_of(g.M, lambda x: g.apply_T_L(b @ x @ b))


@dataclass
class UniquenessResult:
    report: Report
    h: np.ndarray | None = None
    cocycle: dict = field(default_factory=dict)


def check_uniqueness(g: MeasuredQuantumGroupoid, T_L_prime: np.ndarray, *, tol: float | None = None,
                     epsilon: float = DEFAULT_EPSILON) -> UniquenessResult:
    """Find central ``h`` in ``N`` with ``[DΦ':DΦ]_t = β(h^{it})`` and ``Φ' = Φ_{β(h)}``."""
    t = g.tol if tol is None else tol
    rep = Report()
    g2 = g.replace(T_L=T_L_prime)
    try:
        phi2 = g2.Phi
    except StructureError as exc:
        rep.flag("uniqueness.phi_prime", False, detail=str(exc))
        return UniquenessResult(rep)
    from .algebra import connes_cocycle

    u = connes_cocycle(phi2, g.Phi)
    gen, eps = None, epsilon
    for _ in range(MAX_HALVINGS + 1):
        try:
            gen = _generator(u(eps), eps)
            break
        except BranchCutError:
            eps /= 2
    if gen is None:
        raise BranchCutError("cocycle generator extraction failed after repeated step halving")
    coef, res = _span_residual(g.beta, gen)
    scale = max(1.0, opnorm(gen))
    n_log = g.N.element(coef)
    n_log = (n_log + n_log.conj().T) / 2
    rep.add("uniqueness.in_beta_N", res / scale, t)
    rep.add("uniqueness.central_in_N", _commutator_residual(n_log, g.N.standard_basis) / scale, t)
    h = _hexp(n_log)
    bh = g.beta_of(h)
    worst = max(opnorm(u(s) - _hpow(bh, 1j * s)) for s in T_GRID)
    rep.add("uniqueness.cocycle=beta(h^it)", worst, t)
    b_half = _hpow(bh, 0.5)
    phi_h = g.Phi.density
    rep.add("uniqueness.phi_prime=phi_beta(h)",
            opnorm(phi2.density - b_half @ phi_h @ b_half) / max(1.0, opnorm(phi_h)), t)
    return UniquenessResult(rep, h, {"epsilon": eps})


# ============================================================================
# Manageable operator
# ============================================================================


@dataclass(frozen=True)
class ManageableOp:
    """Positive ``P`` on ``H_Φ`` with its defining-relation residual."""

    P: np.ndarray
    epsilon: float
    definition_residual: float

    def power(self, z: complex) -> np.ndarray:
        return _hpow(self.P, z)


def _p_it_formula(g: MeasuredQuantumGroupoid, anti: Antipode, lam: np.ndarray, s: float) -> np.ndarray:
    lphi = g.H.lambda_matrix
    return g.pi(_hpow(lam, 0.5j * s)) @ lphi @ anti.tau.superop(s) @ np.linalg.inv(lphi)


def build_P(g: MeasuredQuantumGroupoid, anti: Antipode, md: ModulusData, *,
            epsilon: float = DEFAULT_EPSILON) -> ManageableOp:
    """``P`` from the generator of ``P^{iε} Λ_Φ(x) = Λ_Φ(λ^{iε/2} τ_ε(x))``."""
    eps, log_p = epsilon, None
    for _ in range(MAX_HALVINGS + 1):
        try:
            log_p = _generator(_p_it_formula(g, anti, md.lam, eps), eps)
            break
        except BranchCutError:
            eps /= 2
    if log_p is None:
        raise BranchCutError("P generator extraction failed after repeated step halving")
    p = _hexp(log_p)
    worst = max(opnorm(_hpow(p, 1j * s) - _p_it_formula(g, anti, md.lam, s)) for s in T_GRID)
    return ManageableOp(p, eps, worst)


def manageability_slices(g: MeasuredQuantumGroupoid, u: PseudoMultiplicativeUnitary, p: int, q: int,
                         vectors: np.ndarray) -> np.ndarray:
    """``(id ⋆ ω_{v_p, v_q})(W)`` for ``W = U_H*``."""
    return right_slice(u.target, u.matrix.conj().T, vectors[p], vectors[q], u.source)


def check_manageability(g: MeasuredQuantumGroupoid, anti: Antipode, mop: ManageableOp, *,
                        u: PseudoMultiplicativeUnitary | None = None, tol: float | None = None,
                        seed: int = 0, n_random: int = 4) -> Report:
    """Bilinear manageability identity on sampled vectors and ``P^{it}`` commutation with ``W``."""
    t = g.tol if tol is None else tol
    rep = Report()
    if u is None:
        u = build_U(g)
    h = g.M.dim
    rng = np.random.default_rng(seed)
    rand = rng.normal(size=(n_random, h)) + 1j * rng.normal(size=(n_random, h))
    vecs = np.concatenate([np.eye(h), rand / np.linalg.norm(rand, axis=1, keepdims=True)])
    ai = anti.polar.I.matrix
    p_half, p_mhalf = mop.power(0.5), mop.power(-0.5)
    n_v = len(vecs)
    slices = {}
    for a in range(n_v):
        for b in range(n_v):
            slices[a, b] = manageability_slices(g, u, a, b, vecs)
    # (I X(q,p) I v | w) = (X(p,q) P^{-1/2} v | P^{1/2} w)
    worst = 0.0
    test_v = vecs[h:] if n_random else vecs
    for (a, b), x in slices.items():
        lhs_op = ai @ slices[b, a].conj() @ ai.conj()
        for v in test_v:
            for w in test_v:
                lhs = np.vdot(w, lhs_op @ v)
                rhs = np.vdot(p_half @ w, x @ (p_mhalf @ v))
                worst = max(worst, abs(lhs - rhs) / max(1.0, np.linalg.norm(p_half @ w) * np.linalg.norm(p_mhalf @ v)))
    rep.add("manageability.bilinear", worst, t)
    # W (P^{it} ⊗ P^{it}) = (P^{it} ⊗ P^{it}) W with W: T_ba -> T_ab_hat
    wm = u.matrix.conj().T
    worst_c = worst_d = 0.0
    for s in T_GRID:
        pt = mop.power(1j * s)
        amb = np.kron(pt, pt)
        on_ba, d1 = transfer(u.target, u.target, amb)
        on_ab, d2 = transfer(u.source, u.source, amb)
        worst_d = max(worst_d, d1, d2)
        worst_c = max(worst_c, opnorm(wm @ on_ba - on_ab @ wm))
    rep.add("manageability.P_tensor_well_defined", worst_d, t)
    rep.add("manageability.W_commutes_P", worst_c, t)
    rep.add("manageability.P_definition", mop.definition_residual, t)
    return rep


def check_weak_regularity(g: MeasuredQuantumGroupoid, u: PseudoMultiplicativeUnitary | None = None, *,
                          tol: float | None = None) -> Report:
    """Slices ``λ_v* Ŵ ρ_w`` of ``Ŵ = ς W* ς`` span ``α(N)'``."""
    t = g.tol if tol is None else tol
    rep = Report()
    if u is None:
        u = build_U(g)
    h = g.M.dim
    basis = np.eye(h)
    ops = []
    for w in basis:
        uw = u.matrix @ u.source.lam(w)
        for v in basis:
            ops.append(u.target.rho(v).conj().T @ uw)
    ops = np.array(ops)
    rep.add("weak_regularity.in_alpha_commutant",
            max(g.alpha_H.commutator_residual(x) for x in ops), t)
    target = g.alpha_H.commutant.dim
    rank = _span_rank(ops)
    rep.flag("weak_regularity.rank", rank == target, detail=f"rank {rank}, dim α(N)' {target}")
    return rep


# ============================================================================
# Structural invariants
# ============================================================================


def check_invariants(g: MeasuredQuantumGroupoid, anti: Antipode, *, tol: float | None = None) -> Report:
    """Commutation of ``σ^{Φ'}`` (``Φ' = Φ∘R``) with ``σ^Ψ`` and ``τ``; ``Γτ_t = (σ^Φ_t ⋆ σ^{Φ∘R}_{-t})Γ``."""
    t = g.tol if tol is None else tol
    rep = Report()
    phi_r = phi_after_R(g, anti.R)
    m = g.M
    # σ^{Φ∘R}_t = Ad ρ'^{it}, σ^Ψ_t = Ad ρ_Ψ^{it}: generators commute modulo the centre
    worst_psi = worst_tau = 0.0
    for s in T_GRID:
        for r in T_GRID:
            for e in m.standard_basis:
                a = phi_r.sigma(s, g.Psi.sigma(r, e))
                b = g.Psi.sigma(r, phi_r.sigma(s, e))
                worst_psi = max(worst_psi, opnorm(a - b))
                worst_tau = max(worst_tau, opnorm(phi_r.sigma(s, anti.tau(r, e)) - anti.tau(r, phi_r.sigma(s, e))),
                                opnorm(g.Psi.sigma(s, anti.tau(r, e)) - anti.tau(r, g.Psi.sigma(s, e))))
    rep.add("sigma_phi_R.commutes_sigma_psi", worst_psi, t)
    rep.add("sigma.commute_tau", worst_tau, t)
    worst = 0.0
    for s in T_GRID:
        left = g.Phi.power(1j * s)
        right = phi_r.power(-1j * s)
        conj = np.kron(left, right)
        for a, e in enumerate(m.standard_basis):
            lhs = g.gamma(anti.tau(s, e))
            rhs = conj @ g.coproduct[a] @ np.linalg.inv(conj)
            worst = max(worst, opnorm(lhs - rhs))
    rep.add("gamma.tau=sigma_phi(x)sigma_phiR", worst, t)
    return rep


# ============================================================================
# Change of the base weight
# ============================================================================


@dataclass
class RebaseResult:
    groupoid: MeasuredQuantumGroupoid
    report: Report


def rebase_weight(g: MeasuredQuantumGroupoid, h: np.ndarray, k: np.ndarray | None = None, *,
                  tol: float | None = None, anti: Antipode | None = None) -> RebaseResult:
    """Replace ``ν`` by ``ν_h`` and compare the fundamental objects of both structures.

    In finite dimension a cocycle ``k^{it²/2} h^{it}`` of two weights forces
    ``k = 1``; any other ``k`` is rejected.
    """
    t = g.tol if tol is None else tol
    n = g.N
    h = np.asarray(h, dtype=complex)
    if n.membership_residual(h) > t or opnorm(h - h.conj().T) > t:
        raise StructureError("h must be a self-adjoint element of N")
    if np.linalg.eigvalsh((h + h.conj().T) / 2).min() <= 0:
        raise StructureError("h must be positive invertible")
    if k is not None:
        k = np.asarray(k, dtype=complex)
        if opnorm(k @ h - h @ k) > t:
            raise StructureError("h and k must commute")
        if opnorm(k - n.unit()) > t:
            raise StructureError("a finite-dimensional weight cocycle requires k = 1")
    rho = g.nu.density
    if opnorm(h @ rho - rho @ h) > t * max(1.0, opnorm(rho)):
        raise StructureError("h must commute with the density of ν")
    nu2 = g.nu.with_density(rho @ h)
    ah, bh = _hpow(g.alpha_of(h), 0.5), _hpow(g.beta_of(h), 0.5)
    T_L2 = superop_of(g.M, lambda x: g.apply_T_L(bh @ x @ bh))
    T_R2 = superop_of(g.M, lambda x: g.apply_T_R(ah @ x @ ah))
    g2 = g.replace(nu=nu2, T_L=T_L2, T_R=T_R2, name=f"{g.name}_rebased" if g.name else "rebased")
    rep = Report()
    rep.extend(check_all(g2, t), prefix="rebased.")
    if anti is None:
        anti = build_antipode(g, tol=tol)[1]
    anti2 = build_antipode(g2, tol=tol)[1]
    md, md2 = extract_modulus(g, anti, tol=tol), extract_modulus(g2, anti2, tol=tol)
    rep.add("linkage.R'=R", opnorm(anti2.R - anti.R), t)
    worst = 0.0
    for s in T_GRID:
        # sign forced by the P' relation, since P^{it} implements τ_t
        conj = g.alpha_of(_hpow(h, 1j * s)) @ g.beta_of(_hpow(h, -1j * s))
        conj_inv = np.linalg.inv(conj)
        for e in g.M.standard_basis:
            worst = max(worst, opnorm(anti2.tau(s, e) - conj @ anti.tau(s, e) @ conj_inv))
    rep.add("linkage.tau'", worst, t)
    rep.add("linkage.lambda'=lambda", opnorm(md2.lam - md.lam), t)
    rep.add("linkage.delta'=delta", opnorm(md2.delta - md.delta) / max(1.0, opnorm(md.delta)), t)
    p1, p2 = build_P(g, anti, md), build_P(g2, anti2, md2)
    kmat = g.J
    worst = 0.0
    for s in T_GRID:
        c = g.pi(g.alpha_of(_hpow(h, 1j * s)) @ g.beta_of(_hpow(h, -1j * s)))
        jcj = kmat @ c.conj() @ kmat
        worst = max(worst, opnorm(p2.power(1j * s) - c @ jcj @ p1.power(1j * s)))
    rep.add("linkage.P'", worst, t)
    return RebaseResult(g2, rep)
