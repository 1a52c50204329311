"""All derived objects of a measured quantum groupoid and the full verification suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import BranchCutError, StructureError
from .antipode import Antipode, GOperator, build_antipode, check_antipode
from .hopf import MeasuredQuantumGroupoid, check_all
from .modulus import (ManageableOp, ModulusData, build_P, check_invariants, check_manageability,
                      check_modulus_relations, check_weak_regularity, extract_modulus)
from .report import Report
from .unitary import (PseudoMultiplicativeUnitary, build_U, build_W, build_W_prime, check_cofixed_vector,
                      check_commutations, check_coproduct_implemented, check_generation, check_pentagon,
                      check_unitary)

__all__ = ["DerivedStructure", "derive", "verify"]

#: Pentagon is skipped above this three-leg ambient dimension.
PENTAGON_MAX_AMBIENT = 2000


@dataclass
class DerivedStructure:
    """``W, W', G, D, I, τ, R, S, δ, λ, P`` of one measured quantum groupoid."""

    groupoid: MeasuredQuantumGroupoid
    U: PseudoMultiplicativeUnitary
    W: PseudoMultiplicativeUnitary
    W_prime: PseudoMultiplicativeUnitary
    G: GOperator
    antipode: Antipode
    modulus: ModulusData
    P: ManageableOp

    def matrices(self) -> dict[str, np.ndarray]:
        a = self.antipode
        return {
            "W": self.W.matrix,
            "W_prime": self.W_prime.matrix,
            "G": self.G.matrix,
            "D": a.polar.D,
            "I": a.polar.I.matrix,
            "R": a.R,
            "S": a.S,
            "delta": self.modulus.delta,
            "lambda": self.modulus.lam,
            "P": self.P.P,
        }

    def diagnostics(self) -> dict[str, float]:
        md = self.modulus
        return {
            "U.isometry_defect": self.U.isometry_defect,
            "G.solve_residual": self.G.solve_residual,
            "G.closability_residual": self.G.closability_residual,
            "G.involution_residual": self.G.involution_residual,
            "G.span_rank": self.G.span_rank,
            "polar.reconstruction_residual": self.antipode.polar.reconstruction_residual,
            "modulus.epsilon": md.epsilon,
            "modulus.verification_residual": md.verification_residual,
            "modulus.cross_validation_residual": md.cross_validation_residual,
            "modulus.self_consistency": md.self_consistency,
            "modulus.centrality_residual": md.centrality_residual,
            "P.epsilon": self.P.epsilon,
            "P.definition_residual": self.P.definition_residual,
        }


def derive(g: MeasuredQuantumGroupoid, *, tol: float | None = None) -> DerivedStructure:
    u = build_U(g)
    w = build_W(g)
    wp = build_W_prime(g)
    gop, anti = build_antipode(g, tol=tol)
    md = extract_modulus(g, anti, tol=tol)
    return DerivedStructure(g, u, w, wp, gop, anti, md, build_P(g, anti, md))


def _extend(rep: Report, other: Report, prefix: str) -> None:
    for r in other:
        name = r.name if r.name.startswith(prefix) else prefix + r.name
        rep.add(name, r.residual, r.tol, detail=r.detail, passed=r.passed)


def _stage_error(rep: Report, stage: str, exc: Exception) -> None:
    rep.add(f"{stage}.error", math.inf, 0.0, detail=f"{type(exc).__name__}: {exc}", passed=False)


def verify(g: MeasuredQuantumGroupoid, *, tol: float | None = None, seed: int = 0) -> Report:
    """Axioms, fundamental unitaries, antipode, modulus, manageability and regularity.

    A stage whose construction fails records a single failing ``<stage>.error``
    entry and the later stages that depend on it are skipped.
    """
    t = g.tol if tol is None else tol
    rep = Report()
    rep.extend(check_all(g, t), prefix="structure.")
    if not rep.passed:
        return rep
    try:
        u = build_U(g)
        wp = build_W_prime(g)
    except (StructureError, np.linalg.LinAlgError) as exc:
        _stage_error(rep, "unitary", exc)
        return rep
    rep.extend(check_unitary(u, t), prefix="unitary.")
    rep.extend(check_unitary(wp, t), prefix="unitary.")
    rep.extend(check_commutations(g, u, t), prefix="unitary.")
    rep.add("unitary.coproduct_implemented", check_coproduct_implemented(g, u, t), t)
    rep.extend(check_generation(g, wp, u, tol=t), prefix="unitary.")
    rep.extend(check_cofixed_vector(g, u, t), prefix="unitary.")
    if g.M.dim ** 3 <= PENTAGON_MAX_AMBIENT:
        w = PseudoMultiplicativeUnitary(u.adjoint, u.target, u.source, "W", u.isometry_defect)
        rep.add("unitary.pentagon", check_pentagon(g, w, max_ambient=PENTAGON_MAX_AMBIENT), t)
    try:
        gop, anti = build_antipode(g, tol=t)
    except (StructureError, np.linalg.LinAlgError) as exc:
        _stage_error(rep, "antipode", exc)
        return rep
    rep.extend(check_antipode(g, gop, anti, tol=t, seed=seed, w_prime=wp, u=u), prefix="antipode.")
    try:
        md = extract_modulus(g, anti, tol=t)
        mop = build_P(g, anti, md)
    except (StructureError, BranchCutError, np.linalg.LinAlgError) as exc:
        _stage_error(rep, "modulus", exc)
        return rep
    _extend(rep, check_modulus_relations(g, md, anti, tol=t), "modulus.")
    rep.extend(check_invariants(g, anti, tol=t), prefix="modulus.")
    _extend(rep, check_manageability(g, anti, mop, u=u, tol=t, seed=seed), "manageability.")
    rep.extend(check_weak_regularity(g, u, tol=t), prefix="manageability.")
    return rep
