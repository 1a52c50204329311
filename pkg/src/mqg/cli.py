"""``mqgctl``: build, verify and derive measured quantum groupoids from JSON files.

Exit codes: 0 success, 1 verification failure, 2 input or validation error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from ._config import DEFAULT_TOL, default_tol
from .algebra import BranchCutError, StructureError, Weight
from .constructors import (direct_sum, from_group_algebra, from_groupoid_commutative, from_groupoid_symmetric,
                           from_weak_hopf, pairs_quantum_groupoid, quantum_space_quantum_groupoid,
                           tensor_product)
from .derived import derive, verify
from .hopf import MeasuredQuantumGroupoid, check_all
from .io import (InputError, algebra_from_json, atomic_write, canonical_dumps, groupoid_from_json, load_json,
                 matrix_from_json, matrix_to_json, mqg_from_json, mqg_to_json, sha256_bytes, validate,
                 wha_from_json)
from .report import Report

__all__ = ["EXIT_FAIL", "EXIT_INPUT", "EXIT_OK", "build_report", "main"]

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
REPORT_SCHEMA_VERSION = "1.0"
BUILD_KINDS = ("groupoid", "wha", "pairs", "qspace", "group", "sum", "tensor")


def _emit_error(command: str, code: str, message: str) -> None:
    sys.stderr.write(canonical_dumps({"error": {"code": code, "message": message, "command": command}}))


def _resolve_tol(arg: float | None) -> float:
    if arg is not None:
        if not arg > 0:
            raise InputError(f"--tol must be positive, got {arg}", "input_error")
        return float(arg)
    try:
        return default_tol()
    except ValueError as exc:
        raise InputError(str(exc), "input_error") from None


def _load_mqg(path: str, tol: float) -> MeasuredQuantumGroupoid:
    obj, _ = load_json(path)
    return mqg_from_json(obj, tol=tol)


# ============================================================================
# build
# ============================================================================


def _build_pairs(path: str, tol: float, qspace: bool) -> MeasuredQuantumGroupoid:
    obj, _ = load_json(path)
    validate(obj, "pairs")
    alg = algebra_from_json(obj["algebra"])
    rho = matrix_from_json(obj["density"])
    try:
        nu = Weight(alg, rho, tol)
    except StructureError as exc:
        raise InputError(f"base weight: {exc}") from None
    if qspace:
        return quantum_space_quantum_groupoid(alg, nu, obj.get("trace_weights"), tol=tol)
    if "trace_weights" in obj:
        raise InputError("trace_weights only applies to kind qspace")
    return pairs_quantum_groupoid(alg, nu, tol=tol)


def _build_group(path: str, tol: float, seed: int) -> MeasuredQuantumGroupoid:
    obj, _ = load_json(path)
    validate(obj, "group")
    els = list(obj["elements"])
    if len(set(els)) != len(els):
        raise InputError("group elements must be distinct")
    mult = {}
    for a, b, c in obj["table"]:
        if (a, b) in mult and mult[(a, b)] != c:
            raise InputError(f"conflicting products for ({a!r}, {b!r})")
        mult[(a, b)] = c
    if obj["identity"] not in els:
        raise InputError("identity is not an element")
    if set(mult) != {(a, b) for a in els for b in els} or not set(mult.values()) <= set(els):
        raise InputError("multiplication table must be total and closed")
    try:
        return from_group_algebra(els, mult, obj["identity"], tol=tol, seed=seed)
    except KeyError as exc:
        raise InputError(f"group table: missing entry {exc}") from None


def _build(kind: str, inputs: list[str], structure: str, tol: float, seed: int) -> MeasuredQuantumGroupoid:
    single = kind not in ("sum", "tensor")
    if single and len(inputs) != 1:
        raise InputError(f"kind {kind} takes exactly one input file", "input_error")
    if kind == "tensor" and len(inputs) != 2:
        raise InputError("kind tensor takes exactly two input files", "input_error")
    if kind == "sum" and not inputs:
        raise InputError("kind sum takes at least one input file", "input_error")
    if kind == "groupoid":
        obj, _ = load_json(inputs[0])
        gr = groupoid_from_json(obj)
        ctor = from_groupoid_symmetric if structure == "symmetric" else from_groupoid_commutative
        return ctor(gr, tol=tol)
    if kind == "wha":
        obj, _ = load_json(inputs[0])
        return from_weak_hopf(wha_from_json(obj), tol=tol)
    if kind in ("pairs", "qspace"):
        return _build_pairs(inputs[0], tol, kind == "qspace")
    if kind == "group":
        return _build_group(inputs[0], tol, seed)
    parts = [_load_mqg(p, tol) for p in inputs]
    if kind == "sum":
        return direct_sum(parts, tol=tol)
    return tensor_product(parts[0], parts[1], tol=tol)


def cmd_build(args: argparse.Namespace) -> int:
    try:
        tol = _resolve_tol(args.tol)
        g = _build(args.kind, args.inputs, args.structure, tol, args.seed)
        if args.name:
            g.name = args.name
        text = canonical_dumps(mqg_to_json(g))
    except InputError as exc:
        _emit_error("build", exc.code, str(exc))
        return EXIT_INPUT
    except (StructureError, BranchCutError, np.linalg.LinAlgError) as exc:
        _emit_error("build", "validation_error", str(exc))
        return EXIT_INPUT
    atomic_write(args.output, text)
    return EXIT_OK


# ============================================================================
# verify
# ============================================================================


def _check_to_json(r) -> dict:
    out = r.to_dict()
    if not math.isfinite(out["residual"]):
        out["residual"] = None
    return out


def build_report(rep: Report | None, *, path: str, sha256: str | None, seed: int, tol: float,
                 error: tuple[str, str] | None = None) -> dict:
    """Report object conforming to the ``report`` schema; no timestamps, so it is reproducible."""
    checks = [] if rep is None else [_check_to_json(r) for r in rep]
    failing = [c["name"] for c in checks if not c["passed"]]
    out = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": "mqgctl",
        "tool_version": __version__,
        "input": {"path": path, "sha256": sha256},
        "seed": seed,
        "tol": tol,
        "passed": error is None and rep is not None and rep.passed,
        "checks": checks,
        "summary": {"total": len(checks), "failed": len(failing), "failing": failing},
    }
    if error is not None:
        out["error"] = {"code": error[0], "message": error[1]}
    return out


def _write_report(report: dict, dest: str | None) -> None:
    validate(report, "report")
    text = canonical_dumps(report)
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        atomic_write(dest, text)


def cmd_verify(args: argparse.Namespace) -> int:
    sha = None
    try:
        tol = _resolve_tol(args.tol)
    except InputError as exc:
        _write_report(build_report(None, path=args.input, sha256=None, seed=args.seed, tol=DEFAULT_TOL,
                                   error=(exc.code, str(exc))), args.report)
        _emit_error("verify", exc.code, str(exc))
        return EXIT_INPUT
    try:
        obj, raw = load_json(args.input)
        sha = sha256_bytes(raw)
        g = mqg_from_json(obj, tol=tol)
    except InputError as exc:
        _write_report(build_report(None, path=args.input, sha256=sha, seed=args.seed, tol=tol,
                                   error=(exc.code, str(exc))), args.report)
        _emit_error("verify", exc.code, str(exc))
        return EXIT_INPUT
    rep = verify(g, tol=tol, seed=args.seed)
    _write_report(build_report(rep, path=args.input, sha256=sha, seed=args.seed, tol=tol), args.report)
    if not rep.passed:
        sys.stderr.write("failing checks: " + ", ".join(r.name for r in rep.failures) + "\n")
        return EXIT_FAIL
    return EXIT_OK


# ============================================================================
# derive
# ============================================================================


def cmd_derive(args: argparse.Namespace) -> int:
    try:
        tol = _resolve_tol(args.tol)
        obj, raw = load_json(args.input)
        g = mqg_from_json(obj, tol=tol)
    except InputError as exc:
        _emit_error("derive", exc.code, str(exc))
        return EXIT_INPUT
    try:
        axioms = check_all(g, tol)
        if not axioms.passed:
            raise StructureError("axioms fail: " + ", ".join(r.name for r in axioms.failures))
        ds = derive(g, tol=tol)
    except (StructureError, BranchCutError, np.linalg.LinAlgError) as exc:
        _emit_error("derive", "structure_error", str(exc))
        return EXIT_FAIL
    out = Path(args.out)
    for name, mat in ds.matrices().items():
        atomic_write(out / f"{name}.json", canonical_dumps({"name": name, "shape": list(mat.shape),
                                                            "data": matrix_to_json(mat)}))
    diag = {k: (int(v) if isinstance(v, (int, np.integer)) else float(v) if math.isfinite(float(v)) else None)
            for k, v in ds.diagnostics().items()}
    atomic_write(out / "diagnostics.json", canonical_dumps({
        "tool": "mqgctl", "tool_version": __version__,
        "input": {"path": args.input, "sha256": sha256_bytes(raw)}, "tol": tol, "diagnostics": diag,
    }))
    return EXIT_OK


# ============================================================================
# entry point
# ============================================================================


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mqgctl", description="Finite-dimensional measured quantum groupoids.")
    p.add_argument("--version", action="version", version=f"mqgctl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct an MQG file from a groupoid, weak Hopf, pairs or group file")
    b.add_argument("kind", choices=BUILD_KINDS)
    b.add_argument("inputs", nargs="+", help="input file(s); sum and tensor take MQG files")
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--structure", choices=("commutative", "symmetric"), default="commutative",
                   help="for kind groupoid: L^inf(G) or its dual group-von-Neumann-algebra structure")
    b.add_argument("--name", default=None)
    b.add_argument("--tol", type=float, default=None)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run the full verification suite on an MQG file")
    v.add_argument("input")
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--report", default=None, help="report path (default stdout)")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("derive", help="write W, W', G, D, I, R, S, delta, lambda, P and diagnostics")
    d.add_argument("input")
    d.add_argument("--out", required=True)
    d.add_argument("--tol", type=float, default=None)
    d.set_defaults(func=cmd_derive)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
