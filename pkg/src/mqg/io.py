"""JSON encoding of algebras, weights and measured quantum groupoids.

Conventions: complex numbers are ``[re, im]`` pairs, matrices are row-major
nested arrays, algebras are ``{"blocks", "basis_labels"}`` with matrix-unit
labels ``"k:i:j"``.  Sparse tensors list ``[labels..., [re, im]]`` entries in
lexicographic order.  Output is canonical (sorted keys, fixed separators) so
equal structures serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .algebra import MultiMatrixAlgebra, StructureError, Weight
from .constructors import FiniteGroupoid, WeakHopfAlgebra
from .hopf import MeasuredQuantumGroupoid, pair_element

__all__ = [
    "InputError",
    "algebra_from_json",
    "algebra_to_json",
    "atomic_write",
    "canonical_dumps",
    "complex_from_json",
    "complex_to_json",
    "groupoid_from_json",
    "groupoid_to_json",
    "load_json",
    "load_schema",
    "matrix_from_json",
    "matrix_to_json",
    "mqg_from_json",
    "mqg_to_json",
    "sha256_bytes",
    "structure_equal",
    "validate",
    "wha_from_json",
    "wha_to_json",
]

FORMAT_VERSION = 1


class InputError(ValueError):
    """Unusable input.

    ``code`` is ``"input_error"`` when the input cannot be read or parsed and
    ``"validation_error"`` when it parses but violates a schema or an axiom.
    """

    def __init__(self, message: str, code: str = "validation_error") -> None:
        super().__init__(message)
        self.code = code


# ============================================================================
# Scalars, matrices, files
# ============================================================================


def _clean(x: float) -> float:
    x = float(x)
    return 0.0 if x == 0 else x


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def complex_from_json(v: Any) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise InputError(f"complex number must be [re, im], got {v!r}")


def matrix_to_json(x: np.ndarray) -> list:
    x = np.asarray(x)
    if x.ndim == 0:
        return complex_to_json(x)
    return [matrix_to_json(row) for row in x]


def matrix_from_json(v: Any, ndim: int = 2) -> np.ndarray:
    def rec(item: Any, depth: int) -> Any:
        if depth == 0:
            return complex_from_json(item)
        if not isinstance(item, list):
            raise InputError("matrix must be a nested array")
        return [rec(t, depth - 1) for t in item]

    try:
        return np.array(rec(v, ndim), dtype=complex)
    except ValueError as exc:
        raise InputError(f"ragged matrix: {exc}") from None


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False) + "\n"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str | os.PathLike) -> tuple[Any, bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}", "input_error") from None
    try:
        return json.loads(raw.decode("utf-8")), raw
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path} is not valid JSON: {exc}", "input_error") from None


def load_schema(name: str) -> dict:
    text = resources.files("mqg").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(obj: Any, schema: str) -> None:
    try:
        jsonschema.validate(obj, load_schema(schema))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{schema} schema violation at {where}: {exc.message}") from None


# ============================================================================
# Algebras and weights
# ============================================================================


def _label(alg: MultiMatrixAlgebra, a: int) -> str:
    k, i, j = alg.labels[a]
    return f"{k}:{i}:{j}"


def algebra_to_json(alg: MultiMatrixAlgebra) -> dict:
    return {"blocks": list(alg.block_dims), "basis_labels": [_label(alg, a) for a in range(alg.dim)]}


def algebra_from_json(obj: dict) -> MultiMatrixAlgebra:
    try:
        alg = MultiMatrixAlgebra(obj["blocks"])
    except (KeyError, TypeError, StructureError) as exc:
        raise InputError(f"invalid algebra: {exc}") from None
    labels = obj.get("basis_labels")
    if labels is not None and list(labels) != [_label(alg, a) for a in range(alg.dim)]:
        raise InputError("basis_labels do not match the canonical matrix-unit order of the blocks")
    return alg


def _label_index(alg: MultiMatrixAlgebra) -> dict[str, int]:
    return {_label(alg, a): a for a in range(alg.dim)}


def _lookup(index: dict[str, int], label: Any) -> int:
    if label not in index:
        raise InputError(f"unknown matrix-unit label {label!r}")
    return index[label]


def _density_from_json(alg: MultiMatrixAlgebra, v: Any) -> np.ndarray:
    rho = matrix_from_json(v)
    if rho.shape != (alg.D, alg.D):
        raise InputError(f"density must be {alg.D}x{alg.D}")
    return rho


# ============================================================================
# Measured quantum groupoids
# ============================================================================


def _sparse3(c: np.ndarray, lab: list[str]) -> list:
    out = []
    for a, p, q in zip(*np.nonzero(c != 0)):
        out.append([lab[a], lab[p], lab[q], complex_to_json(c[a, p, q])])
    return out


def mqg_to_json(g: MeasuredQuantumGroupoid) -> dict:
    """Coefficient form: α, β, T_L, T_R as matrices over matrix units, Γ as sparse triples."""
    m, n = g.M, g.N
    alpha = np.array([m.coefficients(x) for x in g.alpha])
    beta = np.array([m.coefficients(x) for x in g.beta])
    lab = [_label(m, a) for a in range(m.dim)]
    return {
        "format": "mqg",
        "version": FORMAT_VERSION,
        "name": g.name,
        "N": algebra_to_json(n),
        "M": algebra_to_json(m),
        "alpha": matrix_to_json(alpha),
        "beta": matrix_to_json(beta),
        "coproduct": _sparse3(g.gamma_coefficients, lab),
        "nu": matrix_to_json(g.nu.density),
        "T_L": matrix_to_json(g.T_L),
        "T_R": matrix_to_json(g.T_R),
    }


def mqg_from_json(obj: Any, *, tol: float | None = None) -> MeasuredQuantumGroupoid:
    """Parse without running the axiom checks (``verified`` stays False)."""
    validate(obj, "mqg")
    n = algebra_from_json(obj["N"])
    m = algebra_from_json(obj["M"])
    alpha_c = matrix_from_json(obj["alpha"])
    beta_c = matrix_from_json(obj["beta"])
    if alpha_c.shape != (n.dim, m.dim) or beta_c.shape != (n.dim, m.dim):
        raise InputError(f"alpha and beta must be {n.dim}x{m.dim} coefficient matrices")
    idx = _label_index(m)
    coeffs = np.zeros((m.dim, m.dim, m.dim), dtype=complex)
    for a, p, q, c in obj["coproduct"]:
        coeffs[_lookup(idx, a), _lookup(idx, p), _lookup(idx, q)] += complex_from_json(c)
    T_L, T_R = matrix_from_json(obj["T_L"]), matrix_from_json(obj["T_R"])
    if T_L.shape != (m.dim, m.dim) or T_R.shape != (m.dim, m.dim):
        raise InputError(f"T_L and T_R must be {m.dim}x{m.dim}")
    try:
        rho = _density_from_json(n, obj["nu"])
        nu = Weight(n, rho) if tol is None else Weight(n, rho, tol)
        return MeasuredQuantumGroupoid.unchecked(
            n, m, np.array([m.element(c) for c in alpha_c]), np.array([m.element(c) for c in beta_c]),
            np.array([pair_element(m, c) for c in coeffs]), nu, T_L, T_R, name=obj.get("name", ""), tol=tol)
    except StructureError as exc:
        raise InputError(str(exc)) from None


# ============================================================================
# Groupoids and weak Hopf algebras
# ============================================================================


def groupoid_to_json(g: FiniteGroupoid) -> dict:
    return {
        "units": list(g.units),
        "elements": [{"id": x, "src": g.src[x], "rng": g.rng[x]} for x in g.elements],
        "compose": [[a, b, c] for (a, b), c in sorted(g.compose.items())],
        "inverse": {x: g.inverse[x] for x in g.elements},
        "measure": {u: float(g.measure[u]) for u in g.units},
    }


def groupoid_from_json(obj: Any) -> FiniteGroupoid:
    validate(obj, "groupoid")
    els = [e["id"] for e in obj["elements"]]
    src = {e["id"]: e["src"] for e in obj["elements"]}
    rng = {e["id"]: e["rng"] for e in obj["elements"]}
    comp = {}
    for a, b, c in obj["compose"]:
        if (a, b) in comp and comp[(a, b)] != c:
            raise InputError(f"conflicting compositions for ({a!r}, {b!r})")
        comp[(a, b)] = c
    g = FiniteGroupoid(tuple(obj["units"]), tuple(els), src, rng, comp, dict(obj["inverse"]),
                       {u: float(v) for u, v in obj["measure"].items()})
    try:
        g.validate()
    except (StructureError, KeyError) as exc:
        raise InputError(f"groupoid axioms: {exc}") from None
    return g


def wha_to_json(w: WeakHopfAlgebra) -> dict:
    m = w.algebra
    lab = [_label(m, a) for a in range(m.dim)]
    kappa = [[lab[r], lab[c], complex_to_json(w.antipode[r, c])]
             for r, c in zip(*np.nonzero(w.antipode != 0))]
    return {
        "format": "weak_hopf",
        "version": FORMAT_VERSION,
        "name": w.name,
        "algebra": algebra_to_json(m),
        "coproduct": _sparse3(w.structure, lab),
        "counit": {lab[a]: complex_to_json(w.counit[a]) for a in range(m.dim) if w.counit[a] != 0},
        "antipode": kappa,
    }


def wha_from_json(obj: Any) -> WeakHopfAlgebra:
    """Structure constants over matrix-unit labels; ``antipode`` entries are ``[out, in, c]``."""
    validate(obj, "wha")
    m = algebra_from_json(obj["algebra"])
    idx = _label_index(m)
    g = np.zeros((m.dim, m.dim, m.dim), dtype=complex)
    for a, p, q, c in obj["coproduct"]:
        g[_lookup(idx, a), _lookup(idx, p), _lookup(idx, q)] += complex_from_json(c)
    eps = np.zeros(m.dim, dtype=complex)
    for a, c in obj["counit"].items():
        eps[_lookup(idx, a)] = complex_from_json(c)
    kappa = np.zeros((m.dim, m.dim), dtype=complex)
    for r, c, v in obj["antipode"]:
        kappa[_lookup(idx, r), _lookup(idx, c)] += complex_from_json(v)
    cop = np.array([pair_element(m, x) for x in g])
    return WeakHopfAlgebra(m, cop, eps, kappa, name=obj.get("name", ""))


def structure_equal(g1: MeasuredQuantumGroupoid, g2: MeasuredQuantumGroupoid, tol: float = 0.0) -> bool:
    """Entrywise equality of all defining arrays."""
    if g1.N.block_dims != g2.N.block_dims or g1.M.block_dims != g2.M.block_dims:
        return False
    pairs = [(g1.alpha, g2.alpha), (g1.beta, g2.beta), (g1.coproduct, g2.coproduct),
             (g1.nu.density, g2.nu.density), (g1.T_L, g2.T_L), (g1.T_R, g2.T_R)]
    return all(np.max(np.abs(a - b), initial=0.0) <= tol for a, b in pairs)

