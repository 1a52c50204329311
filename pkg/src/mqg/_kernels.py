"""Hot assembly kernels with a numba backend and a pure-numpy fallback.

The numba path is used when numba imports and ``MQG_DISABLE_NUMBA`` is unset.
Both paths compute identical quantities; ``benchmarks/bench_kernels.py``
compares their speed.
"""

from __future__ import annotations

import numpy as np

from ._config import numba_disabled

try:  # pragma: no cover - exercised implicitly by the import
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None


# ----------------------------------------------------------------------------
# numpy reference implementations
# ----------------------------------------------------------------------------

def _kron_sum_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    t, p, q = a.shape
    _, r, s = b.shape
    out = np.einsum("tij,tkl->ikjl", a, b)
    return out.reshape(p * r, q * s)


def _max_commutator_numpy(xs: np.ndarray, ys: np.ndarray) -> float:
    worst = 0.0
    for x in xs:
        c = np.einsum("ij,tjk->tik", x, ys) - np.einsum("tij,jk->tik", ys, x)
        if c.size:
            worst = max(worst, float(np.sqrt(np.max(np.sum(np.abs(c) ** 2, axis=(1, 2))))))
    return worst


# ----------------------------------------------------------------------------
# numba implementations
# ----------------------------------------------------------------------------

if _numba is not None:

    @_numba.njit(cache=True, nogil=True)
    def _kron_sum_numba(a, b):  # pragma: no cover - compiled
        t, p, q = a.shape
        _, r, s = b.shape
        out = np.zeros((p * r, q * s), dtype=np.complex128)
        for k in range(t):
            for i in range(p):
                for j in range(q):
                    aij = a[k, i, j]
                    if aij == 0:
                        continue
                    for u in range(r):
                        row = i * r + u
                        for v in range(s):
                            out[row, j * s + v] += aij * b[k, u, v]
        return out

    @_numba.njit(cache=True, nogil=True)
    def _max_commutator_numba(xs, ys):  # pragma: no cover - compiled
        worst = 0.0
        n = xs.shape[1]
        for a in range(xs.shape[0]):
            for b in range(ys.shape[0]):
                acc = 0.0
                for i in range(n):
                    for j in range(n):
                        z = 0j
                        for k in range(n):
                            z += xs[a, i, k] * ys[b, k, j] - ys[b, i, k] * xs[a, k, j]
                        acc += z.real * z.real + z.imag * z.imag
                if acc > worst:
                    worst = acc
        return np.sqrt(worst)

else:  # pragma: no cover
    _kron_sum_numba = None
    _max_commutator_numba = None


def backend() -> str:
    """Name of the active backend: ``"numba"`` or ``"numpy"``."""
    if _numba is None or numba_disabled():
        return "numpy"
    return "numba"


def kron_sum(a: np.ndarray, b: np.ndarray, *, use_numba: bool | None = None) -> np.ndarray:
    """Return ``sum_t kron(a[t], b[t])`` for stacks ``a`` (T,p,q) and ``b`` (T,r,s)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if a.shape[0] != b.shape[0]:
        raise ValueError("stacks must have the same length")
    if use_numba is None:
        use_numba = backend() == "numba"
    if use_numba and _kron_sum_numba is not None:
        return _kron_sum_numba(a, b)
    return _kron_sum_numpy(a, b)


def max_commutator(xs: np.ndarray, ys: np.ndarray, *, use_numba: bool | None = None) -> float:
    """Largest Frobenius norm of ``[x, y]`` over all pairs from the two stacks."""
    xs = np.ascontiguousarray(xs, dtype=np.complex128)
    ys = np.ascontiguousarray(ys, dtype=np.complex128)
    if xs.shape[0] == 0 or ys.shape[0] == 0:
        return 0.0
    if use_numba is None:
        use_numba = backend() == "numba"
    if use_numba and _max_commutator_numba is not None:
        return float(_max_commutator_numba(xs, ys))
    return _max_commutator_numpy(xs, ys)
