from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mqg import _kernels

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def _stack(rng, t, p, q):
    return rng.standard_normal((t, p, q)) + 1j * rng.standard_normal((t, p, q))


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.integers(1, 3))
def test_kron_sum_backends_agree_with_reference(seed, t, p, r):
    rng = np.random.default_rng(seed)
    a, b = _stack(rng, t, p, p + 1), _stack(rng, t, r, r)
    ref = sum(np.kron(a[k], b[k]) for k in range(t))
    assert np.allclose(_kernels.kron_sum(a, b, use_numba=False), ref, atol=1e-12)
    assert np.allclose(_kernels.kron_sum(a, b, use_numba=True), ref, atol=1e-12)


@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 4))
def test_max_commutator_backends_agree_with_reference(seed, nx, ny, n):
    rng = np.random.default_rng(seed)
    xs, ys = _stack(rng, nx, n, n), _stack(rng, ny, n, n)
    ref = max(np.linalg.norm(x @ y - y @ x) for x in xs for y in ys)
    assert _kernels.max_commutator(xs, ys, use_numba=False) == pytest.approx(ref, rel=1e-12, abs=1e-12)
    assert _kernels.max_commutator(xs, ys, use_numba=True) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_edge_cases():
    assert _kernels.max_commutator(np.zeros((0, 2, 2)), np.eye(2)[None]) == 0.0
    with pytest.raises(ValueError):
        _kernels.kron_sum(np.zeros((2, 1, 1)), np.zeros((3, 1, 1)))


def test_backend_honours_environment(monkeypatch):
    monkeypatch.setenv("MQG_DISABLE_NUMBA", "1")
    assert _kernels.backend() == "numpy"
    monkeypatch.delenv("MQG_DISABLE_NUMBA")
    expected = "numba" if _kernels._numba is not None else "numpy"
    assert _kernels.backend() == expected
