"""Compare the numba and numpy backends of the assembly kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]

The numba timings exclude the first (compiling) call.  Both backends are
checked to agree before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mqg import _kernels


def _sparse_stack(rng: np.random.Generator, t: int, n: int, density: float) -> np.ndarray:
    x = rng.standard_normal((t, n, n)) + 1j * rng.standard_normal((t, n, n))
    return x * (rng.random((t, n, n)) < density)


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels._kron_sum_numba is None:
        print("numba is not importable; only the numpy backend exists")
        return
    rng = np.random.default_rng(0)
    cases = [
        ("kron_sum", (16, 16, 0.1), lambda a, b, nb: _kernels.kron_sum(a, b, use_numba=nb)),
        ("kron_sum", (64, 16, 0.1), lambda a, b, nb: _kernels.kron_sum(a, b, use_numba=nb)),
        ("kron_sum", (81, 9, 0.2), lambda a, b, nb: _kernels.kron_sum(a, b, use_numba=nb)),
        ("max_commutator", (16, 8, 1.0), lambda a, b, nb: _kernels.max_commutator(a, b, use_numba=nb)),
        ("max_commutator", (32, 16, 1.0), lambda a, b, nb: _kernels.max_commutator(a, b, use_numba=nb)),
    ]
    print(f"{'kernel':16s} {'T':>4s} {'n':>4s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, (t, n, dens), fn in cases:
        a = _sparse_stack(rng, t, n, dens)
        b = _sparse_stack(rng, t, n, dens)
        ref, fast = fn(a, b, False), fn(a, b, True)
        if np.max(np.abs(np.asarray(ref) - np.asarray(fast))) > 1e-9 * max(1.0, np.max(np.abs(ref))):
            raise SystemExit(f"{name}: backends disagree")
        t_np = _best(lambda: fn(a, b, False), args.repeat)
        t_nb = _best(lambda: fn(a, b, True), args.repeat)
        print(f"{name:16s} {t:4d} {n:4d} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
