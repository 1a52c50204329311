"""Run-time configuration: numeric tolerance and kernel backend selection."""

from __future__ import annotations

import os

DEFAULT_TOL = 1e-9

#: Relative cutoff for discarding Gram eigenvalues.
RANK_CUTOFF = 1e-10

#: t-grid used for one-parameter group checks.
T_GRID = (-1.0, -0.5, -0.1, 0.1, 0.5, 1.0)


def default_tol() -> float:
    """Tolerance from ``MQG_TOL`` if set, else :data:`DEFAULT_TOL`."""
    raw = os.environ.get("MQG_TOL")
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    value = float(raw)
    if not value > 0:
        raise ValueError(f"MQG_TOL must be positive, got {raw!r}")
    return value


def numba_disabled() -> bool:
    """True when ``MQG_DISABLE_NUMBA`` requests the pure-numpy kernels."""
    return os.environ.get("MQG_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
