from __future__ import annotations

import math

import numpy as np
import pytest
from helpers import derived, example, full_report

from mqg.algebra import opnorm
from mqg.constructors import shipped_examples
from mqg.derived import verify


@pytest.mark.parametrize("name", shipped_examples())
def test_verify_passes_on_examples(name):
    rep = full_report(name)
    assert rep.passed, rep.summary()


@pytest.mark.parametrize("name", ("pair2", "pairs_m2"))
def test_derived_matrix_shapes(name):
    g = example(name)
    mats = derived(name).matrices()
    h = g.M.dim
    for key in ("G", "D", "I", "P"):
        assert mats[key].shape == (h, h)
    for key in ("R", "S"):
        assert mats[key].shape == (h, h)
    assert mats["delta"].shape == mats["lambda"].shape == (g.M.D, g.M.D)
    assert mats["W"].shape == (g.T_ab_hat.dim, g.T_ba.dim)
    assert mats["W_prime"].shape == (g.T_ba.dim, g.T_ahat_b.dim)


def test_diagnostics_are_finite_numbers():
    diag = derived("pair3").diagnostics()
    assert isinstance(diag["G.span_rank"], (int, np.integer))
    assert all(math.isfinite(float(v)) for v in diag.values())


def test_verify_stops_after_structure_failure():
    g = example("pair3")
    cop = g.coproduct.copy()
    cop[2] *= 1.01
    rep = verify(g.replace(coproduct=cop))
    assert not rep.passed
    assert all(r.name.startswith("structure.") for r in rep)


def test_delta_of_pair3_matches_derived_modulus():
    ds = derived("pair3")
    assert opnorm(ds.matrices()["delta"] - ds.modulus.delta) == 0.0
