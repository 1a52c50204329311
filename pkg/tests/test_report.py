import math

import pytest

from mqg.report import Report


def test_add_and_pass_logic():
    rep = Report()
    rep.add("a", -1e-12, 1e-9)
    rep.add("b", 1e-3, 1e-9)
    rep.add("c", float("nan"), 1.0)
    assert rep["a"].residual == 1e-12 and rep["a"].passed
    assert not rep["b"].passed
    assert rep["c"].residual == math.inf and not rep["c"].passed
    assert [r.name for r in rep.failures] == ["b", "c"]
    assert not rep.passed
    assert "a" in rep and "z" not in rep
    with pytest.raises(KeyError):
        rep["z"]


def test_flag_and_extend():
    rep = Report()
    rep.flag("ok", True)
    other = Report()
    other.flag("bad", False, detail="why")
    rep.extend(other, prefix="sub.")
    assert len(rep) == 2
    assert rep["sub.bad"].detail == "why"
    assert rep.max_residual() == 1.0
    assert rep.to_list()[1] == {"name": "sub.bad", "residual": 1.0, "tol": 0.5, "passed": False, "detail": "why"}
    assert "FAIL  sub.bad" in rep.summary()
