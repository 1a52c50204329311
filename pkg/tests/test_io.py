from __future__ import annotations

import json
import math
import os
import stat

import numpy as np
import pytest
from helpers import DATA, example
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mqg.constructors import check_weak_hopf, matrix_groupoid_weak_hopf, shipped_examples
from mqg.io import (InputError, atomic_write, canonical_dumps, complex_from_json, complex_to_json,
                    groupoid_from_json, groupoid_to_json, load_json, matrix_from_json, matrix_to_json,
                    mqg_from_json, mqg_to_json, sha256_bytes, structure_equal, validate, wha_from_json, wha_to_json)


def test_complex_encoding():
    assert complex_to_json(1 + 2j) == [1.0, 2.0]
    assert complex_to_json(-0.0) == [0.0, 0.0]
    assert math.copysign(1.0, complex_to_json(complex(-0.0, -0.0))[1]) == 1.0
    assert complex_from_json(3) == 3 + 0j
    assert complex_from_json([1.5, -2]) == 1.5 - 2j
    for bad in ("x", [1], [1, 2, 3], True, None):
        with pytest.raises(InputError):
            complex_from_json(bad)


@given(arrays(np.complex128, st.tuples(st.integers(0, 4), st.integers(0, 4)),
              elements=st.complex_numbers(allow_nan=False, allow_infinity=False)))
def test_matrix_round_trip(x):
    back = matrix_from_json(json.loads(canonical_dumps(matrix_to_json(x))))
    if x.size:
        assert np.array_equal(back, x)


def test_ragged_matrix_rejected():
    with pytest.raises(InputError):
        matrix_from_json([[[1, 0]], [[1, 0], [2, 0]]])
    with pytest.raises(InputError):
        matrix_from_json([1, 2])


def test_canonical_dumps_is_compact_and_sorted():
    assert canonical_dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}\n'
    with pytest.raises(ValueError):
        canonical_dumps({"x": float("nan")})


@pytest.mark.parametrize("name", shipped_examples())
def test_mqg_round_trip_exact(name):
    g = example(name)
    obj = mqg_to_json(g)
    text = canonical_dumps(obj)
    back = mqg_from_json(json.loads(text))
    assert structure_equal(g, back)
    assert canonical_dumps(mqg_to_json(back)) == text
    assert not back.verified


def test_shipped_mqg_file_matches_constructor():
    obj, raw = load_json(DATA / "pair3.mqg.json")
    assert structure_equal(mqg_from_json(obj), example("pair3"))
    assert sha256_bytes(raw) == sha256_bytes(DATA.joinpath("pair3.mqg.json").read_bytes())


def test_groupoid_round_trip():
    obj, _ = load_json(DATA / "pair3.groupoid.json")
    gr = groupoid_from_json(obj)
    assert groupoid_from_json(groupoid_to_json(gr)) == gr


def test_wha_round_trip():
    w = matrix_groupoid_weak_hopf(2)
    back = wha_from_json(json.loads(canonical_dumps(wha_to_json(w))))
    assert np.array_equal(back.coproduct, w.coproduct)
    assert np.array_equal(back.antipode, w.antipode)
    assert np.array_equal(back.counit, w.counit)
    obj, _ = load_json(DATA / "m2.wha.json")
    assert check_weak_hopf(wha_from_json(obj)).passed


def test_input_error_codes(tmp_path):
    with pytest.raises(InputError) as exc:
        load_json(tmp_path / "missing.json")
    assert exc.value.code == "input_error"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError) as exc:
        load_json(bad)
    assert exc.value.code == "input_error"
    with pytest.raises(InputError) as exc:
        validate({"format": "mqg"}, "mqg")
    assert exc.value.code == "validation_error"


def test_groupoid_axiom_violation_is_validation_error():
    obj, _ = load_json(DATA / "pair2.groupoid.json")
    obj["compose"] = obj["compose"][1:]
    with pytest.raises(InputError) as exc:
        groupoid_from_json(obj)
    assert exc.value.code == "validation_error"


def test_mqg_shape_mismatch_rejected():
    obj = mqg_to_json(example("pair2"))
    obj["T_L"] = obj["T_L"][:-1]
    with pytest.raises(InputError):
        mqg_from_json(obj)
    obj = mqg_to_json(example("pair2"))
    obj["coproduct"][0][0] = "9:9:9"
    with pytest.raises(InputError):
        mqg_from_json(obj)


def test_atomic_write(tmp_path):
    target = tmp_path / "sub" / "out.json"
    atomic_write(target, "one\n")
    atomic_write(target, "two\n")
    assert target.read_text() == "two\n"
    assert sorted(os.listdir(target.parent)) == ["out.json"]
    mask = os.umask(0)
    os.umask(mask)
    assert stat.S_IMODE(target.stat().st_mode) == 0o666 & ~mask
