"""Cached builders shared by the test modules."""

from __future__ import annotations

import functools
from pathlib import Path

import numpy as np

from mqg.algebra import MultiMatrixAlgebra, Weight
from mqg.antipode import build_antipode
from mqg.constructors import build_example, pair_groupoid
from mqg.derived import derive, verify

DATA = Path(__file__).resolve().parents[1] / "src" / "mqg" / "data"

#: Pair groupoid measure used throughout.
MU3 = (1 / 6, 1 / 3, 1 / 2)


@functools.lru_cache(maxsize=None)
def example(name: str):
    return build_example(name)


@functools.lru_cache(maxsize=None)
def derived(name: str):
    return derive(example(name))


@functools.lru_cache(maxsize=None)
def antipode(name: str):
    return build_antipode(example(name))


@functools.lru_cache(maxsize=None)
def full_report(name: str):
    return verify(example(name))


def pair3_groupoid():
    return pair_groupoid(3, MU3)


def m2_base():
    b = MultiMatrixAlgebra([2])
    return b, Weight(b, np.diag([1 / 3, 2 / 3]).astype(complex))
