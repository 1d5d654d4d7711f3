"""The compiled kernels and their pure-Python twins must agree exactly."""

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biresolve import _pykernels as py
from biresolve import kernels

c = pytest.importorskip("biresolve._ckernels")

from helpers import random_matrix  # noqa: E402


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.COMPILED == (kernels.BACKEND == "cython")


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_search_twins(seed, le):
    rng = random.Random(seed)
    ag = random_matrix(rng, rng.randint(1, 4), 2)
    ah = random_matrix(rng, rng.randint(1, 3), 2)
    assert c.search_subamalgamation(ag, ah, le) == py.search_subamalgamation(ag, ah, le)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_exists_twins(seed, covering):
    rng = random.Random(seed)
    ag = random_matrix(rng, rng.randint(1, 3), 2)
    ah = random_matrix(rng, rng.randint(1, 3), 2)
    assert c.homomorphism_exists(ag, ah, covering) == py.homomorphism_exists(ag, ah, covering)


def test_family_twins():
    rng = random.Random(7)
    gs = [random_matrix(rng, rng.randint(1, 3), 2) for _ in range(12)]
    hs = [random_matrix(rng, rng.randint(1, 2), 2) for _ in range(6)]
    for le in (False, True):
        cm, cbad = c.family_agreement(gs, hs, le)
        pm, pbad = py.family_agreement(gs, hs, le)
        assert np.array_equal(cm, pm)
        assert list(cbad) == list(pbad) == []


def balanced(rng, n, r):
    m = np.zeros((n, n), dtype=np.int64)
    for _ in range(r):
        perm = list(range(n))
        rng.shuffle(perm)
        m[np.arange(n), perm] += 1
    return m


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 7), st.integers(1, 4), st.integers(0, 10**6))
def test_decompose_twins(n, r, seed):
    a = balanced(random.Random(seed), n, r).tolist()
    assert [list(p) for p in c.decompose_permutations(a, r)] == py.decompose_permutations(a, r)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 7), st.integers(1, 4), st.integers(0, 10**6))
def test_pad_twins(n, b, seed):
    rng = random.Random(seed)
    a = balanced(rng, n, b)
    for _ in range(rng.randint(0, n * b)):
        i, j = rng.randrange(n), rng.randrange(n)
        if a[i, j]:
            a[i, j] -= 1
    cm, cadds = c.pad_to_balanced(a.tolist(), b)
    pm, padds = py.pad_to_balanced(a.tolist(), b)
    assert [list(r) for r in cm] == pm
    assert [tuple(x) for x in cadds] == padds
