import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaycache.erasure import P, Chunk, MdsCode, add, inv, mds_decode, mds_encode, mul, solve_mod


def det_mod(rows, p=P):
    """Plain-Python determinant over GF(p), independent of ``solve_mod``."""
    M = [list(map(int, r)) for r in rows]
    n, det = len(M), 1
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det = det * M[c][c] % p
        f = pow(M[c][c], p - 2, p)
        for i in range(c + 1, n):
            t = M[i][c] * f % p
            M[i] = [(a - t * b) % p for a, b in zip(M[i], M[c])]
    return det % p


def random_source(rng, k, length=5):
    return [np.array([rng.randrange(P) for _ in range(length)]) for _ in range(k)]


@pytest.mark.parametrize("n,k", [(5, 3), (6, 2), (7, 4), (8, 8), (9, 1)])
def test_every_subset_nonsingular(n, k):
    G = MdsCode(n, k).generator
    for rows in itertools.combinations(range(n), k):
        assert det_mod(G[list(rows)]) != 0, rows


def test_systematic_prefix():
    rng = random.Random(1)
    code = MdsCode(45, 36)
    src = random_source(rng, 36)
    chunks = mds_encode(code, src)
    assert len(chunks) == 45
    assert all(np.array_equal(c.payload, s) for c, s in zip(chunks, src))


def test_last_k_decode_45_36():
    rng = random.Random(2)
    code = MdsCode(45, 36)
    src = random_source(rng, 36, length=8)
    chunks = mds_encode(code, src)
    out = mds_decode(code, chunks[-36:])
    assert all(np.array_equal(a, b) for a, b in zip(out, src))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 64).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))), st.randoms())
def test_any_k_subset_round_trip(nk, rnd):
    n, k = nk
    code = MdsCode(n, k)
    src = [np.array([rnd.randrange(P) for _ in range(3)]) for _ in range(k)]
    chunks = mds_encode(code, src)
    pick = rnd.sample(chunks, k)
    out = mds_decode(code, pick)
    assert all(np.array_equal(a, b) for a, b in zip(out, src))


@given(st.integers(0, P - 1), st.integers(0, P - 1), st.integers(0, P - 1))
def test_field_axioms(a, b, c):
    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
    assert mul(a, b) == mul(b, a)
    if a:
        assert mul(a, inv(a)) == 1


def test_solve_mod_matches_reference():
    rng = np.random.default_rng(3)
    A = rng.integers(0, P, size=(6, 6))
    X = rng.integers(0, P, size=(6, 4))
    Y = np.zeros_like(X)
    for i in range(6):
        for j in range(4):
            Y[i, j] = sum(int(A[i, t]) * int(X[t, j]) for t in range(6)) % P
    assert np.array_equal(solve_mod(A, Y), X)


def test_decode_input_errors():
    code = MdsCode(5, 3)
    chunks = mds_encode(code, random_source(random.Random(0), 3))
    with pytest.raises(ValueError):
        mds_decode(code, chunks[:2])
    with pytest.raises(ValueError):
        mds_decode(code, [chunks[0], chunks[0], chunks[1]])
    with pytest.raises(ValueError):
        mds_decode(code, [chunks[0], chunks[1], Chunk(9, chunks[2].payload)])
    with pytest.raises(ValueError):
        MdsCode(2, 3)
    with pytest.raises(ValueError):
        mds_encode(code, [np.array([P])] * 3)
