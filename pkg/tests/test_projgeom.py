import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from movoid.gf import field_make
from movoid.projgeom import (
    ResourceLimit, mat_inverse, normalize, nullspace, point_count, point_id, point_ids,
    points_array, rank, rref, span, vec_mat,
)


def brute_points(n, F):
    """Normalized vectors of PG(n, q) by filtering all vectors, sorted as tuples."""
    pts = set()
    for v in itertools.product(range(F.q), repeat=n + 1):
        if any(v):
            pts.add(normalize(F, v))
    return sorted(pts)


@pytest.mark.parametrize("n,q", [(1, 2), (2, 3), (3, 2), (2, 4), (3, 3), (2, 5)])
def test_points_in_lex_order(n, q):
    F = field_make(q)
    arr = points_array(n, F)
    assert len(arr) == point_count(n, q)
    assert [tuple(r) for r in arr.tolist()] == brute_points(n, F)
    assert point_ids(F, arr).tolist() == list(range(len(arr)))


def test_first_and_last_ids():
    F = field_make(3)
    assert point_id(F, (0, 0, 0, 2)) == 0
    assert point_id(F, (2, 1, 1, 1)) == point_count(3, 3) - 1


@given(st.sampled_from([2, 3, 4, 5, 7, 9]), st.lists(st.integers(0, 100), min_size=4, max_size=4),
       st.integers(1, 100))
def test_normalize_is_scale_invariant(q, raw, lam):
    F = field_make(q)
    v = [x % q for x in raw]
    if not any(v):
        return
    s = lam % (q - 1)
    scaled = [F.mul(F.exp(s), x) for x in v]
    nv = normalize(F, v)
    assert normalize(F, scaled) == nv
    assert next(x for x in nv if x) == 1


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        normalize(field_make(5), (0, 0, 0))


def test_cap():
    with pytest.raises(ResourceLimit):
        points_array(5, field_make(9), cap=1000)


@given(st.sampled_from([2, 3, 4, 5, 8]), st.data())
def test_rref_nullspace_inverse(q, data):
    F = field_make(q)
    n = 4
    rows = [tuple(data.draw(st.integers(0, q - 1)) for _ in range(n)) for _ in range(3)]
    red = rref(F, rows)
    # rref spans the same space and is idempotent
    assert rref(F, red) == red
    assert rank(F, rows + list(red)) == len(red)
    ker = nullspace(F, rows, n)
    assert len(ker) + len(red) == n
    for k in ker:
        for r in rows:
            acc = 0
            for a, b in zip(r, k):
                acc = F.add(acc, F.mul(a, b))
            assert acc == 0
    M = [[data.draw(st.integers(0, q - 1)) for _ in range(3)] for _ in range(3)]
    if rank(F, M) == 3:
        inv = mat_inverse(F, M)
        for i in range(3):
            assert vec_mat(F, vec_mat(F, M[i], inv), M) == tuple(M[i])
    else:
        with pytest.raises(ValueError):
            mat_inverse(F, M)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_span_sizes(q):
    F = field_make(q)
    line = span(F, [(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0)])
    plane = span(F, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)])
    assert line.dim == 1 and len(line) == q + 1
    assert plane.dim == 2 and len(plane) == q * q + q + 1
    assert line.issubset(plane)
    assert point_id(F, (0, 0, 1, 0)) in plane
    assert point_id(F, (0, 0, 0, 1)) not in plane
