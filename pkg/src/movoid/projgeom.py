"""Points and subspaces of PG(n, q).

A projective point is stored as its normalized coordinate vector (first
nonzero coordinate equal to 1).  Point ids are ranks in the lexicographic
order of normalized vectors, compared as tuples of field-element indices:
``(0,..,0,1)`` has id 0 and ``(1,q-1,..,q-1)`` is last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .gf import Field

DEFAULT_MAX_PG_POINTS = 1_000_000


class ResourceLimit(RuntimeError):
    """A configured size cap would be exceeded."""


@dataclass(frozen=True)
class ProjPoint:
    coords: tuple[int, ...]
    id: int


def point_count(n: int, q: int) -> int:
    return (q ** (n + 1) - 1) // (q - 1)


# -- vectors ---------------------------------------------------------------------

def normalize(F: Field, v: Sequence[int]) -> tuple[int, ...]:
    for x in v:
        if x:
            s = F.inv(x)
            return tuple(F.mul(s, y) for y in v)
    raise ValueError("zero vector has no projective point")


def normalize_rows(F: Field, arr: np.ndarray) -> np.ndarray:
    """Normalize every row of a 2-d index array; rows must be nonzero."""
    arr = np.asarray(arr, dtype=np.int64)
    nz = arr != 0
    if not nz.any(axis=1).all():
        raise ValueError("zero vector has no projective point")
    lead = arr[np.arange(len(arr)), nz.argmax(axis=1)]
    return F.mul_table[F.inv_table[lead][:, None], arr]


def point_ids(F: Field, arr: np.ndarray) -> np.ndarray:
    """Ids of already-normalized rows."""
    arr = np.asarray(arr, dtype=np.int64)
    q = F.q
    n = arr.shape[1] - 1
    lead = (arr != 0).argmax(axis=1)
    powers = q ** np.arange(n, -1, -1, dtype=np.int64)
    value = arr @ powers
    top = q ** (n - lead)
    return (top - 1) // (q - 1) + value - top


def point_id(F: Field, v: Sequence[int]) -> int:
    return int(point_ids(F, np.array([normalize(F, v)]))[0])


def points_array(n: int, F: Field, cap: int = DEFAULT_MAX_PG_POINTS) -> np.ndarray:
    """All normalized vectors of PG(n, q), row i having id i."""
    if n < 1:
        raise ValueError("projective dimension must be at least 1")
    q = F.q
    count = point_count(n, q)
    if count > cap:
        raise ResourceLimit(f"PG({n},{q}) has {count} points, cap is {cap}")
    blocks = []
    for lead in range(n, -1, -1):
        width = n - lead
        tails = np.array(np.unravel_index(np.arange(q ** width), (q,) * width)).T \
            if width else np.zeros((1, 0), dtype=np.int64)
        block = np.zeros((q ** width, n + 1), dtype=np.int64)
        block[:, lead] = 1
        block[:, lead + 1:] = tails
        blocks.append(block)
    return np.concatenate(blocks)


def enumerate_points(n: int, F: Field, cap: int = DEFAULT_MAX_PG_POINTS) -> list[ProjPoint]:
    arr = points_array(n, F, cap)
    return [ProjPoint(tuple(row), i) for i, row in enumerate(arr.tolist())]


# -- linear algebra over GF(q) ---------------------------------------------------

def rref(F: Field, rows: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
    """Reduced row echelon form; zero rows are dropped."""
    m = [list(r) for r in rows]
    if not m:
        return []
    ncols = len(m[0])
    pivot_row = 0
    for col in range(ncols):
        sel = next((i for i in range(pivot_row, len(m)) if m[i][col]), None)
        if sel is None:
            continue
        m[pivot_row], m[sel] = m[sel], m[pivot_row]
        s = F.inv(m[pivot_row][col])
        m[pivot_row] = [F.mul(s, x) for x in m[pivot_row]]
        prow = m[pivot_row]
        for i in range(len(m)):
            c = m[i][col]
            if i != pivot_row and c:
                nc = F.neg(c)
                m[i] = [F.add(x, F.mul(nc, y)) for x, y in zip(m[i], prow)]
        pivot_row += 1
        if pivot_row == len(m):
            break
    return [tuple(r) for r in m[:pivot_row]]


def rank(F: Field, rows) -> int:
    return len(rref(F, rows))


def nullspace(F: Field, rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Basis of {x : r . x = 0 for every row r}."""
    red = rref(F, rows)
    pivots = []
    for r in red:
        pivots.append(next(i for i, x in enumerate(r) if x))
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for r, pc in zip(red, pivots):
            v[pc] = F.neg(r[fc])
        basis.append(tuple(v))
    return basis


def mat_inverse(F: Field, mat: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(mat)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(mat)]
    red = rref(F, aug)
    if len(red) < n or any(red[i][i] != 1 for i in range(n)):
        raise ValueError("matrix is singular")
    return [list(r[n:]) for r in red]


def vec_mat(F: Field, v: Sequence[int], mat: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Row vector times matrix."""
    out = [0] * len(mat[0])
    for x, row in zip(v, mat):
        if x:
            for j, y in enumerate(row):
                if y:
                    out[j] = F.add(out[j], F.mul(x, y))
    return tuple(out)


def combine_rows(F: Field, coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """coeffs @ basis over F, vectorized on index arrays."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    basis = np.asarray(basis, dtype=np.int64)
    out = np.zeros((coeffs.shape[0], basis.shape[1]), dtype=np.int64)
    for i in range(basis.shape[0]):
        out = F.add_table[out, F.mul_table[coeffs[:, i:i + 1], basis[i][None, :]]]
    return out


# -- subspaces ---------------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """A projective subspace: canonical (RREF) basis plus sorted point ids."""

    basis: tuple[tuple[int, ...], ...]
    point_ids: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis) - 1

    def __len__(self) -> int:
        return len(self.point_ids)

    def __contains__(self, pid: int) -> bool:
        i = np.searchsorted(self.point_ids, pid)
        return i < len(self.point_ids) and self.point_ids[i] == pid

    def issubset(self, other: "Subspace") -> bool:
        return set(self.point_ids) <= set(other.point_ids)


def subspace_vectors(F: Field, basis: Sequence[Sequence[int]]) -> np.ndarray:
    """Normalized vectors of all points spanned by an independent basis."""
    basis = np.asarray(basis, dtype=np.int64)
    j = basis.shape[0] - 1
    if j == 0:
        return normalize_rows(F, basis)
    coeffs = points_array(j, F)
    return normalize_rows(F, combine_rows(F, coeffs, basis))


def span(F: Field, vectors: Iterable[Sequence[int]]) -> Subspace:
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        raise ValueError("span of an empty list")
    basis = tuple(rref(F, vectors))
    if not basis:
        raise ValueError("span of zero vectors")
    ids = point_ids(F, subspace_vectors(F, basis))
    return Subspace(basis, tuple(sorted(int(i) for i in ids)))


def span_points(F: Field, points: Iterable[ProjPoint]) -> Subspace:
    return span(F, [p.coords for p in points])
