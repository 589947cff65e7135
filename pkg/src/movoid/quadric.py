"""Elliptic quadrics Q^-(2r+1, q) in standard form.

The standard form is ``x0*x1 + ... + x_{2r-2}*x_{2r-1} + g(x_{2r}, x_{2r+1})``
with ``g`` from :func:`movoid.gf.irreducible_quadratic`.

Quadric points are addressed by a dense local index ``0..k_r-1`` following the
PG point-id order; sets of quadric points are Python ints used as bitsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .gf import Field, irreducible_quadratic
from .projgeom import (
    ResourceLimit, Subspace, combine_rows, mat_inverse, normalize, normalize_rows,
    nullspace, point_ids, points_array, rref, span, subspace_vectors, vec_mat,
)

DEFAULT_MAX_POINTS = 5_000
DEFAULT_MAX_GENERATORS = 100_000


class PointNotOnQuadric(ValueError):
    pass


class RankTooSmall(ValueError):
    pass


class NotElliptic(ValueError):
    pass


def elliptic_point_count(q: int, r: int) -> int:
    """k_r, the number of points of Q^-(2r+1, q)."""
    if r == 0:
        return 0
    return (q ** r - 1) * (q ** (r + 1) + 1) // (q - 1)


def generator_count(q: int, r: int) -> int:
    out = 1
    for i in range(2, r + 2):
        out *= q ** i + 1
    return out


def bits(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def _row_masks(matrix: np.ndarray) -> list[int]:
    packed = np.packbits(matrix, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


class QuadraticForm:
    """f(x) = sum over i <= j of coeffs[i][j] * x_i * x_j."""

    def __init__(self, F: Field, coeffs: Sequence[Sequence[int]]):
        self.F = F
        self.dim = len(coeffs)
        self.coeffs = [[coeffs[i][j] if j >= i else 0 for j in range(self.dim)]
                       for i in range(self.dim)]
        n = self.dim
        self.polar_matrix = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                c = self.coeffs[i][j]
                if i == j:
                    self.polar_matrix[i][i] = F.add(c, c)
                else:
                    self.polar_matrix[i][j] = c
                    self.polar_matrix[j][i] = c

    @classmethod
    def standard(cls, F: Field, r: int, g: tuple[int, int, int] | None = None) -> "QuadraticForm":
        a, b, c = g if g is not None else irreducible_quadratic(F)
        n = 2 * r + 2
        coeffs = [[0] * n for _ in range(n)]
        for i in range(r):
            coeffs[2 * i][2 * i + 1] = 1
        coeffs[2 * r][2 * r] = a
        coeffs[2 * r][2 * r + 1] = b
        coeffs[2 * r + 1][2 * r + 1] = c
        return cls(F, coeffs)

    def value(self, x: Sequence[int]) -> int:
        F = self.F
        acc = 0
        for i in range(self.dim):
            if x[i]:
                row = self.coeffs[i]
                for j in range(i, self.dim):
                    if row[j] and x[j]:
                        acc = F.add(acc, F.mul(row[j], F.mul(x[i], x[j])))
        return acc

    def values(self, arr: np.ndarray) -> np.ndarray:
        F = self.F
        arr = np.asarray(arr, dtype=np.int64)
        out = np.zeros(len(arr), dtype=np.int64)
        for i in range(self.dim):
            for j in range(i, self.dim):
                c = self.coeffs[i][j]
                if c:
                    term = F.mul_table[c, F.mul_table[arr[:, i], arr[:, j]]]
                    out = F.add_table[out, term]
        return out

    def polar(self, x: Sequence[int], y: Sequence[int]) -> int:
        F = self.F
        xm = vec_mat(F, x, self.polar_matrix)
        acc = 0
        for a, b in zip(xm, y):
            if a and b:
                acc = F.add(acc, F.mul(a, b))
        return acc


def _find_singular(form: QuadraticForm, U: list[tuple[int, ...]]) -> tuple[int, ...]:
    F = form.F
    coeffs = points_array(len(U) - 1, F) if len(U) > 1 else np.ones((1, 1), dtype=np.int64)
    vecs = combine_rows(F, coeffs, np.array(U))
    hits = np.nonzero(form.values(vecs) == 0)[0]
    if not len(hits):
        raise NotElliptic("no singular vector where one must exist")
    return tuple(int(x) for x in vecs[hits[0]])


def _axpy(F: Field, a: int, x, y):
    return tuple(F.add(F.mul(a, xi), yi) for xi, yi in zip(x, y))


def witt_basis(form: QuadraticForm, first: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Basis b_0..b_{n-1} with form(sum z_i b_i) equal to the standard elliptic form of z.

    Hyperbolic pairs are peeled greedily; the 2-dimensional anisotropic rest is
    matched against ``irreducible_quadratic(F)`` by exhaustive search.  With
    ``first`` given (a singular vector), it becomes b_0.
    """
    F = form.F
    n = form.dim
    if n % 2:
        raise NotElliptic("odd dimension")
    g = irreducible_quadratic(F)
    U = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    out: list[tuple[int, ...]] = []
    while len(U) > 2:
        if first is not None and not out:
            e = tuple(first)
            if form.value(e) != 0:
                raise ValueError("first basis vector must be singular")
        else:
            e = _find_singular(form, U)
        partner = next((u for u in U if form.polar(e, u)), None)
        if partner is None:
            raise NotElliptic("degenerate form")
        s = F.inv(form.polar(e, partner))
        f = tuple(F.mul(s, x) for x in partner)
        f = _axpy(F, F.neg(form.value(f)), e, f)
        out += [e, f]
        rows = [[form.polar(u, e) for u in U], [form.polar(u, f) for u in U]]
        U = [reduce(lambda acc, t: _axpy(F, t[0], t[1], acc), zip(c, U), (0,) * n)
             for c in nullspace(F, rows, len(U))]
    if len(U) != 2:
        raise NotElliptic("form rank mismatch")
    _, b, c = g
    pts = combine_rows(F, np.array([[x, y] for x in range(F.q) for y in range(F.q)]), np.array(U))
    vals = form.values(pts)
    for i in np.nonzero(vals == 1)[0]:
        u = tuple(int(x) for x in pts[i])
        for j in np.nonzero(vals == c)[0]:
            v = tuple(int(x) for x in pts[j])
            if form.polar(u, v) == b and len(rref(F, [u, v])) == 2:
                return out + [u, v]
    raise NotElliptic("anisotropic remainder not isometric to the standard tail")


@dataclass(frozen=True)
class QuotientMap:
    """Bijection from the lines on ``base_point`` to the points of a rank r-1 quadric."""

    base_point: int
    lines: tuple[int, ...]          # line masks of the source quadric
    images: tuple[int, ...]         # local index in the quotient quadric, per line

    def __len__(self) -> int:
        return len(self.lines)

    def image_of(self, line_mask: int) -> int:
        return self.images[self.lines.index(line_mask)]


class Quadric:
    """Q^-(2r+1, q): enumerated points, orthogonality, lines and generators."""

    def __init__(self, F: Field, r: int, max_points: int = DEFAULT_MAX_POINTS):
        if r < 1:
            raise ValueError("rank must be at least 1")
        k = elliptic_point_count(F.q, r)
        if k > max_points:
            raise ResourceLimit(f"Q^-({2 * r + 1},{F.q}) has {k} points, cap is {max_points}")
        self.F = F
        self.r = r
        self.n = 2 * r + 1
        self.g = irreducible_quadratic(F)
        self.form = QuadraticForm.standard(F, r, self.g)
        allpts = points_array(self.n, F)
        on = np.nonzero(self.form.values(allpts) == 0)[0]
        if len(on) != k:
            raise NotElliptic(f"found {len(on)} points, expected {k}")
        self.coords = allpts[on]
        self.pg_ids = on
        self._local = np.full(len(allpts), -1, dtype=np.int64)
        self._local[on] = np.arange(k)
        self._M = np.array(self.form.polar_matrix, dtype=np.int64)
        self.orth = self._orthogonality()
        self.perp_masks = _row_masks(self.orth)
        self._lines = None
        self._gens = None
        self._pair_line = None

    # -- basic data -------------------------------------------------------------------

    @property
    def q(self) -> int:
        return self.F.q

    @property
    def k(self) -> int:
        return len(self.coords)

    @property
    def all_mask(self) -> int:
        return (1 << self.k) - 1

    def __len__(self) -> int:
        return self.k

    def __repr__(self) -> str:
        return f"Quadric(q={self.q}, r={self.r}, points={self.k})"

    def descriptor(self) -> str:
        return f"{self.F.descriptor()};r={self.r};g={','.join(map(str, self.g))}"

    def _products(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Matrix of B(x, y) for rows x of X and y of Y."""
        F = self.F
        if F.k == 1:
            return (X @ self._M @ Y.T) % F.p
        L = combine_rows(F, X, self._M)
        out = np.zeros((len(X), len(Y)), dtype=np.int64)
        for c in range(L.shape[1]):
            out = F.add_table[out, F.mul_table[L[:, c:c + 1], Y[None, :, c]]]
        return out

    def _orthogonality(self) -> np.ndarray:
        out = np.zeros((self.k, self.k), dtype=bool)
        for start in range(0, self.k, 512):
            out[start:start + 512] = self._products(self.coords[start:start + 512], self.coords) == 0
        return out

    def bilinear(self, x: Sequence[int], y: Sequence[int]) -> int:
        return self.form.polar(x, y)

    def value(self, x: Sequence[int]) -> int:
        return self.form.value(x)

    def index_of(self, v: Sequence[int]) -> int:
        v = normalize(self.F, v)
        pid = int(point_ids(self.F, np.array([v]))[0])
        i = int(self._local[pid])
        if i < 0:
            raise PointNotOnQuadric(f"{v} is not on the quadric")
        return i

    def indices_of(self, arr: np.ndarray) -> np.ndarray:
        """Local indices of the rows (any scaling); -1 where not on the quadric."""
        ids = point_ids(self.F, normalize_rows(self.F, arr))
        return self._local[ids]

    def point(self, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.coords[i])

    def check_point(self, i: int) -> None:
        if not 0 <= i < self.k:
            raise PointNotOnQuadric(f"no quadric point with index {i}")

    # -- polarity ------------------------------------------------------------------------

    def orthogonal_mask(self, vectors: Iterable[Sequence[int]]) -> np.ndarray:
        """Boolean mask of quadric points orthogonal to every given vector."""
        vectors = [tuple(v) for v in vectors]
        ok = np.ones(self.k, dtype=bool)
        if vectors:
            prods = self._products(self.coords, np.array(vectors, dtype=np.int64))
            ok &= (prods == 0).all(axis=1)
        return ok

    def perp_basis(self, basis: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
        rows = [vec_mat(self.F, b, self.form.polar_matrix) for b in basis]
        if not rows:
            return [tuple(1 if i == j else 0 for j in range(self.n + 1)) for i in range(self.n + 1)]
        return nullspace(self.F, rows, self.n + 1)

    def perp(self, S: Subspace | Sequence[int] | int) -> Subspace:
        """Polar subspace in PG(2r+1, q) of a subspace, vector or quadric point index."""
        basis = self._basis_of(S)
        pb = self.perp_basis(basis)
        if not pb:
            raise ValueError("the whole space has an empty polar")
        return span(self.F, pb)

    def _basis_of(self, S) -> list[tuple[int, ...]]:
        if isinstance(S, Subspace):
            return list(S.basis)
        if isinstance(S, (int, np.integer)):
            return [self.point(int(S))]
        return [tuple(S)]

    def points_in(self, S: Subspace | Sequence[Sequence[int]]) -> np.ndarray:
        """Local indices of quadric points lying in a subspace of PG(2r+1, q)."""
        basis = list(S.basis) if isinstance(S, Subspace) else [tuple(v) for v in S]
        return np.nonzero(self.orthogonal_mask(self.perp_basis(basis)))[0]

    def points_in_perp(self, S: Subspace | Sequence[Sequence[int]]) -> np.ndarray:
        basis = list(S.basis) if isinstance(S, Subspace) else [tuple(v) for v in S]
        return np.nonzero(self.orthogonal_mask(basis))[0]

    # -- lines -----------------------------------------------------------------------------

    def _lines_at(self, i: int) -> np.ndarray:
        """Rows (j, ...) listing the non-base points of each line through point i."""
        F = self.F
        J = np.array(bits(self.perp_masks[i] & ~(1 << i)), dtype=np.int64)
        if not len(J):
            return np.zeros((0, F.q), dtype=np.int64)
        xi = self.coords[i]
        cols = [J]
        for lam in range(1, F.q):
            vec = F.add_table[self.coords[J], F.mul_table[lam, xi][None, :]]
            cols.append(self.indices_of(vec))
        O = np.stack(cols, axis=1)
        return O[O.min(axis=1) == J]

    def lines_through(self, i: int) -> list[Subspace]:
        self.check_point(i)
        return [self.subspace_of(m) for m in self.line_masks_through(i)]

    def line_masks_through(self, i: int) -> list[int]:
        self.check_point(i)
        masks = [mask_of(row) | (1 << i) for row in self._lines_at(i).tolist()]
        return sorted(masks, key=self._canonical_key)

    def line_masks(self) -> list[int]:
        """All totally singular lines, sorted by canonical basis."""
        if self._lines is None:
            found = []
            for i in range(self.k):
                for row in self._lines_at(i).tolist():
                    if row[0] > i and min(row) > i:
                        found.append(mask_of(row) | (1 << i))
            self._lines = sorted(found, key=self._canonical_key)
        return self._lines

    def lines(self) -> list[Subspace]:
        return [self.subspace_of(m) for m in self.line_masks()]

    def _pair_lines(self) -> dict[int, int]:
        if self._pair_line is None:
            d = {}
            for m in self.line_masks():
                pts = bits(m)
                for a in pts:
                    for b in pts:
                        if a != b:
                            d[a * self.k + b] = m
            self._pair_line = d
        return self._pair_line

    # -- generators -------------------------------------------------------------------------

    def _canonical_key(self, mask: int) -> tuple:
        pts = bits(mask)
        return tuple(rref(self.F, [self.point(i) for i in pts]))

    def generator_masks(self, max_generators: int = DEFAULT_MAX_GENERATORS) -> list[int]:
        """All generators as bitsets, sorted by canonical basis."""
        if self._gens is not None:
            return self._gens
        count = generator_count(self.q, self.r)
        if count > max_generators:
            raise ResourceLimit(f"{count} generators exceed the cap of {max_generators}")
        P = self.perp_masks
        if self.r == 1:
            level = [(1 << i, (i,)) for i in range(self.k)]
        else:
            level = [(1 << i, (i,)) for i in range(self.k)]
            for depth in range(1, self.r):
                top = depth == self.r - 1
                if depth == 1 and not top:
                    level = [(m, tuple(bits(m)[:2])) for m in self.line_masks()]
                    continue
                pair_line = None if top else self._pair_lines()
                seen = set()
                nxt = []
                for S, basis in level:
                    common = reduce(lambda a, b: a & P[b], basis, -1)
                    cand = common & ~S
                    while cand:
                        x = (cand & -cand).bit_length() - 1
                        if top:
                            new = common & P[x]
                        else:
                            new = S | (1 << x)
                            for s in bits(S):
                                new |= pair_line[s * self.k + x]
                        cand &= ~new
                        if new not in seen:
                            seen.add(new)
                            nxt.append((new, basis + (x,)))
                level = nxt
        gens = [m for m, _ in level]
        if len(gens) != count:
            raise AssertionError(f"found {len(gens)} generators, expected {count}")
        self._gens = sorted(gens, key=self._canonical_key)
        return self._gens

    def generators(self, max_generators: int = DEFAULT_MAX_GENERATORS) -> list[Subspace]:
        return [self.subspace_of(m) for m in self.generator_masks(max_generators)]

    def subspace_of(self, mask: int) -> Subspace:
        """Subspace spanned by a set of quadric points (given as a bitset)."""
        return span(self.F, [self.point(i) for i in bits(mask)])

    def mask_in(self, S: Subspace) -> int:
        return mask_of(self.points_in(S))

    def is_totally_singular(self, S: Subspace) -> bool:
        vecs = subspace_vectors(self.F, S.basis)
        return bool((self.form.values(vecs) == 0).all())

    # -- quotient ----------------------------------------------------------------------------

    def quotient(self, p0: int, max_points: int = DEFAULT_MAX_POINTS) -> tuple["Quadric", QuotientMap]:
        """The rank r-1 quadric induced on the lines through p0, with the line bijection."""
        if self.r < 2:
            raise RankTooSmall("the quotient needs rank at least 2")
        self.check_point(p0)
        basis = witt_basis(self.form, first=self.point(p0))
        inv = mat_inverse(self.F, basis)
        Q1 = quadric_make(self.F, self.r - 1, max_points)
        lines, images = [], []
        for m in self.line_masks_through(p0):
            x = next(j for j in bits(m) if j != p0)
            z = vec_mat(self.F, self.point(x), inv)
            assert z[1] == 0
            lines.append(m)
            images.append(Q1.index_of(z[2:]))
        if len(set(images)) != Q1.k or len(images) != Q1.k:
            raise AssertionError("quotient map is not a bijection")
        return Q1, QuotientMap(p0, tuple(lines), tuple(images))


_QUADRICS: dict[tuple[int, int], Quadric] = {}


def quadric_make(F: Field, r: int, max_points: int = DEFAULT_MAX_POINTS) -> Quadric:
    """Standard elliptic quadric of rank r over F; instances are shared."""
    key = (F.q, r)
    k = elliptic_point_count(F.q, r)
    if k > max_points:
        raise ResourceLimit(f"Q^-({2 * r + 1},{F.q}) has {k} points, cap is {max_points}")
    if key not in _QUADRICS:
        _QUADRICS[key] = Quadric(F, r, max_points)
    return _QUADRICS[key]
