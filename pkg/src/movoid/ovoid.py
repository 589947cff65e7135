"""m-ovoids, weighted m-ovoids and the identities they satisfy.

A weighted ovoid is an integer vector ``w`` indexed by quadric points with
``w(P^perp) + q^r w(P) = m (q^r + 1)`` at every quadric point P.  All checks
here use exact integer arithmetic.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .projgeom import Subspace
from .quadric import DEFAULT_MAX_GENERATORS, Quadric, QuotientMap, bits, mask_of


class NonIntegralM(ValueError):
    pass


class BasePointNotInSet(ValueError):
    pass


class IdentityViolation(AssertionError):
    """A closed-form identity disagreed with its direct evaluation."""


@dataclass(frozen=True)
class PointSet:
    quadric: Quadric
    mask: int

    @classmethod
    def from_ids(cls, Q: Quadric, ids: Iterable[int]) -> "PointSet":
        m = mask_of(ids)
        if m >> Q.k:
            raise ValueError("point index out of range")
        return cls(Q, m)

    @classmethod
    def empty(cls, Q: Quadric) -> "PointSet":
        return cls(Q, 0)

    @classmethod
    def full(cls, Q: Quadric) -> "PointSet":
        return cls(Q, Q.all_mask)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def __len__(self) -> int:
        return self.size

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def ids(self) -> list[int]:
        return bits(self.mask)

    @property
    def indicator(self) -> np.ndarray:
        out = np.zeros(self.quadric.k, dtype=bool)
        out[self.ids()] = True
        return out

    def chi(self) -> np.ndarray:
        return self.indicator.astype(np.int64)

    def complement(self) -> "PointSet":
        return PointSet(self.quadric, self.quadric.all_mask & ~self.mask)

    def __repr__(self) -> str:
        return f"PointSet({self.quadric!r}, size={self.size})"


@dataclass(frozen=True)
class WeightedOvoid:
    quadric: Quadric
    weights: tuple[int, ...]
    m: int

    @classmethod
    def verified(cls, Q: Quadric, w) -> "WeightedOvoid":
        m = is_weighted_ovoid(Q, w)
        if m is None:
            raise ValueError("weights do not form a weighted ovoid")
        return cls(Q, tuple(int(x) for x in w), m)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.weights, dtype=np.int64)


@dataclass(frozen=True)
class LineStats:
    base_point: int
    t_values: tuple[int, ...]
    sum_t: int
    sum_t_sq: int
    sum_t_t_minus_1: int


def _weights(Q: Quadric, w) -> np.ndarray:
    if isinstance(w, PointSet):
        return w.chi()
    if isinstance(w, WeightedOvoid):
        return w.array
    arr = np.asarray(w, dtype=np.int64)
    if arr.shape != (Q.k,):
        raise ValueError(f"expected {Q.k} weights, got shape {arr.shape}")
    return arr


def trivial_m(Q: Quadric) -> int:
    """m of the ovoid consisting of every point."""
    return (Q.q ** Q.r - 1) // (Q.q - 1)


def ovoid_size(Q: Quadric, m: int) -> int:
    return m * (Q.q ** (Q.r + 1) + 1)


# -- verification ---------------------------------------------------------------------

def is_m_ovoid(Q: Quadric, S: PointSet, max_generators: int = DEFAULT_MAX_GENERATORS) -> int | None:
    """m if every generator meets S in exactly m points, else None."""
    sizes = {(g & S.mask).bit_count() for g in Q.generator_masks(max_generators)}
    return sizes.pop() if len(sizes) == 1 else None


def perp_sums(Q: Quadric, w) -> np.ndarray:
    """Vector of w(P^perp) over quadric points P."""
    return Q.orth.astype(np.int64) @ _weights(Q, w)


def tangent_profile(Q: Quadric, S: PointSet, m: int) -> bool:
    """Check the two tangent-hyperplane intersection numbers of an m-ovoid.

    Necessary but not used as proof of the ovoid property.
    """
    qr = Q.q ** Q.r
    counts = perp_sums(Q, S)
    expected = np.where(S.indicator, (m - 1) * (qr + 1) + 1, m * (qr + 1))
    return bool((counts == expected).all())


def is_weighted_ovoid(Q: Quadric, w) -> int | None:
    """Recover m from the first point and confirm it at every other point."""
    arr = _weights(Q, w)
    qr = Q.q ** Q.r
    lhs = perp_sums(Q, arr) + qr * arr
    probe = int(lhs[0])
    if probe % (qr + 1):
        raise NonIntegralM(f"w(P^perp) + q^r w(P) = {probe} is not divisible by {qr + 1}")
    m = probe // (qr + 1)
    if not (lhs == probe).all():
        return None
    if m < 0:
        warnings.warn(f"weighted ovoid with negative m = {m}", stacklevel=2)
    return m


def weighted_sum_over(Q: Quadric, w, X) -> int:
    """Sum of weights over the quadric points of X.

    X may be a PointSet, a Subspace of the ambient space, a bitset, or an
    iterable of quadric point indices.
    """
    arr = _weights(Q, w)
    if isinstance(X, PointSet):
        idx = X.ids()
    elif isinstance(X, Subspace):
        idx = Q.points_in(X)
    elif isinstance(X, (int, np.integer)):
        idx = bits(int(X))
    else:
        idx = list(X)
    return int(arr[np.asarray(idx, dtype=np.int64)].sum()) if len(idx) else 0


def norm_sq(w) -> int:
    arr = np.asarray(w.chi() if isinstance(w, PointSet) else w, dtype=np.int64)
    return int((arr * arr).sum())


def _m_of(Q: Quadric, w, m: int | None) -> int:
    if m is not None:
        return m
    found = is_weighted_ovoid(Q, w)
    if found is None:
        raise ValueError("weights do not form a weighted ovoid")
    return found


# -- the subspace identities -------------------------------------------------------------

def check_basic_a(Q: Quadric, w, m: int | None = None) -> bool:
    """Total weight equals m (q^(r+1) + 1)."""
    m = _m_of(Q, w, m)
    return int(_weights(Q, w).sum()) == m * (Q.q ** (Q.r + 1) + 1)


def check_basic_b(Q: Quadric, w, outside: Sequence[int], m: int | None = None) -> bool:
    """Weight of the non-tangent hyperplane ``outside^perp`` equals m (q^r + 1).

    ``outside`` is a vector of a point of PG(2r+1, q) off the quadric.
    """
    m = _m_of(Q, w, m)
    if Q.value(outside) == 0:
        raise ValueError("the hyperplane must be non-tangent")
    arr = _weights(Q, w)
    total = int(arr[Q.orthogonal_mask([outside])].sum())
    return total == m * (Q.q ** Q.r + 1)


def check_basic_c(Q: Quadric, w, Pi: Subspace, m: int | None = None) -> bool:
    """w(Pi^perp) + q^(r-j) w(Pi) = m (q^(r-j) + 1) for a j-space Pi.

    For j > r both sides are multiplied by q^(j-r) to stay in integers.
    """
    m = _m_of(Q, w, m)
    arr = _weights(Q, w)
    j = Pi.dim
    in_pi = int(arr[Q.points_in(Pi)].sum())
    in_perp = int(arr[Q.points_in_perp(Pi)].sum())
    q, r = Q.q, Q.r
    if j <= r:
        return in_perp + q ** (r - j) * in_pi == m * (q ** (r - j) + 1)
    s = q ** (j - r)
    return s * in_perp + in_pi == m * (1 + s)


# -- quotient and norm recursion ------------------------------------------------------------

def quotient_down(Q: Quadric, w, p0: int) -> tuple[Quadric, QuotientMap, np.ndarray]:
    """Push w down to the quotient quadric at p0: each line gets its weight minus w(p0)."""
    arr = _weights(Q, w)
    Q1, qmap = Q.quotient(p0)
    down = np.zeros(Q1.k, dtype=np.int64)
    for line, img in zip(qmap.lines, qmap.images):
        down[img] = int(arr[bits(line & ~(1 << p0))].sum())
    return Q1, qmap, down


def check_norm_recursion(Q: Quadric, w, p0: int, m: int | None = None) -> bool:
    """Exact norm identity relating ||w||^2 to the pushed-down weights at p0."""
    m = _m_of(Q, w, m)
    arr = _weights(Q, w)
    _, _, down = quotient_down(Q, arr, p0)
    x = int(arr[p0])
    tangent = Q.orth[p0].copy()
    tangent[p0] = False
    rhs = (x * x + (x + m * (Q.q - 1)) ** 2
           + (Q.q + 1) * int((arr[tangent] ** 2).sum())
           - norm_sq(down))
    return norm_sq(arr) == rhs


def pair_sum(Q: Quadric, w, p0: int) -> int:
    """Sum of w(P) w(R) over P in p0^perp minus p0, R off p0^perp, with P orthogonal to R."""
    arr = _weights(Q, w)
    inner = Q.orth[p0].copy()
    inner[p0] = False
    outer = ~Q.orth[p0]
    block = Q.orth[np.ix_(inner, outer)].astype(np.int64)
    return int(arr[inner] @ block @ arr[outer])


def pair_sum_by_outer(q: int, r: int, m: int, x: int, sq_outer: int) -> int:
    """The pair sum counted through the points off p0^perp (sq_outer = their sum of squares)."""
    s = q ** (r - 1)
    return s * ((m * (s + 1) - s * x) * (m * q * (q - 1) + q * x) - sq_outer)


def pair_sum_by_inner(q: int, r: int, m: int, x: int, sq_inner: int, down_sq: int) -> int:
    """The pair sum counted through the points of p0^perp minus p0."""
    s = q ** (r - 1)
    return (m * (m - x) * s * (q ** r + 1) * (q - 1) + x * (m - x) * s * (q ** r + 1)
            - q ** r * sq_inner + s * down_sq)


def check_pair_sums(Q: Quadric, w, p0: int, m: int | None = None) -> bool:
    """Both closed forms of the pair sum agree with the direct double sum."""
    m = _m_of(Q, w, m)
    arr = _weights(Q, w)
    x = int(arr[p0])
    inner = Q.orth[p0].copy()
    inner[p0] = False
    sq_inner = int((arr[inner] ** 2).sum())
    sq_outer = int((arr[~Q.orth[p0]] ** 2).sum())
    _, _, down = quotient_down(Q, arr, p0)
    direct = pair_sum(Q, arr, p0)
    return (direct == pair_sum_by_outer(Q.q, Q.r, m, x, sq_outer)
            == pair_sum_by_inner(Q.q, Q.r, m, x, sq_inner, norm_sq(down)))


def norm_congruence_value(q: int, r: int, m: int) -> int:
    """Residue of ||w||^2 modulo 2(q+1) forced by m."""
    mod = 2 * (q + 1)
    if r % 2 == 0:
        return (-2 * q * m * m + (q + 1) * (q ** r + 1) * m) % mod
    return (q * q + 1) * m * m % mod


def check_norm_congruence(Q: Quadric, w, m: int | None = None) -> bool:
    m = _m_of(Q, w, m)
    return norm_sq(_weights(Q, w)) % (2 * (Q.q + 1)) == norm_congruence_value(Q.q, Q.r, m)


def chi_down_closed_form(q: int, r: int, m: int, x: int) -> int:
    """||chi_down||^2 predicted for an m-ovoid, x = 1 if the base point is in the set."""
    return x + (x + m * (q - 1)) ** 2 - x * (q + 1) * (q ** r + 1) + m * (q ** r + q)


def chi_down_residue(q: int, r: int, m: int, x: int) -> int:
    d = m - x
    mod = 2 * (q + 1)
    if r % 2:
        return (-2 * q * d * d + (q + 1) * (q ** (r - 1) + 1) * d) % mod
    return (q * q + 1) * d * d % mod


def chi_down_norm(Q: Quadric, S: PointSet, p0: int, m: int) -> int:
    """||chi_down||^2 at p0, computed through the quotient and checked twice."""
    _, _, down = quotient_down(Q, S, p0)
    direct = norm_sq(down)
    x = int(p0 in S)
    closed = chi_down_closed_form(Q.q, Q.r, m, x)
    if direct != closed:
        raise IdentityViolation(f"||chi_down||^2: direct {direct} != closed form {closed}")
    residue = chi_down_residue(Q.q, Q.r, m, x)
    if direct % (2 * (Q.q + 1)) != residue:
        raise IdentityViolation(
            f"||chi_down||^2 = {direct} is not {residue} mod {2 * (Q.q + 1)}")
    return direct


# -- line statistics --------------------------------------------------------------------------

def intersection_histogram(Q: Quadric, S: PointSet, p0: int) -> dict[int, int]:
    """Map |line & S| -> number of lines on p0 with that intersection size."""
    hist = Counter((m & S.mask).bit_count() for m in Q.line_masks_through(p0))
    return dict(sorted(hist.items()))


def expected_line_sums(q: int, r: int, m: int) -> tuple[int, int, int]:
    s1 = (m - 1) * (q ** r + 1)
    s2 = 1 + (1 + m * (q - 1)) ** 2 - (q + 1) * (q ** r + 1) + m * (q ** r + q)
    s3 = m * m * (q - 1) ** 2 + 3 * m * (q - 1) - q ** (r + 1) - q + 2
    return s1, s2, s3


def line_stats(Q: Quadric, S: PointSet, p0: int, m: int) -> LineStats:
    if p0 not in S:
        raise BasePointNotInSet(f"point {p0} is not in the set")
    t = tuple(sorted((l & S.mask).bit_count() - 1 for l in Q.line_masks_through(p0)))
    stats = LineStats(p0, t, sum(t), sum(x * x for x in t), sum(x * (x - 1) for x in t))
    want = expected_line_sums(Q.q, Q.r, m)
    got = (stats.sum_t, stats.sum_t_sq, stats.sum_t_t_minus_1)
    if got != want:
        raise IdentityViolation(f"line sums {got} != predicted {want}")
    return stats
