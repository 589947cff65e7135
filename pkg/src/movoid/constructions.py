"""Field reduction, line spreads and 1-systems of rank-3 quadrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf import Field, field_make, prime_power
from .ovoid import PointSet, is_m_ovoid
from .projgeom import ResourceLimit, Subspace, mat_inverse, points_array
from .quadric import (
    DEFAULT_MAX_POINTS, NotElliptic, Quadric, QuadraticForm, bits,
    elliptic_point_count, quadric_make, witt_basis,
)


class NotALine(ValueError):
    pass


# -- subfields ------------------------------------------------------------------------------

def subfield_embedding(Fq: Field, FQ: Field) -> list[int]:
    """Index map GF(q) -> GF(Q) sending Fq's generator to the least root of its modulus."""
    if Fq.p != FQ.p or FQ.k % Fq.k:
        raise ValueError(f"GF({Fq.q}) is not a subfield of GF({FQ.q})")
    p = Fq.p
    if Fq.k == 1:
        return list(range(p))
    mod = Fq.modulus

    def ev(x, coeffs):
        acc = 0
        for c in reversed(coeffs):
            acc = FQ.add(FQ.mul(acc, x), c)
        return acc

    theta = next(x for x in range(FQ.q) if ev(x, mod) == 0)
    return [ev(theta, [(a // p ** i) % p for i in range(Fq.k)]) for a in range(Fq.q)]


def trace(FQ: Field, q: int, x: int) -> int:
    """Relative trace GF(Q) -> GF(q) as an element index of GF(Q)."""
    acc, y = 0, x
    e = 0
    Q = FQ.q
    while q ** e < Q:
        acc = FQ.add(acc, y)
        y = FQ.pow(y, q)
        e += 1
    return acc


# -- field reduction ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldReductionMap:
    e: int
    basis: tuple[int, ...]                 # GF(q)-basis of GF(q^e): 1, t, ..., t^(e-1)
    source: Quadric
    target: Quadric
    change_of_basis: tuple[tuple[int, ...], ...]   # trace-form coordinates -> standard
    point_to_subspace: tuple[int, ...]     # per source point, bitset of target points

    def expand(self, S: PointSet) -> PointSet:
        m = 0
        for i in S.ids():
            m |= self.point_to_subspace[i]
        return PointSet(self.target, m)


def _trace_form(src: Quadric, Fq: Field, emb: list[int], beta: list[int]) -> QuadraticForm:
    FQ = src.F
    e = len(beta)
    dim = e * (src.n + 1)
    back = {v: i for i, v in enumerate(emb)}

    def lift(y):
        x = []
        for i in range(src.n + 1):
            acc = 0
            for j in range(e):
                c = y[i * e + j]
                if c:
                    acc = FQ.add(acc, FQ.mul(emb[c], beta[j]))
            x.append(acc)
        return x

    def f(y):
        t = trace(FQ, Fq.q, src.value(lift(y)))
        return back[t]

    unit = [[1 if a == b else 0 for b in range(dim)] for a in range(dim)]
    diag = [f(unit[a]) for a in range(dim)]
    coeffs = [[0] * dim for _ in range(dim)]
    for a in range(dim):
        coeffs[a][a] = diag[a]
        for b in range(a + 1, dim):
            s = [x + y for x, y in zip(unit[a], unit[b])]
            coeffs[a][b] = Fq.sub(Fq.sub(f(s), diag[a]), diag[b])
    return QuadraticForm(Fq, coeffs)


def field_reduction_map(source: Quadric, q: int, max_points: int = DEFAULT_MAX_POINTS) -> FieldReductionMap:
    """Read Q^-(2r+1, q^e) over GF(q) as Q^-(2e(r+1)-1, q) in standard coordinates."""
    FQ = source.F
    p, k = prime_power(q)
    if FQ.p != p or FQ.k % k:
        raise ValueError(f"GF({q}) is not a subfield of GF({FQ.q})")
    e = FQ.k // k
    if e < 2:
        raise ValueError("extension degree must be at least 2")
    r_target = e * (source.r + 1) - 1
    k_target = elliptic_point_count(q, r_target)
    if k_target > max_points:
        raise ResourceLimit(f"target quadric has {k_target} points, cap is {max_points}")
    Fq = field_make(q)
    emb = subfield_embedding(Fq, FQ)
    t = FQ.p if FQ.k > 1 else 0          # index of the polynomial generator t
    beta = [FQ.pow(t, j) if j else 1 for j in range(e)]
    form = _trace_form(source, Fq, emb, beta)

    n_target = 2 * r_target + 1
    count = int((form.values(points_array(n_target, Fq)) == 0).sum())
    if count != k_target:
        raise NotElliptic(f"trace form has {count} singular points, expected {k_target}")
    W = witt_basis(form)
    to_std = mat_inverse(Fq, W)
    target = quadric_make(Fq, r_target, max_points)

    # coordinates of every GF(Q) element in the basis beta
    decomp = {}
    for a in range(FQ.q):
        ys = np.unravel_index(a, (Fq.q,) * e)
        acc = 0
        for j, c in enumerate(ys):
            acc = FQ.add(acc, FQ.mul(emb[int(c)], beta[j]))
        decomp[acc] = [int(c) for c in ys]
    dec = np.array([decomp[a] for a in range(FQ.q)], dtype=np.int64)
    to_std_arr = np.array(to_std, dtype=np.int64)

    expansions = []
    lam = np.arange(1, FQ.q)
    for x in source.coords:
        mult = FQ.mul_table[lam[:, None], x[None, :]]           # (Q-1) x (n+1)
        ys = dec[mult].reshape(len(lam), -1)                      # (Q-1) x e(n+1)
        zs = _matmul(Fq, ys, to_std_arr)
        idx = target.indices_of(zs)
        if (idx < 0).any():
            raise NotElliptic("expanded point is not on the target quadric")
        mask = 0
        for i in set(idx.tolist()):
            mask |= 1 << i
        expansions.append(mask)

    size = (FQ.q - 1) // (q - 1)
    seen = 0
    for mask in expansions:
        if mask.bit_count() != size or mask & seen:
            raise AssertionError("expansions are not disjoint subspaces of the right size")
        seen |= mask
    return FieldReductionMap(
        e=e, basis=tuple(beta), source=source, target=target,
        change_of_basis=tuple(tuple(r) for r in to_std), point_to_subspace=tuple(expansions))


def _matmul(F: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if F.k == 1:
        return (A @ B) % F.p
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for i in range(A.shape[1]):
        out = F.add_table[out, F.mul_table[A[:, i:i + 1], B[i][None, :]]]
    return out


def field_reduce(source: Quadric, S: PointSet, q: int, verify: bool = True,
                 max_points: int = DEFAULT_MAX_POINTS, max_generators: int | None = None):
    """Expand an m-ovoid of Q^-(2r+1, q^e) to an m(q^e-1)/(q-1)-ovoid over GF(q).

    Returns (target PointSet, its m, FieldReductionMap).  With ``verify`` the
    result is checked against every generator of the target.
    """
    m = is_m_ovoid(source, S)
    if m is None:
        raise ValueError("source set is not an m-ovoid")
    frm = field_reduction_map(source, q, max_points)
    target_set = frm.expand(S)
    m_target = m * (source.q - 1) // (q - 1)
    if verify:
        kwargs = {} if max_generators is None else {"max_generators": max_generators}
        got = is_m_ovoid(frm.target, target_set, **kwargs)
        if got != m_target:
            raise AssertionError(f"reduced set is a {got}-ovoid, expected {m_target}")
    return target_set, m_target, frm


# -- line spreads and 1-systems -------------------------------------------------------------------

@dataclass(frozen=True)
class OneSystem:
    quadric: Quadric
    lines: tuple[int, ...]      # line bitsets

    def covered(self) -> PointSet:
        m = 0
        for l in self.lines:
            m |= l
        return PointSet(self.quadric, m)


def extract_line_spread(Q: Quadric, S: PointSet) -> list[int] | None:
    """Lines inside S, returned only if they partition S."""
    inside = [l for l in Q.line_masks() if l & S.mask == l]
    union, total = 0, 0
    for l in inside:
        union |= l
        total += l.bit_count()
    if union != S.mask or total != S.size:
        return None
    return inside


def _as_line_mask(Q: Quadric, line) -> int:
    if isinstance(line, Subspace):
        if line.dim != 1 or not Q.is_totally_singular(line):
            raise NotALine("not a totally singular line")
        return Q.mask_in(line)
    mask = int(line)
    if mask not in set(Q.line_masks()):
        raise NotALine("not a totally singular line")
    return mask


def is_one_system(Q: Quadric, lines: Sequence) -> bool:
    """q^4+1 disjoint lines with every plane on one of them missing all the others."""
    if Q.r != 3:
        raise ValueError("1-systems are defined here for rank 3 only")
    masks = [_as_line_mask(Q, l) for l in lines]
    if len(masks) != Q.q ** 4 + 1:
        return False
    owner = {}
    for idx, l in enumerate(masks):
        for pt in bits(l):
            if pt in owner:
                return False
            owner[pt] = idx
    union = 0
    for l in masks:
        union |= l
    line_size = Q.q + 1
    for g in Q.generator_masks():
        hit = g & union
        if not hit:
            continue
        pts = bits(hit)
        counts = {}
        for pt in pts:
            counts[owner[pt]] = counts.get(owner[pt], 0) + 1
        if len(counts) > 1 and line_size in counts.values():
            return False
    return True


def one_system_from_reduction(q: int) -> tuple[OneSystem, PointSet]:
    """The 1-system of Q^-(7, q) obtained by reducing all points of Q^-(3, q^2)."""
    src = quadric_make(field_make(q * q), 1)
    S, _, frm = field_reduce(src, PointSet.full(src), q)
    spread = extract_line_spread(frm.target, S)
    if spread is None:
        raise AssertionError("reduced ovoid has no line partition")
    return OneSystem(frm.target, tuple(spread)), S
