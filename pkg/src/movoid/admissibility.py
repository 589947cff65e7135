"""Which m can an m-ovoid of Q^-(2r+1, q) have?

Combines the quadratic congruence F(m) = 0 mod (q+1), its solution counts,
and the two lower bounds on m.  Everything is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import prod

from .gf import factorize, prime_power


class DegenerateField(ValueError):
    pass


@dataclass(frozen=True)
class AdmissibilityReport:
    q: int
    r: int
    modulus: int
    factorization: tuple[tuple[int, int], ...]
    case: str
    residues: tuple[int, ...]
    lower_bound_new: int
    lower_bound_old: int
    admissible: tuple[int, ...]
    trivial: tuple[int, ...]

    @property
    def nontrivial(self) -> tuple[int, ...]:
        return tuple(m for m in self.admissible if m not in self.trivial)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["factorization"] = [list(f) for f in self.factorization]
        d["residues"] = list(self.residues)
        d["admissible"] = list(self.admissible)
        d["trivial"] = list(self.trivial)
        d["nontrivial"] = list(self.nontrivial)
        return d


def filter_case(q: int, r: int) -> str:
    if r % 2:
        return "r-odd"
    return "r-even-q-even" if q % 2 == 0 else "r-even-q-odd"


def F_of_m(q: int, r: int, m: int) -> int:
    if r % 2:
        return m * m - m
    if q % 2 == 0:
        return m * m
    return m * m + (q + 1) // 2 * m


def passes_filter(q: int, r: int, m: int) -> bool:
    return F_of_m(q, r, m) % (q + 1) == 0


def residue_solutions(q: int, r: int) -> list[int]:
    return [m for m in range(q + 1) if passes_filter(q, r, m)]


def lemma_solution_count(q: int, r: int) -> int:
    """Number of residues mod q+1 predicted from the factorization of q+1."""
    fs = factorize(q + 1)
    if r % 2:
        return 2 ** len(fs)
    half = prod(p ** (k // 2) for p, k in fs)
    if q % 2 == 0 or q % 4 == 3:
        return half
    # q = 1 mod 4: the prime 2 divides q+1 exactly once
    return 2 * prod(p ** (k // 2) for p, k in fs if p != 2)


def count_admissible_closed(q: int, r: int) -> int:
    n = lemma_solution_count(q, r)
    if r % 2:
        return n * sum(q ** e for e in range(1, r - 1, 2)) + 1
    return n * sum(q ** e for e in range(0, r - 1, 2))


def count_admissible_brute(q: int, r: int) -> int:
    top = (q ** r - 1) // (q - 1)
    return sum(passes_filter(q, r, m) for m in range(top))


def count_admissible(q: int, r: int) -> int:
    """Closed-form count over 0 <= m < (q^r-1)/(q-1), checked against brute force."""
    closed = count_admissible_closed(q, r)
    brute = count_admissible_brute(q, r)
    if closed != brute:
        raise AssertionError(f"closed form {closed} != brute force {brute} for q={q}, r={r}")
    return closed


def _least_nonneg(a: int, b: int, c: int) -> int:
    """Smallest integer m >= 1 with a m^2 + b m + c >= 0 (a > 0, b >= 0)."""
    if a + b + c >= 0:
        return 1
    lo, hi = 1, 2
    while a * hi * hi + b * hi + c < 0:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a * mid * mid + b * mid + c >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def lower_bound(q: int, r: int) -> tuple[int, int]:
    """(new, old) ceilings of the lower bounds on m for a non-empty m-ovoid."""
    if q < 2:
        raise DegenerateField("q must be at least 2")
    a, b = (q - 1) ** 2, 3 * (q - 1)
    new = _least_nonneg(a, b, 2 - q ** (r + 1) - q)
    old = _least_nonneg(a, b, -q ** (r + 1))
    return new, old


def admissible_report(q: int, r: int) -> AdmissibilityReport:
    prime_power(q)
    if r < 1:
        raise ValueError("rank must be at least 1")
    top = (q ** r - 1) // (q - 1)
    new, old = lower_bound(q, r)

    def too_small(x):
        return 0 < x < new

    adm = []
    for m in range(top + 1):
        if m in (0, top):
            adm.append(m)
        elif passes_filter(q, r, m) and not too_small(m) and not too_small(top - m):
            adm.append(m)
    return AdmissibilityReport(
        q=q, r=r, modulus=q + 1, factorization=tuple(factorize(q + 1)),
        case=filter_case(q, r), residues=tuple(residue_solutions(q, r)),
        lower_bound_new=new, lower_bound_old=old,
        admissible=tuple(adm), trivial=(0, top) if top else (0,),
    )
