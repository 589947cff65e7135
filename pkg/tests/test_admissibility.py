import pytest

from movoid.admissibility import (
    DegenerateField, F_of_m, admissible_report, count_admissible, count_admissible_brute,
    count_admissible_closed, filter_case, lemma_solution_count, lower_bound, passes_filter,
    residue_solutions,
)
from movoid.gf import NotAPrimePower

QS = [2, 3, 4, 5, 7, 8, 9]


def least_m(q, r, extra):
    """Smallest m >= 1 with (2(q-1)m + 3)^2 >= 4q^(r+1) + extra, by direct scan."""
    m = 1
    while (2 * (q - 1) * m + 3) ** 2 < 4 * q ** (r + 1) + extra:
        m += 1
    return m


def test_filter_cases():
    assert filter_case(2, 3) == filter_case(3, 3) == "r-odd"
    assert filter_case(4, 2) == "r-even-q-even"
    assert filter_case(5, 2) == "r-even-q-odd"
    assert F_of_m(5, 2, 3) == 9 + 3 * 3


@pytest.mark.parametrize("q", QS)
@pytest.mark.parametrize("r", [2, 3])
def test_residue_counts_match_factorization(q, r):
    brute = sum(1 for m in range(q + 1) if F_of_m(q, r, m) % (q + 1) == 0)
    assert lemma_solution_count(q, r) == brute == len(residue_solutions(q, r))


@pytest.mark.parametrize("q", [11, 13, 15 + 1, 17, 23, 25, 27, 31, 32, 49, 63 + 1, 127, 243])
def test_residue_counts_larger_q(q):
    for r in (4, 5):
        assert lemma_solution_count(q, r) == len(residue_solutions(q, r))


@pytest.mark.parametrize("q", QS)
@pytest.mark.parametrize("r", range(1, 7))
def test_closed_counts_match_half_open_brute_force(q, r):
    top = (q ** r - 1) // (q - 1)
    brute = sum(1 for m in range(0, top) if (F_of_m(q, r, m)) % (q + 1) == 0)
    assert count_admissible_closed(q, r) == brute == count_admissible_brute(q, r)
    assert count_admissible(q, r) == brute


def test_closed_count_examples():
    # r odd: 2^t (q^(r-2) + ... + q) + 1 ; q=2, r=3: t=1 -> 2*2 + 1
    assert count_admissible_closed(2, 3) == 5
    # r even, q = 1 mod 4: q=5, q+1=6=2*3 -> 2 * 3^0 * (q^0) for r=2
    assert count_admissible_closed(5, 2) == 2
    assert count_admissible_closed(3, 4) == 2 * (9 + 1)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
@pytest.mark.parametrize("r", range(2, 7))
def test_lower_bounds_match_scan(q, r):
    new, old = lower_bound(q, r)
    assert new == least_m(q, r, 4 * q + 1)
    assert old == least_m(q, r, 9)
    assert new >= old


def test_lower_bound_never_strictly_better_at_desk_scale():
    # the new integer ceiling equals the old one throughout this grid
    strict = [(q, r) for q in range(2, 60) for r in range(1, 10) if
              lower_bound(q, r)[0] > lower_bound(q, r)[1]]
    assert strict == []


def test_lower_bound_values():
    assert lower_bound(3, 3) == (4, 4)
    assert lower_bound(2, 3)[0] == 3
    assert lower_bound(3, 2)[0] == 2
    # for Q^-(7,q) the bound is q+1: (2q^2+1)^2 = 4q^4 + 4q^2 + 1 >= 4q^4 + 4q + 1
    for q in (2, 3, 4, 5, 7):
        assert lower_bound(q, 3)[0] == q + 1


def test_degenerate_field():
    with pytest.raises(DegenerateField):
        lower_bound(1, 3)


@pytest.mark.parametrize("q,r,expected", [(2, 3, (3, 4)), (3, 3, (4, 5, 8, 9)), (3, 2, (2,)),
                                          (2, 2, ()), (4, 2, ()), (8, 2, ()), (5, 2, (3,)),
                                          (7, 2, (4,)), (9, 2, (5,))])
def test_nontrivial_admissible(q, r, expected):
    assert admissible_report(q, r).nontrivial == expected


def test_hemisystem_value_for_odd_q():
    for q in (3, 5, 7, 9, 11, 13):
        assert admissible_report(q, 2).nontrivial == ((q + 1) // 2,)


def test_report_fields():
    rep = admissible_report(3, 3)
    assert rep.modulus == 4 and rep.factorization == ((2, 2),)
    assert rep.trivial == (0, 13)
    d = rep.as_dict()
    assert d["nontrivial"] == [4, 5, 8, 9]
    assert passes_filter(3, 3, 5) and not passes_filter(3, 3, 6)


def test_report_rejects_bad_input():
    with pytest.raises(NotAPrimePower):
        admissible_report(6, 2)
    with pytest.raises(ValueError):
        admissible_report(3, 0)
