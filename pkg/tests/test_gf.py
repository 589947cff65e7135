import pytest
from hypothesis import given, settings, strategies as st

from movoid.gf import (
    DivisionByZero, NotAPrimePower, factorize, field_make, irreducible_quadratic,
    is_prime_power, lex_smallest_irreducible, prime_power,
)

ORDERS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49]


def naive_mul(F, a, b):
    """Schoolbook polynomial product reduced by the field modulus."""
    p, k = F.p, F.k
    da = [(a // p ** i) % p for i in range(k)]
    db = [(b // p ** i) % p for i in range(k)]
    prod = [0] * (2 * k - 1)
    for i, x in enumerate(da):
        for j, y in enumerate(db):
            prod[i + j] = (prod[i + j] + x * y) % p
    mod = list(F.modulus)
    for top in range(len(prod) - 1, k - 1, -1):
        c = prod[top]
        if c:
            for i, mc in enumerate(mod):
                prod[top - k + i] = (prod[top - k + i] - c * mc) % p
    return sum(prod[i] * p ** i for i in range(k))


@st.composite
def field_and_elems(draw, n=3):
    F = field_make(draw(st.sampled_from(ORDERS)))
    return F, [draw(st.integers(0, F.q - 1)) for _ in range(n)]


@given(field_and_elems())
def test_field_axioms(data):
    F, (a, b, c) = data
    assert F.add(a, b) == F.add(b, a)
    assert F.mul(a, b) == F.mul(b, a)
    assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.add(a, F.neg(a)) == 0
    assert F.sub(F.add(a, b), b) == a
    if a:
        assert F.mul(a, F.inv(a)) == 1
        assert F.exp(F.log(a)) == a


@settings(max_examples=300)
@given(field_and_elems(2))
def test_mul_matches_schoolbook(data):
    F, (a, b) = data
    assert F.mul(a, b) == naive_mul(F, a, b)


@pytest.mark.parametrize("q", ORDERS)
def test_primitive_generates_group(q):
    F = field_make(q)
    powers = {F.exp(i) for i in range(q - 1)}
    assert powers == set(range(1, q))


@pytest.mark.parametrize("q", ORDERS)
def test_frobenius_is_additive(q):
    F = field_make(q)
    p = F.p
    for a in range(q):
        for b in range(0, q, max(1, q // 7)):
            assert F.pow(F.add(a, b), p) == F.add(F.pow(a, p), F.pow(b, p))


@pytest.mark.parametrize("q,poly", [(2, (0, 1)), (5, (0, 1)), (4, (1, 1, 1)), (8, (1, 0, 1, 1)),
                                    (9, (1, 0, 1)), (27, (1, 0, 2, 1))])
def test_lex_smallest_modulus(q, poly):
    assert field_make(q).modulus == poly


@pytest.mark.parametrize("p", [2, 3, 5])
def test_lex_smallest_cubic_is_minimal(p):
    # a cubic is irreducible iff it has no root; every smaller monic cubic must have one
    best = lex_smallest_irreducible(p, 3)
    for c0 in range(p):
        for c1 in range(p):
            for c2 in range(p):
                cand = (c0, c1, c2, 1)
                has_root = any((c0 + c1 * x + c2 * x * x + x ** 3) % p == 0 for x in range(p))
                if cand < best:
                    assert has_root
                elif cand == best:
                    assert not has_root


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_irreducible_quadratic_is_anisotropic(q):
    F = field_make(q)
    a, b, c = irreducible_quadratic(F)
    for x in range(q):
        for y in range(q):
            v = F.add(F.add(F.mul(a, F.mul(x, x)), F.mul(b, F.mul(x, y))), F.mul(c, F.mul(y, y)))
            assert (v == 0) == (x == 0 and y == 0)


def test_quadratic_choices():
    got = {q: irreducible_quadratic(field_make(q)) for q in (2, 3, 4, 5, 7, 8, 9)}
    assert got == {2: (1, 1, 1), 3: (1, 0, 1), 4: (1, 1, 2), 5: (1, 0, 2),
                   7: (1, 0, 1), 8: (1, 1, 1), 9: (1, 0, 4)}


@pytest.mark.parametrize("bad", [0, 1, 6, 10, 12, -4])
def test_not_a_prime_power(bad):
    assert not is_prime_power(bad)
    with pytest.raises(NotAPrimePower):
        field_make(bad)


def test_prime_power_and_factorize():
    assert prime_power(81) == (3, 4)
    assert factorize(360) == [(2, 3), (3, 2), (5, 1)]


def test_zero_has_no_inverse():
    F = field_make(9)
    with pytest.raises(DivisionByZero):
        F.inv(0)
    with pytest.raises(DivisionByZero):
        F.log(0)


def test_descriptor():
    assert field_make(4).descriptor() == "q=4;poly=1,1,1"
    assert field_make(7).descriptor() == "q=7;poly=0,1"


def test_squares_count():
    for q in (3, 5, 7, 9, 25):
        F = field_make(q)
        assert sum(F.is_square(a) for a in range(1, q)) == (q - 1) // 2
