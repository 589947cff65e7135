"""Finite fields GF(q) with table-driven arithmetic.

Elements are plain ints in ``range(q)``.  The element with index
``c0 + c1*p + ... + c_{k-1}*p^(k-1)`` is the residue ``c0 + c1*t + ...``
modulo the field's defining polynomial, so 0 is zero and 1 is one.
"""

from __future__ import annotations

from itertools import product

import numpy as np

MAX_ORDER = 1024


class NotAPrimePower(ValueError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization, ``[(p, k), ...]`` with p ascending."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, k) with q = p**k, or raise NotAPrimePower."""
    if q < 2:
        raise NotAPrimePower(f"{q} is not a prime power")
    fs = factorize(q)
    if len(fs) != 1:
        raise NotAPrimePower(f"{q} is not a prime power")
    return fs[0]


def is_prime_power(q: int) -> bool:
    try:
        prime_power(q)
    except NotAPrimePower:
        return False
    return True


# -- polynomials over GF(p), coefficient lists low degree first ---------------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a, m, p):
    a = _trim(a)
    m = _trim(m)
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = (a[-1] * inv_lead) % p
        shift = len(a) - len(m)
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        a = _trim(a)
    return a


def _is_irreducible(poly, p) -> bool:
    k = len(poly) - 1
    if k <= 1:
        return k == 1
    for d in range(1, k // 2 + 1):
        for low in product(range(p), repeat=d):
            if not _polymod(poly, list(low) + [1], p):
                return False
    return True


def lex_smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Monic irreducible of degree k, smallest by (c0, c1, ..., c_{k-1})."""
    for low in product(range(p), repeat=k):
        poly = list(low) + [1]
        if _is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class Field:
    """GF(q) with exp/log, addition and multiplication tables.

    Scalar operations (``add``, ``mul``, ...) take and return ints.  The numpy
    tables ``add_table``, ``mul_table``, ``neg_table`` and ``inv_table`` are
    meant for vectorized work on index arrays (``inv_table[0]`` is 0).
    """

    def __init__(self, p: int, k: int, modulus: tuple[int, ...]):
        self.p = p
        self.k = k
        self.q = p ** k
        self.modulus = tuple(modulus)
        q = self.q

        digits = np.array([[(a // p ** i) % p for i in range(k)] for a in range(q)],
                          dtype=np.int64)
        weights = p ** np.arange(k, dtype=np.int64)
        self.add_table = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
        self.neg_table = ((-digits) % p) @ weights

        self.primitive = self._find_primitive()
        exp = [1]
        for _ in range(q - 2):
            exp.append(self._polymul(exp[-1], self.primitive))
        self.exp_table = np.array(exp, dtype=np.int64)
        self.log_table = np.full(q, -1, dtype=np.int64)
        self.log_table[self.exp_table] = np.arange(q - 1)

        logs = self.log_table[1:]
        mul = np.zeros((q, q), dtype=np.int64)
        mul[1:, 1:] = self.exp_table[(logs[:, None] + logs[None, :]) % (q - 1)]
        self.mul_table = mul
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = self.exp_table[(-logs) % (q - 1)]
        self.inv_table = inv

        # python lists are faster than numpy for scalar lookups
        self._add = self.add_table.tolist()
        self._mul = self.mul_table.tolist()
        self._neg = self.neg_table.tolist()
        self._inv = self.inv_table.tolist()
        self._exp = self.exp_table.tolist()
        self._log = self.log_table.tolist()

    # -- construction helpers ------------------------------------------------

    def _digits(self, a: int) -> list[int]:
        return [(a // self.p ** i) % self.p for i in range(self.k)]

    def _from_digits(self, ds) -> int:
        return sum(int(d) * self.p ** i for i, d in enumerate(ds))

    def _polymul(self, a: int, b: int) -> int:
        p = self.p
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.k)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        r = _polymod(prod, list(self.modulus), p)
        return self._from_digits(r + [0] * (self.k - len(r)))

    def _find_primitive(self) -> int:
        q = self.q
        if q == 2:
            return 1
        for g in range(2, q):
            x, order = g, 1
            while x != 1:
                x = self._polymul(x, g)
                order += 1
            if order == q - 1:
                return g
        raise AssertionError("no primitive element")  # pragma: no cover

    # -- arithmetic ------------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return self._inv[a]

    def div(self, a: int, b: int) -> int:
        return self._mul[a][self.inv(b)]

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            return 0 if n > 0 else 1
        return self._exp[(self._log[a] * n) % (self.q - 1)]

    def exp(self, i: int) -> int:
        return self._exp[i % (self.q - 1)]

    def log(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("log of zero")
        return self._log[a]

    def elements(self) -> range:
        return range(self.q)

    def is_square(self, a: int) -> bool:
        return a == 0 or self.p == 2 or self._log[a] % 2 == 0

    def descriptor(self) -> str:
        return f"q={self.q};poly={','.join(map(str, self.modulus))}"

    def __repr__(self) -> str:
        return f"Field(q={self.q}, modulus={self.modulus})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and (self.q, self.modulus) == (other.q, other.modulus)

    def __hash__(self) -> int:
        return hash((self.q, self.modulus))


_CACHE: dict[int, Field] = {}


def field_make(q: int) -> Field:
    """Build GF(q) over the lexicographically smallest monic irreducible."""
    if q in _CACHE:
        return _CACHE[q]
    p, k = prime_power(q)
    if q > MAX_ORDER:
        raise ValueError(f"field order {q} exceeds supported maximum {MAX_ORDER}")
    F = Field(p, k, lex_smallest_irreducible(p, k))
    _CACHE[q] = F
    return F


def irreducible_quadratic(F: Field) -> tuple[int, int, int]:
    """Smallest (1, b, c) such that x^2 + bxy + cy^2 is anisotropic over F."""
    for b in range(F.q):
        for c in range(F.q):
            # t^2 + b t + c has no root in F
            if all(F.add(F.add(F.mul(t, t), F.mul(b, t)), c) != 0 for t in range(F.q)):
                return (1, b, c)
    raise AssertionError("no anisotropic binary form")  # pragma: no cover
