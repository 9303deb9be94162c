"""Exact arithmetic over small finite fields GF(q).

Elements are canonically encoded as integers in [0, q).  For a prime field
the encoding is the residue itself; for q = 2^m it is the coefficient
vector of the polynomial basis packed into bits (bit i holds the
coefficient of x^i).  Multiplication and inversion run off log/antilog
tables built once at construction; building the tables also certifies that
the arithmetic really is a field (every nonzero element gets an inverse).

Supported sizes: prime q, and q = 2^m for m <= 16, capped at q <= 2^16.
Odd-characteristic extension fields are rejected with an explicit error.

All operations accept plain ints or numpy integer arrays and are pure;
a constructed Field is immutable and safe for concurrent use.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    NotPrimePowerError,
    OutOfRangeError,
    TooLargeError,
    UnsupportedFieldError,
)

FIELD_SIZE_CAP = 1 << 16

# Reduction polynomial per extension degree over GF(2): the lowest-weight
# irreducible, ties broken by smallest integer encoding (bit i = coefficient
# of x^i).  Fixed here so element encodings are identical across runs and
# platforms.
_REDUCTION_POLY = {
    2: 0b111,                  # x^2 + x + 1
    3: 0b1011,                 # x^3 + x + 1
    4: 0b10011,                # x^4 + x + 1
    5: 0b100101,               # x^5 + x^2 + 1
    6: 0b1000011,              # x^6 + x + 1
    7: 0b10000011,             # x^7 + x + 1
    8: 0b100011011,            # x^8 + x^4 + x^3 + x + 1
    9: 0b1000000011,           # x^9 + x + 1
    10: 0b10000001001,         # x^10 + x^3 + 1
    11: 0b100000000101,        # x^11 + x^2 + 1
    12: 0b1000000001001,       # x^12 + x^3 + 1
    13: 0b10000000011011,      # x^13 + x^4 + x^3 + x + 1
    14: 0b100000000100001,     # x^14 + x^5 + 1
    15: 0b1000000000000011,    # x^15 + x + 1
    16: 0b10000000000101011,   # x^16 + x^5 + x^3 + x + 1
}


def _factor_prime_power(q: int) -> tuple[int, int]:
    """Return (p, m) with q = p^m, or raise NotPrimePowerError."""
    if q < 2:
        raise NotPrimePowerError(f"field size must be >= 2, got {q}")
    n, p = q, None
    for cand in range(2, q + 1):
        if cand * cand > n:
            break
        if n % cand == 0:
            p = cand
            break
    if p is None:
        return q, 1  # q itself is prime
    m = 0
    while n % p == 0:
        n //= p
        m += 1
    if n != 1:
        raise NotPrimePowerError(f"{q} has at least two distinct prime factors")
    return p, m


def _poly_mod2(a: int, b: int) -> int:
    """Remainder of a / b for polynomials over GF(2) packed into ints."""
    db = b.bit_length() - 1
    while a.bit_length() - 1 >= db and a:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def _check_irreducible2(poly: int, m: int) -> None:
    """Trial-divide by every polynomial of degree 1..m//2 over GF(2)."""
    for d in range(1, m // 2 + 1):
        for div in range(1 << d, 1 << (d + 1)):
            if _poly_mod2(poly, div) == 0:
                raise ValueError(
                    f"reduction polynomial 0b{poly:b} is reducible "
                    f"(divisible by 0b{div:b})"
                )


class Field:
    """Arithmetic over GF(q) with integer-coded elements.

    Attributes
    ----------
    q : int
        Number of elements.
    p : int
        Characteristic (prime).
    m : int
        Extension degree, q = p^m.
    reduction_poly : tuple[int, ...]
        Coefficient vector (index i = coefficient of x^i) of the degree-m
        reduction polynomial; empty for prime fields.

    Use :func:`make_field` rather than constructing directly.
    """

    def __init__(self, q: int):
        if q > FIELD_SIZE_CAP:
            raise TooLargeError(f"field size {q} exceeds cap {FIELD_SIZE_CAP}")
        p, m = _factor_prime_power(q)
        if m > 1 and p != 2:
            raise UnsupportedFieldError(
                f"GF({p}^{m}) not supported: only prime fields and "
                f"characteristic-2 extensions are implemented"
            )
        self.q = q
        self.p = p
        self.m = m
        if m > 1:
            poly_int = _REDUCTION_POLY[m]
            _check_irreducible2(poly_int, m)
            self._poly_int = poly_int
            self.reduction_poly = tuple((poly_int >> i) & 1 for i in range(m + 1))
        else:
            self._poly_int = 0
            self.reduction_poly = ()
        self._build_tables()

    # -- construction helpers -------------------------------------------

    def _raw_mul(self, a: int, b: int) -> int:
        """Table-free product, used only while building the tables."""
        if self.m == 1:
            return (a * b) % self.p
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if (a >> self.m) & 1:
                a ^= self._poly_int
        return r

    def _build_tables(self) -> None:
        q = self.q
        # find a multiplicative generator by direct order check
        gen = None
        for cand in range(2, q):
            acc, order = 1, 0
            for i in range(1, q):
                acc = self._raw_mul(acc, cand)
                if acc == 1:
                    order = i
                    break
            if order == q - 1:
                gen = cand
                break
        if q == 2:
            gen = 1
        if gen is None:
            raise ValueError(f"no generator found for q={q}; not a field?")
        self.generator = gen

        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = self._raw_mul(x, gen)
        exp[q - 1:] = exp[: q - 1]  # doubled so log sums index directly
        self._exp = exp
        self._log = log

    # -- validation -------------------------------------------------------

    def _check(self, a) -> None:
        if isinstance(a, np.ndarray):
            if a.size and (int(a.min()) < 0 or int(a.max()) >= self.q):
                raise OutOfRangeError(f"element outside [0, {self.q})")
        elif not 0 <= a < self.q:
            raise OutOfRangeError(f"element {a} outside [0, {self.q})")

    # -- operations --------------------------------------------------------

    def add(self, a, b):
        """Sum in GF(q); XOR of encodings in characteristic 2."""
        self._check(a)
        self._check(b)
        if self.p == 2:
            return a ^ b
        return (a + b) % self.p

    def sub(self, a, b):
        """Difference in GF(q); same as add in characteristic 2."""
        self._check(a)
        self._check(b)
        if self.p == 2:
            return a ^ b
        return (a - b) % self.p

    def mul(self, a, b):
        """Product in GF(q) via the log/antilog tables."""
        self._check(a)
        self._check(b)
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            a = np.asarray(a, dtype=np.int64)
            b = np.asarray(b, dtype=np.int64)
            out = self._exp[self._log[a] + self._log[b]]
            return np.where((a == 0) | (b == 0), 0, out)
        if a == 0 or b == 0:
            return 0
        return int(self._exp[self._log[a] + self._log[b]])

    def inv(self, a: int) -> int:
        """Multiplicative inverse; ZeroDivisionError for 0."""
        self._check(a)
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self._exp[self.q - 1 - self._log[a]])

    def pow(self, a: int, e: int) -> int:
        """a raised to a nonnegative integer power."""
        self._check(a)
        if e < 0:
            raise ValueError("negative exponent")
        if a == 0:
            return 1 if e == 0 else 0
        return int(self._exp[(int(self._log[a]) * e) % (self.q - 1)])

    def elements(self) -> range:
        """All element encodings, 0..q-1."""
        return range(self.q)

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("Field", self.q))

    def __repr__(self) -> str:
        if self.m == 1:
            return f"Field(q={self.q})"
        return f"Field(q={self.q}=2^{self.m}, poly=0b{self._poly_int:b})"


def make_field(q: int) -> Field:
    """Construct GF(q) for prime q or q = 2^m, q <= 2^16.

    The reduction polynomial per degree is fixed (see module table), so the
    element encoding is deterministic across runs.
    """
    return Field(q)
