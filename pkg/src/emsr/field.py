"""Exact arithmetic in GF(p) and GF(2^m).

Elements are canonical integers in [0, q).  For a prime field the integer
is the residue mod p.  For a binary extension field the bits of the
integer are the coefficients of the element's polynomial over GF(2),
LSB = constant term, so GF(4) with generator x^2 + x + 1 is
{0, 1, x, x+1} = {0, 1, 2, 3}.

A field is described textually as ``gf(5)`` for primes and
``gf(4,0b111)`` for extensions, where the polynomial bits are written
MSB-first including the leading term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from functools import lru_cache


class FieldError(Exception):
    """Base class for field construction and arithmetic errors."""


class FieldMismatchError(FieldError):
    """Raised when operands belong to different fields."""


class ZeroDivisionInField(FieldError):
    """Raised when inverting or dividing by the zero element."""


# Irreducible generator polynomials for GF(2^m), as coefficient bit masks.
DEFAULT_POLYNOMIALS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}

_INVERSE_TABLE_LIMIT = 256


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _poly_degree(poly: int) -> int:
    return poly.bit_length() - 1


def _poly_mod(a: int, mod: int) -> int:
    dm = _poly_degree(mod)
    while a.bit_length() - 1 >= dm and a:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a


def _poly_mulmod(a: int, b: int, mod: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
    return _poly_mod(r, mod)


def _poly_is_irreducible(poly: int) -> bool:
    """Exhaustive divisor search over GF(2)[x], intended for degree <= 16."""
    deg = _poly_degree(poly)
    if deg < 1:
        return False
    if deg == 1:
        return True
    for cand in range(2, 1 << (deg // 2 + 1)):
        if _poly_degree(cand) < 1:
            continue
        # Trial division: reduce poly by cand and check remainder.
        if _poly_mod(poly, cand) == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A prime field GF(p) or a binary extension field GF(2^m).

    ``kind`` is "prime" or "binary".  For binary fields ``polynomial``
    holds the generator polynomial bit mask of degree exactly m.
    """

    kind: str
    order: int
    polynomial: int = 0
    _inv_table: tuple = dc_field(default=(), repr=False, compare=False)
    _mul_table: tuple = dc_field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.order < 2:
            raise FieldError(f"field order must be >= 2, got {self.order}")
        if self.kind == "prime":
            if not _is_prime(self.order):
                raise FieldError(f"{self.order} is not prime")
        elif self.kind == "binary":
            m = _poly_degree(self.polynomial)
            if self.order != 1 << m:
                raise FieldError(
                    f"generator polynomial degree {m} does not match order {self.order}")
            if m > 16:
                raise FieldError("extension degrees above 16 are not supported")
            if not _poly_is_irreducible(self.polynomial):
                raise FieldError(f"polynomial {bin(self.polynomial)} is reducible over GF(2)")
        else:
            raise FieldError(f"unknown field kind {self.kind!r}")
        if self.order <= _INVERSE_TABLE_LIMIT:
            table = [0] * self.order
            for a in range(1, self.order):
                inv = self._euclid_inv(a)
                if self.mul_raw(a, inv) != 1:
                    raise FieldError("inverse table disagrees with extended Euclid")
                table[a] = inv
            object.__setattr__(self, "_inv_table", tuple(table))
        if self.kind == "binary" and self.order <= _INVERSE_TABLE_LIMIT:
            rows = tuple(
                tuple(self.mul_raw(a, b) for b in range(self.order))
                for a in range(self.order))
            object.__setattr__(self, "_mul_table", rows)

    # -- raw integer arithmetic ------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a + b) % self.order
        return a ^ b

    def neg(self, a: int) -> int:
        if self.kind == "prime":
            return (-a) % self.order
        return a

    def sub(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a - b) % self.order
        return a ^ b

    def mul_raw(self, a: int, b: int) -> int:
        """Multiply without table lookups (the validation path)."""
        if self.kind == "prime":
            return (a * b) % self.order
        return _poly_mulmod(a, b, self.polynomial)

    def mul(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a * b) % self.order
        if self._mul_table:
            return self._mul_table[a][b]
        return _poly_mulmod(a, b, self.polynomial)

    def _euclid_inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionInField("zero has no multiplicative inverse")
        if self.kind == "prime":
            # Extended Euclid on integers.
            r0, r1 = self.order, a
            s0, s1 = 0, 1
            while r1:
                q = r0 // r1
                r0, r1 = r1, r0 - q * r1
                s0, s1 = s1, s0 - q * s1
            return s0 % self.order
        # Extended Euclid on polynomials over GF(2).
        r0, r1 = self.polynomial, a
        s0, s1 = 0, 1
        while r1:
            shift = _poly_degree(r0) - _poly_degree(r1)
            if shift < 0:
                r0, r1 = r1, r0
                s0, s1 = s1, s0
                continue
            r0 ^= r1 << shift
            s0 ^= s1 << shift
        return _poly_mod(s0, self.polynomial)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionInField("zero has no multiplicative inverse")
        if self._inv_table:
            return self._inv_table[a]
        return self._euclid_inv(a)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        r, base = 1, a
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    # -- element helpers --------------------------------------------------

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value % self.order if self.kind == "prime" else value)

    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def elements(self) -> range:
        return range(self.order)

    def nonzero(self) -> range:
        return range(1, self.order)

    @property
    def descriptor(self) -> str:
        if self.kind == "prime":
            return f"gf({self.order})"
        return f"gf({self.order},{bin(self.polynomial)})"

    def __repr__(self):
        return f"FieldSpec({self.descriptor})"


@dataclass(frozen=True)
class FieldElement:
    """A scalar bound to its FieldSpec; operators enforce same-field use."""

    field: FieldSpec
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.order:
            raise FieldError(f"value {self.value} outside [0, {self.field.order})")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatchError(
                    f"mixed fields {self.field.descriptor} and {other.field.descriptor}")
            return other.value
        if isinstance(other, int):
            if self.field.kind == "prime":
                return other % self.field.order
            if not 0 <= other < self.field.order:
                raise FieldError(f"value {other} outside [0, {self.field.order})")
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.add(self.value, v))

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.sub(self.value, v))

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.sub(v, self.value))

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.mul(self.value, v))

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.div(self.value, v))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.value, e))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value}@{self.field.descriptor}"


_DESCRIPTOR_RE = re.compile(r"^gf\((\d+)(?:,(0b[01]+|\d+))?\)$")


@lru_cache(maxsize=None)
def _make_field(kind: str, order: int, polynomial: int) -> FieldSpec:
    return FieldSpec(kind, order, polynomial)


def prime_field(p: int) -> FieldSpec:
    return _make_field("prime", p, 0)


def binary_field(m: int, polynomial: int | None = None) -> FieldSpec:
    if m < 2:
        # GF(2) is canonically the prime field; a degree-1 extension would
        # be the same field under a different spec identity.
        return prime_field(2)
    if polynomial is None:
        if m not in DEFAULT_POLYNOMIALS:
            raise FieldError(f"no default generator polynomial for degree {m}")
        polynomial = DEFAULT_POLYNOMIALS[m]
    return _make_field("binary", 1 << m, polynomial)


def field_of_order(q: int, polynomial: int | None = None) -> FieldSpec:
    """GF(q) for q prime or a power of two."""
    if q >= 2 and q & (q - 1) == 0 and q > 2:
        return binary_field(q.bit_length() - 1, polynomial)
    if _is_prime(q):
        if polynomial:
            raise FieldError("prime fields take no generator polynomial")
        return prime_field(q)
    raise FieldError(f"unsupported field order {q} (need a prime or a power of 2)")


def parse_field(descriptor: str) -> FieldSpec:
    """Parse ``gf(5)`` or ``gf(4,0b111)`` into a FieldSpec."""
    m = _DESCRIPTOR_RE.match(descriptor.strip().lower().replace(" ", ""))
    if not m:
        raise FieldError(f"malformed field descriptor {descriptor!r}")
    q = int(m.group(1))
    poly = None
    if m.group(2) is not None:
        poly = int(m.group(2), 0)
    return field_of_order(q, poly)


def smallest_field(min_order: int) -> FieldSpec:
    """Smallest supported field with order >= min_order."""
    q = max(2, min_order)
    while True:
        try:
            return field_of_order(q)
        except FieldError:
            q += 1


GF2 = binary_field(1)
GF3 = prime_field(3)
GF4 = binary_field(2)
GF5 = prime_field(5)
GF7 = prime_field(7)
GF8 = binary_field(3)
GF16 = binary_field(4)
