"""Exact dyadic rationals ``num * 2**-exp``.

Measures of dyadic intervals, Carleson sums and integrals of dyadic step
functions all live in this ring, so they can be compared without rounding.
Division by anything other than a power of two leaves the ring and returns
a :class:`fractions.Fraction`.
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Union

_TEXT = re.compile(r"^\s*(-?\d+)\s*(?:/\s*2\^(\d+))?\s*$")

Number = Union[int, Fraction, "DyadicRational"]


def _trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


class DyadicRational:
    __slots__ = ("num", "exp")

    def __init__(self, num: int = 0, exp: int = 0):
        if exp < 0:
            num, exp = num << -exp, 0
        if num == 0:
            exp = 0
        elif exp:
            shift = min(_trailing_zeros(num), exp)
            num >>= shift
            exp -= shift
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicRational is immutable")

    # -- conversions -------------------------------------------------------
    @classmethod
    def coerce(cls, value) -> "DyadicRational":
        if isinstance(value, DyadicRational):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, float):
            return cls.from_float(value)
        if isinstance(value, Rational):
            den = value.denominator
            if den & (den - 1):
                raise ValueError(f"{value} is not a dyadic rational")
            return cls(value.numerator, den.bit_length() - 1)
        raise TypeError(f"cannot convert {type(value).__name__} to DyadicRational")

    @classmethod
    def from_float(cls, x: float) -> "DyadicRational":
        num, den = float(x).as_integer_ratio()
        return cls(num, den.bit_length() - 1)

    @classmethod
    def pow2(cls, k: int) -> "DyadicRational":
        """Return ``2**k`` for any integer ``k``."""
        return cls(1, -k)

    @classmethod
    def parse(cls, text: str) -> "DyadicRational":
        m = _TEXT.match(text)
        if not m:
            raise ValueError(f"not a dyadic rational string: {text!r}")
        return cls(int(m.group(1)), int(m.group(2) or 0))

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        return self.num / (1 << self.exp) if self.exp < 1000 else float(self.as_fraction())

    def __str__(self) -> str:
        return f"{self.num}/2^{self.exp}"

    def __repr__(self) -> str:
        return f"DyadicRational({self.num}, {self.exp})"

    # -- arithmetic --------------------------------------------------------
    def _align(self, other: "DyadicRational") -> tuple[int, int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other):
        if isinstance(other, Fraction) and not _is_dyadic(other):
            return self.as_fraction() + other
        try:
            other = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, e = self._align(other)
        return DyadicRational(a + b, e)

    __radd__ = __add__

    def __neg__(self):
        return DyadicRational(-self.num, self.exp)

    def __pos__(self):
        return self

    def __abs__(self):
        return DyadicRational(abs(self.num), self.exp)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Fraction) and not _is_dyadic(other):
            return self.as_fraction() * other
        try:
            other = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        return DyadicRational(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, float):
            return NotImplemented
        other_f = Fraction(other) if not isinstance(other, DyadicRational) else other.as_fraction()
        if other_f == 0:
            raise ZeroDivisionError("division by zero")
        num, den = abs(other_f.numerator), other_f.denominator
        if num & (num - 1) == 0:
            sign = -1 if other_f < 0 else 1
            k = num.bit_length() - 1
            return DyadicRational(sign * self.num * den, self.exp + k)
        return self.as_fraction() / other_f

    def __rtruediv__(self, other):
        return DyadicRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        return DyadicRational(self.num ** k, self.exp * k)

    # -- comparison --------------------------------------------------------
    def _cmp(self, other) -> int:
        if isinstance(other, float):
            other = DyadicRational.from_float(other)
        if isinstance(other, DyadicRational):
            a, b, _ = self._align(other)
            return (a > b) - (a < b)
        if isinstance(other, Rational):
            lhs = self.num * other.denominator
            rhs = other.numerator << self.exp
            return (lhs > rhs) - (lhs < rhs)
        raise TypeError

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        try:
            return self._cmp(other) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other):
        try:
            return self._cmp(other) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other):
        try:
            return self._cmp(other) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other):
        try:
            return self._cmp(other) >= 0
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self.exp == 0:
            return hash(self.num)
        return hash(self.as_fraction())

    def __bool__(self):
        return self.num != 0


def _is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def format_exact(value) -> str:
    """Serialise an exact value: dyadics as ``num/2^e``, other rationals as ``p/q``."""
    if isinstance(value, DyadicRational):
        return str(value)
    if isinstance(value, Rational):
        q = Fraction(value)
        if _is_dyadic(q):
            return str(DyadicRational.coerce(q))
        return f"{q.numerator}/{q.denominator}"
    raise TypeError(f"not an exact value: {value!r}")


def parse_exact(text: str) -> Union[DyadicRational, Fraction]:
    if "^" in text or "/" not in text:
        return DyadicRational.parse(text)
    return Fraction(text)


ZERO = DyadicRational(0)
ONE = DyadicRational(1)
