"""Exact scalar arithmetic shared by every engine.

All measure values, function values and matrix entries in this package are
complex numbers with rational real and imaginary parts, plus a single
``INF`` sentinel for infinite measures.  No floating point enters any
comparison that feeds a verdict; floats only appear in final norm values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class Infinity:
    """Positive infinity for extended nonnegative rational arithmetic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __eq__(self, other):
        return isinstance(other, Infinity)

    def __hash__(self):
        return hash("lorentz_ops.Infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, Infinity)

    def __gt__(self, other):
        return not isinstance(other, Infinity)

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if is_zero_amount(other):
            return Fraction(0)  # measure-theoretic 0 * inf = 0
        return self

    __rmul__ = __mul__


INF = Infinity()

#: Extended nonnegative rational: a ``Fraction`` or ``INF``.
ExtFraction = "Fraction | Infinity"


def is_inf(x) -> bool:
    return isinstance(x, Infinity)


def is_zero_amount(x) -> bool:
    return not isinstance(x, Infinity) and x == 0


def ext_add(a, b):
    if is_inf(a) or is_inf(b):
        return INF
    return a + b


def ext_sum(items):
    total = Fraction(0)
    for x in items:
        if is_inf(x):
            return INF
        total += x
    return total


def as_fraction(x) -> Fraction:
    """Coerce int/str/Fraction to an exact Fraction ('a/b' strings allowed)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class QQi:
    """A complex number with rational real and imaginary parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value, imag=None) -> "QQi":
        if isinstance(value, QQi):
            return value
        re = as_fraction(value)
        im = as_fraction(imag) if imag is not None else Fraction(0)
        return QQi(re, im)

    def __add__(self, other: "QQi") -> "QQi":
        return QQi(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "QQi") -> "QQi":
        return QQi(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "QQi":
        return QQi(-self.re, -self.im)

    def __mul__(self, other: "QQi") -> "QQi":
        return QQi(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: "QQi") -> "QQi":
        d = other.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero complex rational")
        return QQi(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def abs2(self) -> Fraction:
        """|z|^2, an exact rational."""
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


QQI_ZERO = QQi(Fraction(0))
QQI_ONE = QQi(Fraction(1))


def _int_nth_root(n: int, k: int):
    """Exact k-th root of a nonnegative integer, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    if k == 1:
        return n
    if k == 2:
        r = math.isqrt(n)
        return r if r * r == n else None
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def exact_root(x: Fraction, k: int):
    """Exact rational k-th root of a nonnegative rational, or None."""
    if x < 0:
        return None
    rn = _int_nth_root(x.numerator, k)
    rd = _int_nth_root(x.denominator, k)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def exact_pow(base: Fraction, exp: Fraction):
    """base**exp as an exact rational when one exists, else None.

    base must be nonnegative; 0**0 is treated as 1.
    """
    if base < 0:
        raise ValueError("exact_pow expects a nonnegative base")
    if exp == 0:
        return Fraction(1)
    if base == 0:
        return Fraction(0) if exp > 0 else None
    if base == 1:
        return Fraction(1)
    if exp.denominator == 1:
        return base**exp.numerator
    root = exact_root(base, exp.denominator)
    if root is None:
        return None
    return root**exp.numerator


def real_pow(base: Fraction, exp: Fraction) -> float:
    """base**exp as a float, with an exact fast path."""
    exact = exact_pow(base, exp)
    if exact is not None:
        return float(exact)
    return math.exp(float(exp) * math.log(float(base)))
