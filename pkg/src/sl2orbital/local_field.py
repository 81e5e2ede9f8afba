"""Truncated p-adic arithmetic, residue-field helpers and square classes.

A nonzero :class:`PAdic` is ``p**valuation * mantissa`` where the mantissa is a
unit known modulo ``p**precision``.  Exact zero has infinite valuation.  Every
operation tracks how many digits survive; running out of digits raises
:class:`PrecisionError` instead of silently truncating.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

DEFAULT_PRECISION = 24

Rational = Union[int, Fraction]


class PrecisionError(ArithmeticError):
    """Raised when an operation would leave fewer than one known digit."""


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    return all(p % f for f in range(3, math.isqrt(p) + 1, 2))


def _check_prime(p: int) -> None:
    if not is_odd_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")


def legendre(u: Union[int, "ResidueElement"], p: Optional[int] = None) -> int:
    """Quadratic character of the residue field, extended by 0 at 0."""
    if isinstance(u, ResidueElement):
        u, p = u.value, u.p
    if p is None:
        raise TypeError("p is required for integer input")
    u %= p
    if u == 0:
        return 0
    return 1 if pow(u, (p - 1) // 2, p) == 1 else -1


@lru_cache(maxsize=None)
def smallest_nonresidue(p: int) -> int:
    _check_prime(p)
    return next(e for e in range(2, p) if legendre(e, p) == -1)


@dataclass(frozen=True)
class ResidueElement:
    """An element of the residue field Z/p."""

    value: int
    p: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> "ResidueElement":
        if isinstance(other, ResidueElement):
            if other.p != self.p:
                raise ValueError("residue fields differ")
            return other
        return ResidueElement(int(other), self.p)

    def __add__(self, other) -> "ResidueElement":
        return ResidueElement(self.value + self._coerce(other).value, self.p)

    __radd__ = __add__

    def __sub__(self, other) -> "ResidueElement":
        return ResidueElement(self.value - self._coerce(other).value, self.p)

    def __mul__(self, other) -> "ResidueElement":
        return ResidueElement(self.value * self._coerce(other).value, self.p)

    __rmul__ = __mul__

    def __neg__(self) -> "ResidueElement":
        return ResidueElement(-self.value, self.p)

    def inverse(self) -> "ResidueElement":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in the residue field")
        return ResidueElement(pow(self.value, -1, self.p), self.p)

    def __bool__(self) -> bool:
        return self.value != 0


class SquareClass(enum.Enum):
    """The four classes of k^x/(k^x)^2, labelled by (odd valuation, non-residue unit)."""

    ONE = (0, 0)
    EPS = (0, 1)
    PI = (1, 0)
    EPS_PI = (1, 1)

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        a, b = self.value
        c, d = other.value
        return SquareClass((a ^ c, b ^ d))

    @property
    def is_ramified(self) -> bool:
        return self.value[0] == 1


@dataclass(frozen=True, eq=False)
class PAdic:
    """A p-adic number ``p**valuation * mantissa`` with ``precision`` known digits."""

    p: int
    valuation: Union[int, float]
    mantissa: int
    precision: int

    # -- construction -------------------------------------------------------
    @classmethod
    def zero(cls, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        return cls(p, math.inf, 0, precision)

    @classmethod
    def from_rational(cls, x: Rational, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, precision)
        num, den = x.numerator, x.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = p**precision
        return cls(p, v, num * pow(den, -1, mod) % mod, precision)

    @classmethod
    def from_parts(cls, unit: int, exponent: int, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        """The element ``unit * p**exponent``; ``unit`` must be prime to p."""
        if unit % p == 0:
            raise ValueError(f"{unit} is not a unit modulo {p}")
        return cls(p, exponent, unit % p**precision, precision)

    def _lift(self, other) -> "PAdic":
        if isinstance(other, PAdic):
            if other.p != self.p:
                raise ValueError("cannot combine p-adic numbers for different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PAdic.from_rational(other, self.p, self.precision)
        return NotImplemented

    # -- inspection ----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.valuation == math.inf

    @property
    def absolute_precision(self) -> Union[int, float]:
        return self.valuation + self.precision

    @property
    def unit_digit(self) -> int:
        """Leading digit: the mantissa modulo p (0 for zero)."""
        return self.mantissa % self.p

    def unit_mod(self, k: int) -> int:
        """The mantissa modulo p**k; requires k known digits."""
        if self.is_zero():
            raise ValueError("zero has no unit part")
        if k > self.precision:
            raise PrecisionError(f"need {k} digits, only {self.precision} known")
        return self.mantissa % self.p**k

    def fractional_phase(self) -> tuple[int, int]:
        """Return (numerator, k) with x congruent to numerator/p**k modulo Z_p."""
        if self.is_zero() or self.valuation >= 0:
            return 0, 0
        k = -self.valuation
        if self.absolute_precision < 0:
            raise PrecisionError("fractional part is not determined at this precision")
        return self.mantissa % self.p**k, k

    def to_fraction(self) -> Fraction:
        """Rational approximation using the centred lift of the mantissa."""
        if self.is_zero():
            return Fraction(0)
        mod = self.p**self.precision
        m = self.mantissa if self.mantissa <= mod // 2 else self.mantissa - mod
        return Fraction(m) * Fraction(self.p) ** self.valuation

    def abs(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.p) ** (-self.valuation)

    # -- arithmetic ----------------------------------------------------------
    def __neg__(self) -> "PAdic":
        if self.is_zero():
            return self
        mod = self.p**self.precision
        return PAdic(self.p, self.valuation, (-self.mantissa) % mod, self.precision)

    def __add__(self, other) -> "PAdic":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        absprec = min(self.absolute_precision, other.absolute_precision)
        v = min(self.valuation, other.valuation)
        width = absprec - v
        p = self.p
        total = (self.mantissa * p ** (self.valuation - v) + other.mantissa * p ** (other.valuation - v)) % p**width
        if total == 0:
            raise PrecisionError("cancellation consumed every known digit")
        shift = 0
        while total % p == 0:
            total //= p
            shift += 1
        prec = width - shift
        return PAdic(p, v + shift, total % p**prec, prec)

    __radd__ = __add__

    def __sub__(self, other) -> "PAdic":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "PAdic":
        return self._lift(other) - self

    def __mul__(self, other) -> "PAdic":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return PAdic.zero(self.p, min(self.precision, other.precision))
        prec = min(self.precision, other.precision)
        return PAdic(self.p, self.valuation + other.valuation, self.mantissa * other.mantissa % self.p**prec, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PAdic":
        if self.is_zero():
            raise ZeroDivisionError("p-adic zero has no inverse")
        mod = self.p**self.precision
        return PAdic(self.p, -self.valuation, pow(self.mantissa, -1, mod), self.precision)

    def __truediv__(self, other) -> "PAdic":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other) -> "PAdic":
        return self._lift(other) * self.inverse()

    def __pow__(self, n: int) -> "PAdic":
        if n < 0:
            return self.inverse() ** (-n)
        if self.is_zero():
            return self if n else PAdic.from_rational(1, self.p, self.precision)
        mod = self.p**self.precision
        return PAdic(self.p, self.valuation * n, pow(self.mantissa, n, mod), self.precision)

    # -- comparison ----------------------------------------------------------
    def __eq__(self, other) -> bool:
        other = self._lift(other) if not isinstance(other, PAdic) else other
        if other is NotImplemented or other.p != self.p:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.valuation != other.valuation:
            return False
        k = min(self.precision, other.precision)
        return (self.mantissa - other.mantissa) % self.p**k == 0

    def __hash__(self) -> int:
        return hash((self.p, self.valuation, self.unit_digit))

    def __repr__(self) -> str:
        if self.is_zero():
            return f"PAdic(0, p={self.p})"
        return f"PAdic({self.to_fraction()}, p={self.p}, prec={self.precision})"


def valuation(x: PAdic) -> Union[int, float]:
    return x.valuation


def square_class(x: PAdic) -> SquareClass:
    if x.is_zero():
        raise ValueError("zero has no square class")
    return SquareClass((x.valuation % 2, 0 if legendre(x.unit_digit, x.p) == 1 else 1))


def sgn_theta(tau: SquareClass, x: PAdic) -> int:
    """Quadratic character of k^x whose kernel is the norm group of k(sqrt(tau))."""
    if x.is_zero():
        raise ValueError("sgn is undefined at zero")
    odd = x.valuation % 2
    value = 1
    if tau in (SquareClass.EPS, SquareClass.EPS_PI) and odd:
        value = -value
    if tau in (SquareClass.PI, SquareClass.EPS_PI):
        value *= legendre(x.unit_digit, x.p) * (legendre(-1, x.p) if odd else 1)
    return value


def cayley(X: PAdic) -> PAdic:
    """The map X -> (1 + X)(1 - X)^-1."""
    if X.valuation == 0 and X.unit_mod(X.precision) == 1:
        raise ValueError("cayley has a pole at X = 1")
    return (1 + X) / (1 - X)


def cayley_inv(x: PAdic) -> PAdic:
    """Inverse of :func:`cayley`: x -> (x - 1)(x + 1)^-1."""
    if x.valuation == 0 and (x.mantissa + 1) % x.p**x.precision == 0:
        raise ValueError("cayley_inv has a pole at x = -1")
    return (x - 1) / (x + 1)


def sqrt_in_field(x: PAdic) -> Optional[PAdic]:
    """A square root of x in Q_p, or None if x is not a square.

    Of the two roots the one with the smaller lowest mantissa digit is returned.
    """
    if x.is_zero():
        raise ValueError("sqrt_in_field expects a nonzero input")
    if square_class(x) is not SquareClass.ONE:
        return None
    p, n = x.p, x.precision
    a = x.mantissa
    r = next(c for c in range(1, p) if (c * c - a) % p == 0)
    r = min(r, p - r)
    # Newton iteration doubles the number of correct digits each step.
    k = 1
    while k < n:
        k = min(2 * k, n)
        mod = p**k
        r = (r - (r * r - a) * pow(2 * r, -1, mod)) % mod
    return PAdic(p, x.valuation // 2, r, n)


@dataclass(frozen=True)
class LocalField:
    """Q_p with a fixed working precision and a fixed unit non-residue."""

    p: int
    precision: int = DEFAULT_PRECISION
    epsilon: Optional[int] = None

    def __post_init__(self) -> None:
        _check_prime(self.p)
        if self.precision < 1:
            raise ValueError("precision must be positive")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", smallest_nonresidue(self.p))
        elif legendre(self.epsilon, self.p) != -1:
            raise ValueError(f"{self.epsilon} is not a quadratic non-residue modulo {self.p}")

    @property
    def q(self) -> int:
        return self.p

    def element(self, x: Rational) -> PAdic:
        return PAdic.from_rational(x, self.p, self.precision)

    def from_parts(self, unit: int, exponent: int) -> PAdic:
        return PAdic.from_parts(unit, exponent, self.p, self.precision)

    @property
    def eps(self) -> PAdic:
        return self.element(self.epsilon)

    @property
    def uniformizer(self) -> PAdic:
        return self.element(self.p)

    def representative(self, cls: SquareClass) -> PAdic:
        """The standard representative 1, eps, p or eps*p of a square class."""
        return {
            SquareClass.ONE: self.element(1),
            SquareClass.EPS: self.eps,
            SquareClass.PI: self.uniformizer,
            SquareClass.EPS_PI: self.eps * self.uniformizer,
        }[cls]
