"""Additive characters Phi_b of Q_p and multiplicative characters nu^alpha * sgn_tau."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .local_field import PAdic, PrecisionError, SquareClass, legendre, sgn_theta

DEFAULT_TOLERANCE = 1e-9


class ComplexValue(complex):
    """A double-precision complex number compared through an explicit tolerance."""

    @property
    def re(self) -> float:
        return self.real

    @property
    def im(self) -> float:
        return self.imag

    def approx_eq(self, other: complex, tol: float = DEFAULT_TOLERANCE) -> bool:
        return abs(complex(self) - complex(other)) <= tol

    def __repr__(self) -> str:
        return f"ComplexValue({self.real!r}, {self.imag!r})"


@dataclass(frozen=True)
class RationalPhase:
    """The root of unity exp(2 pi i * numerator / p**exponent)."""

    numerator: int
    exponent: int
    p: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "numerator", self.numerator % self.p**self.exponent)

    @property
    def denominator(self) -> int:
        return self.p**self.exponent

    def __add__(self, other: "RationalPhase") -> "RationalPhase":
        k = max(self.exponent, other.exponent)
        num = self.numerator * self.p ** (k - self.exponent) + other.numerator * self.p ** (k - other.exponent)
        return RationalPhase(num, k, self.p)

    def __neg__(self) -> "RationalPhase":
        return RationalPhase(-self.numerator, self.exponent, self.p)

    def value(self) -> ComplexValue:
        if self.numerator == 0:
            return ComplexValue(1.0)
        return ComplexValue(cmath.exp(2j * math.pi * self.numerator / self.denominator))


@dataclass(frozen=True)
class AdditiveCharacter:
    """x -> Phi0(scale * x), where Phi0 is the fractional-part character of depth -1."""

    scale: PAdic

    def __post_init__(self) -> None:
        if self.scale.is_zero():
            raise ValueError("the scale of an additive character must be nonzero")

    @property
    def p(self) -> int:
        return self.scale.p

    @property
    def depth(self) -> int:
        return -1 - self.scale.valuation

    def phase(self, x: PAdic) -> RationalPhase:
        y = self.scale * x
        try:
            num, k = y.fractional_phase()
        except PrecisionError as exc:
            raise PrecisionError(f"argument not known modulo the kernel of a depth-{self.depth} character") from exc
        return RationalPhase(num, k, self.p)

    def __call__(self, x: PAdic) -> ComplexValue:
        return self.phase(x).value()

    def shell_numerators(self, coefficient: PAdic, n: int, units: np.ndarray, level: int) -> np.ndarray:
        """Integers N with Phi(coefficient * p**n * w) = exp(2 pi i N / p**level).

        ``units`` holds representatives w of (Z/p**level)^x; ``level`` must be at
        least the number of digits the character sees on that shell.
        """
        y = self.scale * coefficient
        k = -(y.valuation + n)
        if k <= 0:
            return np.zeros_like(units)
        if k > level:
            raise ValueError(f"shell needs {k} digits but level is {level}")
        p = self.p
        mod = p**k
        return (y.unit_mod(k) * units % mod) * p ** (level - k)


def standard_character(p: int, precision: int | None = None) -> AdditiveCharacter:
    """Phi0(x) = exp(2 pi i frac_p(x)), trivial on Z_p but not on p^-1 Z_p."""
    one = PAdic.from_rational(1, p) if precision is None else PAdic.from_rational(1, p, precision)
    return AdditiveCharacter(one)


def twist(phi: AdditiveCharacter, b: PAdic) -> AdditiveCharacter:
    """Phi_b : x -> Phi(b x)."""
    if b.is_zero():
        raise ValueError("cannot twist by zero")
    return AdditiveCharacter(phi.scale * b)


def eval_additive(phi: AdditiveCharacter, x: PAdic) -> ComplexValue:
    return phi(x)


@dataclass(frozen=True)
class ResidueAdditiveCharacter:
    """x -> exp(2 pi i * multiplier * x / p) on Z/p."""

    p: int
    multiplier: int

    def __call__(self, x) -> ComplexValue:
        x = getattr(x, "value", x)
        return RationalPhase(self.multiplier * int(x), 1, self.p).value()


@dataclass(frozen=True)
class ResidueMultiplicativeCharacter:
    """Either the trivial or the quadratic character of (Z/p)^x."""

    p: int
    quadratic: bool

    def __call__(self, x) -> int:
        x = getattr(x, "value", x)
        if int(x) % self.p == 0:
            raise ValueError("multiplicative characters are undefined at 0")
        return legendre(int(x), self.p) if self.quadratic else 1


def residue_character(phi: AdditiveCharacter) -> ResidueAdditiveCharacter:
    """The character of Z/p obtained from the depth-0 twist Phi_{p**depth} on Z_p."""
    # scale * p**depth has valuation -1, so only its leading digit matters.
    return ResidueAdditiveCharacter(phi.p, phi.scale.unit_digit)


@dataclass(frozen=True)
class MultiplicativeCharacter:
    """x -> |x|**alpha * sgn_twist(x)."""

    alpha: Union[complex, float, Fraction]
    twist: SquareClass = SquareClass.ONE

    def __call__(self, x: PAdic) -> ComplexValue:
        return eval_mult(self, x)

    def power_of_q(self, p: int, n: int) -> complex:
        """nu^alpha(p**n) = q**(-alpha * n)."""
        if n == 0:
            return 1.0
        a = self.alpha
        if isinstance(a, (int, Fraction)):
            a = float(a)
        return complex(float(p) ** (-a * n)) if isinstance(a, float) else complex(p) ** (-a * n)

    def at_uniformizer_power(self, p: int, n: int) -> complex:
        """chi(p**n)."""
        sign = 1
        if n % 2:
            if self.twist in (SquareClass.EPS, SquareClass.EPS_PI):
                sign = -sign
            if self.twist in (SquareClass.PI, SquareClass.EPS_PI):
                sign *= legendre(-1, p)
        return sign * self.power_of_q(p, n)

    @property
    def is_ramified(self) -> bool:
        """True when the restriction to units is the quadratic residue character."""
        return self.twist.is_ramified

    def residue_part(self, p: int) -> ResidueMultiplicativeCharacter:
        return ResidueMultiplicativeCharacter(p, self.is_ramified)

    def inverse(self) -> "MultiplicativeCharacter":
        return MultiplicativeCharacter(-self.alpha, self.twist)

    def times_sgn(self, tau: SquareClass) -> "MultiplicativeCharacter":
        return MultiplicativeCharacter(self.alpha, self.twist * tau)

    def is_trivial(self) -> bool:
        return self.alpha == 0 and self.twist is SquareClass.ONE


def eval_mult(chi: MultiplicativeCharacter, x: PAdic) -> ComplexValue:
    if x.is_zero():
        raise ValueError("multiplicative characters are undefined at 0")
    return ComplexValue(chi.power_of_q(x.p, x.valuation) * sgn_theta(chi.twist, x))


HALF = Fraction(1, 2)

_TWIST_NAMES = {
    "": SquareClass.ONE,
    "-sgn-eps": SquareClass.EPS,
    "-sgn-pi": SquareClass.PI,
    "-sgn-eps-pi": SquareClass.EPS_PI,
}
_EXPONENT_NAMES = {"nu-half": HALF, "nu-minus-half": -HALF, "nu-one": Fraction(1), "nu-zero": Fraction(0)}


def character_names() -> list[str]:
    return [e + t for e in _EXPONENT_NAMES for t in _TWIST_NAMES]


def parse_character(name: str) -> MultiplicativeCharacter:
    """Parse names such as ``nu-half``, ``nu-half-sgn-pi`` or ``nu-minus-half-sgn-eps``."""
    for prefix, alpha in sorted(_EXPONENT_NAMES.items(), key=lambda kv: -len(kv[0])):
        if name.startswith(prefix) and name[len(prefix):] in _TWIST_NAMES:
            return MultiplicativeCharacter(alpha, _TWIST_NAMES[name[len(prefix):]])
    raise ValueError(f"unknown character {name!r}; expected one of {', '.join(character_names())}")
