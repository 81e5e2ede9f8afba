"""Regular semisimple elements X* = beta*sqrt(theta), Y = s*sqrt(theta') and their invariants."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .characters import AdditiveCharacter, ComplexValue, twist
from .exp_sums import gauss_sum
from .local_field import PAdic, SquareClass, sgn_theta, sqrt_in_field, square_class


class TorusType(enum.Enum):
    SPLIT = "split"
    UNRAMIFIED = "unramified"
    RAMIFIED = "ramified"


def classify_torus(theta: PAdic) -> TorusType:
    cls = square_class(theta)
    if cls is SquareClass.ONE:
        return TorusType.SPLIT
    if cls is SquareClass.EPS:
        return TorusType.UNRAMIFIED
    return TorusType.RAMIFIED


def weyl_order(theta: PAdic) -> int:
    """Order of the rational Weyl group of the torus T_theta."""
    minus_one = PAdic.from_rational(-1, theta.p)
    return 2 if sgn_theta(square_class(theta), minus_one) == 1 else 1


def stably_conjugate(theta: PAdic, theta_prime: PAdic) -> bool:
    return square_class(theta) is square_class(theta_prime)


def transport_root(theta: PAdic, theta_prime: PAdic) -> Optional[PAdic]:
    """Some x with theta' = x^2 theta, or None when the tori are not stably conjugate."""
    if not stably_conjugate(theta, theta_prime):
        return None
    return _rational_sqrt(theta_prime / theta)


def rationally_conjugate(theta: PAdic, theta_prime: PAdic) -> bool:
    """T_theta and T_theta' are SL2(k)-conjugate iff theta'/theta = x^2 with x or -x a norm."""
    x = transport_root(theta, theta_prime)
    if x is None:
        return False
    cls = square_class(theta)
    return sgn_theta(cls, x) == 1 or sgn_theta(cls, -x) == 1


def _rational_sqrt(x: PAdic) -> Optional[PAdic]:
    """Square root preferring the positive root of an exact rational square."""
    approx = x.to_fraction()
    num, den = approx.numerator, approx.denominator
    if num > 0:
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn == num and rd * rd == den:
            return PAdic.from_rational(Fraction(rn, rd), x.p, x.precision)
    return sqrt_in_field(x)


@dataclass(frozen=True)
class DualElement:
    """X* = beta * sqrt(theta) in the dual of the Lie algebra, with the character Phi."""

    beta: PAdic
    theta: PAdic
    phi: AdditiveCharacter

    def __post_init__(self) -> None:
        if self.beta.is_zero() or self.theta.is_zero():
            raise ValueError("beta and theta must be nonzero")

    @property
    def p(self) -> int:
        return self.beta.p

    @property
    def torus_type(self) -> TorusType:
        return classify_torus(self.theta)

    @property
    def square_class(self) -> SquareClass:
        return square_class(self.theta)

    @property
    def phidot(self) -> AdditiveCharacter:
        """The character Phi_beta that carries all dependence on beta."""
        return twist(self.phi, self.beta)

    @property
    def scaled_depth(self) -> int:
        """d = depth(Phi) - ord(beta)."""
        return self.phi.depth - self.beta.valuation

    @property
    def twice_depth(self) -> int:
        """2 * depth(X*) = -2r = ord(theta) - 2d."""
        return self.theta.valuation - 2 * self.scaled_depth

    @property
    def r(self) -> Fraction:
        return Fraction(-self.twice_depth, 2)

    @property
    def h(self) -> Fraction:
        return self.r + Fraction(1, 2)

    @property
    def weyl_order(self) -> int:
        return weyl_order(self.theta)


@dataclass(frozen=True)
class AlgebraElement:
    """Y = s * sqrt(theta') in the Lie algebra."""

    s: PAdic
    theta_prime: PAdic

    def __post_init__(self) -> None:
        if self.s.is_zero() or self.theta_prime.is_zero():
            raise ValueError("s and theta' must be nonzero")

    @property
    def p(self) -> int:
        return self.s.p

    @property
    def twice_depth(self) -> int:
        """2 * depth(Y) = ord(s^2 theta')."""
        return 2 * self.s.valuation + self.theta_prime.valuation

    @property
    def discriminant(self) -> PAdic:
        return 4 * self.s * self.s * self.theta_prime

    @property
    def abs_disc_inv_sqrt(self) -> float:
        """|D(Y)|^-1/2 = q^{ord(D)/2}."""
        return float(self.p) ** (self.discriminant.valuation / 2)

    @property
    def square_class(self) -> SquareClass:
        return square_class(self.theta_prime)


def gamma_un(x_star: DualElement, s: PAdic) -> int:
    """(-1)^{d+1} sgn_eps(s)."""
    return (-1) ** ((x_star.scaled_depth + 1) % 2) * sgn_theta(SquareClass.EPS, s)


def gamma_ram(x_star: DualElement, s: PAdic, perturb: bool = False) -> ComplexValue:
    """sgn_p(-s) G_p(Phidot); ``perturb`` flips the Gauss-sum sign (harness canary)."""
    g = gauss_sum(PAdic.from_rational(x_star.p, x_star.p), x_star.phidot)
    if perturb:
        g = -g
    return ComplexValue(sgn_theta(SquareClass.PI, -s) * g)


def gamma_wald(x_star: DualElement, y: AlgebraElement, perturb: bool = False) -> ComplexValue:
    """The fourth root of unity attached to (X*, Y); 1 for elliptic X* against split Y, 0 if not stable."""
    cls, cls_y = x_star.square_class, y.square_class
    if cls is not SquareClass.ONE and cls_y is SquareClass.ONE:
        return ComplexValue(1)
    if cls is not cls_y:
        return ComplexValue(0)
    if cls is SquareClass.ONE:
        return ComplexValue(1)
    if cls is SquareClass.EPS:
        return ComplexValue(gamma_un(x_star, y.s))
    if cls is SquareClass.PI:
        return gamma_ram(x_star, y.s, perturb)
    return ComplexValue(-gamma_un(x_star, y.s) * gamma_ram(x_star, y.s, perturb))


def c0(x_star: DualElement) -> Fraction:
    """Coefficient of the trivial nilpotent orbit: -2/q, -1/q or -(q+1)/(2q^2)."""
    q = x_star.p
    return {
        TorusType.SPLIT: Fraction(-2, q),
        TorusType.UNRAMIFIED: Fraction(-1, q),
        TorusType.RAMIFIED: Fraction(-(q + 1), 2 * q * q),
    }[x_star.torus_type]


def uv_m(x_star: DualElement, y: AlgebraElement) -> tuple[PAdic, PAdic, int]:
    """u = p^{-(d+1)} s theta', v = p^{-(d+1)} s theta and m = -ord(uv)."""
    p = x_star.p
    shift = PAdic.from_rational(p, p, x_star.beta.precision) ** (-(x_star.scaled_depth + 1))
    u = shift * y.s * y.theta_prime
    v = shift * y.s * x_star.theta
    return u, v, -(u.valuation + v.valuation)


def gl2_reduce(x_star: DualElement, field_reps: dict[SquareClass, PAdic]) -> tuple[DualElement, PAdic]:
    """Transport X* by g_b = diag(1, b) so that theta becomes a standard representative.

    Returns (Ad*(g_b) X*, b) with Ad*(g_b)(beta sqrt(theta)) = (beta/b) sqrt(b^2 theta).
    Only the classes of 1, eps and p are handled; the eps*p class needs a change of
    uniformiser instead.
    """
    cls = x_star.square_class
    if cls is SquareClass.EPS_PI:
        raise ValueError("theta in the class of eps*p cannot be moved to {1, eps, p} by GL2 transport")
    rep = field_reps[cls]
    if x_star.theta == rep:
        return x_star, PAdic.from_rational(1, x_star.p, x_star.beta.precision)
    x = _rational_sqrt(x_star.theta / rep)
    b = x.inverse()
    return DualElement(x_star.beta / b, rep, x_star.phi), b


def transport_algebra(y: AlgebraElement, b: PAdic) -> AlgebraElement:
    """Ad(g_b)(s sqrt(theta')) = (s/b) sqrt(b^2 theta')."""
    return AlgebraElement(y.s / b, b * b * y.theta_prime)
