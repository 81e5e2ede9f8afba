"""Gauss sums, twisted Kloosterman sums, Gamma-factors and Shalika's H function.

Gamma-factors and the quadratic integrals behind H are evaluated straight from
their principal-value definitions: a finite set of oscillating shells summed
exactly, plus a geometric tail in closed form.  Shells known to vanish by
orthogonality are still evaluated at the window edges and checked.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache
from typing import Callable

from ._shells import phase_sum, unit_table
from .characters import (
    AdditiveCharacter,
    ComplexValue,
    MultiplicativeCharacter,
    ResidueAdditiveCharacter,
    twist,
)
from .local_field import PAdic, ResidueElement, SquareClass, legendre, sgn_theta

BOUNDARY_TOL = 1e-12
GUARD_SHELLS = 2


class WindowError(AssertionError):
    """A shell outside the analytic window did not vanish."""


def check_vanishing_shell(value: complex, where: str, mass: float = 1.0) -> None:
    """``mass`` is the trivial bound for the shell (the measure it carries), so rounding scales with it."""
    if abs(value) > BOUNDARY_TOL * max(1.0, mass):
        raise WindowError(f"{where}: expected an exactly vanishing shell, got {value!r}")


@lru_cache(maxsize=None)
def quadratic_residue_sum(p: int, a: int) -> complex:
    """sum over X in Z/p of exp(2 pi i a X^2 / p)."""
    return sum(cmath.exp(2j * math.pi * (a * x * x % p) / p) for x in range(p))


@lru_cache(maxsize=None)
def finite_field_gauss_sum(p: int, a: int) -> complex:
    """sum over X in (Z/p)^x of legendre(X) exp(2 pi i a X / p)."""
    return sum(legendre(x, p) * cmath.exp(2j * math.pi * (a * x % p) / p) for x in range(1, p))


def gauss_sum(uniformizer: PAdic, phi: AdditiveCharacter) -> ComplexValue:
    """q^-1/2 * sum over X in O/p of Phi_{(-uniformizer)^depth}(X^2)."""
    if uniformizer.valuation != 1:
        raise ValueError("gauss_sum needs an element of valuation 1")
    p = phi.p
    c = phi.scale * (-uniformizer) ** phi.depth
    # c has valuation exactly -1, so Phi0(c X^2) only sees the leading digit.
    return ComplexValue(quadratic_residue_sum(p, c.unit_digit) / math.sqrt(p))


def residue_gauss_sum(phi_bar: ResidueAdditiveCharacter) -> complex:
    """sum over X in (Z/p)^x of Phibar(X) legendre(X)."""
    return finite_field_gauss_sum(phi_bar.p, phi_bar.multiplier % phi_bar.p)


def kloosterman(chi_bar: Callable, phi_bar: ResidueAdditiveCharacter, xi: ResidueElement) -> ComplexValue:
    """sum over x in (Z/p)^x of Phibar(x + xi/x) chibar(x)."""
    p = xi.p
    if xi.value == 0:
        raise ValueError("the Kloosterman parameter must be nonzero")
    total = 0j
    for x in range(1, p):
        total += phi_bar((x + xi.value * pow(x, -1, p)) % p) * chi_bar(x)
    return ComplexValue(total)


def kloosterman_closed(quadratic: bool, phi_bar: ResidueAdditiveCharacter, xi: ResidueElement) -> ComplexValue:
    """Closed forms of the trivially and quadratically twisted Kloosterman sums.

    Untwisted:  sum over c with c^2 != xi of Phibar(2c) legendre(c^2 - xi).
    Quadratic (Salie): legendre(xi) * G(legendre, Phibar) * sum over c^2 = xi of Phibar(2c).
    """
    p = xi.p
    if xi.value == 0:
        raise ValueError("the Kloosterman parameter must be nonzero")
    if not quadratic:
        return ComplexValue(
            sum(phi_bar(2 * c) * legendre(c * c - xi.value, p) for c in range(p) if (c * c - xi.value) % p)
        )
    roots = [c for c in range(1, p) if (c * c - xi.value) % p == 0]
    return ComplexValue(legendre(xi.value, p) * residue_gauss_sum(phi_bar) * sum(phi_bar(2 * c) for c in roots))


def gamma_factor(chi: MultiplicativeCharacter, phi: AdditiveCharacter) -> ComplexValue:
    """Principal-value integral of Phi(x) chi(x) d^x x for chi of conductor at most p.

    Shell n (x = p^n w) oscillates at level depth - n.  Shells with n < depth
    vanish; shells with n > depth are constant in the additive variable and
    form a geometric series, summed in closed form (this is the analytic
    continuation when the series diverges).
    """
    if chi.is_trivial():
        raise ValueError("the Gamma-factor of the trivial character is not defined")
    p, dep = phi.p, phi.depth
    total = 0j
    for n in range(dep - GUARD_SHELLS, dep + 1):
        level = dep - n + 1
        w, _, leg = unit_table(p, level)
        nums = phi.shell_numerators(PAdic.from_rational(1, p), n, w, level)
        weights = leg if chi.is_ramified else None
        shell = chi.at_uniformizer_power(p, n) * phase_sum(nums, p, level, weights) / p**level
        if n < dep:
            check_vanishing_shell(shell, f"gamma_factor shell {n}", abs(chi.at_uniformizer_power(p, n)))
        else:
            total += shell
    if not chi.is_ramified:
        ratio = chi.at_uniformizer_power(p, 1)
        if abs(ratio - 1) < 1e-15:
            raise ValueError("character is trivial on k^x")
        total += (1 - 1 / p) * chi.at_uniformizer_power(p, dep + 1) / (1 - ratio)
    return ComplexValue(total)


def normalized_gamma_factor(chi: MultiplicativeCharacter, phi: AdditiveCharacter) -> ComplexValue:
    """Gamma-factor taken against the depth -1 character Phi_{p^(depth+1)} attached to Phi."""
    p = phi.p
    return gamma_factor(chi, twist(phi, PAdic.from_rational(p, p, phi.scale.precision) ** (phi.depth + 1)))


def quadratic_integral(phi: AdditiveCharacter, coefficient: PAdic) -> ComplexValue:
    """Principal-value integral of Phi(c t^2) dt for the Haar measure giving Z_p measure 1.

    Shell j (t = p^j z) oscillates at level D - 2j where D is the depth of Phi_c.
    Levels >= 1 vanish, level 0 is a Gauss-type shell, and all deeper shells
    add up to the closed tail p^-j0.
    """
    p = phi.p
    psi = twist(phi, coefficient)
    depth = psi.depth
    j0 = -((-(depth + 1)) // 2)  # ceil((depth + 1) / 2): first shell where psi is trivial
    total = complex(float(p) ** (-j0))
    one = PAdic.from_rational(1, p)
    for j in range(j0 - 1, j0 - 2 - GUARD_SHELLS, -1):
        level = depth - 2 * j + 1
        w, _, _ = unit_table(p, level)
        nums = psi.shell_numerators(one, 2 * j, w * w % p**level, level)
        shell = phase_sum(nums, p, level) * float(p) ** (-j) / p**level
        if level - 1 >= 1:
            check_vanishing_shell(shell, f"quadratic_integral shell {j}", float(p) ** (-j))
        else:
            total += shell
    return ComplexValue(total)


def shalika_h(phidot: AdditiveCharacter, b: PAdic) -> ComplexValue:
    """|b|^-1/2 * (sgn_p(b) G_p(Phidot) if depth - ord(b) is even, else 1)."""
    if b.is_zero():
        raise ValueError("H is undefined at zero")
    p = phidot.p
    scale = float(p) ** (b.valuation / 2)
    if (phidot.depth - b.valuation) % 2 == 0:
        g = gauss_sum(PAdic.from_rational(p, p), phidot)
        return ComplexValue(scale * sgn_theta(SquareClass.PI, b) * g)
    return ComplexValue(scale)


def shalika_h_oracle(phidot: AdditiveCharacter, b: PAdic) -> ComplexValue:
    """H(Phidot, b) from the quadratic integral, using dt = q^{-(d+1)/2} d_Phidot t."""
    p = phidot.p
    return ComplexValue(float(p) ** ((phidot.depth + 1) / 2) * quadratic_integral(phidot, b))
