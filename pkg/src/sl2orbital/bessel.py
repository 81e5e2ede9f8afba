"""p-adic Bessel functions J_chi(u, v) = PV integral of Phi(u x + v/x) chi(x) d^x x.

Two independent evaluators live here.  :func:`bessel_oracle` sums the defining
integral shell by shell and never consults a closed form.  :func:`bessel_closed`
dispatches on m = -ord(uv) to the Gamma-factor, Kloosterman and shallow
formulas.  The additive character must have depth -1 throughout.
"""

from __future__ import annotations

import math

from ._shells import MAX_SHELL_TERMS, phase_sum, unit_table
from .characters import (
    AdditiveCharacter,
    ComplexValue,
    MultiplicativeCharacter,
    residue_character,
)
from .exp_sums import GUARD_SHELLS, check_vanishing_shell, gamma_factor, gauss_sum, kloosterman
from .local_field import PAdic, ResidueElement, SquareClass, sgn_theta, sqrt_in_field


def _require_depth_minus_one(phi: AdditiveCharacter) -> None:
    if phi.depth != -1:
        raise ValueError(f"Bessel functions use a depth -1 character, got depth {phi.depth}")


def bessel_m(u: PAdic, v: PAdic) -> int:
    if u.is_zero() or v.is_zero():
        raise ValueError("Bessel arguments must be nonzero")
    return -(u.valuation + v.valuation)


def _shell(chi: MultiplicativeCharacter, u: PAdic, v: PAdic, phi: AdditiveCharacter, n: int) -> complex:
    """Integral over ord(x) = n, as an exact sum over (Z/p^K)^x."""
    p = phi.p
    level_u = -1 - u.valuation - n
    level_v = -1 - v.valuation + n
    level = max(1, level_u + 1, level_v + 1)
    w, inv, leg = unit_table(p, level)
    nums = phi.shell_numerators(u, n, w, level) + phi.shell_numerators(v, -n, inv, level)
    weights = leg if chi.is_ramified else None
    return chi.at_uniformizer_power(p, n) * phase_sum(nums, p, level, weights) / p**level


def _shell_vanishes(u: PAdic, v: PAdic, n: int) -> bool:
    """Orthogonality: one term oscillates strictly faster than the other, at level >= 1."""
    a = -1 - u.valuation - n
    b = -1 - v.valuation + n
    return a >= max(1, b + 1) or b >= max(1, a + 1)


def bessel_oracle(chi: MultiplicativeCharacter, u: PAdic, v: PAdic, phi: AdditiveCharacter) -> ComplexValue:
    """Literal shell sum of the defining principal-value integral.

    Non-vanishing shells are those where both terms are trivial on the shell
    (n between -1 - ord u and 1 + ord v) or oscillate at the same level
    (n = (ord v - ord u) / 2).  Guard shells beyond that range are evaluated
    and must vanish.
    """
    _require_depth_minus_one(phi)
    bessel_m(u, v)
    p = phi.p
    centre = (v.valuation - u.valuation) / 2
    lo = min(-1 - u.valuation, math.floor(centre)) - GUARD_SHELLS
    hi = max(1 + v.valuation, math.ceil(centre)) + GUARD_SHELLS
    total = 0j
    for n in range(lo, hi + 1):
        vanishes = _shell_vanishes(u, v, n)
        level = max(1, -u.valuation - n, -v.valuation + n)
        if vanishes and p**level > MAX_SHELL_TERMS:
            continue
        shell = _shell(chi, u, v, phi, n)
        if vanishes:
            check_vanishing_shell(shell, f"Bessel shell {n}", abs(chi.at_uniformizer_power(p, n)))
        else:
            total += shell
    return ComplexValue(total)


def f_chi(chi: MultiplicativeCharacter, halfm: int, uv: PAdic, phi: AdditiveCharacter) -> ComplexValue:
    """Single-shell integral over ord(x) = -m/2 of Phi(x + uv/x) chi(x) d^x x."""
    _require_depth_minus_one(phi)
    if halfm < 1:
        raise ValueError("F_chi needs m even and at least 2")
    one = PAdic.from_rational(1, phi.p, uv.precision)
    return ComplexValue(_shell(chi, one, uv, phi, -halfm))


def bessel_closed(chi: MultiplicativeCharacter, u: PAdic, v: PAdic, phi: AdditiveCharacter) -> ComplexValue:
    """Closed-form J_chi(u, v) for chi = nu^alpha * sgn_tau (conductor at most p)."""
    _require_depth_minus_one(phi)
    m = bessel_m(u, v)
    p = phi.p
    if m <= 1:
        return ComplexValue(chi(v) * gamma_factor(chi.inverse(), phi) + gamma_factor(chi, phi) / chi(u))
    if m == 2:
        uv = u * v
        xi = ResidueElement((uv * PAdic.from_rational(p * p, p)).unit_digit, p)
        uniformizer = PAdic.from_rational(p, p)
        value = kloosterman(chi.residue_part(p), residue_character(phi), xi) / (p * chi(u * uniformizer))
        return ComplexValue(value)
    if m % 2:
        return ComplexValue(0.0)
    return ComplexValue(_shallow(chi, u, v, phi, m))


def _shallow(chi: MultiplicativeCharacter, u: PAdic, v: PAdic, phi: AdditiveCharacter, m: int) -> complex:
    w = sqrt_in_field(u * v)
    if w is None:
        return 0.0
    p = phi.p
    prefactor = float(p) ** (-m / 4) * chi(w / u)
    minus_one = PAdic.from_rational(-1, p)
    plus, minus = phi(2 * w), phi(-2 * w)
    if m % 4 == 0:
        return prefactor * (plus + chi(minus_one) * minus)
    g = gauss_sum(PAdic.from_rational(p, p), phi)
    twisted_sign = chi(minus_one) * sgn_theta(SquareClass.PI, minus_one)
    return prefactor * sgn_theta(SquareClass.PI, w) * g * (plus + twisted_sign * minus)


def bessel_theta(
    chi: MultiplicativeCharacter,
    tau: SquareClass,
    u: PAdic,
    v: PAdic,
    phi: AdditiveCharacter,
    evaluator=bessel_closed,
) -> ComplexValue:
    """J^tau_chi = (J_chi + J_{chi sgn_tau}) / 2."""
    if tau is SquareClass.ONE:
        return evaluator(chi, u, v, phi)
    return ComplexValue(0.5 * (evaluator(chi, u, v, phi) + evaluator(chi.times_sgn(tau), u, v, phi)))


def bessel_kloosterman_closed(alpha, ramified: bool, u: PAdic, v: PAdic, phi: AdditiveCharacter) -> ComplexValue:
    """m = 2 values of J_{nu^alpha} and J_{nu^alpha sgn_p} as sums over c in p^-1 O / O."""
    _require_depth_minus_one(phi)
    if bessel_m(u, v) != 2:
        raise ValueError("these formulas need m = 2")
    p = phi.p
    a = complex(alpha)
    abs_u_power = complex(p) ** (a * u.valuation)  # |u|^-alpha
    uv = u * v
    xi = (uv * PAdic.from_rational(p * p, p)).unit_digit
    cs = [PAdic.from_rational(j, p, u.precision) / p for j in range(p)]
    if not ramified:
        total = 0j
        for j, c in enumerate(cs):
            if (j * j - xi) % p == 0:
                continue
            diff = c * c - uv if j else -uv
            total += phi(2 * c) * sgn_theta(SquareClass.PI, diff)
        return ComplexValue(complex(p) ** (a - 1) * abs_u_power * total)
    roots = [c for j, c in enumerate(cs) if j and (j * j - xi) % p == 0]
    g = gauss_sum(PAdic.from_rational(p, p), phi)
    value = complex(p) ** (a - 0.5) * abs_u_power * sgn_theta(SquareClass.PI, v) * g * sum(phi(2 * c) for c in roots)
    return ComplexValue(value)
