"""Fourier transforms of semisimple orbital integrals: brute-force oracle and closed forms.

:func:`mock_mu_oracle` evaluates the defining double principal-value integral
shell by shell.  :func:`mu_hat_closed` dispatches on the regime of (X*, Y) to
the closed formulas.  :func:`second_orbital_form` sits in between and writes the
transform as a combination of four Bessel functions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator, Optional

from ._shells import MAX_SHELL_TERMS, phase_sum, unit_table
from .bessel import bessel_closed, bessel_theta
from .characters import HALF, ComplexValue, MultiplicativeCharacter, standard_character, twist
from .exp_sums import GUARD_SHELLS, check_vanishing_shell, quadratic_integral
from .local_field import LocalField, PAdic, SquareClass, sgn_theta, smallest_nonresidue
from .orbits import (
    AlgebraElement,
    DualElement,
    TorusType,
    c0,
    gamma_ram,
    gamma_un,
    gamma_wald,
    gl2_reduce,
    rationally_conjugate,
    transport_algebra,
    transport_root,
    uv_m,
)


class Regime(enum.Enum):
    CLOSE = "close"
    FAR_SAME_TORUS = "far-same-torus"
    FAR_VANISHING = "far-vanishing"
    BAD_SHELL_SAME = "bad-shell-same"
    BAD_SHELL_OTHER = "bad-shell-other"


def _uniformizer(p: int, precision: int) -> PAdic:
    return PAdic.from_rational(p, p, precision)


def is_reduced(x_star: DualElement) -> bool:
    """theta is a unit or a uniformiser times a unit, outside the eps*p class."""
    return x_star.theta.valuation in (0, 1) and x_star.square_class is not SquareClass.EPS_PI


def _require_reduced(x_star: DualElement) -> None:
    if not is_reduced(x_star):
        raise ValueError("theta must be a standard representative; apply gl2_reduce first")


def pairing_at(x_star: DualElement, y: AlgebraElement, alpha_norm: PAdic, t: PAdic) -> PAdic:
    """beta s (N theta' + N^-1 theta - N^-1 t^2) for N = Norm(alpha)."""
    if alpha_norm.is_zero():
        raise ValueError("the norm of alpha must be nonzero")
    inv = alpha_norm.inverse()
    inner = alpha_norm * y.theta_prime + inv * x_star.theta
    if not t.is_zero():
        inner = inner - inv * t * t
    return x_star.beta * y.s * inner


# ---------------------------------------------------------------------------
# Oracle


def mock_mu_oracle(x_star: DualElement, y: AlgebraElement) -> ComplexValue:
    """The double principal-value integral, summed shell by shell.

    Outer variable x = p^n w runs over the norm classes of the torus, weighted
    by (1 + sgn_theta(x)) / 2.  For fixed x the inner t-integral of
    Phidot(-s t^2 / x) depends only on ord(x) and the residue class of w, so it
    is computed once per (shell, class).  A shell vanishes when one of the two
    outer terms oscillates at a strictly higher level than the other; those
    shells are still evaluated at the window edges and must come out zero.
    """
    _require_reduced(x_star)
    p = x_star.p
    phidot = x_star.phidot
    a = y.s * y.theta_prime
    b = y.s * x_star.theta
    c = -y.s
    depth_a = phidot.depth - a.valuation  # level of Phidot(a p^n w) is depth_a - n
    depth_b = phidot.depth - b.valuation  # level of Phidot(b p^-n / w) is depth_b + n
    centre = (depth_a - depth_b) / 2
    lo = min(depth_a, math.floor(centre)) - GUARD_SHELLS
    hi = max(-depth_b, math.ceil(centre)) + GUARD_SHELLS
    cls = x_star.square_class
    prec = x_star.beta.precision
    eps = PAdic.from_rational(smallest_nonresidue(p), p, prec)
    total = 0j
    for n in range(lo, hi + 1):
        level_a, level_b = depth_a - n, depth_b + n
        vanishes = level_a >= max(1, level_b + 1) or level_b >= max(1, level_a + 1)
        digits = max(1, level_a + 1, level_b + 1)
        if vanishes and p**digits > MAX_SHELL_TERMS:
            continue
        w, inv, leg = unit_table(p, digits)
        nums = phidot.shell_numerators(a, n, w, digits) + phidot.shell_numerators(b, -n, inv, digits)
        shell = 0j
        mass = 0.0
        for residue_class, unit in ((1, None), (-1, eps)):
            x = _uniformizer(p, prec) ** n
            if unit is not None:
                x = x * unit
            weight = 0.5 * (1 + sgn_theta(cls, x))
            if weight == 0:
                continue
            inner = quadratic_integral(phidot, c / x)
            mask = leg == residue_class
            shell += weight * complex(inner) * phase_sum(nums[mask], p, digits)
            mass += weight * abs(complex(inner))
        shell /= p**digits
        if vanishes:
            check_vanishing_shell(shell, f"outer shell {n}", mass)
        else:
            total += shell
    return ComplexValue(total)


# ---------------------------------------------------------------------------
# Bessel combination


def bessel_character(x_star: DualElement):
    """The depth -1 character Phidot_{p^(d+1)} on which the Bessel functions are built."""
    p = x_star.p
    return twist(x_star.phidot, _uniformizer(p, x_star.beta.precision) ** (x_star.scaled_depth + 1))


def second_orbital_form(x_star: DualElement, y: AlgebraElement, evaluator: Callable = bessel_closed) -> ComplexValue:
    """The transform as a sum of four Bessel functions twisted by sgn_theta."""
    _require_reduced(x_star)
    p = x_star.p
    u, v, _ = uv_m(x_star, y)
    phi = bessel_character(x_star)
    tau = x_star.square_class
    g_un = gamma_un(x_star, y.s)
    g_ram = complex(gamma_ram(x_star, y.s))

    def j(twist_class: SquareClass) -> complex:
        return complex(bessel_theta(MultiplicativeCharacter(HALF, twist_class), tau, u, v, phi, evaluator))

    bracket = j(SquareClass.ONE) + g_un * j(SquareClass.EPS)
    bracket += g_ram * (j(SquareClass.PI) - g_un * j(SquareClass.EPS_PI))
    abs_s_inv_sqrt = float(p) ** (y.s.valuation / 2)
    return ComplexValue(0.5 * abs_s_inv_sqrt * float(p) ** (-(x_star.scaled_depth + 1) / 2) * bracket)


# ---------------------------------------------------------------------------
# Regimes and closed forms


def twice_sigma(x_star: DualElement, y: AlgebraElement) -> int:
    """2 (depth(X*) + depth(Y))."""
    return x_star.twice_depth + y.twice_depth


def regime(x_star: DualElement, y: AlgebraElement) -> Regime:
    sigma2 = twice_sigma(x_star, y)
    if sigma2 > 0:
        return Regime.CLOSE
    if x_star.torus_type is TorusType.RAMIFIED and sigma2 == 0:
        if y.square_class is SquareClass.PI:
            return Regime.BAD_SHELL_SAME
        return Regime.BAD_SHELL_OTHER
    if rationally_conjugate(x_star.theta, y.theta_prime):
        return Regime.FAR_SAME_TORUS
    return Regime.FAR_VANISHING


def prefactor(x_star: DualElement, y: AlgebraElement) -> float:
    """q^-(d+1) |D(Y)|^-1/2."""
    return float(x_star.p) ** (-(x_star.scaled_depth + 1)) * y.abs_disc_inv_sqrt


def conjugate_into_torus(x_star: DualElement, y: AlgebraElement) -> PAdic:
    """s~ with Y rationally conjugate to s~ sqrt(theta), or an error if there is none."""
    x = transport_root(x_star.theta, y.theta_prime)
    if x is None:
        raise ValueError("Y does not lie in a torus stably conjugate to that of X*")
    cls = x_star.square_class
    if sgn_theta(cls, x) == 1:
        return x * y.s
    if sgn_theta(cls, -x) == 1:
        return -x * y.s
    raise ValueError("Y is not rationally conjugate into the torus of X*")


def weyl_sum(x_star: DualElement, y: AlgebraElement) -> ComplexValue:
    """Sum over the rational Weyl group of Phi(<Ad*(w) X*, Y>) = Phidot(+-2 s~ theta)."""
    s_tilde = conjugate_into_torus(x_star, y)
    phidot = x_star.phidot
    arg = 2 * s_tilde * x_star.theta
    value = phidot(arg)
    if x_star.weyl_order == 2:
        value += phidot(-arg)
    return ComplexValue(value)


@dataclass(frozen=True)
class ShellSum:
    value: ComplexValue
    terms: int


def bad_shell_sum(x_star: DualElement, y: AlgebraElement, exclude: Optional[PAdic] = None) -> ShellSum:
    """Sum over c in p^(h-1)/p^h of Phidot(2 p c) sgn_p(s^2 theta' - c^2 p).

    With ``exclude`` = x s, residues congruent to +-x s modulo p^h are dropped.
    """
    if x_star.torus_type is not TorusType.RAMIFIED or twice_sigma(x_star, y) != 0:
        raise ValueError("bad-shell sums need ramified X* and depth(X*) + depth(Y) = 0")
    p = x_star.p
    prec = x_star.beta.precision
    h = x_star.scaled_depth
    pi = _uniformizer(p, prec)
    step = pi ** (h - 1)
    y_square = y.s * y.s * y.theta_prime
    phidot = x_star.phidot
    total = 0j
    terms = 0
    for j in range(p):
        c = PAdic.from_rational(j, p, prec) * step if j else PAdic.zero(p, prec)
        if exclude is not None and any(_congruent(c, sign * exclude, h) for sign in (1, -1)):
            continue
        diff = y_square - c * c * pi if j else y_square
        total += phidot(2 * pi * c) * sgn_theta(SquareClass.PI, diff)
        terms += 1
    return ShellSum(ComplexValue(total), terms)


def _congruent(a: PAdic, b: PAdic, k: int) -> bool:
    if a.is_zero() and b.is_zero():
        return True
    try:
        return (a - b).valuation >= k
    except ArithmeticError:
        return True


def close_constant(x_star: DualElement) -> Fraction:
    """Constant term of the Close regime as certified by the oracle.

    For elliptic X* this is c0(X*).  For split X* the oracle gives 0.
    """
    if x_star.torus_type is TorusType.SPLIT:
        return Fraction(0)
    return c0(x_star)


@dataclass(frozen=True)
class ClosedForm:
    """A closed-form value together with the pieces it was assembled from."""

    regime: Regime
    value: ComplexValue
    gamma: ComplexValue
    structure: dict = field(default_factory=dict)


def mu_hat_closed_detail(x_star: DualElement, y: AlgebraElement, perturb: bool = False) -> ClosedForm:
    _require_reduced(x_star)
    reg = regime(x_star, y)
    q = x_star.p
    gamma = gamma_wald(x_star, y, perturb)
    pre = prefactor(x_star, y)
    if reg is Regime.FAR_VANISHING:
        return ClosedForm(reg, ComplexValue(0), gamma)
    if reg is Regime.FAR_SAME_TORUS:
        ws = weyl_sum(x_star, y)
        value = pre * complex(gamma) * complex(ws)
        return ClosedForm(reg, ComplexValue(value), gamma, {"coefficient": pre, "weyl_sum": ws})
    if reg is Regime.CLOSE:
        n = 1 if x_star.torus_type is TorusType.SPLIT else 2
        const = close_constant(x_star)
        value = float(const) + (2 / n) * pre * complex(gamma)
        return ClosedForm(reg, ComplexValue(value), gamma, {"constant": const, "coefficient": (2 / n) * pre})
    h = x_star.scaled_depth
    half_scale = 0.5 * float(q) ** (-(h + 1)) * y.abs_disc_inv_sqrt
    if reg is Regime.BAD_SHELL_OTHER:
        shell = bad_shell_sum(x_star, y)
        value = half_scale * q**-0.5 * complex(shell.value)
        return ClosedForm(reg, ComplexValue(value), gamma, {"shell_sum": shell.value, "shell_terms": shell.terms})
    # Bad shell, same torus: Y~ = x s sqrt(p) with theta' = x^2 p.
    x = transport_root(x_star.theta, y.theta_prime)
    if x is None:
        raise ValueError("no square root of theta'/p for a bad-shell-same point")
    xs = x * y.s
    pi = _uniformizer(q, x_star.beta.precision)
    phidot = x_star.phidot
    ws = phidot(2 * pi * xs) + phidot(-2 * pi * xs)
    shell = bad_shell_sum(x_star, y, exclude=xs)
    value = half_scale * (complex(gamma) * ws + q**-0.5 * complex(shell.value))
    return ClosedForm(
        reg,
        ComplexValue(value),
        gamma,
        {"weyl_sum": ComplexValue(ws), "shell_sum": shell.value, "shell_terms": shell.terms},
    )


def mu_hat_closed(x_star: DualElement, y: AlgebraElement, perturb: bool = False) -> ComplexValue:
    return mu_hat_closed_detail(x_star, y, perturb).value


def uniform_formula(x_star: DualElement, y: AlgebraElement) -> Optional[ComplexValue]:
    """The single formula covering every regime except the ramified bad shell.

    Returns None where it makes no claim.  The Close branch is c0 + coefficient * gamma
    with no dependence on the torus being split.
    """
    _require_reduced(x_star)
    sigma2 = twice_sigma(x_star, y)
    elliptic_ramified = x_star.torus_type is TorusType.RAMIFIED
    gamma = complex(gamma_wald(x_star, y))
    pre = prefactor(x_star, y)
    if sigma2 > 0:
        return ComplexValue(float(c0(x_star)) + pre * gamma)
    if sigma2 == 0 and elliptic_ramified:
        return None
    if rationally_conjugate(x_star.theta, y.theta_prime):
        return ComplexValue(pre * gamma * complex(weyl_sum(x_star, y)))
    return ComplexValue(0)


# ---------------------------------------------------------------------------
# Transport


def transport_dual(x_star: DualElement, b: PAdic) -> DualElement:
    """Ad*(g_b)(beta sqrt(theta)) = (beta/b) sqrt(b^2 theta)."""
    return DualElement(x_star.beta / b, b * b * x_star.theta, x_star.phi)


def field_representatives(field_: LocalField) -> dict[SquareClass, PAdic]:
    return {cls: field_.representative(cls) for cls in SquareClass}


def reduce_pair(
    x_star: DualElement, y: AlgebraElement, reps: dict[SquareClass, PAdic]
) -> tuple[DualElement, AlgebraElement, PAdic]:
    """Move (X*, Y) by the same g_b so that theta becomes a standard representative."""
    reduced, b = gl2_reduce(x_star, reps)
    return reduced, transport_algebra(y, b), b


def mu_hat(x_star: DualElement, y: AlgebraElement, reps: dict[SquareClass, PAdic], perturb: bool = False) -> ComplexValue:
    """mu_hat for arbitrary theta, through mu_hat_{Ad*(g_b) X*}(Ad(g_b) Y)."""
    reduced, y_reduced, _ = reduce_pair(x_star, y, reps)
    return mu_hat_closed(reduced, y_reduced, perturb)


# ---------------------------------------------------------------------------
# Measure normalisation


def _sl2_elements(p: int) -> Iterator[tuple[int, int, int, int]]:
    for a, b, c, d in product(range(p), repeat=4):
        if (a * d - b * c) % p == 1:
            yield a, b, c, d


def verify_measure_normalization(p: int, torus: TorusType) -> Fraction:
    """Measure of the compact set carrying the orbital integral, by counting cosets over F_p."""
    q = p
    group = list(_sl2_elements(p))
    if torus is TorusType.SPLIT:
        diagonal = sum(1 for a, b, c, d in group if b == 0 and c == 0)
        return Fraction(len(group), diagonal) / q**2
    if torus is TorusType.UNRAMIFIED:
        eps = smallest_nonresidue(p)
        anisotropic = sum(1 for a, b, c, d in group if a == d and b == eps * c % p)
        return Fraction(len(group), anisotropic) / q**2
    borel = sum(1 for a, b, c, d in group if c == 0)
    squares = {x * x % p for x in range(1, p)}
    norm_cokernel = (p - 1) // len(squares)
    units = Fraction(p - 1, q)
    return Fraction(1, norm_cokernel) * units * Fraction(len(group), borel) / q


MEASURE_TABLE = {
    TorusType.SPLIT: lambda q: Fraction(q + 1, q),
    TorusType.UNRAMIFIED: lambda q: Fraction(q - 1, q),
    TorusType.RAMIFIED: lambda q: Fraction(q * q - 1, 2 * q * q),
}


# ---------------------------------------------------------------------------
# Certification grid

THETA_LABELS = ("1", "eps", "pi", "eps^2*pi", "pi^2*eps")
THETA_PRIME_LABELS = ("1", "eps", "pi", "eps*pi", "eps^2*pi", "pi^2*eps")


def theta_from_label(label: str, field_: LocalField) -> PAdic:
    eps, pi = field_.eps, field_.uniformizer
    table = {
        "1": field_.element(1),
        "eps": eps,
        "pi": pi,
        "eps*pi": eps * pi,
        "eps^2*pi": eps * eps * pi,
        "pi^2*eps": pi * pi * eps,
    }
    if label not in table:
        raise ValueError(f"unknown theta label {label!r}; expected one of {', '.join(table)}")
    return table[label]


def format_literal(unit: int, exponent: int) -> str:
    return f"{unit}*p^{exponent}"


@dataclass(frozen=True)
class GridPoint:
    p: int
    theta: str
    beta_unit: int
    beta_exp: int
    s_unit: int
    s_exp: int
    theta_prime: str
    phi_depth: int = -1


@dataclass
class EvalReport:
    p: int
    phi_depth: int
    beta: str
    theta: str
    s: str
    theta_prime: str
    regime: str
    closed_value: ComplexValue
    gamma: ComplexValue
    structure: dict = field(default_factory=dict)
    oracle_value: Optional[ComplexValue] = None
    abs_error: Optional[float] = None
    passed: Optional[bool] = None


def build_pair(point: GridPoint, field_: LocalField) -> tuple[DualElement, AlgebraElement]:
    phi = twist(standard_character(field_.p, field_.precision), field_.from_parts(1, -1 - point.phi_depth))
    beta = field_.from_parts(point.beta_unit, point.beta_exp)
    s = field_.from_parts(point.s_unit, point.s_exp)
    x_star = DualElement(beta, theta_from_label(point.theta, field_), phi)
    y = AlgebraElement(s, theta_from_label(point.theta_prime, field_))
    return x_star, y


def evaluate_point(
    point: GridPoint,
    field_: Optional[LocalField] = None,
    with_oracle: bool = True,
    tol: float = 1e-8,
    perturb: bool = False,
) -> EvalReport:
    field_ = field_ or LocalField(point.p)
    x_star, y = build_pair(point, field_)
    reduced, y_reduced, _ = reduce_pair(x_star, y, field_representatives(field_))
    detail = mu_hat_closed_detail(reduced, y_reduced, perturb)
    report = EvalReport(
        p=point.p,
        phi_depth=point.phi_depth,
        beta=format_literal(point.beta_unit, point.beta_exp),
        theta=point.theta,
        s=format_literal(point.s_unit, point.s_exp),
        theta_prime=point.theta_prime,
        regime=detail.regime.value,
        closed_value=detail.value,
        gamma=detail.gamma,
        structure=detail.structure,
    )
    if with_oracle:
        oracle = mock_mu_oracle(reduced, y_reduced)
        report.oracle_value = oracle
        report.abs_error = abs(complex(oracle) - complex(detail.value))
        report.passed = report.abs_error <= tol
    return report


REGIME_FILTERS = {
    "close": {Regime.CLOSE},
    "far": {Regime.FAR_SAME_TORUS, Regime.FAR_VANISHING},
    "far-same-torus": {Regime.FAR_SAME_TORUS},
    "far-vanishing": {Regime.FAR_VANISHING},
    "bad-shell": {Regime.BAD_SHELL_SAME, Regime.BAD_SHELL_OTHER},
    "bad-shell-same": {Regime.BAD_SHELL_SAME},
    "bad-shell-other": {Regime.BAD_SHELL_OTHER},
}


def certification_grid(
    p: int,
    quick: bool = False,
    regime_filter: Optional[str] = None,
    field_: Optional[LocalField] = None,
    sigma_margin: int = 2,
) -> list[GridPoint]:
    """Points (X*, Y) sweeping every regime boundary by +-sigma_margin in depth(X*) + depth(Y).

    The full grid uses d in {-2, -1, 0, 1}, the theta labels of THETA_LABELS, every
    theta' label and s units {1, 2}; the quick grid keeps d in {-1, 0} and s unit 1.
    """
    field_ = field_ or LocalField(p)
    allowed = None
    if regime_filter is not None:
        if regime_filter not in REGIME_FILTERS:
            raise ValueError(f"unknown regime {regime_filter!r}; expected one of {', '.join(REGIME_FILTERS)}")
        allowed = REGIME_FILTERS[regime_filter]
    depths = (-1, 0) if quick else (-2, -1, 0, 1)
    s_units = (1,) if quick else tuple(u for u in (1, 2) if u % p)
    points = []
    for theta_label, d, theta_prime_label in product(THETA_LABELS, depths, THETA_PRIME_LABELS):
        beta_exp = -1 - d
        x_star, _ = build_pair(GridPoint(p, theta_label, 1, beta_exp, 1, 0, theta_prime_label), field_)
        theta_prime = theta_from_label(theta_prime_label, field_)
        # 2 sigma = twice_depth(X*) + 2 ord(s) + ord(theta'); sweep |sigma| <= margin.
        base = x_star.twice_depth + theta_prime.valuation
        lo = math.ceil((-2 * sigma_margin - base) / 2)
        hi = math.floor((2 * sigma_margin - base) / 2)
        for s_exp, s_unit in product(range(lo, hi + 1), s_units):
            point = GridPoint(p, theta_label, 1, beta_exp, s_unit, s_exp, theta_prime_label)
            if allowed is not None:
                x, y = build_pair(point, field_)
                reduced, y_reduced, _ = reduce_pair(x, y, field_representatives(field_))
                if regime(reduced, y_reduced) not in allowed:
                    continue
            points.append(point)
    return points


def shell_term_count(x_star: DualElement, y: AlgebraElement) -> int:
    """Number of terms in the bad-shell sum used by the closed form at this point."""
    reg = regime(x_star, y)
    if reg is Regime.BAD_SHELL_OTHER:
        return bad_shell_sum(x_star, y).terms
    if reg is Regime.BAD_SHELL_SAME:
        x = transport_root(x_star.theta, y.theta_prime)
        return bad_shell_sum(x_star, y, exclude=x * y.s).terms
    raise ValueError(f"no shell sum in regime {reg.value}")

