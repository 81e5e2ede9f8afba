import itertools
from fractions import Fraction

import pytest

from sl2orbital.bessel import bessel_oracle
from sl2orbital.characters import standard_character, twist
from sl2orbital.local_field import LocalField, PAdic, SquareClass
from sl2orbital.orbits import AlgebraElement, DualElement, TorusType, gamma_wald
from sl2orbital.transform import (
    MEASURE_TABLE,
    GridPoint,
    Regime,
    bad_shell_sum,
    build_pair,
    certification_grid,
    close_constant,
    evaluate_point,
    field_representatives,
    mock_mu_oracle,
    mu_hat,
    mu_hat_closed,
    mu_hat_closed_detail,
    pairing_at,
    prefactor,
    reduce_pair,
    regime,
    second_orbital_form,
    shell_term_count,
    theta_from_label,
    transport_algebra,
    transport_dual,
    uniform_formula,
    verify_measure_normalization,
    weyl_sum,
)


def dual(f, theta, beta_unit=1, depth=-1):
    return DualElement(f.from_parts(beta_unit, -1 - depth), theta, standard_character(f.p))


def alg(f, theta_prime, unit=1, exp=0):
    return AlgebraElement(f.from_parts(unit, exp), theta_prime)


def test_pairing_examples():
    f = LocalField(5)
    x, y = dual(f, f.eps), alg(f, f.element(1), 2)
    one = f.element(1)
    # beta s (N theta' + N^-1 theta - N^-1 t^2)
    assert pairing_at(x, y, one, PAdic.zero(5)) == 2 * (1 + f.eps)
    assert pairing_at(x, y, one, one) == 2 * f.eps
    assert pairing_at(x, y, f.element(5), one) == 2 * (5 + (f.eps - 1) / 5)
    with pytest.raises(ValueError):
        pairing_at(x, y, PAdic.zero(5), one)


def test_oracle_examples():
    f = LocalField(5)
    # unramified X* against split Y, far from the origin: vanishes
    x = dual(f, f.eps)
    for exp in (-3, -2, -1):
        assert mock_mu_oracle(x, alg(f, f.element(1), 1, exp)).approx_eq(0, 1e-10)
    # split X*, split Y at theta = theta' = 1 is even in s
    x = dual(f, f.element(1))
    for unit, exp in itertools.product((1, 2, 3), (-2, -1, 0, 1)):
        plus = mock_mu_oracle(x, alg(f, f.element(1), unit, exp))
        minus = mock_mu_oracle(x, alg(f, f.element(1), -unit, exp))
        assert plus.approx_eq(minus, 1e-10)
    with pytest.raises(ValueError):
        mock_mu_oracle(dual(f, f.eps * f.uniformizer), alg(f, f.element(1)))


def test_split_close_value_frozen_from_oracle():
    """p = 5, beta = s = 1, theta = theta' = 1: the oracle gives 2."""
    f = LocalField(5)
    x, y = dual(f, f.element(1)), alg(f, f.element(1))
    detail = mu_hat_closed_detail(x, y)
    assert detail.regime is Regime.CLOSE
    assert detail.value.approx_eq(2, 1e-12)
    assert mock_mu_oracle(x, y).approx_eq(2, 1e-10)
    assert close_constant(x) == 0
    assert close_constant(dual(f, f.eps)) == Fraction(-1, 5)


def test_regime_examples():
    f = LocalField(5)
    one, eps, pi = f.element(1), f.eps, f.uniformizer
    assert regime(dual(f, one), alg(f, one)) is Regime.CLOSE
    assert regime(dual(f, one), alg(f, one, 1, -1)) is Regime.FAR_SAME_TORUS
    assert regime(dual(f, one), alg(f, eps, 1, -1)) is Regime.FAR_VANISHING
    assert regime(dual(f, eps), alg(f, eps * f.element(4), 1, -2)) is Regime.FAR_SAME_TORUS
    # ramified X* with 2 depth(X*) = 3; Y with 2 depth(Y) = -3 sits on the bad shell
    assert regime(dual(f, pi), alg(f, pi, 1, -2)) is Regime.BAD_SHELL_SAME
    assert regime(dual(f, pi), alg(f, eps * pi, 1, -2)) is Regime.BAD_SHELL_OTHER
    assert regime(dual(f, pi), alg(f, pi, 1, -1)) is Regime.CLOSE
    assert regime(dual(f, pi), alg(f, pi, 1, -3)) is Regime.FAR_SAME_TORUS


def test_second_orbital_form_matches_oracle_and_closed():
    for p in (3, 5):
        f = LocalField(p)
        for tl, tpl, se in itertools.product(("1", "eps", "pi"), ("1", "eps", "pi", "eps*pi"), (-2, -1, 0, 1)):
            x, y = dual(f, theta_from_label(tl, f)), alg(f, theta_from_label(tpl, f), 1, se)
            via_bessel = second_orbital_form(x, y)
            assert via_bessel.approx_eq(mu_hat_closed(x, y), 1e-8), (p, tl, tpl, se)
            assert via_bessel.approx_eq(second_orbital_form(x, y, bessel_oracle), 1e-8)


def test_prefactor_and_weyl_sum():
    f = LocalField(5)
    x = dual(f, f.element(1), depth=0)
    y = alg(f, f.element(1), 1, -2)
    # q^-(d+1) |D|^-1/2 with D = 4 s^2
    assert prefactor(x, y) == pytest.approx(5.0**-1 * 5.0**-2)
    ws = weyl_sum(x, y)
    phidot = x.phidot
    expected = phidot(2 * y.s) + phidot(-2 * y.s)
    assert ws.approx_eq(expected, 1e-12)
    # weyl order 1: a single term
    g = LocalField(7)
    x = dual(g, g.uniformizer)
    y = alg(g, g.uniformizer, 1, -2)
    assert weyl_sum(x, y).approx_eq(x.phidot(2 * y.s * g.uniformizer), 1e-12)
    with pytest.raises(ValueError):
        weyl_sum(dual(f, f.eps), alg(f, f.element(1)))


def test_close_value_structure():
    f = LocalField(7)
    x, y = dual(f, f.eps), alg(f, f.eps, 3, 1)
    detail = mu_hat_closed_detail(x, y)
    expected = float(Fraction(-1, 7)) + prefactor(x, y) * complex(gamma_wald(x, y))
    assert detail.value.approx_eq(expected, 1e-12)
    assert detail.structure["constant"] == Fraction(-1, 7)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
@pytest.mark.parametrize("torus", list(TorusType))
def test_measure_normalization(p, torus):
    assert verify_measure_normalization(p, torus) == MEASURE_TABLE[torus](p)


def test_measure_examples():
    assert verify_measure_normalization(5, TorusType.SPLIT) == Fraction(6, 5)
    assert verify_measure_normalization(5, TorusType.UNRAMIFIED) == Fraction(4, 5)
    assert verify_measure_normalization(5, TorusType.RAMIFIED) == Fraction(12, 25)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_bad_shell_term_counts(p):
    f = LocalField(p)
    for d, tpl in itertools.product((-2, -1, 0), ("pi", "eps^2*pi", "1", "eps", "eps*pi")):
        x = dual(f, f.uniformizer, depth=d)
        theta_prime = theta_from_label(tpl, f)
        # 2 sigma = twice_depth(X*) + 2 ord(s) + ord(theta') = 0
        se = -(x.twice_depth + theta_prime.valuation) // 2
        y = alg(f, theta_prime, 1, se)
        if x.twice_depth + y.twice_depth != 0:
            continue
        reg = regime(x, y)
        count = shell_term_count(x, y)
        if reg is Regime.BAD_SHELL_OTHER:
            assert count == p
        else:
            assert reg is Regime.BAD_SHELL_SAME
            assert count == p - 2
        assert mu_hat_closed(x, y).approx_eq(mock_mu_oracle(x, y), 1e-8)
    with pytest.raises(ValueError):
        bad_shell_sum(dual(f, f.eps), alg(f, f.element(1)))


def test_oracle_matches_closed_on_quick_grid():
    for p in (3, 5):
        field_ = LocalField(p)
        for point in certification_grid(p, quick=True, field_=field_):
            report = evaluate_point(point, field_)
            assert report.passed, (point, report.abs_error)


def test_perturbation_is_detected():
    field_ = LocalField(5)
    points = certification_grid(5, quick=True, regime_filter="close", field_=field_)
    flagged = [pt for pt in points if not evaluate_point(pt, field_, perturb=True).passed]
    assert flagged
    assert all(pt.theta_prime in ("pi", "eps^2*pi") or pt.theta in ("pi", "eps^2*pi") for pt in flagged)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_homogeneity_in_the_character(p):
    """Phi -> Phi_b together with beta -> beta/b leaves the transform unchanged."""
    f = LocalField(p)
    for tl, tpl, se, (bu, be) in itertools.product(("1", "eps", "pi"), ("1", "eps", "pi"), (-1, 0), ((1, 1), (2, -1))):
        x = dual(f, theta_from_label(tl, f))
        y = alg(f, theta_from_label(tpl, f), 1, se)
        b = f.from_parts(bu, be)
        moved = DualElement(x.beta / b, x.theta, twist(x.phi, b))
        assert mu_hat_closed(moved, y).approx_eq(mu_hat_closed(x, y), 1e-12)
        assert mock_mu_oracle(moved, y).approx_eq(mock_mu_oracle(x, y), 1e-9)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_transport_invariance(p):
    f = LocalField(p)
    reps = field_representatives(f)
    for tl, tpl, se in itertools.product(("eps^2*pi", "pi^2*eps", "1", "pi"), ("1", "eps", "pi", "eps*pi"), (-1, 0, 1)):
        x = dual(f, theta_from_label(tl, f))
        y = alg(f, theta_from_label(tpl, f), 1, se)
        base = mu_hat(x, y, reps)
        for c in (f.element(-1), f.eps, f.uniformizer, -f.eps * f.uniformizer, f.element(2)):
            assert mu_hat(transport_dual(x, c), transport_algebra(y, c), reps).approx_eq(base, 1e-10)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_uniform_formula_off_the_split_close_regime(p):
    f = LocalField(p)
    for point in certification_grid(p, quick=True, field_=f):
        x_star, y = (dual(f, theta_from_label(point.theta, f)), alg(f, theta_from_label(point.theta_prime, f), 1, point.s_exp))
        if x_star.square_class is SquareClass.EPS_PI or x_star.theta.valuation > 1:
            continue
        uniform = uniform_formula(x_star, y)
        if uniform is None:
            assert regime(x_star, y) in (Regime.BAD_SHELL_SAME, Regime.BAD_SHELL_OTHER)
            continue
        if x_star.torus_type is TorusType.SPLIT and regime(x_star, y) is Regime.CLOSE:
            continue  # see the acceptance suite: the uniform constant disagrees here
        assert uniform.approx_eq(mu_hat_closed(x_star, y), 1e-10)


def test_grid_sizes():
    assert len(certification_grid(3, quick=True)) == 270
    assert len(certification_grid(5)) == 1080
    regimes = {regime(*_pair(pt)) for pt in certification_grid(3, quick=True)}
    assert regimes == set(Regime)


def _pair(point: GridPoint):
    f = LocalField(point.p)
    x, y = build_pair(point, f)
    reduced, y_reduced, _ = reduce_pair(x, y, field_representatives(f))
    return reduced, y_reduced
