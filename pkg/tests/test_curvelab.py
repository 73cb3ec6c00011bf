"""Exact curve certificates: exponents, Malgrange, quasitameness, escape traces."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lojexp.certify import CHECK_NAMES, run_cell, run_certificate_matrix
from lojexp.curvelab import (
    Curve,
    contradiction_trace,
    curve_exponent,
    curve_order,
    grad_along,
    malgrange_certificate,
    monomial_curve,
    mset_residual,
    parse_curve,
    quasitame_discrepancy,
    value_limit_of,
    witness_curve,
)
from lojexp.errors import CurveError, DimensionError, InputError
from lojexp.laurent import LaurentSeries, compose_poly, parse_series
from lojexp.polyring import family, parse_poly

TWOVAR_G = parse_poly("x^2*y + x", vars=("x", "y"))
TWOVAR_CURVE = parse_curve("t, -1/2*t^-1")


# -- curve construction -------------------------------------------------------


def test_witness_curve_shape():
    psi = witness_curve(2, 3)
    assert psi.coords[0] == parse_series("t^-3")
    assert psi.coords[1] == parse_series("t^2")
    assert psi.coords[2].is_zero
    assert curve_order(psi) == -3
    with pytest.raises(InputError):
        witness_curve(0, 1)


def test_parse_curve_matches_manual_construction():
    assert parse_curve("(t^-1, t, 0)").coords == witness_curve(1, 1).coords
    with pytest.raises(InputError):
        parse_curve("t, )t")


def test_curve_component_windows_must_agree():
    with pytest.raises(InputError):
        Curve((parse_series("t", window=8), parse_series("t", window=16)))
    with pytest.raises(CurveError):
        Curve(())


def test_curve_order_examples():
    assert curve_order(monomial_curve((-3, -5, 1))) == -5
    assert curve_order(monomial_curve((None, 2, None))) == 2
    with pytest.raises(CurveError):
        curve_order(monomial_curve((None, None)))


# -- gradient along a curve -----------------------------------------------------


@pytest.mark.parametrize("n,q", [(1, 1), (2, 1), (1, 3), (4, 4)])
def test_family_gradient_collapses_along_the_witness(n, q):
    g = grad_along(family(n, q), witness_curve(n, q))
    assert g[0].is_zero
    assert g[1].is_zero
    assert g[2] == LaurentSeries.monomial(n)


def test_gradient_of_a_coordinate():
    assert grad_along(parse_poly("x"), witness_curve(1, 1)) == (
        LaurentSeries.one(),
        LaurentSeries.zero(64),
        LaurentSeries.zero(64),
    )


def test_gradient_dimension_mismatch():
    with pytest.raises(DimensionError):
        grad_along(TWOVAR_G, witness_curve(1, 1))


# -- exponent reports -------------------------------------------------------------


@pytest.mark.parametrize("n,q", [(1, 1), (3, 2), (2, 4)])
def test_witness_exponent_is_minus_n_over_q(n, q):
    report = curve_exponent(family(n, q), witness_curve(n, q))
    assert report.exponent == Fraction(-n, q)
    assert report.ord_curve == -q
    assert report.ord_grad == n
    assert report.malgrange_sum == n - q
    assert report.value.kind == "finite" and report.value.value == 0


def test_exponent_is_invariant_under_reparameterization():
    for n, q in [(1, 2), (3, 1)]:
        doubled = monomial_curve((-2 * q, 2 * n, None))
        report = curve_exponent(family(n, q), doubled)
        assert report.exponent == Fraction(-n, q)


def test_two_variable_exponent_report():
    report = curve_exponent(TWOVAR_G, TWOVAR_CURVE)
    assert report.exponent == Fraction(-2)
    assert report.grad[0].is_zero
    assert report.grad[1] == parse_series("t^2")


def test_non_escaping_curve_is_rejected():
    with pytest.raises(CurveError, match="does not escape"):
        curve_exponent(family(1, 1), monomial_curve((None, 2, None)))


def test_value_limits():
    assert value_limit_of(parse_series("t^2")).kind == "finite"
    assert value_limit_of(parse_series("3 + t")).value == 3
    assert value_limit_of(parse_series("t^-1")).kind == "infinite"
    assert value_limit_of(LaurentSeries.zero()).value == 0


# -- Malgrange certificates ---------------------------------------------------------


def test_malgrange_fails_exactly_when_n_exceeds_q():
    for n in range(1, 4):
        for q in range(1, 4):
            cert = malgrange_certificate(family(n, q), witness_curve(n, q))
            assert cert.fails == (n > q)
            if n > q:
                assert cert.t0 == 0
                assert cert.order_sum == n - q
                assert f"order {n - q} > 0" in cert.detail
            else:
                assert "no certificate" in cert.detail


def test_malgrange_on_the_two_variable_example():
    cert = malgrange_certificate(TWOVAR_G, TWOVAR_CURVE)
    assert cert.fails
    assert cert.t0 == 0
    assert cert.order_sum == 1


def test_malgrange_no_certificate_when_value_escapes():
    cert = malgrange_certificate(parse_poly("x"), witness_curve(1, 1))
    assert not cert.fails
    assert "escapes to infinity" in cert.detail


# -- quasitameness --------------------------------------------------------------------


@pytest.mark.parametrize("n,q", [(1, 1), (2, 3), (3, 3)])
def test_family_is_not_quasitame(n, q):
    qt = quasitame_discrepancy(family(n, q), witness_curve(n, q))
    assert qt.premise_met
    assert qt.bounded
    assert qt.not_quasitame
    assert qt.discrepancy.is_zero
    assert "not quasitame" in qt.detail


def test_quasitame_premise_fails_when_gradient_stays_large():
    qt = quasitame_discrepancy(parse_poly("x"), witness_curve(1, 1))
    assert not qt.premise_met
    assert not qt.not_quasitame


def test_quasitame_needs_bounded_discrepancy():
    # grad(x) = (1, 0, 0) has order 0 along this curve, so the premise fails
    # even though the discrepancy x - x*1 vanishes.
    curve = monomial_curve((-1, 2, None))
    qt = quasitame_discrepancy(parse_poly("x"), curve)
    assert not qt.premise_met


# -- scaled-gradient residuals ---------------------------------------------------------


def test_witness_curve_leaves_the_scaled_gradient_set():
    rep = mset_residual(family(1, 1), witness_curve(1, 1))
    assert rep.scaling.is_zero
    assert rep.residual[2] == LaurentSeries.monomial(1)
    assert rep.residual_order == 1
    assert rep.avoids_mset


def test_gradient_line_curve_stays_in_the_set():
    g = parse_poly("x^2", vars=("x",))
    curve = Curve((parse_series("t^-1"),))
    rep = mset_residual(g, curve)
    assert rep.scaling == parse_series("2")
    assert rep.residual_order is None
    assert not rep.avoids_mset


def test_two_variable_curve_avoids_the_set():
    rep = mset_residual(TWOVAR_G, TWOVAR_CURVE)
    assert rep.avoids_mset
    assert rep.residual_order == 4


# -- escape-curve contradiction traces ---------------------------------------------------


def test_trace_base_case():
    tr = contradiction_trace(1, 1, rho0=1.0)
    assert tr.contradiction
    assert tr.lhs_order == tr.rhs_order == 1
    assert tr.lhs_lead == pytest.approx(1.0)
    assert tr.rhs_lead == pytest.approx(-36.0)
    assert "leading coefficients disagree in sign" in tr.verdict


@pytest.mark.parametrize(
    "n,q,rho0,expected",
    [(2, 1, 1.0, -72.0), (1, 2, 0.5, -72.0), (3, 2, 1 + 1j, -1728.0)],
)
def test_trace_leading_coefficient_formula(n, q, rho0, expected):
    tr = contradiction_trace(n, q, rho0=rho0)
    assert tr.contradiction
    assert tr.rhs_lead == pytest.approx(expected, rel=1e-10)


@given(
    st.integers(1, 5),
    st.integers(1, 5),
    st.complex_numbers(min_magnitude=0.1, max_magnitude=2.0, allow_nan=False, allow_infinity=False),
)
def test_trace_always_contradicts(n, q, rho0):
    tr = contradiction_trace(n, q, rho0=rho0)
    assert tr.contradiction
    assert tr.relations_hold
    assert tr.lhs_lead == pytest.approx(1.0, rel=1e-10)
    assert tr.rhs_lead == pytest.approx(-36.0 * n * q**3 * abs(rho0) ** 2, rel=1e-10)


def test_trace_input_validation():
    with pytest.raises(InputError, match="rho0 must be nonzero"):
        contradiction_trace(1, 1, rho0=0.0)
    with pytest.raises(InputError, match="window 5 too small"):
        contradiction_trace(1, 1, window=5)


def test_witness_normalizes_the_cubic_variable():
    # Along the witness curve x^n y^q is exactly 1, the root the cubics deflate.
    from lojexp.polyring import Polynomial, cubic_root_check

    for n, q in [(1, 1), (2, 3)]:
        x, y, _ = Polynomial.variables(("x", "y", "z"))
        u = compose_poly(x**n * y**q, witness_curve(n, q).coords)
        assert u == LaurentSeries.one()
        assert cubic_root_check("dfdx", n).one_is_root


# -- certificate matrices --------------------------------------------------------------


def test_certificate_matrix_passes_on_a_small_grid():
    matrix = run_certificate_matrix(1, 2, 1, 2)
    assert matrix.all_pass
    assert len(matrix.cells) == 4
    for cell in matrix.cells:
        assert set(cell.checks) == set(CHECK_NAMES)
        assert cell.failed_checks == ()


def test_mutated_cell_is_caught():
    cell = run_cell(1, 1, mutate=True)
    assert not cell.passed
    assert cell.failed_checks
    assert set(cell.failed_checks) <= set(CHECK_NAMES)


def test_matrix_range_validation():
    with pytest.raises(InputError, match="n_min"):
        run_certificate_matrix(0, 2, 1, 2)
    with pytest.raises(InputError, match="exceeds"):
        run_certificate_matrix(3, 2, 1, 2)
