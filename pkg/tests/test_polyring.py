"""Exact polynomial ring, the two-parameter family, and its certificates."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lojexp.errors import DimensionError, InputError
from lojexp.gaussian import GaussianRational
from lojexp.polyring import (
    FAMILY_VARS,
    PolyMap,
    Polynomial,
    cubic_root_check,
    euler_identity_residual,
    family,
    parse_poly,
    verify_automorphism,
)

X, Y, Z = Polynomial.variables(FAMILY_VARS)

small_fractions = st.fractions(
    min_value=Fraction(-5), max_value=Fraction(5), max_denominator=4
)
coeffs = st.builds(GaussianRational, small_fractions, small_fractions)
monos = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(monos, coeffs, max_size=6).map(
    lambda d: Polynomial(FAMILY_VARS, d)
)


# -- construction and printing ------------------------------------------------


def test_family_matches_its_literal():
    f = family(1, 1)
    assert f == parse_poly("x - 3*x^3*y^2 + 2*x^4*y^3 + y*z")
    assert len(f.terms) == 4
    assert family(2, 3) == parse_poly("x - 3*x^5*y^6 + 2*x^7*y^9 + y*z")


def test_family_rejects_bad_parameters():
    with pytest.raises(InputError, match="n must be >= 1"):
        family(0, 1)
    with pytest.raises(InputError, match="q must be >= 1"):
        family(1, -2)
    with pytest.raises(InputError):
        family(True, 1)


def test_zero_and_cancellation():
    assert parse_poly("0").is_zero
    assert parse_poly("(1+2i)*x^2 - (1+2i)*x^2").is_zero
    f = family(1, 1)
    assert (f - f).is_zero
    assert (X**0) == 1


def test_str_of_family_is_canonical():
    assert str(family(1, 1)) == "x - 3*x^3*y^2 + 2*x^4*y^3 + y*z"
    assert str(Polynomial.zero(FAMILY_VARS)) == "0"


def test_variable_mismatch_is_a_dimension_error():
    p = parse_poly("x + y", vars=("x", "y"))
    with pytest.raises(DimensionError):
        p + family(1, 1)
    with pytest.raises(DimensionError):
        family(1, 1).evaluate((1.0, 2.0))


# -- calculus -----------------------------------------------------------------


@pytest.mark.parametrize("n,q", [(1, 1), (2, 3)])
def test_partial_y_has_the_expected_terms(n, q):
    expected = (
        -6 * q * X ** (2 * n + 1) * Y ** (2 * q - 1)
        + 6 * q * X ** (3 * n + 1) * Y ** (3 * q - 1)
        + Z
    )
    assert family(n, q).partial("y") == expected


def test_simple_partials():
    assert family(1, 1).partial("z") == Y
    assert Polynomial.constant(7, FAMILY_VARS).partial("x").is_zero
    assert X.partial(0) == 1


def test_point_evaluation_and_gradient():
    f = family(1, 1)
    assert f.evaluate((1.0, 1.0, 0.0)) == 0.0
    assert f.gradient((1.0, 1.0, 0.0)) == (0.0, 0.0, 1.0)
    assert X.gradient((0.3, 0.1, 0.9)) == (1.0, 0.0, 0.0)


def test_gradient_conjugates_the_partials():
    p = parse_poly("i*x")
    assert p.partial("x").evaluate((0.0, 0.0, 0.0)) == 1j
    assert p.gradient((0.0, 0.0, 0.0))[0] == -1j


def test_compose_identity_and_projection():
    f = family(2, 2)
    assert f.compose((X, Y, Z)) == f
    assert f.compose((X, Polynomial.zero(FAMILY_VARS), Z)) == X


def test_compose_straightens_the_family_member():
    f = family(1, 1)
    shear = 3 * X**3 * Y - 2 * X**4 * Y**2
    assert f.compose((X, Y, Z + shear)) == X + Y * Z


# -- property checks ------------------------------------------------------------


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(polys, polys)
def test_leibniz_rule(a, b):
    for v in FAMILY_VARS:
        lhs = (a * b).partial(v)
        rhs = a.partial(v) * b + a * b.partial(v)
        assert lhs == rhs


@given(polys, st.tuples(polys, polys, polys))
def test_chain_rule(outer, inner):
    composed = outer.compose(inner)
    for j in range(3):
        expected = Polynomial.zero(FAMILY_VARS)
        for i in range(3):
            expected = expected + outer.partial(i).compose(inner) * inner[i].partial(j)
        assert composed.partial(j) == expected


@given(polys)
def test_print_parse_round_trip(p):
    assert parse_poly(str(p)) == p


@pytest.mark.parametrize("n,q", [(1, 1), (2, 1), (1, 3), (4, 4)])
def test_family_print_parse_round_trip(n, q):
    f = family(n, q)
    assert parse_poly(str(f)) == f


points = st.tuples(
    *(
        st.complex_numbers(
            max_magnitude=1.5, allow_nan=False, allow_infinity=False
        )
        for _ in range(3)
    )
)


@given(polys, points)
def test_finite_differences_match_the_partials(p, point):
    h = 1e-5
    for i in range(3):
        exact = p.partial(i).evaluate(point)
        shifted = list(point)
        shifted[i] = point[i] + h
        up = p.evaluate(shifted)
        shifted[i] = point[i] - h
        down = p.evaluate(shifted)
        fd = (up - down) / (2 * h)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


# -- identity and automorphism reports -------------------------------------------


@pytest.mark.parametrize("n,q", [(1, 1), (2, 1), (1, 2), (3, 3)])
def test_euler_identity_residual_vanishes(n, q):
    assert euler_identity_residual(n, q).is_zero


def test_euler_identity_residual_detects_mutation():
    n, q = 2, 2
    mutated = family(n, q) - X ** (2 * n + 1) * Y ** (2 * q)
    assert not euler_identity_residual(n, q, f=mutated).is_zero


@pytest.mark.parametrize("n,q", [(1, 1), (2, 2)])
def test_automorphism_report_passes(n, q):
    report = verify_automorphism(n, q)
    assert report.ok
    assert report.failures == ()
    assert set(report.checks) == {
        "first_coordinate",
        "straightened",
        "right_inverse",
        "left_inverse",
    }
    assert report.straightened == X + Y * Z
    assert report.forward.compose(report.inverse) == PolyMap.identity(FAMILY_VARS)


def test_automorphism_report_fails_on_mutation():
    n, q = 1, 1
    mutated = family(n, q) - X ** (2 * n + 1) * Y ** (2 * q)
    report = verify_automorphism(n, q, f_override=mutated)
    assert not report.ok
    assert "first_coordinate" in report.failures


# -- cubic factorizations ----------------------------------------------------------


def test_dfdx_cubic_deflation_n1():
    report = cubic_root_check("dfdx", 1)
    T = Polynomial.variable("T", ("T",))
    assert report.cubic == 1 - 9 * T**2 + 8 * T**3
    assert report.one_is_root
    assert report.remainder.is_zero
    assert report.quadratic == Polynomial(("T",), {(0,): -1, (1,): -1, (2,): 8})
    expected = sorted(((1 + 33**0.5) / 16, (1 - 33**0.5) / 16))
    got = sorted(r.real for r in report.roots)
    assert got == pytest.approx(expected, abs=1e-14)
    assert all(res <= 1e-12 for res in report.residuals)


def test_euler_cubic_deflation_q1():
    report = cubic_root_check("euler", 1)
    T = Polynomial.variable("T", ("T",))
    assert report.cubic == 1 + 3 * T**2 - 4 * T**3
    assert report.one_is_root
    assert report.quadratic == Polynomial(("T",), {(0,): -1, (1,): -1, (2,): -4})
    assert all(res <= 1e-12 for res in report.residuals)


@pytest.mark.parametrize("kind,param", [("dfdx", 10), ("euler", 7)])
def test_one_is_always_a_root(kind, param):
    report = cubic_root_check(kind, param)
    assert report.one_is_root
    assert all(res <= 1e-12 for res in report.residuals)


def test_cubic_root_check_rejects_bad_input():
    with pytest.raises(InputError):
        cubic_root_check("other", 1)
    with pytest.raises(InputError):
        cubic_root_check("dfdx", 0)
