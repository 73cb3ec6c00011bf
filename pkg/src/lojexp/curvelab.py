"""Curve-based certificates: exponents along escaping curves, asymptotic
critical values, quasitameness discrepancies, and scaled-gradient residuals.

Curves are tuples of truncated Laurent series in t, read as t -> 0+:
a curve escapes to infinity when its order is negative.  Every "zero" or
"vanishes" verdict below means "within the series window"; the window is
part of each certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import CurveError, DimensionError, InputError
from .laurent import DEFAULT_WINDOW, LaurentSeries, compose_poly, parse_series, vector_order
from .polyring import FAMILY_VARS, Polynomial, family, _check_params


@dataclass(frozen=True)
class Curve:
    coords: tuple[LaurentSeries, ...]
    label: str = ""

    def __post_init__(self):
        if not self.coords:
            raise CurveError("a curve needs at least one coordinate")
        head = self.coords[0]
        for comp in self.coords:
            head._compat(comp)

    @property
    def window(self) -> int:
        return self.coords[0].window

    @property
    def mode(self) -> str:
        return self.coords[0].mode

    def __str__(self):
        inner = ", ".join(str(c) for c in self.coords)
        return f"({inner})"


def monomial_curve(
    exponents, window: int = DEFAULT_WINDOW, mode: str = "exact", label: str = ""
) -> Curve:
    """One monomial t^e per coordinate; None gives an identically zero coordinate."""
    coords = []
    for e in exponents:
        if e is None:
            coords.append(LaurentSeries.zero(window, mode))
        else:
            coords.append(LaurentSeries.monomial(int(e), 1, window=window, mode=mode))
    return Curve(tuple(coords), label=label)


def witness_curve(n: int, q: int, window: int = DEFAULT_WINDOW) -> Curve:
    """(t^-q, t^n, 0): the curve realizing exponent -n/q for family(n, q)."""
    _check_params(n, q)
    return monomial_curve((-q, n, None), window=window, label=f"psi(n={n},q={q})")


def _split_top_level(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, c in enumerate(text):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth < 0:
                raise InputError(f"unbalanced ')' in curve literal (at position {i})")
        elif c == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    if depth:
        raise InputError("unbalanced '(' in curve literal")
    parts.append(text[start:])
    return parts


def _encloses(body: str) -> bool:
    """True when body is a single (...) group, so the parens are decorative."""
    depth = 0
    for i, c in enumerate(body):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return i == len(body) - 1
    return False


def parse_curve(
    text: str, window: int = DEFAULT_WINDOW, mode: str = "exact", label: str = ""
) -> Curve:
    """Comma-separated Laurent polynomials in t, e.g. "t^-1, t, 0"."""
    body = text.strip()
    if body.startswith("(") and body.endswith(")") and _encloses(body):
        body = body[1:-1]
    parts = _split_top_level(body)
    coords = tuple(parse_series(part, window=window, mode=mode) for part in parts)
    return Curve(coords, label=label)


def curve_order(curve: Curve) -> int:
    """Order of the curve; negative means it escapes to infinity as t -> 0+."""
    o = vector_order(curve.coords)
    if o is None:
        raise CurveError("curve is identically zero within its window")
    return o


def grad_along(g: Polynomial, curve: Curve) -> tuple[LaurentSeries, ...]:
    """Conjugated gradient of g along the curve, one series per variable."""
    if len(curve.coords) != len(g.vars):
        raise DimensionError(f"curve has {len(curve.coords)} coordinates, expected {len(g.vars)}")
    return tuple(compose_poly(p, curve.coords).conjugate() for p in g.partials())


@dataclass(frozen=True)
class ValueLimit:
    """Limit of a series as t -> 0+: kind is "finite" or "infinite"."""

    kind: str
    value: object = None

    def __str__(self):
        return "infinity" if self.kind == "infinite" else str(self.value)


def value_limit_of(series: LaurentSeries) -> ValueLimit:
    o = series.ord
    if o is None or o > 0:
        return ValueLimit("finite", _zero_like(series))
    if o == 0:
        return ValueLimit("finite", series.lead)
    return ValueLimit("infinite", None)


def _zero_like(series: LaurentSeries):
    from .gaussian import GaussianRational

    return GaussianRational(0) if series.mode == "exact" else 0j


@dataclass(frozen=True)
class CurveReport:
    """Exponent certificate for g along one escaping curve."""

    curve: Curve
    ord_curve: int
    ord_grad: int | None
    exponent: Fraction | None
    value: ValueLimit
    malgrange_sum: int | None
    grad: tuple[LaurentSeries, ...]
    verdicts: dict[str, bool]


def curve_exponent(g: Polynomial, curve: Curve) -> CurveReport:
    """ord(grad g along p) / ord(p) for an escaping curve p.

    The quotient is an upper bound for the exponent at infinity; the gradient
    vanishing within the window is reported rather than treated as an error.
    """
    ord_p = curve_order(curve)
    if ord_p >= 0:
        raise CurveError(f"curve does not escape to infinity (order {ord_p} >= 0)")
    grad = grad_along(g, curve)
    ord_grad = vector_order(grad)
    exponent = None if ord_grad is None else Fraction(ord_grad, ord_p)
    value = value_limit_of(compose_poly(g, curve.coords))
    s = None if ord_grad is None else ord_grad + ord_p
    verdicts = {
        "escapes": True,
        "grad_zero_within_window": ord_grad is None,
        "value_finite": value.kind == "finite",
    }
    return CurveReport(
        curve=curve,
        ord_curve=ord_p,
        ord_grad=ord_grad,
        exponent=exponent,
        value=value,
        malgrange_sum=s,
        grad=grad,
        verdicts=verdicts,
    )


@dataclass(frozen=True)
class MalgrangeCertificate:
    """Whether the curve witnesses failure of the Malgrange condition.

    Failure needs |p|*|grad g| -> 0 (order sum positive, or gradient zero
    within the window) while g tends to the finite value t0.
    """

    fails: bool
    t0: object
    order_sum: int | None
    value: ValueLimit
    report: CurveReport
    detail: str


def malgrange_certificate(g: Polynomial, curve: Curve) -> MalgrangeCertificate:
    report = curve_exponent(g, curve)
    s = report.malgrange_sum
    finite = report.value.kind == "finite"
    fails = finite and (s is None or s > 0)
    if fails:
        t0 = report.value.value
        if s is None:
            detail = "gradient vanishes along the curve (within the window), so |p|*|grad| -> 0"
        else:
            detail = f"|p|*|grad| has order {s} > 0 while the value tends to {t0}"
    else:
        t0 = None
        if not finite:
            detail = "no certificate: the value escapes to infinity along the curve"
        else:
            detail = f"no certificate (s = {s})"
    return MalgrangeCertificate(
        fails=fails, t0=t0, order_sum=s, value=report.value, report=report, detail=detail
    )


@dataclass(frozen=True)
class QuasitameCertificate:
    """Discrepancy g(p) - sum_i p_i * (d_i g)(p) along an escaping curve.

    When the gradient tends to 0 along the curve (premise) and the
    discrepancy stays bounded as t -> 0+, the curve certifies that g is not
    quasitame.
    """

    premise_met: bool
    ord_grad: int | None
    discrepancy: LaurentSeries
    bounded: bool
    not_quasitame: bool
    report: CurveReport
    detail: str


def quasitame_discrepancy(g: Polynomial, curve: Curve) -> QuasitameCertificate:
    report = curve_exponent(g, curve)
    partial_values = [compose_poly(p, curve.coords) for p in g.partials()]
    d = compose_poly(g, curve.coords)
    for coord, pv in zip(curve.coords, partial_values):
        d = d - coord * pv
    premise = report.ord_grad is None or report.ord_grad > 0
    bounded = d.is_zero or d.ord >= 0
    nq = premise and bounded
    if nq:
        shape = "vanishes" if d.is_zero else f"has order {d.ord} >= 0"
        detail = f"gradient tends to 0 while g - <p, grad g> {shape}: not quasitame"
    elif not premise:
        detail = f"gradient does not tend to 0 along the curve (order {report.ord_grad})"
    else:
        detail = f"discrepancy is unbounded (order {d.ord})"
    return QuasitameCertificate(
        premise_met=premise,
        ord_grad=report.ord_grad,
        discrepancy=d,
        bounded=bounded,
        not_quasitame=nq,
        report=report,
        detail=detail,
    )


@dataclass(frozen=True)
class MsetResidualReport:
    """Least-squares residual of grad g(p) against the line through p.

    scaling is lambda*(t) = <grad, p> / <p, p> (Hermitian inner product);
    residual = grad - lambda* p.  A nonzero residual shows the curve leaves
    the set where grad g(x) is a complex multiple of x.
    """

    scaling: LaurentSeries
    residual: tuple[LaurentSeries, ...]
    residual_order: int | None
    avoids_mset: bool
    detail: str


def mset_residual(g: Polynomial, curve: Curve) -> MsetResidualReport:
    curve_order(curve)
    grad = grad_along(g, curve)
    num = None
    den = None
    for gi, pi in zip(grad, curve.coords):
        conj_pi = pi.conjugate()
        term_n = gi * conj_pi
        term_d = pi * conj_pi
        num = term_n if num is None else num + term_n
        den = term_d if den is None else den + term_d
    assert num is not None and den is not None
    lam = num / den
    residual = tuple(gi - lam * pi for gi, pi in zip(grad, curve.coords))
    r_ord = vector_order(residual)
    avoids = r_ord is not None
    if avoids:
        detail = f"residual has order {r_ord}: the curve leaves the scaled-gradient set"
    else:
        detail = "residual vanishes within the window: the curve stays in the scaled-gradient set"
    return MsetResidualReport(
        scaling=lam,
        residual=residual,
        residual_order=r_ord,
        avoids_mset=avoids,
        detail=detail,
    )


@dataclass(frozen=True)
class ContradictionTrace:
    """Order bookkeeping for the attempted scaled-gradient escape curve.

    An escape curve with x = t^-q and y = t^n (1 + rho0 t^gap) forces, through
    the three components of grad f = lambda * p, two series that must agree
    at order n: conj(y) with leading coefficient 1, and lambda * z with
    leading coefficient -36 n q^3 |rho0|^2 < 0.  No such curve exists.
    """

    n: int
    q: int
    rho0: complex
    ord_x: int
    ord_y: int
    gap: int
    ord_dfdx: int | None
    ord_lambda: int | None
    ord_z: int | None
    lhs_order: int | None
    rhs_order: int | None
    lhs_lead: complex
    rhs_lead: complex
    relations_hold: bool
    contradiction: bool
    verdict: str


def contradiction_trace(
    n: int, q: int, rho0: complex = 1.0, window: int = DEFAULT_WINDOW
) -> ContradictionTrace:
    _check_params(n, q)
    rho = complex(rho0)
    if rho == 0:
        raise InputError("rho0 must be nonzero (the ansatz needs a genuine correction term)")
    A, B = -q, n
    gap = B
    mode = "approx"
    # Every coefficient the trace reads sits within 2(n+q) offsets of a base.
    if window < 2 * (n + q) + 2:
        raise InputError(f"window {window} too small to resolve orders; need {2 * (n + q) + 2}")
    x = LaurentSeries.monomial(A, 1.0, window=window, mode=mode)
    y = LaurentSeries.from_dict({B: 1.0, B + gap: rho}, window=window, mode=mode)
    zero = LaurentSeries.zero(window, mode)

    f = family(n, q)
    z_var = Polynomial.variable("z", FAMILY_VARS)
    dfdx = compose_poly(f.partial("x"), (x, y, zero))
    # First component of grad f = lambda p fixes lambda.
    lam = dfdx.conjugate() / x
    # Second component fixes z; df/dy - z does not involve z.
    s_poly = f.partial("y") - z_var
    z = (lam * y).conjugate() - compose_poly(s_poly, (x, y, zero))
    # Third component must then match conj(y) against lambda * z.
    lhs = y.conjugate()
    rhs = lam * z

    relations = (
        dfdx.ord == gap
        and lam.ord == gap - A
        and z.ord == A - B + gap
        and lhs.ord == B
        and rhs.ord == 2 * gap - B
    )
    lhs_lead = complex(lhs.lead) if lhs.lead is not None else 0j
    rhs_lead = complex(rhs.lead) if rhs.lead is not None else 0j
    contradiction = (
        relations
        and lhs.ord == rhs.ord
        and lhs_lead.real > 0
        and rhs_lead.real < 0
    )
    if contradiction:
        verdict = (
            f"orders match at t^{B} but leading coefficients disagree in sign: "
            f"{lhs_lead:.6g} vs {rhs_lead:.6g}; no escape curve of this shape stays "
            "in the scaled-gradient set"
        )
    else:
        verdict = "order relations did not close; trace inconclusive"
    return ContradictionTrace(
        n=n,
        q=q,
        rho0=rho,
        ord_x=A,
        ord_y=B,
        gap=gap,
        ord_dfdx=dfdx.ord,
        ord_lambda=lam.ord,
        ord_z=z.ord,
        lhs_order=lhs.ord,
        rhs_order=rhs.ord,
        lhs_lead=lhs_lead,
        rhs_lead=rhs_lead,
        relations_hold=relations,
        contradiction=contradiction,
        verdict=verdict,
    )
