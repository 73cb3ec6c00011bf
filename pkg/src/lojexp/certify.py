"""Exact certificate matrix over a grid of family parameters.

For each (n, q) this runs every exact certificate the package provides and
records pass/fail per check.  `mutate=True` perturbs one family coefficient
(-3 becomes -4) before running, as a negative control: a correct matrix must
notice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .curvelab import (
    contradiction_trace,
    curve_exponent,
    malgrange_certificate,
    quasitame_discrepancy,
    witness_curve,
)
from .errors import InputError
from .laurent import DEFAULT_WINDOW
from .polyring import (
    Polynomial,
    cubic_root_check,
    euler_identity_residual,
    family,
    verify_automorphism,
)

_CUBIC_TOL = 1e-12
_TRACE_TOL = 1e-10

CHECK_NAMES = (
    "witness_exponent",
    "euler_identity",
    "automorphism",
    "cubic_dfdx",
    "cubic_euler",
    "malgrange",
    "quasitame",
    "escape_trace",
)


@dataclass(frozen=True)
class CellResult:
    n: int
    q: int
    checks: dict[str, bool]
    passed: bool

    @property
    def failed_checks(self) -> tuple[str, ...]:
        return tuple(name for name, ok in self.checks.items() if not ok)


@dataclass(frozen=True)
class CertificateMatrix:
    cells: tuple[CellResult, ...]
    rho0: complex
    all_pass: bool


def _mutated(n: int, q: int) -> Polynomial:
    # Coefficient -3 of x^(2n+1) y^(2q) becomes -4.
    x, y, _ = Polynomial.variables(family(n, q).vars)
    return family(n, q) - x ** (2 * n + 1) * y ** (2 * q)


def _check_range(name: str, lo: int, hi: int) -> None:
    for label, v in ((f"{name}_min", lo), (f"{name}_max", hi)):
        if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= 8:
            raise InputError(f"{label} must be an integer in 1..8, got {v!r}")
    if lo > hi:
        raise InputError(f"{name}_min {lo} exceeds {name}_max {hi}")


def run_cell(
    n: int, q: int, rho0: complex = 1.0, mutate: bool = False, window: int = DEFAULT_WINDOW
) -> CellResult:
    f = _mutated(n, q) if mutate else family(n, q)
    psi = witness_curve(n, q, window=window)
    checks: dict[str, bool] = {}

    report = curve_exponent(f, psi)
    checks["witness_exponent"] = report.exponent == Fraction(-n, q)

    checks["euler_identity"] = euler_identity_residual(n, q, f=f).is_zero
    checks["automorphism"] = verify_automorphism(n, q, f_override=f).ok

    for kind, param in (("dfdx", n), ("euler", q)):
        rep = cubic_root_check(kind, param)
        checks[f"cubic_{kind}"] = rep.one_is_root and max(rep.residuals) <= _CUBIC_TOL

    cert = malgrange_certificate(f, psi)
    expected_fail = n > q
    checks["malgrange"] = cert.fails == expected_fail and (
        not expected_fail or cert.t0 == 0
    )

    qt = quasitame_discrepancy(f, psi)
    checks["quasitame"] = qt.not_quasitame and qt.discrepancy.is_zero

    trace = contradiction_trace(n, q, rho0=rho0, window=window)
    expected_rhs = -36.0 * n * q**3 * abs(complex(rho0)) ** 2
    checks["escape_trace"] = (
        trace.contradiction
        and abs(trace.lhs_lead - 1.0) <= _TRACE_TOL
        and abs(trace.rhs_lead - expected_rhs) <= _TRACE_TOL * abs(expected_rhs)
    )

    return CellResult(n=n, q=q, checks=checks, passed=all(checks.values()))


def run_certificate_matrix(
    n_min: int = 1,
    n_max: int = 4,
    q_min: int = 1,
    q_max: int = 4,
    rho0: complex = 1.0,
    mutate: bool = False,
    window: int = DEFAULT_WINDOW,
) -> CertificateMatrix:
    _check_range("n", n_min, n_max)
    _check_range("q", q_min, q_max)
    cells = tuple(
        run_cell(n, q, rho0=rho0, mutate=mutate, window=window)
        for n in range(n_min, n_max + 1)
        for q in range(q_min, q_max + 1)
    )
    return CertificateMatrix(
        cells=cells, rho0=complex(rho0), all_pass=all(c.passed for c in cells)
    )
