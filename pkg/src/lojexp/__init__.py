"""Curve certificates and sphere estimates for polynomial gradient decay
at infinity.

Exact layer: Gaussian-rational polynomials, truncated Laurent series, and
curve reports (exponents, Malgrange / quasitameness certificates, the
scaled-gradient contradiction trace).  Numeric layer: deterministic
multi-start sphere minimization for phi(r) = min ||grad g|| and its log-log
slope, plus Malgrange and scaled-gradient probes.
"""

__version__ = "0.1.0"

from .errors import (
    CurveError,
    DimensionError,
    InputError,
    LojexpError,
    NumericError,
    ParseError,
)
from .gaussian import GaussianRational
from .polyring import (
    AutomorphismReport,
    CubicRootReport,
    PolyMap,
    Polynomial,
    cubic_root_check,
    euler_identity_residual,
    family,
    parse_poly,
    verify_automorphism,
)
from .laurent import (
    DEFAULT_WINDOW,
    LaurentSeries,
    compose_poly,
    format_series,
    parse_series,
    vector_order,
)
from .curvelab import (
    ContradictionTrace,
    Curve,
    CurveReport,
    MalgrangeCertificate,
    MsetResidualReport,
    QuasitameCertificate,
    ValueLimit,
    contradiction_trace,
    curve_exponent,
    curve_order,
    grad_along,
    malgrange_certificate,
    monomial_curve,
    mset_residual,
    parse_curve,
    quasitame_discrepancy,
    witness_curve,
)
from .sphereopt import (
    MalgrangeProbe,
    MtameProbe,
    OptConfig,
    PhiSample,
    SlopeFit,
    estimate_exponent,
    fit_loglog,
    malgrange_probe,
    mtame_probe,
    phi_at,
)
from .certify import CellResult, CertificateMatrix, run_cell, run_certificate_matrix

__all__ = [
    "__version__",
    "LojexpError",
    "InputError",
    "ParseError",
    "CurveError",
    "DimensionError",
    "NumericError",
    "GaussianRational",
    "Polynomial",
    "PolyMap",
    "parse_poly",
    "family",
    "euler_identity_residual",
    "verify_automorphism",
    "AutomorphismReport",
    "cubic_root_check",
    "CubicRootReport",
    "LaurentSeries",
    "DEFAULT_WINDOW",
    "parse_series",
    "format_series",
    "compose_poly",
    "vector_order",
    "Curve",
    "monomial_curve",
    "witness_curve",
    "parse_curve",
    "curve_order",
    "grad_along",
    "curve_exponent",
    "CurveReport",
    "ValueLimit",
    "malgrange_certificate",
    "MalgrangeCertificate",
    "quasitame_discrepancy",
    "QuasitameCertificate",
    "mset_residual",
    "MsetResidualReport",
    "contradiction_trace",
    "ContradictionTrace",
    "OptConfig",
    "PhiSample",
    "SlopeFit",
    "phi_at",
    "fit_loglog",
    "estimate_exponent",
    "malgrange_probe",
    "MalgrangeProbe",
    "mtame_probe",
    "MtameProbe",
    "run_cell",
    "run_certificate_matrix",
    "CellResult",
    "CertificateMatrix",
]
