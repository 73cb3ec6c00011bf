"""Sparse multivariate polynomials over the Gaussian rationals.

This module carries the exact side of the package: the two-parameter family
`family(n, q)`, its Euler-type rewriting, the shear automorphism that
straightens each member to x + y*z, and the exact cubic factorizations used
by the root reports.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DimensionError, InputError
from .gaussian import GaussianRational

Monomial = tuple[int, ...]

_SCALARS = (int, Fraction, GaussianRational)


def _canonical(terms: Mapping[Monomial, object], nvars: int) -> dict[Monomial, GaussianRational]:
    out: dict[Monomial, GaussianRational] = {}
    for mono, coeff in terms.items():
        if len(mono) != nvars:
            raise DimensionError(f"monomial {mono} has {len(mono)} exponents, expected {nvars}")
        if any(not isinstance(e, int) or e < 0 for e in mono):
            raise InputError(f"monomial {mono} has a negative or non-integer exponent")
        c = GaussianRational.coerce(coeff)
        if not c.is_zero:
            out[tuple(mono)] = c
    return out


class Polynomial:
    """Immutable sparse polynomial with exact coefficients."""

    __slots__ = ("vars", "terms")

    vars: tuple[str, ...]
    terms: dict[Monomial, GaussianRational]

    def __init__(self, vars: Sequence[str], terms: Mapping[Monomial, object] | None = None):
        object.__setattr__(self, "vars", tuple(vars))
        object.__setattr__(self, "terms", _canonical(terms or {}, len(self.vars)))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, vars: Sequence[str]) -> "Polynomial":
        return cls(vars)

    @classmethod
    def constant(cls, value, vars: Sequence[str]) -> "Polynomial":
        return cls(vars, {(0,) * len(vars): GaussianRational.coerce(value)})

    @classmethod
    def variable(cls, name: str, vars: Sequence[str]) -> "Polynomial":
        vars = tuple(vars)
        if name not in vars:
            raise InputError(f"unknown variable {name!r}")
        mono = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, {mono: 1})

    @classmethod
    def variables(cls, vars: Sequence[str]) -> tuple["Polynomial", ...]:
        return tuple(cls.variable(name, vars) for name in vars)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(not any(mono) for mono in self.terms)

    def degree(self) -> int | None:
        """Total degree, or None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(mono) for mono in self.terms)

    def sorted_terms(self) -> list[tuple[Monomial, GaussianRational]]:
        """Terms in canonical print order (last variable varies slowest)."""
        return sorted(self.terms.items(), key=lambda kv: tuple(reversed(kv[0])))

    def coefficient(self, mono: Monomial) -> GaussianRational:
        return self.terms.get(tuple(mono), GaussianRational(0))

    # -- ring operations ----------------------------------------------------

    def _coerce_operand(self, other) -> "Polynomial | None":
        if isinstance(other, Polynomial):
            if other.vars != self.vars:
                raise DimensionError(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, bool):
            return None
        if isinstance(other, _SCALARS):
            return Polynomial.constant(other, self.vars)
        return None

    def __add__(self, other):
        o = self._coerce_operand(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for mono, coeff in o.terms.items():
            s = terms.get(mono, GaussianRational(0)) + coeff
            if s.is_zero:
                terms.pop(mono, None)
            else:
                terms[mono] = s
        return Polynomial(self.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce_operand(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce_operand(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce_operand(other)
        if o is None:
            return NotImplemented
        terms: dict[Monomial, GaussianRational] = {}
        for ma, ca in self.terms.items():
            for mb, cb in o.terms.items():
                mono = tuple(x + y for x, y in zip(ma, mb))
                s = terms.get(mono, GaussianRational(0)) + ca * cb
                if s.is_zero:
                    terms.pop(mono, None)
                else:
                    terms[mono] = s
        return Polynomial(self.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            raise InputError("polynomial powers must be non-negative")
        out = Polynomial.constant(1, self.vars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, bool):
            return NotImplemented
        if isinstance(other, _SCALARS):
            value = GaussianRational.coerce(other)
            if value.is_zero:
                return self.is_zero
            return self.terms == {(0,) * len(self.vars): value}
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # -- calculus ------------------------------------------------------------

    def _var_index(self, var: int | str) -> int:
        if isinstance(var, str):
            try:
                return self.vars.index(var)
            except ValueError:
                raise InputError(f"unknown variable {var!r}") from None
        if not 0 <= var < len(self.vars):
            raise DimensionError(f"variable index {var} out of range for {self.vars}")
        return var

    def partial(self, var: int | str) -> "Polynomial":
        idx = self._var_index(var)
        terms: dict[Monomial, GaussianRational] = {}
        for mono, coeff in self.terms.items():
            e = mono[idx]
            if e == 0:
                continue
            lowered = mono[:idx] + (e - 1,) + mono[idx + 1 :]
            terms[lowered] = terms.get(lowered, GaussianRational(0)) + coeff * e
        return Polynomial(self.vars, terms)

    def partials(self) -> tuple["Polynomial", ...]:
        return tuple(self.partial(i) for i in range(len(self.vars)))

    # -- evaluation -----------------------------------------------------------

    def _power_rows(self, point: Sequence[complex]) -> list[list[complex]]:
        if len(point) != len(self.vars):
            raise DimensionError(f"point has {len(point)} coordinates, expected {len(self.vars)}")
        maxes = [0] * len(self.vars)
        for mono in self.terms:
            for i, e in enumerate(mono):
                if e > maxes[i]:
                    maxes[i] = e
        rows: list[list[complex]] = []
        for i, top in enumerate(maxes):
            row = [1.0 + 0.0j]
            v = complex(point[i])
            for _ in range(top):
                row.append(row[-1] * v)
            rows.append(row)
        return rows

    def evaluate(self, point: Sequence[complex]) -> complex:
        rows = self._power_rows(point)
        total = 0.0 + 0.0j
        for mono, coeff in self.sorted_terms():
            prod = coeff.to_complex()
            for i, e in enumerate(mono):
                if e:
                    prod *= rows[i][e]
            total += prod
        return total

    def gradient(self, point: Sequence[complex]) -> tuple[complex, ...]:
        """Conjugated gradient (conj of each partial) at `point`."""
        return tuple(p.evaluate(point).conjugate() for p in self.partials())

    def compose(self, components: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute `components[i]` for the i-th variable."""
        if len(components) != len(self.vars):
            raise DimensionError(
                f"substitution needs {len(self.vars)} components, got {len(components)}"
            )
        target = components[0].vars if components else self.vars
        for comp in components:
            if comp.vars != target:
                raise DimensionError("substitution components use mismatched variables")
        maxes = [0] * len(self.vars)
        for mono in self.terms:
            for i, e in enumerate(mono):
                if e > maxes[i]:
                    maxes[i] = e
        rows: list[list[Polynomial]] = []
        for i, top in enumerate(maxes):
            row = [Polynomial.constant(1, target)]
            for _ in range(top):
                row.append(row[-1] * components[i])
            rows.append(row)
        total = Polynomial.zero(target)
        for mono, coeff in self.sorted_terms():
            prod = Polynomial.constant(coeff, target)
            for i, e in enumerate(mono):
                if e:
                    prod = prod * rows[i][e]
            total = total + prod
        return total

    # -- printing ---------------------------------------------------------------

    def _mono_str(self, mono: Monomial) -> str:
        parts = []
        for name, e in zip(self.vars, mono):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        return "*".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces: list[str] = []
        for mono, coeff in self.sorted_terms():
            sign, body, unit = _coeff_sign_body(coeff)
            mono_s = self._mono_str(mono)
            if not mono_s:
                text = body
            elif unit:
                text = mono_s
            else:
                text = f"{body}*{mono_s}"
            if not pieces:
                pieces.append(text if sign == "+" else f"-{text}")
            else:
                pieces.append(f" {sign} {text}")
        return "".join(pieces)

    def __repr__(self):
        return f"Polynomial({self.vars!r}, {str(self)!r})"


def _coeff_sign_body(coeff: GaussianRational) -> tuple[str, str, bool]:
    """Sign, unsigned body, and whether the body is 1 (omitted before a monomial)."""
    if not coeff.im:
        sign = "-" if coeff.re < 0 else "+"
        mag = abs(coeff.re)
        return sign, str(mag), mag == 1
    if not coeff.re:
        sign = "-" if coeff.im < 0 else "+"
        mag = abs(coeff.im)
        return sign, "i" if mag == 1 else f"{mag}i", False
    return "+", f"({coeff})", False


def parse_poly(text: str, vars: Sequence[str] = ("x", "y", "z")) -> Polynomial:
    """Parse a polynomial literal over `vars` (no negative exponents)."""
    from .parsing import parse_table

    return Polynomial(vars, parse_table(text, tuple(vars)))


@dataclass(frozen=True)
class PolyMap:
    """A polynomial self-map of affine space, one component per variable."""

    components: tuple[Polynomial, ...]

    def __post_init__(self):
        if not self.components:
            raise InputError("a polynomial map needs at least one component")
        vars = self.components[0].vars
        if len(self.components) != len(vars):
            raise DimensionError(
                f"map has {len(self.components)} components for {len(vars)} variables"
            )
        for comp in self.components:
            if comp.vars != vars:
                raise DimensionError("map components use mismatched variables")

    @property
    def vars(self) -> tuple[str, ...]:
        return self.components[0].vars

    @classmethod
    def identity(cls, vars: Sequence[str]) -> "PolyMap":
        return cls(Polynomial.variables(vars))

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """(self . inner)(p) = self(inner(p))."""
        return PolyMap(tuple(c.compose(inner.components) for c in self.components))

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


# -- the two-parameter family ----------------------------------------------------

FAMILY_VARS = ("x", "y", "z")


def _check_params(n: int, q: int) -> None:
    for name, value in (("n", n), ("q", q)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise InputError(f"{name} must be >= 1, got {value!r}")


def family(n: int, q: int) -> Polynomial:
    """x - 3*x^(2n+1)*y^(2q) + 2*x^(3n+1)*y^(3q) + y*z."""
    _check_params(n, q)
    return Polynomial(
        FAMILY_VARS,
        {
            (1, 0, 0): 1,
            (2 * n + 1, 2 * q, 0): -3,
            (3 * n + 1, 3 * q, 0): 2,
            (0, 1, 1): 1,
        },
    )


def euler_identity_residual(n: int, q: int, f: Polynomial | None = None) -> Polynomial:
    """f - (y*df/dy + x*(1 + (6q-3)*x^2n*y^2q - (6q-2)*x^3n*y^3q)).

    Zero exactly when `f` is the family member; the optional `f` argument
    substitutes a candidate (used as a mutation check).
    """
    _check_params(n, q)
    if f is None:
        f = family(n, q)
    elif f.vars != FAMILY_VARS:
        raise DimensionError(f"expected variables {FAMILY_VARS}, got {f.vars}")
    x, y, _ = Polynomial.variables(FAMILY_VARS)
    bracket = (
        Polynomial.constant(1, FAMILY_VARS)
        + (6 * q - 3) * x ** (2 * n) * y ** (2 * q)
        - (6 * q - 2) * x ** (3 * n) * y ** (3 * q)
    )
    return f - (y * f.partial("y") + x * bracket)


@dataclass(frozen=True)
class AutomorphismReport:
    """Exact verification that the shear straightens a family member to x + y*z."""

    n: int
    q: int
    ok: bool
    zpoly: Polynomial
    straightened: Polynomial
    forward: PolyMap
    inverse: PolyMap
    checks: dict[str, bool]

    @property
    def failures(self) -> tuple[str, ...]:
        return tuple(name for name, passed in self.checks.items() if not passed)


def verify_automorphism(n: int, q: int, f_override: Polynomial | None = None) -> AutomorphismReport:
    """Check f = x + y*Z, the inverse shear, and both inverse compositions.

    Z = z - 3*x^(2n+1)*y^(2q-1) + 2*x^(3n+1)*y^(3q-1); the forward map
    (x + y*Z, y, Z) carries (x, y, z) to (f, y, Z) and has the written-out
    polynomial inverse (x - y*z, y, z + s(x - y*z, y)).
    """
    _check_params(n, q)
    f = family(n, q) if f_override is None else f_override
    if f.vars != FAMILY_VARS:
        raise DimensionError(f"expected variables {FAMILY_VARS}, got {f.vars}")
    x, y, z = Polynomial.variables(FAMILY_VARS)

    shear = 3 * x ** (2 * n + 1) * y ** (2 * q - 1) - 2 * x ** (3 * n + 1) * y ** (3 * q - 1)
    zpoly = z - shear
    forward = PolyMap((x + y * zpoly, y, zpoly))

    xback = x - y * z
    inverse = PolyMap(
        (
            xback,
            y,
            z + 3 * xback ** (2 * n + 1) * y ** (2 * q - 1) - 2 * xback ** (3 * n + 1) * y ** (3 * q - 1),
        )
    )

    straightened = f.compose((x, y, z + shear))
    identity = PolyMap.identity(FAMILY_VARS)
    checks = {
        "first_coordinate": f == x + y * zpoly,
        "straightened": straightened == x + y * z,
        "right_inverse": forward.compose(inverse) == identity,
        "left_inverse": inverse.compose(forward) == identity,
    }
    return AutomorphismReport(
        n=n,
        q=q,
        ok=all(checks.values()),
        zpoly=zpoly,
        straightened=straightened,
        forward=forward,
        inverse=inverse,
        checks=checks,
    )


@dataclass(frozen=True)
class CubicRootReport:
    """Exact deflation of one of the two bookkeeping cubics at T = 1."""

    kind: str
    param: int
    cubic: Polynomial
    one_is_root: bool
    remainder: GaussianRational
    quadratic: Polynomial
    roots: tuple[complex, ...]
    residuals: tuple[float, ...]


CUBIC_KINDS = ("dfdx", "euler")


def cubic_root_check(kind: str, param: int) -> CubicRootReport:
    """Factor T = 1 out of a family cubic and solve the quadratic cofactor.

    kind "dfdx":  1 - (6n+3)*T^2 + (6n+2)*T^3   (param = n)
    kind "euler": 1 + (6q-3)*T^2 - (6q-2)*T^3   (param = q)
    """
    if kind not in CUBIC_KINDS:
        raise InputError(f"unknown cubic kind {kind!r}; expected one of {CUBIC_KINDS}")
    if not isinstance(param, int) or isinstance(param, bool) or param < 1:
        raise InputError(f"param must be a positive integer, got {param!r}")
    if kind == "dfdx":
        a0, a1, a2, a3 = Fraction(1), Fraction(0), Fraction(-(6 * param + 3)), Fraction(6 * param + 2)
    else:
        a0, a1, a2, a3 = Fraction(1), Fraction(0), Fraction(6 * param - 3), Fraction(-(6 * param - 2))
    cubic = Polynomial(("T",), {(0,): a0, (1,): a1, (2,): a2, (3,): a3})

    # Synthetic division by (T - 1): exact.
    b2 = a3
    b1 = a2 + b2
    b0 = a1 + b1
    rem = a0 + b0
    remainder = GaussianRational(rem)
    quadratic = Polynomial(("T",), {(0,): b0, (1,): b1, (2,): b2})

    disc = complex(b1 * b1 - 4 * b2 * b0)
    sq = cmath.sqrt(disc)
    roots = ((-complex(b1) + sq) / (2 * complex(b2)), (-complex(b1) - sq) / (2 * complex(b2)))
    residuals = tuple(abs(cubic.evaluate((r,))) for r in roots)
    return CubicRootReport(
        kind=kind,
        param=param,
        cubic=cubic,
        one_is_root=not remainder,
        remainder=remainder,
        quadratic=quadratic,
        roots=roots,
        residuals=residuals,
    )
