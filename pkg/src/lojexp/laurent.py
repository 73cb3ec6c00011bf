"""Truncated Laurent series in one parameter t.

A series is stored as a base exponent plus a fixed-length window of
coefficients for t^base, t^(base+1), ...  Normalization strips leading zero
coefficients (shifting the base and zero-filling the tail), so `base` is the
order of a nonzero series.  An all-zero window is *treated as* the zero
series: within truncated arithmetic nothing below t^(base+window) can
distinguish it from a tail we cannot see, and every consumer documents its
verdicts as "within the window".

Two coefficient modes: "exact" (GaussianRational) and "approx" (complex).
The parameter t is taken real and positive, so conjugation acts on
coefficients only.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .errors import DimensionError, InputError
from .gaussian import GaussianRational
from .polyring import Polynomial

DEFAULT_WINDOW = 64

MODES = ("exact", "approx")


def _coerce_coeff(value, mode: str):
    if mode == "exact":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise InputError(f"exact series coefficients must be rational, got {type(value).__name__}")
        return GaussianRational(value)
    if isinstance(value, GaussianRational):
        return value.to_complex()
    if isinstance(value, bool) or not isinstance(value, (int, float, complex, Fraction)):
        raise InputError(f"approx series coefficients must be numeric, got {type(value).__name__}")
    return complex(value)


class LaurentSeries:
    __slots__ = ("base", "coeffs", "mode")

    base: int
    coeffs: tuple
    mode: str

    def __init__(self, base: int, coeffs: Sequence, mode: str = "exact"):
        if mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {mode!r}")
        if not coeffs:
            raise InputError("series window must be non-empty")
        vals = [_coerce_coeff(c, mode) for c in coeffs]
        lead = 0
        while lead < len(vals) and not vals[lead]:
            lead += 1
        if lead == len(vals):
            base = 0
            zero = _coerce_coeff(0, mode)
            vals = [zero] * len(vals)
        elif lead:
            zero = _coerce_coeff(0, mode)
            base += lead
            vals = vals[lead:] + [zero] * lead
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "coeffs", tuple(vals))
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentSeries is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, window: int = DEFAULT_WINDOW, mode: str = "exact") -> "LaurentSeries":
        return cls(0, [0] * window, mode)

    @classmethod
    def one(cls, window: int = DEFAULT_WINDOW, mode: str = "exact") -> "LaurentSeries":
        return cls.monomial(0, window=window, mode=mode)

    @classmethod
    def monomial(
        cls, exponent: int, coeff=1, window: int = DEFAULT_WINDOW, mode: str = "exact"
    ) -> "LaurentSeries":
        vals = [0] * window
        vals[0] = coeff
        return cls(exponent, vals, mode)

    @classmethod
    def from_dict(
        cls, table: Mapping[int, object], window: int = DEFAULT_WINDOW, mode: str = "exact"
    ) -> "LaurentSeries":
        entries = {int(k): v for k, v in table.items()}
        entries = {k: v for k, v in entries.items() if _coerce_coeff(v, mode)}
        if not entries:
            return cls.zero(window, mode)
        lo, hi = min(entries), max(entries)
        if hi - lo >= window:
            raise InputError(
                f"terms span t^{lo}..t^{hi}, which does not fit in a window of {window}"
            )
        vals = [0] * window
        for k, v in entries.items():
            vals[k - lo] = v
        return cls(lo, vals, mode)

    # -- structure -----------------------------------------------------------

    @property
    def window(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def ord(self) -> int | None:
        """Order (lowest exponent with a nonzero coefficient), None for zero."""
        return None if self.is_zero else self.base

    @property
    def lead(self):
        """Leading coefficient, None for the zero series."""
        return None if self.is_zero else self.coeffs[0]

    def coeff(self, exponent: int):
        """Coefficient of t^exponent. Exponents past the window are unknown."""
        if self.is_zero:
            return self.coeffs[0]
        idx = exponent - self.base
        if idx < 0:
            return _coerce_coeff(0, self.mode)
        if idx >= self.window:
            raise InputError(f"coefficient of t^{exponent} lies beyond the window")
        return self.coeffs[idx]

    def _known(self, exponent: int):
        """Like coeff() but only called where the window is guaranteed to cover."""
        idx = exponent - self.base
        if idx < 0:
            return _coerce_coeff(0, self.mode)
        return self.coeffs[idx]

    def _compat(self, other: "LaurentSeries") -> None:
        if self.window != other.window or self.mode != other.mode:
            raise InputError(
                f"window/mode mismatch: ({self.window}, {self.mode}) vs ({other.window}, {other.mode})"
            )

    # -- arithmetic -------------------------------------------------------------

    def _is_scalar(self, value) -> bool:
        if isinstance(value, bool):
            return False
        if self.mode == "exact":
            return isinstance(value, (int, Fraction, GaussianRational))
        return isinstance(value, (int, float, complex, Fraction, GaussianRational))

    def scale(self, value) -> "LaurentSeries":
        c = _coerce_coeff(value, self.mode)
        if not c:
            return LaurentSeries.zero(self.window, self.mode)
        return LaurentSeries(self.base, [c * v for v in self.coeffs], self.mode)

    def __add__(self, other):
        if self._is_scalar(other):
            other = LaurentSeries.monomial(0, other, window=self.window, mode=self.mode)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._compat(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.base, other.base)
        vals = [self._known(lo + j) + other._known(lo + j) for j in range(self.window)]
        return LaurentSeries(lo, vals, self.mode)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.base, [-v for v in self.coeffs], self.mode)

    def __sub__(self, other):
        if self._is_scalar(other):
            other = LaurentSeries.monomial(0, other, window=self.window, mode=self.mode)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        if self._is_scalar(other):
            return LaurentSeries.monomial(0, other, window=self.window, mode=self.mode) - self
        return NotImplemented

    def __mul__(self, other):
        if self._is_scalar(other):
            return self.scale(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._compat(other)
        if self.is_zero or other.is_zero:
            return LaurentSeries.zero(self.window, self.mode)
        zero = _coerce_coeff(0, self.mode)
        vals = [zero] * self.window
        for a, ca in enumerate(self.coeffs):
            if not ca:
                continue
            for b in range(self.window - a):
                cb = other.coeffs[b]
                if cb:
                    vals[a + b] = vals[a + b] + ca * cb
        return LaurentSeries(self.base + other.base, vals, self.mode)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            raise InputError("series powers must be non-negative; divide instead")
        out = LaurentSeries.one(self.window, self.mode)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other):
        if self._is_scalar(other):
            c = _coerce_coeff(other, self.mode)
            if not c:
                raise ZeroDivisionError("division by zero scalar")
            if self.mode == "exact":
                return self.scale(GaussianRational(1) / c)
            return self.scale(1.0 / c)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._compat(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a series that is zero within its window")
        if self.is_zero:
            return LaurentSeries.zero(self.window, self.mode)
        a = self.coeffs
        b = other.coeffs
        inv_lead = (GaussianRational(1) / b[0]) if self.mode == "exact" else (1.0 / b[0])
        q: list = []
        for j in range(self.window):
            acc = a[j]
            for m in range(1, j + 1):
                if b[m] and q[j - m]:
                    acc = acc - b[m] * q[j - m]
            q.append(acc * inv_lead)
        return LaurentSeries(self.base - other.base, q, self.mode)

    def __rtruediv__(self, other):
        if self._is_scalar(other):
            return LaurentSeries.monomial(0, other, window=self.window, mode=self.mode) / self
        return NotImplemented

    def conjugate(self) -> "LaurentSeries":
        """Coefficientwise conjugate (the parameter is real and positive)."""
        return LaurentSeries(self.base, [v.conjugate() for v in self.coeffs], self.mode)

    def truncate(self, window: int) -> "LaurentSeries":
        if window < 1 or window > self.window:
            raise InputError(f"cannot truncate window {self.window} to {window}")
        return LaurentSeries(self.base, self.coeffs[:window], self.mode)

    # -- comparison / display ------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.base == other.base
            and self.window == other.window
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __hash__(self):
        return hash((self.mode, self.base, self.coeffs))

    def __str__(self):
        return format_series(self)

    def __repr__(self):
        return f"LaurentSeries({format_series(self, max_terms=6)!r})"


def _coeff_text(value, mode: str) -> tuple[str, str, bool]:
    """(sign, unsigned body, body is the unit 1) for one coefficient."""
    if mode == "exact":
        from .polyring import _coeff_sign_body

        return _coeff_sign_body(value)
    if value.imag == 0.0:
        sign = "-" if value.real < 0 else "+"
        mag = abs(value.real)
        body = repr(int(mag)) if mag == int(mag) else repr(mag)
        return sign, body, mag == 1.0
    return "+", f"({value})", False


def format_series(series: LaurentSeries, max_terms: int | None = None) -> str:
    if series.is_zero:
        return "0"
    pieces: list[str] = []
    shown = 0
    for j, value in enumerate(series.coeffs):
        if not value:
            continue
        if max_terms is not None and shown >= max_terms:
            pieces.append(" + ...")
            break
        exponent = series.base + j
        sign, body, unit = _coeff_text(value, series.mode)
        if exponent == 0:
            text = body
        else:
            mono = "t" if exponent == 1 else f"t^{exponent}"
            text = mono if unit else f"{body}*{mono}"
        if not pieces:
            pieces.append(text if sign == "+" else f"-{text}")
        else:
            pieces.append(f" {sign} {text}")
        shown += 1
    else:
        pieces.append(f" + O(t^{series.base + series.window})")
    return "".join(pieces)


def parse_series(
    text: str, window: int = DEFAULT_WINDOW, mode: str = "exact"
) -> LaurentSeries:
    """Parse a Laurent polynomial in t (negative exponents allowed)."""
    from .parsing import parse_table

    table = parse_table(text, ("t",), allow_negative=True)
    return LaurentSeries.from_dict({mono[0]: coeff for mono, coeff in table.items()}, window, mode)


def vector_order(components: Sequence[LaurentSeries]) -> int | None:
    """min ord over the components; None when every component is zero."""
    if not components:
        raise InputError("vector_order needs at least one component")
    head = components[0]
    orders = []
    for comp in components:
        head._compat(comp)
        if comp.ord is not None:
            orders.append(comp.ord)
    return min(orders) if orders else None


def compose_poly(g: Polynomial, components: Sequence[LaurentSeries]) -> LaurentSeries:
    """Evaluate the polynomial g along a tuple of series, one per variable."""
    if len(components) != len(g.vars):
        raise DimensionError(f"curve has {len(components)} components, expected {len(g.vars)}")
    head = components[0]
    for comp in components:
        head._compat(comp)
    window, mode = head.window, head.mode
    maxes = [0] * len(g.vars)
    for mono in g.terms:
        for i, e in enumerate(mono):
            if e > maxes[i]:
                maxes[i] = e
    rows: list[list[LaurentSeries]] = []
    for i, top in enumerate(maxes):
        row = [LaurentSeries.one(window, mode)]
        for _ in range(top):
            row.append(row[-1] * components[i])
        rows.append(row)
    total = LaurentSeries.zero(window, mode)
    for mono, coeff in g.sorted_terms():
        term: LaurentSeries | None = None
        for i, e in enumerate(mono):
            if e:
                term = rows[i][e] if term is None else term * rows[i][e]
        if term is None:
            term = LaurentSeries.one(window, mode)
        total = total + term.scale(coeff)
    return total
