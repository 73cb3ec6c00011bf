"""Numeric sphere scans: phi(r) = min ||grad g|| on ||x|| = r, log-log slope
fits, and probe minimizations for the Malgrange and scaled-gradient sets.

Points live on real spheres in R^(2m) (x = u[:m] + i u[m:]).  Each start is
polished by a damped least-squares (Levenberg) iteration in the sphere's
tangent space with renormalization back to the sphere; the Jacobians are
analytic (complex Hessian of g), assembled in double precision.  Residuals
and objective values are evaluated at `prec_bits` precision via gmpy2: the
gradients of interest decay while the individual monomials grow, so double
precision cancellation would floor phi near 1e-6 at large radii.

Everything is deterministic for a fixed OptConfig: starts come from a
scrambled Halton sequence seeded by `seed`, ties are broken by start index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import InputError, NumericError
from .polyring import Polynomial

_MU_CAP = 1e200


@dataclass(frozen=True)
class OptConfig:
    """Knobs for every sphere minimization; defaults reproduce reports."""

    starts: int = 64
    max_iters: int = 2000
    step_tol: float = 1e-12
    grad_tol: float = 1e-10
    seed: int = 0
    extra_seeds: tuple = ()
    mu: float = 1e6
    prec_bits: int = 128

    def __post_init__(self):
        if not isinstance(self.starts, int) or self.starts < 1:
            raise InputError(f"starts must be a positive integer, got {self.starts!r}")
        if not isinstance(self.max_iters, int) or self.max_iters < 1:
            raise InputError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        for name in ("step_tol", "grad_tol", "mu"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise InputError(f"{name} must be a positive finite number, got {value!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InputError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.prec_bits, int) or self.prec_bits < 53:
            raise InputError(f"prec_bits must be an integer >= 53, got {self.prec_bits!r}")
        object.__setattr__(self, "extra_seeds", tuple(tuple(s) for s in self.extra_seeds))


@dataclass(frozen=True)
class PhiSample:
    r: float
    phi: float
    argmin: tuple
    converged_starts: int


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float
    used: int
    samples: tuple


@dataclass(frozen=True)
class MalgrangeRecord:
    r: float
    product: float
    value_gap: float
    argmin: tuple
    converged_starts: int


@dataclass(frozen=True)
class MalgrangeProbe:
    t0: complex
    eps: float
    mu: float
    records: tuple
    decreasing: bool
    verdict: str


@dataclass(frozen=True)
class MtameRecord:
    r: float
    points: tuple
    min_abs_value: float | None
    argmin: tuple | None
    flagged: bool


@dataclass(frozen=True)
class MtameProbe:
    records: tuple
    increasing: bool
    verdict: str


class _CompiledPoly:
    """Terms flattened for fast evaluation in double or multiprecision."""

    __slots__ = ("nvars", "monos", "coeffs_c", "coeffs_q", "maxes")

    def __init__(self, poly: Polynomial):
        self.nvars = len(poly.vars)
        self.monos = []
        self.coeffs_c = []
        self.coeffs_q = []
        for mono, coeff in poly.sorted_terms():
            self.monos.append(mono)
            self.coeffs_c.append(coeff.to_complex())
            self.coeffs_q.append(
                (
                    gmpy2.mpq(coeff.re.numerator, coeff.re.denominator),
                    gmpy2.mpq(coeff.im.numerator, coeff.im.denominator),
                )
            )
        self.maxes = [0] * self.nvars
        for mono in self.monos:
            for i, e in enumerate(mono):
                if e > self.maxes[i]:
                    self.maxes[i] = e

    def eval_rows(self, rows, coeffs):
        total = None
        for mono, c in zip(self.monos, coeffs):
            prod = c
            for i, e in enumerate(mono):
                if e:
                    prod = prod * rows[i][e]
            total = prod if total is None else total + prod
        return total

    def eval_complex(self, x) -> complex:
        if not self.monos:
            return 0j
        rows = []
        for i in range(self.nvars):
            row = [1.0 + 0.0j]
            for _ in range(self.maxes[i]):
                row.append(row[-1] * x[i])
            rows.append(row)
        return self.eval_rows(rows, self.coeffs_c)


def _power_rows_mpc(x_mpc, maxes):
    one = gmpy2.mpc(1)
    rows = []
    for i, top in enumerate(maxes):
        row = [one]
        for _ in range(top):
            row.append(row[-1] * x_mpc[i])
        rows.append(row)
    return rows


class _GradSystem:
    """Compiled value/gradient/Hessian of one polynomial.

    The multiprecision paths (`*_hp`) run inside a gmpy2 context at
    `prec_bits`; everything they return is converted back to doubles.
    """

    def __init__(self, g: Polynomial, prec_bits: int):
        if g.is_constant:
            raise InputError("gradient scans need a nonconstant polynomial")
        self.m = len(g.vars)
        self.g = _CompiledPoly(g)
        partial_polys = g.partials()
        self.partials = [_CompiledPoly(p) for p in partial_polys]
        self.hess = [
            [_CompiledPoly(partial_polys[j].partial(k)) for k in range(self.m)]
            for j in range(self.m)
        ]
        self.maxes = [0] * self.m
        for cp in [self.g, *self.partials]:
            for i, e in enumerate(cp.maxes):
                if e > self.maxes[i]:
                    self.maxes[i] = e
        self.ctx = gmpy2.context(precision=prec_bits)
        with gmpy2.context(self.ctx):
            self._g_hp = self._hp_coeffs(self.g)
            self._partials_hp = [self._hp_coeffs(cp) for cp in self.partials]

    # -- geometry helpers ---------------------------------------------------

    def x_from_u(self, u: np.ndarray) -> np.ndarray:
        return u[: self.m] + 1j * u[self.m :]

    @staticmethod
    def u_from_x(x) -> np.ndarray:
        arr = np.asarray(x, dtype=complex)
        return np.concatenate([arr.real, arr.imag])

    # -- multiprecision evaluation -------------------------------------------

    def _hp_coeffs(self, cp: _CompiledPoly):
        return [gmpy2.mpc(gmpy2.mpfr(a), gmpy2.mpfr(b)) for a, b in cp.coeffs_q]

    def _hp_point(self, x) -> list:
        return [gmpy2.mpc(complex(v)) for v in x]

    def grads_and_value_hp(self, u: np.ndarray):
        """(h as complex array, sum |h|^2 as float, g(x) as complex)."""
        x = self.x_from_u(u)
        with gmpy2.context(self.ctx):
            xm = self._hp_point(x)
            rows = _power_rows_mpc(xm, self.maxes)
            h_hp = []
            for cp, coeffs in zip(self.partials, self._partials_hp):
                val = cp.eval_rows(rows, coeffs)
                h_hp.append(val if val is not None else gmpy2.mpc(0))
            sq = gmpy2.mpfr(0)
            for v in h_hp:
                sq += gmpy2.norm(v)
            gval = self.g.eval_rows(rows, self._g_hp)
            if gval is None:
                gval = gmpy2.mpc(0)
            h = np.array([complex(v) for v in h_hp])
            return h, float(sq), complex(gval)

    def grad_norm_hp(self, u: np.ndarray) -> float:
        _, sq, _ = self.grads_and_value_hp(u)
        return math.sqrt(sq)

    # -- double-precision derivative data ---------------------------------------

    def grads_double(self, x) -> np.ndarray:
        return np.array([cp.eval_complex(x) for cp in self.partials])

    def hessian(self, x) -> np.ndarray:
        H = np.empty((self.m, self.m), dtype=complex)
        for j in range(self.m):
            for k in range(j, self.m):
                v = self.hess[j][k].eval_complex(x)
                H[j, k] = v
                H[k, j] = v
        return H


def _real_block(H: np.ndarray) -> np.ndarray:
    """Real 2m x 2m Jacobian of (Re h, Im h) for holomorphic h with dh = H dx."""
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def _tangent_basis(w: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space at unit vector w (Householder)."""
    n = w.shape[0]
    sign = 1.0 if w[0] >= 0 else -1.0
    v = w.astype(float).copy()
    v[0] += sign
    H = np.eye(n) - (2.0 / (v @ v)) * np.outer(v, v)
    return H[:, 1:]


def _start_directions(
    m: int,
    cfg: OptConfig,
    warm,
    count: int | None = None,
    seed: int | None = None,
    include_extra: bool = True,
) -> list[np.ndarray]:
    sampler = qmc.Halton(d=2 * m, scramble=True, seed=cfg.seed if seed is None else seed)
    raw = sampler.random(cfg.starts if count is None else count)
    z = ndtri(np.clip(raw, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0.0] = 1.0
    dirs = [z[i] / norms[i] for i in range(z.shape[0])]
    for u in warm or ():
        nu = np.linalg.norm(u)
        if nu > 0 and np.isfinite(nu):
            dirs.append(np.asarray(u, dtype=float) / nu)
    if include_extra:
        for seed_pt in cfg.extra_seeds:
            if len(seed_pt) != m:
                raise InputError(
                    f"extra seed {seed_pt!r} has {len(seed_pt)} coordinates, expected {m}"
                )
            u = _GradSystem.u_from_x([complex(c) for c in seed_pt])
            nu = np.linalg.norm(u)
            if nu == 0 or not np.isfinite(nu):
                raise InputError(f"extra seed {seed_pt!r} is zero or non-finite")
            dirs.append(u / nu)
    return dirs


def _retract(cand: np.ndarray, r: float) -> np.ndarray | None:
    """Pull a stepped point back to the sphere; None if degenerate.

    Tangent steps change the norm only at second order, so short steps from
    an on-sphere point drift by far less than 1e-9 relative.  In that
    regime the rescale is skipped: multiplying every coordinate by 1 + eps
    re-rounds them all, and near a valley floor that perturbs the
    cancellation between large monomials by orders of magnitude more than
    the drift it removes (the scale factor enters degree-d monomials d-fold).
    A 1e-9 radius error is invisible at every documented tolerance.
    """
    nc = float(np.linalg.norm(cand))
    if nc == 0.0 or not np.isfinite(nc):
        return None
    t = r / nc
    if abs(t - 1.0) > 1e-9:
        return cand * t
    return cand


def _minimize_on_sphere(resfn, jacfn, u0: np.ndarray, r: float, cfg: OptConfig):
    """Damped least-squares on the sphere of radius r. Returns (u, F, converged)."""
    u = u0.copy()
    rho, F = resfn(u)
    if not math.isfinite(F):
        raise NumericError(f"objective is not finite at start point (r={r})")
    mu = None
    converged = False
    eye = None
    stalled = 0
    for _ in range(cfg.max_iters):
        J = jacfn(u)
        B = _tangent_basis(u / r)
        A = J @ B
        gvec = A.T @ rho
        if np.linalg.norm(gvec) <= cfg.grad_tol:
            converged = True
            break
        M = A.T @ A
        if eye is None:
            eye = np.eye(M.shape[0])
        if mu is None:
            mu = 1e-3 * max(float(np.max(np.diag(M))), 1e-300)
        accepted = False
        small_step = False
        while mu <= _MU_CAP:
            try:
                s = np.linalg.solve(M + mu * eye, -gvec)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            cand = _retract(u + B @ s, r)
            if cand is None:
                mu *= 10.0
                continue
            rho_c, F_c = resfn(cand)
            if math.isfinite(F_c) and F_c < F:
                # a short step only signals stationarity when the gain is
                # negligible too; heavy damping can make a productive step tiny
                small_step = (
                    float(np.linalg.norm(cand - u)) <= cfg.step_tol * r
                    and F - F_c <= 1e-10 * F
                )
                stalled = stalled + 1 if F - F_c <= 1e-13 * F else 0
                u, rho, F = cand, rho_c, F_c
                mu = max(mu * 0.3, 1e-300)
                accepted = True
                break
            mu *= 10.0
        if not accepted or small_step or stalled >= 60:
            # No decrease at any damping, a negligible step with negligible
            # gain, or a long run of relative improvements below 1e-13.
            # The stall budget is deliberately generous: after heavy damping
            # it takes tens of accepted steps for mu to anneal back down to
            # where the flattest directions can move at all.
            converged = True
            break
    return u, F, converged


_FLAT_MUS = (1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6, 1e8, 1e10, 1e12)


def _flat_polish(resfn, jacfn, u: np.ndarray, r: float, cfg: OptConfig, rounds: int = 60):
    """Descend the flat coordinate directions of the Newton model at a
    converged point.

    Near a valley floor the model curvatures span many decades and the
    damped full-space solve freezes the weakest directions: with mu sized
    for the stiff columns, the step along a unit column is g/mu, far below
    one ulp of the iterate.  Eigenvectors of A^T A are no help (backward
    error ||A||^2 eps buries every flat eigenpair), and so are tangent
    basis columns: any exactly-tangent vector carries an O(1e-12) sliver
    of the stiff coordinates, whose amplified model sensitivity is
    fictional; the solver routes the residual fix through a sub-ulp move
    of a stiff coordinate and the realized step does nothing.

    Raw coordinate axes have none of that: a Jacobian column is the honest
    sensitivity of the residual to that one coordinate.  So: pick the
    coordinates whose Jacobian columns sit far below the stiffest one,
    solve the column-scaled least-squares system restricted to them, and
    step in those coordinates only.  Such steps leave the sphere at second
    order; _retract absorbs the drift without re-rounding the iterate.
    Each round takes the best candidate over a fixed damping ladder and
    stops when no rung improves the objective.
    """
    rho, F = resfn(u)
    for _ in range(rounds):
        if F == 0.0:
            break
        J = jacfn(u)
        cn = np.linalg.norm(J, axis=0)
        cmax = float(np.max(cn)) if cn.size else 0.0
        if not math.isfinite(cmax) or cmax <= 0.0:
            break
        flat = cn <= 1e-8 * cmax
        if not np.any(flat):
            break
        scale = np.maximum(cn[flat], 1e-300)
        Ws = J[:, flat] / scale
        gs = Ws.T @ rho
        Ms = Ws.T @ Ws
        eye = np.eye(Ms.shape[0])
        idx = np.flatnonzero(flat)
        best: tuple | None = None
        for mu in _FLAT_MUS:
            try:
                y = np.linalg.solve(Ms + mu * eye, -gs)
            except np.linalg.LinAlgError:
                continue
            cand = u.copy()
            cand[idx] += y / scale
            cand = _retract(cand, r)
            if cand is None:
                continue
            rho_c, F_c = resfn(cand)
            if math.isfinite(F_c) and F_c < F and (best is None or F_c < best[2]):
                best = (cand, rho_c, F_c)
        if best is None:
            break
        u, rho, F = best
    return u, F


def _run_starts(resfn, jacfn, dirs, r: float, cfg: OptConfig):
    """Run every start; returns (results, best_index, converged_count)."""
    results = []
    best_idx = 0
    converged_count = 0
    for idx, d in enumerate(dirs):
        u, F, conv = _minimize_on_sphere(resfn, jacfn, r * d, r, cfg)
        converged_count += int(conv)
        results.append((u, F, conv))
        if F < results[best_idx][1]:
            best_idx = idx
    return results, best_idx, converged_count


def _multistart(resfn, jacfn, m: int, r: float, cfg: OptConfig, warm=None):
    dirs = _start_directions(m, cfg, warm)
    return _run_starts(resfn, jacfn, dirs, r, cfg)


def _top_directions(results, k: int = 8) -> list[np.ndarray]:
    """Directions of the k best distinct minimizers, best first."""
    order = sorted(range(len(results)), key=lambda i: (results[i][1], i))
    out: list[np.ndarray] = []
    seen = set()
    for i in order:
        u = results[i][0]
        nu = float(np.linalg.norm(u))
        if nu == 0.0 or not np.isfinite(nu):
            continue
        d = u / nu
        key = tuple(np.round(d, 6))
        if key in seen:
            continue
        seen.add(key)
        out.append(d)
        if len(out) >= k:
            break
    return out


# -- phi and the exponent fit -------------------------------------------------------


def _phi_functions(system: _GradSystem):
    def resfn(u):
        h, sq, _ = system.grads_and_value_hp(u)
        rho = np.concatenate([h.real, h.imag])
        return rho, 0.5 * sq

    def jacfn(u):
        return _real_block(system.hessian(system.x_from_u(u)))

    return resfn, jacfn


def _validate_radius(r: float) -> float:
    r = float(r)
    if not (math.isfinite(r) and r > 0):
        raise InputError(f"radius must be positive and finite, got {r!r}")
    return r


_LADDER_BASE = 8.0
_LADDER_FACTOR = 4.0


def _extrapolated_direction(prev_u: np.ndarray, cur_u: np.ndarray, m: int) -> np.ndarray | None:
    """Advance each complex coordinate of a tracked minimizer by its own ratio.

    Coordinates of a followed minimum typically scale like r^alpha_k with a
    different alpha_k per coordinate, so a plain rescale of the latest point
    distorts their relations while the componentwise geometric step keeps
    them.  Only moduli are advanced: successive minimizers sit at arbitrary
    points of their phase orbits, so the ratio's argument is spurious, while
    the current point's own phases are already mutually consistent.
    Returns a unit direction, or None when the step degenerates.
    """
    xp = prev_u[:m] + 1j * prev_u[m:]
    xc = cur_u[:m] + 1j * cur_u[m:]
    scale = float(np.linalg.norm(cur_u))
    if scale <= 0.0 or not np.isfinite(scale):
        return None
    nxt = np.zeros(m, dtype=complex)
    for k in range(m):
        if abs(xc[k]) > 1e-12 * scale and abs(xp[k]) > 1e-12 * scale:
            nxt[k] = xc[k] * abs(xc[k] / xp[k])
    u = np.concatenate([nxt.real, nxt.imag])
    nu = float(np.linalg.norm(u))
    if nu == 0.0 or not np.isfinite(nu):
        return None
    return u / nu


def _ladder_warm(system: _GradSystem, resfn, jacfn, r: float, cfg: OptConfig) -> list[np.ndarray]:
    """Track sphere minimizers up from a small radius to just below r.

    At large radii the global valley of ||grad|| occupies a vanishing share
    of the sphere and random starts miss it, but a minimizer rescaled by a
    modest factor stays inside its own basin; continuation from a small
    sphere is what makes cold calls at large r reliable.  Consecutive stage
    minimizers also yield a componentwise geometric prediction for the next
    stage, which starts on the followed valley rather than off it.
    """
    stages: list[float] = []
    rr = r
    while rr > _LADDER_BASE:
        rr /= _LADDER_FACTOR
        stages.append(rr)
    stages.reverse()
    warm: list[np.ndarray] = []
    prev_best: np.ndarray | None = None
    stage_fresh = max(8, cfg.starts // 8)
    for i, rr in enumerate(stages):
        count = cfg.starts if i == 0 else stage_fresh
        dirs = _start_directions(
            system.m, cfg, warm, count=count, seed=cfg.seed + i, include_extra=False
        )
        results, best_idx, _ = _run_starts(resfn, jacfn, dirs, rr, cfg)
        warm = _top_directions(results)
        cur_best = results[best_idx][0]
        if prev_best is not None:
            d = _extrapolated_direction(prev_best, cur_best, system.m)
            if d is not None:
                warm.insert(0, d)
        prev_best = cur_best
    return warm


def phi_at(
    g: Polynomial, r: float, config: OptConfig | None = None, _warm=None, _ladder: bool = True
) -> PhiSample:
    """Estimate phi(r) = min_{||x|| = r} ||grad g(x)|| by multi-start descent.

    Cold calls at r > 8 first run a radius-continuation ladder so the
    reported minimum tracks the global valley; callers that already hold a
    good minimizer pass it via `_warm` and skip the ladder.
    """
    cfg = config or OptConfig()
    r = _validate_radius(r)
    system = _GradSystem(g, cfg.prec_bits)
    resfn, jacfn = _phi_functions(system)
    warm = [np.asarray(u, dtype=float) for u in (_warm or [])]
    if _ladder and not warm and r > _LADDER_BASE:
        warm = _ladder_warm(system, resfn, jacfn, r, cfg)
    results, best_idx, converged = _multistart(resfn, jacfn, system.m, r, cfg, warm=warm)
    # Polish the few best distinct minimizers plus every warm-start result.
    # At large radii the basin that reaches the valley floor is not always
    # the raw winner: the warm continuation candidate can rank behind an
    # off-valley fold minimum until its flat directions are descended.
    order = sorted(range(len(results)), key=lambda i: (results[i][1], i))
    picks: list[int] = []
    seen: set = set()
    for i in order:
        u = results[i][0]
        nu = float(np.linalg.norm(u))
        if nu == 0.0 or not np.isfinite(nu):
            continue
        key = tuple(np.round(u / nu, 6))
        if key in seen:
            continue
        seen.add(key)
        picks.append(i)
        if len(picks) >= 5:
            break
    for i in range(cfg.starts, min(cfg.starts + len(warm), len(results))):
        if i not in picks:
            picks.append(i)
    u_best, F_best = None, math.inf
    for i in picks:
        u = _retract(results[i][0], r)
        if u is None:
            continue
        u, F = _flat_polish(resfn, jacfn, u, r, cfg)
        if F < F_best:
            u_best, F_best = u, F
    if u_best is None:
        u_best = _retract(results[best_idx][0], r)
        if u_best is None:
            raise NumericError(f"no usable minimizer at r={r}")
    phi = system.grad_norm_hp(u_best)
    return PhiSample(
        r=r,
        phi=phi,
        argmin=tuple(complex(v) for v in system.x_from_u(u_best)),
        converged_starts=converged,
    )


def fit_loglog(samples) -> SlopeFit:
    """Least-squares slope of log phi against log r over the usable samples."""
    samples = tuple(samples)
    usable = [s for s in samples if s.converged_starts >= 1 and s.phi > 0.0]
    if len(usable) < 3:
        raise NumericError(
            f"slope fit needs at least 3 usable samples, got {len(usable)} of {len(samples)}"
        )
    xs = np.log([s.r for s in usable])
    ys = np.log([s.phi for s in usable])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        residual=resid,
        used=len(usable),
        samples=samples,
    )


def estimate_exponent(
    g: Polynomial,
    r_min: float = 10.0,
    r_max: float = 1.0e4,
    count: int = 12,
    config: OptConfig | None = None,
) -> SlopeFit:
    """Slope of log phi(r) vs log r across geometrically spaced radii.

    Each radius seeds the next with the found minimizer and with a
    componentwise geometric extrapolation of the last two, so one branch
    of minima is followed coherently across the scan.
    """
    cfg = config or OptConfig()
    r_min, r_max = _validate_radius(r_min), _validate_radius(r_max)
    if r_min >= r_max:
        raise InputError(f"need r_min < r_max, got {r_min} >= {r_max}")
    if not isinstance(count, int) or count < 3:
        raise InputError(f"count must be an integer >= 3, got {count!r}")
    radii = np.geomspace(r_min, r_max, count)
    samples = []
    warm: list[np.ndarray] = []
    prev_u: np.ndarray | None = None
    m = len(g.vars)
    for r in radii:
        sample = phi_at(g, float(r), cfg, _warm=warm or None)
        samples.append(sample)
        cur_u = _GradSystem.u_from_x(sample.argmin)
        warm = [cur_u]
        if prev_u is not None:
            d = _extrapolated_direction(prev_u, cur_u, m)
            if d is not None:
                warm.append(d)
        prev_u = cur_u
    return fit_loglog(samples)


# -- Malgrange probe -------------------------------------------------------------


def _penalty_functions(system: _GradSystem, r: float, t0: complex, eps: float, mu_pen: float):
    sqrt_mu = math.sqrt(mu_pen)

    def resfn(u):
        h, sq, gval = system.grads_and_value_hp(u)
        gap = abs(gval - t0)
        pen = sqrt_mu * max(0.0, gap - eps)
        rho = np.concatenate([r * h.real, r * h.imag, [pen]])
        return rho, 0.5 * (r * r * sq + pen * pen)

    def jacfn(u):
        x = system.x_from_u(u)
        H = system.hessian(x)
        top = r * _real_block(H)
        h = system.grads_double(x)
        gval = system.g.eval_complex(x)
        w = gval - t0
        a = abs(w)
        if a > eps and a > 0.0:
            scale = sqrt_mu / a
            cross = np.conj(w) * h
            row = np.concatenate([scale * cross.real, -scale * cross.imag])
        else:
            row = np.zeros(2 * system.m)
        return np.vstack([top, row])

    return resfn, jacfn


def malgrange_probe(
    g: Polynomial,
    t0: complex = 0j,
    radii=(10.0, 100.0, 1000.0),
    eps: float = 1e-3,
    config: OptConfig | None = None,
) -> MalgrangeProbe:
    """Minimize r*||grad g|| near the fiber g = t0 on growing spheres.

    A decreasing product with the value pinned within eps of t0 is numeric
    evidence for Malgrange failure at t0 (evidence, not a certificate; the
    exact certificates come from curves).
    """
    cfg = config or OptConfig()
    radii = [_validate_radius(r) for r in radii]
    if len(radii) < 2:
        raise InputError("malgrange probe needs at least two radii")
    t0 = complex(t0)
    if not (math.isfinite(eps) and eps > 0):
        raise InputError(f"eps must be positive and finite, got {eps!r}")
    system = _GradSystem(g, cfg.prec_bits)
    records = []
    warm: list[np.ndarray] = []
    for r in radii:
        resfn, jacfn = _penalty_functions(system, r, t0, eps, cfg.mu)
        results, best_idx, converged = _multistart(resfn, jacfn, system.m, r, cfg, warm=warm)
        u_best = _retract(results[best_idx][0], r)
        if u_best is None:
            raise NumericError(f"no usable minimizer at r={r}")
        h, sq, gval = system.grads_and_value_hp(u_best)
        records.append(
            MalgrangeRecord(
                r=r,
                product=r * math.sqrt(sq),
                value_gap=abs(gval - t0),
                argmin=tuple(complex(v) for v in system.x_from_u(u_best)),
                converged_starts=converged,
            )
        )
        warm = [u_best]
    products = [rec.product for rec in records]
    decreasing = all(b < a for a, b in zip(products, products[1:]))
    if decreasing:
        verdict = (
            f"r*||grad|| decreases along the radii with |g - t0| held within {eps}: "
            f"consistent with Malgrange failure at t0 = {t0} "
            "(evidence only; the curve certificates carry the proof)"
        )
    else:
        verdict = "r*||grad|| does not decrease: Malgrange condition holds (evidence only)"
    return MalgrangeProbe(
        t0=t0, eps=eps, mu=cfg.mu, records=tuple(records), decreasing=decreasing, verdict=verdict
    )


# -- scaled-gradient (M-set) probe ----------------------------------------------------


def _mset_residual_parts(system: _GradSystem, u: np.ndarray):
    """Multiprecision v = conj(h) - lambda* x and friends at u."""
    x = system.x_from_u(u)
    with gmpy2.context(system.ctx):
        xm = system._hp_point(x)
        rows = _power_rows_mpc(xm, system.maxes)
        h_hp = []
        for cp, coeffs in zip(system.partials, system._partials_hp):
            val = cp.eval_rows(rows, coeffs)
            h_hp.append(val if val is not None else gmpy2.mpc(0))
        gval = system.g.eval_rows(rows, system._g_hp)
        if gval is None:
            gval = gmpy2.mpc(0)
        s = gmpy2.mpc(0)
        nrm = gmpy2.mpfr(0)
        for hj, xj in zip(h_hp, xm):
            s += hj * xj
            nrm += gmpy2.norm(xj)
        lam = gmpy2.mpc(s.conjugate()) / nrm
        v_hp = [hj.conjugate() - lam * xj for hj, xj in zip(h_hp, xm)]
        vsq = gmpy2.mpfr(0)
        hsq = gmpy2.mpfr(0)
        for vj in v_hp:
            vsq += gmpy2.norm(vj)
        for hj in h_hp:
            hsq += gmpy2.norm(hj)
        v = np.array([complex(c) for c in v_hp])
        return v, float(vsq), math.sqrt(float(hsq)), complex(gval)


def _mset_functions(system: _GradSystem):
    def resfn(u):
        v, vsq, _, _ = _mset_residual_parts(system, u)
        return np.concatenate([v.real, v.imag]), 0.5 * vsq

    def jacfn(u):
        x = system.x_from_u(u)
        m = system.m
        H = system.hessian(x)
        h = system.grads_double(x)
        s = h @ x
        cs = np.conj(s)
        inv = 1.0 / float(np.real(x @ np.conj(x)))
        w = H @ x + h
        Hc = np.conj(H)
        eye = np.eye(m)
        outer_xw = np.outer(x, np.conj(w))
        A_c = Hc - inv * outer_xw - inv * cs * eye + 2.0 * inv * inv * cs * np.outer(x, x.real)
        B_c = (
            -1j * Hc
            + 1j * inv * outer_xw
            - 1j * inv * cs * eye
            + 2.0 * inv * inv * cs * np.outer(x, x.imag)
        )
        return np.block([[A_c.real, B_c.real], [A_c.imag, B_c.imag]])

    return resfn, jacfn


def mtame_probe(g: Polynomial, radii=(10.0, 100.0, 1000.0), config: OptConfig | None = None) -> MtameProbe:
    """Find scaled-gradient points (grad g parallel to x) on growing spheres.

    Reports the smallest |g| over the points found on each sphere.  Growth of
    that minimum is evidence that no scaled-gradient sequence carries g to a
    finite value, i.e. evidence for M-tameness; it is not a proof.
    """
    cfg = config or OptConfig()
    radii = [_validate_radius(r) for r in radii]
    if len(radii) < 2:
        raise InputError("mtame probe needs at least two radii")
    system = _GradSystem(g, cfg.prec_bits)
    resfn, jacfn = _mset_functions(system)
    records = []
    warm: list[np.ndarray] = []
    for r in radii:
        results, _, _ = _multistart(resfn, jacfn, system.m, r, cfg, warm=warm)
        accepted: list[tuple[tuple, float]] = []
        seen = set()
        for u, _, _ in results:
            u = _retract(u, r)
            if u is None:
                continue
            v, vsq, hnorm, gval = _mset_residual_parts(system, u)
            if math.sqrt(vsq) > max(cfg.grad_tol, 1e-10 * (1.0 + hnorm)):
                continue
            key = tuple(np.round(u / r, 6))
            if key in seen:
                continue
            seen.add(key)
            accepted.append((tuple(complex(c) for c in system.x_from_u(u)), abs(gval)))
        if accepted:
            best_point, best_val = min(accepted, key=lambda pv: pv[1])
            records.append(
                MtameRecord(
                    r=r,
                    points=tuple(p for p, _ in accepted),
                    min_abs_value=best_val,
                    argmin=best_point,
                    flagged=False,
                )
            )
            warm = [_GradSystem.u_from_x(p) for p, _ in accepted]
        else:
            records.append(MtameRecord(r=r, points=(), min_abs_value=None, argmin=None, flagged=True))
            warm = []
    values = [rec.min_abs_value for rec in records]
    increasing = all(v is not None for v in values) and all(
        b > a for a, b in zip(values, values[1:])
    )
    if increasing:
        verdict = (
            "smallest |g| over scaled-gradient points grows with r: "
            "no finite asymptotic scaled-gradient value detected (evidence only)"
        )
    elif any(rec.flagged for rec in records):
        verdict = "no scaled-gradient points found on some spheres; probe inconclusive"
    else:
        verdict = "smallest |g| over scaled-gradient points does not grow: possible asymptotic value"
    return MtameProbe(records=tuple(records), increasing=increasing, verdict=verdict)
