"""Command-line interface.

Subcommands: family, curve, exponent, malgrange, mtame, verify.  Every
subcommand renders to text (default), json (a stable result envelope), or
csv; see docs/formats.md for the wire contracts and exit codes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .certify import run_certificate_matrix
from .curvelab import (
    Curve,
    contradiction_trace,
    curve_exponent,
    malgrange_certificate,
    mset_residual,
    parse_curve,
    quasitame_discrepancy,
    witness_curve,
)
from .errors import DimensionError, InputError, NumericError
from .laurent import DEFAULT_WINDOW
from .polyring import (
    cubic_root_check,
    euler_identity_residual,
    family,
    parse_poly,
    verify_automorphism,
)
from .sphereopt import OptConfig, estimate_exponent, malgrange_probe, mtame_probe

_CONFIG_KEYS = {
    "starts": int,
    "max_iters": int,
    "step_tol": float,
    "grad_tol": float,
    "seed": int,
    "mu": float,
    "prec_bits": int,
}


@dataclass
class _Result:
    subcommand: str
    inputs: dict
    payload: dict
    text: list[str]
    rows: list[list]
    exit_code: int = 0


# -- small formatting helpers ----------------------------------------------------


def _rat(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}"


def _cnum(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _fmt_c(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.12g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.12g}{sign}{abs(z.imag):.12g}i"


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise InputError(f"cannot parse complex number {text!r}") from None


def _parse_radii(text: str) -> list[float]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        radii = [float(p) for p in parts]
    except ValueError:
        raise InputError(f"cannot parse radii list {text!r}") from None
    if len(radii) < 2:
        raise InputError("need at least two radii, e.g. --radii 10,100,1000")
    return radii


# -- configuration resolution --------------------------------------------------------


def _read_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read config file {path}: {e}") from None
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise InputError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise InputError(f"{path}:{lineno}: invalid value for {key}: {value!r}") from None
    return out


def resolve_opt_config(args, environ=None) -> OptConfig:
    """Merge numeric options: CLI flag > config file > LOJ_SEED > defaults."""
    env = os.environ if environ is None else environ
    values: dict = {}
    if "LOJ_SEED" in env:
        try:
            values["seed"] = int(env["LOJ_SEED"])
        except ValueError:
            raise InputError(f"LOJ_SEED must be an integer, got {env['LOJ_SEED']!r}") from None
    config_path = getattr(args, "config", None)
    if config_path:
        values.update(_read_config_file(config_path))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return OptConfig(**values)


def _config_dict(cfg: OptConfig) -> dict:
    return {key: getattr(cfg, key) for key in _CONFIG_KEYS}


# -- polynomial / curve sources ---------------------------------------------------------


def _resolve_vars(args) -> tuple[str, ...]:
    if getattr(args, "vars", None) is None:
        return ("x", "y", "z")
    names = tuple(v.strip() for v in args.vars.split(",") if v.strip())
    if not names:
        raise InputError("--vars needs a comma-separated list of names")
    for name in names:
        if not name.isidentifier():
            raise InputError(f"invalid variable name {name!r}")
    if len(set(names)) != len(names):
        raise InputError("--vars has repeated names")
    return names


def _resolve_poly(args):
    """Returns (polynomial, vars, family params or None)."""
    if args.family is not None:
        if getattr(args, "vars", None) is not None:
            raise InputError("--vars cannot be combined with --family")
        n, q = args.family
        return family(n, q), ("x", "y", "z"), (n, q)
    vars = _resolve_vars(args)
    if args.poly is not None:
        return parse_poly(args.poly, vars), vars, None
    try:
        text = Path(args.poly_file).read_text()
    except OSError as e:
        raise InputError(f"cannot read polynomial file {args.poly_file}: {e}") from None
    return parse_poly(text.strip(), vars), vars, None


# -- subcommand implementations ------------------------------------------------------------


def _curve_block(g, curve: Curve) -> tuple[dict, list[str]]:
    """Payload fragment and text lines shared by `family` and `curve`."""
    report = curve_exponent(g, curve)
    cert = malgrange_certificate(g, curve)
    qt = quasitame_discrepancy(g, curve)
    ms = mset_residual(g, curve)

    lines = [
        f"curve: {curve}",
        f"ord p = {report.ord_curve}",
    ]
    if report.ord_grad is None:
        lines.append("ord grad = none (gradient vanishes along the curve within the window)")
        lines.append("L = undefined (gradient vanishes along the curve within the window)")
    else:
        lines.append(f"ord grad = {report.ord_grad}")
        lines.append(f"L = {_rat(report.exponent)}")
    lines.append(f"value -> {report.value}")
    lines.append(f"s = {report.malgrange_sum}")
    if cert.fails:
        lines.append(f"malgrange: FAILS at t0 = {cert.t0}")
    else:
        lines.append(f"malgrange: {cert.detail}")
    lines.append(f"quasitame: {qt.detail}")
    lines.append(f"scaled-gradient residual: {ms.detail}")

    payload = {
        "curve": str(curve),
        "window": curve.window,
        "ord_curve": report.ord_curve,
        "ord_grad": report.ord_grad,
        "exponent": None if report.exponent is None else _rat(report.exponent),
        "value": {
            "kind": report.value.kind,
            "value": None if report.value.value is None else _cnum(complex(report.value.value)),
        },
        "malgrange_sum": report.malgrange_sum,
        "malgrange": {
            "fails": cert.fails,
            "t0": None if cert.t0 is None else _cnum(complex(cert.t0)),
            "order_sum": cert.order_sum,
            "detail": cert.detail,
        },
        "quasitame": {
            "premise_met": qt.premise_met,
            "bounded": qt.bounded,
            "not_quasitame": qt.not_quasitame,
            "discrepancy_order": qt.discrepancy.ord,
            "detail": qt.detail,
        },
        "mset": {
            "scaling_order": ms.scaling.ord,
            "residual_order": ms.residual_order,
            "avoids_mset": ms.avoids_mset,
            "detail": ms.detail,
        },
    }
    return payload, lines


def cmd_family(args) -> _Result:
    n, q = args.n, args.q
    window = args.window
    g = family(n, q)
    if not args.verify:
        return _Result(
            subcommand="family",
            inputs={"n": n, "q": q, "window": window},
            payload={"n": n, "q": q, "f": str(g)},
            text=[str(g)],
            rows=[["key", "value"], ["n", n], ["q", q], ["f", str(g)]],
        )
    auto = verify_automorphism(n, q)
    euler = euler_identity_residual(n, q)
    psi = witness_curve(n, q, window=window)
    block, curve_lines = _curve_block(g, psi)
    cubics = [cubic_root_check(kind, param) for kind, param in (("dfdx", n), ("euler", q))]
    trace = contradiction_trace(n, q, window=window)

    lines = [
        f"f = {g}",
        f"zpoly = {auto.zpoly}",
        f"straightened = {auto.straightened}",
        "automorphism: OK" if auto.ok else f"automorphism: FAILED [{', '.join(auto.failures)}]",
        f"euler identity residual = {euler}",
    ]
    lines.extend(curve_lines)
    for rep in cubics:
        roots = ", ".join(_fmt_c(r) for r in rep.roots)
        lines.append(
            f"cubic {rep.kind}: {rep.cubic} ; T = 1 root: {'yes' if rep.one_is_root else 'NO'} ; "
            f"cofactor {rep.quadratic} ; other roots: {roots} ; max residual = {max(rep.residuals):.3g}"
        )
    lines.append(
        "escape trace: contradiction confirmed "
        f"(lhs lead {_fmt_c(trace.lhs_lead)} vs rhs lead {_fmt_c(trace.rhs_lead)} at order {trace.lhs_order})"
        if trace.contradiction
        else f"escape trace: inconclusive ({trace.verdict})"
    )

    payload = {
        "n": n,
        "q": q,
        "f": str(g),
        "zpoly": str(auto.zpoly),
        "straightened": str(auto.straightened),
        "automorphism_ok": auto.ok,
        "automorphism_checks": dict(auto.checks),
        "euler_residual_zero": euler.is_zero,
        **block,
        "cubics": [
            {
                "kind": rep.kind,
                "param": rep.param,
                "cubic": str(rep.cubic),
                "one_is_root": rep.one_is_root,
                "quadratic": str(rep.quadratic),
                "roots": [_cnum(r) for r in rep.roots],
                "max_residual": max(rep.residuals),
            }
            for rep in cubics
        ],
        "escape_trace": {
            "rho0": _cnum(trace.rho0),
            "gap": trace.gap,
            "lhs_order": trace.lhs_order,
            "rhs_order": trace.rhs_order,
            "lhs_lead": _cnum(trace.lhs_lead),
            "rhs_lead": _cnum(trace.rhs_lead),
            "relations_hold": trace.relations_hold,
            "contradiction": trace.contradiction,
            "verdict": trace.verdict,
        },
    }

    rows = [["key", "value"]]
    rows.append(["n", n])
    rows.append(["q", q])
    rows.append(["f", str(g)])
    rows.append(["zpoly", str(auto.zpoly)])
    rows.append(["straightened", str(auto.straightened)])
    rows.append(["automorphism_ok", _bool(auto.ok)])
    rows.append(["euler_residual_zero", _bool(euler.is_zero)])
    rows.append(["exponent", payload["exponent"] or ""])
    rows.append(["malgrange_fails", _bool(payload["malgrange"]["fails"])])
    rows.append(["not_quasitame", _bool(payload["quasitame"]["not_quasitame"])])
    rows.append(["cubic_dfdx_one_is_root", _bool(cubics[0].one_is_root)])
    rows.append(["cubic_euler_one_is_root", _bool(cubics[1].one_is_root)])
    rows.append(["escape_contradiction", _bool(trace.contradiction)])

    return _Result(
        subcommand="family",
        inputs={"n": n, "q": q, "window": window},
        payload=payload,
        text=lines,
        rows=rows,
    )


def cmd_curve(args) -> _Result:
    g, vars, fam = _resolve_poly(args)
    window = args.window
    if args.psi:
        if fam is None:
            raise InputError("--psi requires the polynomial source --family N Q")
        curve = witness_curve(fam[0], fam[1], window=window)
        source = "psi"
    else:
        curve = parse_curve(args.curve, window=window)
        source = "literal"
    payload, lines = _curve_block(g, curve)
    payload = {"poly": str(g), "vars": list(vars), **payload}
    lines.insert(0, f"poly: {g}")

    rows = [["key", "value"]]
    rows.append(["poly", str(g)])
    rows.append(["curve", str(curve)])
    rows.append(["ord_curve", payload["ord_curve"]])
    rows.append(["ord_grad", "" if payload["ord_grad"] is None else payload["ord_grad"]])
    rows.append(["exponent", payload["exponent"] or ""])
    rows.append(["malgrange_fails", _bool(payload["malgrange"]["fails"])])
    rows.append(["not_quasitame", _bool(payload["quasitame"]["not_quasitame"])])

    return _Result(
        subcommand="curve",
        inputs={
            "poly": str(g),
            "vars": list(vars),
            "curve": str(curve),
            "source": source,
            "window": window,
        },
        payload=payload,
        text=lines,
        rows=rows,
    )


def cmd_exponent(args) -> _Result:
    g, vars, _ = _resolve_poly(args)
    cfg = resolve_opt_config(args)
    fit = estimate_exponent(g, r_min=args.rmin, r_max=args.rmax, count=args.count, config=cfg)

    lines = [f"poly: {g}"]
    for s in fit.samples:
        lines.append(f"r = {s.r:.6g}: phi = {s.phi:.6g} ({s.converged_starts} converged)")
    lines.append(f"slope = {fit.slope:.6g}")
    lines.append(f"intercept = {fit.intercept:.6g}")
    lines.append(f"rms residual = {fit.residual:.6g}")
    lines.append(f"samples used = {fit.used}/{len(fit.samples)}")

    payload = {
        "poly": str(g),
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "used": fit.used,
        "samples": [
            {"r": s.r, "phi": s.phi, "converged_starts": s.converged_starts}
            for s in fit.samples
        ],
    }
    rows = [["r", "phi", "converged_starts"]]
    for s in fit.samples:
        rows.append([s.r, s.phi, s.converged_starts])

    return _Result(
        subcommand="exponent",
        inputs={
            "poly": str(g),
            "vars": list(vars),
            "r_min": args.rmin,
            "r_max": args.rmax,
            "count": args.count,
            "config": _config_dict(cfg),
        },
        payload=payload,
        text=lines,
        rows=rows,
    )


def cmd_malgrange(args) -> _Result:
    g, vars, _ = _resolve_poly(args)
    cfg = resolve_opt_config(args)
    t0 = _parse_complex(args.t0)
    radii = _parse_radii(args.radii)
    probe = malgrange_probe(g, t0=t0, radii=radii, eps=args.eps, config=cfg)

    lines = [f"poly: {g}", f"t0 = {_fmt_c(t0)}, eps = {args.eps:g}"]
    for rec in probe.records:
        lines.append(
            f"r = {rec.r:.6g}: r*|grad| = {rec.product:.6g}, |g - t0| = {rec.value_gap:.3g} "
            f"({rec.converged_starts} converged)"
        )
    lines.append(f"verdict: {probe.verdict}")

    payload = {
        "poly": str(g),
        "t0": _cnum(t0),
        "eps": probe.eps,
        "records": [
            {
                "r": rec.r,
                "product": rec.product,
                "value_gap": rec.value_gap,
                "converged_starts": rec.converged_starts,
            }
            for rec in probe.records
        ],
        "decreasing": probe.decreasing,
        "verdict": probe.verdict,
    }
    rows = [["r", "product", "value_gap", "converged_starts"]]
    for rec in probe.records:
        rows.append([rec.r, rec.product, rec.value_gap, rec.converged_starts])

    return _Result(
        subcommand="malgrange",
        inputs={
            "poly": str(g),
            "vars": list(vars),
            "t0": _cnum(t0),
            "eps": args.eps,
            "radii": radii,
            "config": _config_dict(cfg),
        },
        payload=payload,
        text=lines,
        rows=rows,
    )


def cmd_mtame(args) -> _Result:
    g, vars, _ = _resolve_poly(args)
    cfg = resolve_opt_config(args)
    radii = _parse_radii(args.radii)
    probe = mtame_probe(g, radii=radii, config=cfg)

    lines = [f"poly: {g}"]
    for rec in probe.records:
        if rec.flagged:
            lines.append(f"r = {rec.r:.6g}: no scaled-gradient points found")
        else:
            lines.append(
                f"r = {rec.r:.6g}: {len(rec.points)} scaled-gradient points, "
                f"min |g| = {rec.min_abs_value:.6g}"
            )
    lines.append(f"verdict: {probe.verdict}")

    payload = {
        "poly": str(g),
        "records": [
            {
                "r": rec.r,
                "points": len(rec.points),
                "min_abs_value": rec.min_abs_value,
                "argmin": None if rec.argmin is None else [_cnum(c) for c in rec.argmin],
                "flagged": rec.flagged,
            }
            for rec in probe.records
        ],
        "increasing": probe.increasing,
        "verdict": probe.verdict,
    }
    rows = [["r", "points", "min_abs_value"]]
    for rec in probe.records:
        rows.append([rec.r, len(rec.points), "" if rec.min_abs_value is None else rec.min_abs_value])

    return _Result(
        subcommand="mtame",
        inputs={"poly": str(g), "vars": list(vars), "radii": radii, "config": _config_dict(cfg)},
        payload=payload,
        text=lines,
        rows=rows,
    )


def cmd_verify(args) -> _Result:
    rho0 = _parse_complex(args.rho0)
    matrix = run_certificate_matrix(
        n_min=args.n_min,
        n_max=args.n_max,
        q_min=args.q_min,
        q_max=args.q_max,
        rho0=rho0,
        mutate=args.inject_mutation,
        window=args.window,
    )
    lines = []
    for cell in matrix.cells:
        if cell.passed:
            lines.append(f"n={cell.n} q={cell.q}: PASS")
        else:
            lines.append(f"n={cell.n} q={cell.q}: FAIL [{', '.join(cell.failed_checks)}]")
    passed = sum(1 for c in matrix.cells if c.passed)
    lines.append(f"{passed}/{len(matrix.cells)} cells passed")

    payload = {
        "all_pass": matrix.all_pass,
        "cells": [
            {
                "n": cell.n,
                "q": cell.q,
                "passed": cell.passed,
                "failed_checks": list(cell.failed_checks),
                "checks": dict(cell.checks),
            }
            for cell in matrix.cells
        ],
    }
    rows = [["n", "q", "passed", "failed_checks"]]
    for cell in matrix.cells:
        rows.append([cell.n, cell.q, _bool(cell.passed), ";".join(cell.failed_checks)])

    return _Result(
        subcommand="verify",
        inputs={
            "n_min": args.n_min,
            "n_max": args.n_max,
            "q_min": args.q_min,
            "q_max": args.q_max,
            "rho0": _cnum(rho0),
            "mutate": bool(args.inject_mutation),
            "window": args.window,
        },
        payload=payload,
        text=lines,
        rows=rows,
        exit_code=0 if matrix.all_pass else 1,
    )


# -- parser / driver ------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lojexp",
        description="Curve certificates and sphere estimates for gradient decay at infinity.",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--output", default=None, help="write the report to this file")

    poly_src = argparse.ArgumentParser(add_help=False)
    group = poly_src.add_mutually_exclusive_group(required=True)
    group.add_argument("--poly", default=None, help="polynomial literal")
    group.add_argument("--poly-file", default=None, help="file containing a polynomial literal")
    group.add_argument(
        "--family", nargs=2, type=int, metavar=("N", "Q"), default=None,
        help="use the built-in family member with parameters N, Q",
    )
    poly_src.add_argument("--vars", default=None, help="comma-separated variable names (default x,y,z)")

    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--starts", type=int, default=None)
    numeric.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    numeric.add_argument("--step-tol", dest="step_tol", type=float, default=None)
    numeric.add_argument("--grad-tol", dest="grad_tol", type=float, default=None)
    numeric.add_argument("--seed", type=int, default=None)
    numeric.add_argument("--mu", type=float, default=None)
    numeric.add_argument("--prec-bits", dest="prec_bits", type=int, default=None)
    numeric.add_argument("--config", default=None, help="key=value config file for these options")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("family", parents=[common], help="print a family member; --verify adds certificates")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--verify", action="store_true", help="run the exact certificate bundle")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("curve", parents=[common, poly_src], help="exponent and certificates along a curve")
    curve_group = p.add_mutually_exclusive_group(required=True)
    curve_group.add_argument("--curve", default=None, help='curve literal, e.g. "t^-1, t, 0"')
    curve_group.add_argument("--psi", action="store_true", help="use the witness curve of --family")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("exponent", parents=[common, poly_src, numeric], help="log-log slope of phi(r)")
    p.add_argument("--rmin", type=float, default=10.0)
    p.add_argument("--rmax", type=float, default=1.0e4)
    p.add_argument("--count", type=int, default=12)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("malgrange", parents=[common, poly_src, numeric], help="numeric probe near a fiber")
    p.add_argument("--t0", default="0", help="target value (complex literal, default 0)")
    p.add_argument("--radii", default="10,100,1000")
    p.add_argument("--eps", type=float, default=1e-3)
    p.set_defaults(func=cmd_malgrange)

    p = sub.add_parser("mtame", parents=[common, poly_src, numeric], help="scaled-gradient set probe")
    p.add_argument("--radii", default="10,100,1000")
    p.set_defaults(func=cmd_mtame)

    p = sub.add_parser("verify", parents=[common], help="exact certificate matrix over a parameter grid")
    p.add_argument("--n-min", dest="n_min", type=int, default=1)
    p.add_argument("--n-max", dest="n_max", type=int, default=4)
    p.add_argument("--q-min", dest="q_min", type=int, default=1)
    p.add_argument("--q-max", dest="q_max", type=int, default=4)
    p.add_argument("--rho0", default="1", help="escape-trace perturbation coefficient")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--inject-mutation", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    return parser


def _render(args, result: _Result, wall_time_s: float) -> str:
    if args.format == "json":
        from . import __version__

        envelope = {
            "version": __version__,
            "subcommand": result.subcommand,
            "input": result.inputs,
            "payload": result.payload,
            "wall_time_s": wall_time_s,
        }
        return json.dumps(envelope, indent=2) + "\n"
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(result.rows)
        return buf.getvalue()
    return "\n".join(result.text) + "\n"


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        started = time.perf_counter()
        result = args.func(args)
        rendered = _render(args, result, time.perf_counter() - started)
        if args.output:
            try:
                Path(args.output).write_text(rendered)
            except OSError as e:
                raise InputError(f"cannot write output file {args.output}: {e}") from None
        else:
            sys.stdout.write(rendered)
    except DimensionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NumericError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
