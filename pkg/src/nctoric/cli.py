"""Command-line front end.

One binary, subcommand style; every run prints a single JSON document to
stdout whose header echoes the inputs, and human-readable diagnostics go
to stderr.  Exit codes: 0 all checks passed, 1 a verification residual
exceeded its tolerance, 2 input or usage error.  Reports are byte-stable
for fixed (inputs, seed, step, tol): no timestamps or timings are emitted.

Polytopes and R-matrices come from JSON files; the --polytope flag also
accepts catalog names (cp1, cp2, cp1xcp1, simplex:d, hirzebruch:a) and
--chart names the Kaehler chart for flow commands.  Basis labels use the
syntax ``degree:(m1,m2,...)``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from . import groupoid as gp
from . import ncring as nc
from . import quantization as qz
from . import suite
from . import toric_flows as tf
from .polytope import (
    DelzantPolytope,
    load_polytope,
    polytope_to_dict,
    standard,
    validate_delzant,
)
from .rmatrix import RMatrix, load_rmatrix

__all__ = ["main", "build_parser", "parse_polytope_arg", "parse_rmatrix_arg", "parse_basis_label"]

_EXIT_OK = 0
_EXIT_RESIDUAL = 1
_EXIT_INPUT = 2

_CATALOG_RE = re.compile(r"^(cp1|cp2|cp1xcp1|simplex:(\d+)|hirzebruch:(\d+))$")


class InputError(Exception):
    """User-input problem: maps to exit code 2."""


def parse_polytope_arg(value: str) -> DelzantPolytope:
    """Accept a catalog name or a JSON file path; validate either way."""
    m = _CATALOG_RE.match(value)
    try:
        if m:
            if m.group(2):
                P = standard("simplex", int(m.group(2)))
            elif m.group(3):
                P = standard("hirzebruch", int(m.group(3)))
            else:
                P = standard(m.group(1))
        else:
            P = load_polytope(value)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read polytope {value!r}: {exc}") from exc
    report = validate_delzant(P)
    if not report.passed:
        raise InputError(
            f"polytope {value!r} failed Delzant validation: " + "; ".join(report.messages)
        )
    return P


def parse_rmatrix_arg(value: str, expect_dim: int | None = None) -> RMatrix:
    try:
        C = load_rmatrix(value)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read R-matrix {value!r}: {exc}") from exc
    if expect_dim is not None and C.dim != expect_dim:
        raise InputError(
            f"R-matrix dimension {C.dim} does not match polytope/chart dimension {expect_dim}"
        )
    return C


_LABEL_RE = re.compile(r"^(\d+):\(([-\d,\s]*)\)$")


def parse_basis_label(value: str) -> tuple[int, tuple[int, ...]]:
    """Parse ``degree:(m1,m2,...)`` into (degree, weight)."""
    m = _LABEL_RE.match(value.strip())
    if not m:
        raise InputError(f"malformed basis label {value!r}; expected like 2:(1,0)")
    degree = int(m.group(1))
    body = m.group(2).strip()
    weight = tuple(int(x) for x in body.split(",")) if body else ()
    return degree, weight


def parse_point_arg(value: str, dim: int) -> np.ndarray:
    """Parse a comma-separated list of complex numbers like ``1+1j,0.5``."""
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != dim:
        raise InputError(f"point must have {dim} comma-separated components")
    try:
        return np.array([complex(p) for p in parts])
    except ValueError as exc:
        raise InputError(f"malformed point component in {value!r}: {exc}") from exc


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _complex_dict(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ring(args) -> int:
    P = parse_polytope_arg(args.polytope)
    nmax = args.degree
    report = {
        "command": "ring",
        "inputs": {"polytope": polytope_to_dict(P), "degree": nmax},
        "dims": nc.hilbert_function(P, nmax),
        "basis": {
            str(n): [list(ws.weight) for ws in nc.basis(P, n)] for n in range(nmax + 1)
        },
        "characters": [qz.character(P, n).to_dict() for n in range(nmax + 1)],
    }
    _emit(report, args.out)
    return _EXIT_OK


def cmd_multiply(args) -> int:
    P = parse_polytope_arg(args.polytope)
    C = parse_rmatrix_arg(args.rmatrix, P.dim)
    n1, m1 = parse_basis_label(args.a)
    n2, m2 = parse_basis_label(args.b)
    try:
        a = nc.RingElement.basis_element(P, n1, m1)
        b = nc.RingElement.basis_element(P, n2, m2)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    prod = nc.star(C, P, a, b)
    ((key, coeff),) = prod.terms.items()
    report = {
        "command": "multiply",
        "inputs": {
            "polytope": polytope_to_dict(P),
            "a": args.a,
            "b": args.b,
            "rmatrix": args.rmatrix,
        },
        "factor": _complex_dict(coeff),
        "target": {"degree": key.degree, "weight": list(key.weight)},
        "commutation_factor": _complex_dict(nc.commutation_factor(C, m1, m2)),
    }
    _emit(report, args.out)
    return _EXIT_OK


def cmd_constants(args) -> int:
    P = parse_polytope_arg(args.polytope)
    C = parse_rmatrix_arg(args.rmatrix, P.dim)
    table = nc.structure_constants(C, P, args.n1, args.n2)
    report = {
        "command": "constants",
        "inputs": {
            "polytope": polytope_to_dict(P),
            "rmatrix": args.rmatrix,
            "n1": args.n1,
            "n2": args.n2,
        },
        "entries": table.to_list(),
    }
    _emit(report, args.out)
    return _EXIT_OK


def cmd_quantize(args) -> int:
    P = parse_polytope_arg(args.polytope)
    fibres = qz.bs_fibres(P, args.degree)
    report = {
        "command": "quantize",
        "inputs": {"polytope": polytope_to_dict(P), "degree": args.degree},
        "hom_dimension": qz.hom_dimension(P, args.degree),
        "fibres": [list(f.weight) for f in fibres],
        "character": qz.character(P, args.degree).to_dict(),
    }
    _emit(report, args.out)
    return _EXIT_OK


def cmd_groupoid_verify(args) -> int:
    C = parse_rmatrix_arg(args.rmatrix)
    report_obj = gp.fuzz_verify(C, args.trials, seed=args.seed, tol=args.tol)
    report = {
        "command": "groupoid-verify",
        "inputs": {"rmatrix": args.rmatrix, "trials": args.trials,
                   "seed": args.seed, "tol": args.tol},
        **report_obj.to_dict(),
    }
    _emit(report, args.out)
    return _EXIT_OK if report_obj.passed else _EXIT_RESIDUAL


def _chart_and_c(args) -> tuple[tf.ToricKahlerChart, RMatrix, np.ndarray]:
    try:
        chart = tf.standard_chart(args.chart)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    C = parse_rmatrix_arg(args.rmatrix, chart.dim)
    z0 = parse_point_arg(args.point, chart.dim)
    return chart, C, z0


def cmd_flow(args) -> int:
    chart, C, z0 = _chart_and_c(args)
    cfg = tf.FlowConfig(step=args.step, quad_points=args.quad_points)
    traj = tf.flow(C, chart, z0, args.time, cfg, with_convergence_estimate=True)
    report = {
        "command": "flow",
        "inputs": {
            "chart": chart.name,
            "rmatrix": args.rmatrix,
            "point": args.point,
            "time": args.time,
            "seed": args.seed,
        },
        "chart": chart.name,
        "z0": [[float(c.real), float(c.imag)] for c in z0],
        "t": args.time,
        "step": args.step,
        "escaped": traj.escaped,
    }
    if traj.escaped:
        report["escape_time"] = traj.escape_time
        _emit(report, args.out)
        sys.stderr.write("flow escaped the chart; integrals unavailable\n")
        return _EXIT_RESIDUAL
    mu_int, mu_err = tf.averaged_moment_error(C, chart, z0, args.time, cfg)
    r_val = tf.r_integral(C, chart, z0, args.time, cfg)
    report.update(
        {
            "endpoint": [[float(c.real), float(c.imag)] for c in traj.endpoint],
            "mu_integral": [float(x) for x in mu_int],
            "R": _complex_dict(r_val),
            "residuals": {
                "endpoint_step_halving": traj.convergence_estimate,
                "mu_quadrature_estimate": mu_err,
            },
            "converged": bool(
                (traj.convergence_estimate or 0.0) < 1e-6 and mu_err < 1e-8
            ),
        }
    )
    _emit(report, args.out)
    return _EXIT_OK


def cmd_flow_verify(args) -> int:
    chart, C, z0 = _chart_and_c(args)
    cfg = tf.FlowConfig(step=args.step, quad_points=args.quad_points)
    residuals = {
        "r_additivity": tf.verify_r_additivity(C, chart, z0, args.time, args.time, cfg),
        "polytope_image_slack": tf.verify_polytope_image(C, chart, z0, max(1.0, args.time), cfg),
        "star_equation": tf.verify_star_equation(C, chart, z0, args.time, cfg),
        "courant_symmetry": tf.verify_courant_symmetry(C, chart, z0),
    }
    tol = args.tol
    passed = (
        residuals["r_additivity"] < tol
        and residuals["polytope_image_slack"] >= -1e-6
        and residuals["star_equation"] < tol
        and residuals["courant_symmetry"] < 1e-5
    )
    report = {
        "command": "flow-verify",
        "inputs": {
            "chart": chart.name,
            "rmatrix": args.rmatrix,
            "point": args.point,
            "time": args.time,
            "step": args.step,
            "tol": tol,
            "seed": args.seed,
        },
        "residuals": residuals,
        "pass": passed,
    }
    _emit(report, args.out)
    return _EXIT_OK if passed else _EXIT_RESIDUAL


def cmd_verify_all(args) -> int:
    results = suite.run_all(seed=args.seed)
    passed = all(r["passed"] for r in results)
    report = {
        "command": "verify-all",
        "inputs": {"seed": args.seed},
        "criteria": results,
        "pass": passed,
    }
    _emit(report, args.out)
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        sys.stderr.write(f"{status} criterion {r['id']}: {r['name']}\n")
    return _EXIT_OK if passed else _EXIT_RESIDUAL


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nctoric",
        description="Noncommutative toric coordinate rings and their verification suites.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, *, rmatrix=False, polytope=False, chartflags=False):
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        p.add_argument("--out", default=None, help="write the JSON report to a file")
        if polytope:
            p.add_argument("--polytope", required=True,
                           help="polytope JSON file or catalog name (cp2, cp1xcp1, ...)")
        if rmatrix:
            p.add_argument("--rmatrix", required=True, help="R-matrix JSON file")
        if chartflags:
            p.add_argument("--chart", default="cp2", help="Kaehler chart name (default cp2)")
            p.add_argument("--point", required=True,
                           help="initial point, comma-separated complex components")
            p.add_argument("--time", type=float, default=1.0, help="flow time (default 1)")
            p.add_argument("--step", type=float, default=1e-3, help="RK4 step (default 1e-3)")
            p.add_argument("--quad-points", type=int, default=12,
                           help="Gauss-Legendre nodes per unit time (default 12)")

    p = sub.add_parser("ring", help="graded dimensions, bases and characters")
    common(p, polytope=True)
    p.add_argument("--degree", type=int, default=3, help="maximal degree (default 3)")
    p.set_defaults(func=cmd_ring)

    p = sub.add_parser("multiply", help="product of two basis labels")
    common(p, polytope=True, rmatrix=True)
    p.add_argument("--a", required=True, help="left label, e.g. 1:(1,0)")
    p.add_argument("--b", required=True, help="right label, e.g. 1:(0,1)")
    p.set_defaults(func=cmd_multiply)

    p = sub.add_parser("constants", help="structure-constant table")
    common(p, polytope=True, rmatrix=True)
    p.add_argument("--n1", type=int, default=1)
    p.add_argument("--n2", type=int, default=1)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("quantize", help="Bohr-Sommerfeld fibres and Hom dimension")
    common(p, polytope=True)
    p.add_argument("--degree", type=int, default=1)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("groupoid-verify", help="fuzz the groupoid axioms")
    common(p, rmatrix=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_groupoid_verify)

    p = sub.add_parser("flow", help="integrate the deformation flow and its integrals")
    common(p, rmatrix=True, chartflags=True)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("flow-verify", help="flow identities at one point")
    common(p, rmatrix=True, chartflags=True)
    p.add_argument("--tol", type=float, default=1e-4,
                   help="tolerance for the flow identities (default 1e-4)")
    p.set_defaults(func=cmd_flow_verify)

    p = sub.add_parser("verify-all", help="run the full acceptance battery")
    common(p)
    p.set_defaults(func=cmd_verify_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stdout.write(json.dumps({"error": str(exc)}, sort_keys=True) + "\n")
        sys.stderr.write(f"input error: {exc}\n")
        return _EXIT_INPUT
    except gp.ComposabilityError as exc:
        sys.stdout.write(
            json.dumps({"error": str(exc), "deviation": exc.deviation}, sort_keys=True) + "\n"
        )
        sys.stderr.write(f"input error: {exc}\n")
        return _EXIT_INPUT
    except tf.ChartEscapeError as exc:
        sys.stdout.write(json.dumps({"error": str(exc)}, sort_keys=True) + "\n")
        sys.stderr.write(f"{exc}\n")
        return _EXIT_RESIDUAL


if __name__ == "__main__":
    sys.exit(main())
