"""Command-line surface: validation, bases, norm tables, flow datasets,
reductions, and curvature probes, emitted as deterministic CSV or JSON.

All floating-point values are printed with 17 significant digits so reports
round-trip exactly; repeated runs with the same configuration are
bit-identical.  Exit codes: 0 success, 1 domain failure (validation or
audit), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import geodesic, polytope, quantization, reduction
from .potential import DomainError, abreu_scalar_curvature, guillemin_potential

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    """Bad flag values or malformed input files."""


def fmt(x) -> str:
    """17-significant-digit float formatting; integers stay integers."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


# ---------------------------------------------------------------------------
# flag parsing


def parse_s_grid(text):
    try:
        grid = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"could not parse --s-grid {text!r}")
    if not grid or any(s < 0 for s in grid):
        raise UsageError("--s-grid needs nonnegative values")
    if any(a >= b for a, b in zip(grid, grid[1:])):
        raise UsageError("--s-grid must be strictly increasing")
    return grid


def parse_m(text):
    try:
        return tuple(int(v) for v in text.split(";"))
    except ValueError:
        raise UsageError(f"could not parse --m {text!r}")


def parse_matrix(text):
    try:
        return tuple(tuple(int(v) for v in row.split(","))
                     for row in text.split(";"))
    except ValueError:
        raise UsageError(f"could not parse --B {text!r}")


def parse_point(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"could not parse --point {text!r}")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="toricq",
        description="Geometric quantization of toric manifolds along "
                    "geodesic rays of symplectic potentials.")
    ap.add_argument("--input", help="polytope JSON file")
    ap.add_argument("--command", required=True,
                    choices=["validate", "points", "norms", "flow",
                             "reduce", "curvature"])
    ap.add_argument("--p", type=int, default=1,
                    help="number of deformed (leading) coordinates")
    ap.add_argument("--B", help="SL(n,Z) frame change, rows 'a,b;c,d'")
    ap.add_argument("--s-grid", default="10,20,40",
                    help="comma-separated increasing geodesic times")
    ap.add_argument("--m", help="single lattice point 'm1;m2' to restrict to")
    ap.add_argument("--alpha", type=float,
                    help="weight of the hyperplane-reduction family")
    ap.add_argument("--point", help="evaluation point 'x1,x2'")
    ap.add_argument("--tol", type=float, default=1e-6,
                    help="quadrature tolerance")
    ap.add_argument("--format", default="csv", choices=["csv", "json"])
    ap.add_argument("--out", help="output path (default stdout)")
    return ap


def load_input(args):
    if not args.input:
        raise UsageError("--input is required for this command")
    try:
        poly = polytope.load_polytope(args.input)
    except FileNotFoundError:
        raise UsageError(f"no such file: {args.input}")
    except (json.JSONDecodeError, polytope.PolytopeError, TypeError,
            ValueError) as exc:
        raise UsageError(f"malformed polytope JSON: {exc}")
    if args.B:
        fc = polytope.FrameChange(B=parse_matrix(args.B), p=args.p)
        poly = polytope.apply_frame_change(poly, fc)
    return poly


def check_p(poly, p):
    if not 1 <= p <= poly.dim:
        raise UsageError(f"--p {p} out of range for dimension {poly.dim}")


# ---------------------------------------------------------------------------
# table emission


def emit(columns, rows, args) -> str:
    """Render rows (already string-formatted) as CSV or a mirroring JSON."""
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
        return buf.getvalue()
    return json.dumps({"columns": list(columns),
                       "rows": [list(r) for r in rows]}, indent=2) + "\n"


def write_output(text, args):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args):
    poly = load_input(args)
    report = polytope.validate_delzant(poly)
    payload = {"ok": report.ok, "verdict": report.verdict,
               "messages": list(report.messages),
               "violations": [[ [str(c) for c in v], None if d is None else int(d)]
                              for v, d in report.violations]}
    if args.format == "json":
        write_output(json.dumps(payload, indent=2) + "\n", args)
    else:
        lines = [f"verdict,{report.verdict}", f"ok,{report.ok}"]
        lines += [f"message,{m}" for m in report.messages]
        write_output("\n".join(lines) + "\n", args)
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_points(args):
    poly = load_input(args)
    basis = quantization.quantum_basis(poly, min(args.p, poly.dim))
    columns = ["index", "m", "H"]
    rows = [[el.index, ";".join(str(c) for c in el.m),
             fmt(el.hamiltonian_value)] for el in basis]
    write_output(emit(columns, rows, args), args)
    return EXIT_OK


def cmd_norms(args):
    poly = load_input(args)
    check_p(poly, args.p)
    grid = parse_s_grid(getattr(args, "s_grid"))
    basis = quantization.quantum_basis(poly, args.p)
    points = [el.m for el in basis]
    if args.m is not None:
        m = parse_m(args.m)
        if m not in points:
            raise UsageError(f"--m {m} is not a lattice point of the polytope")
        points = [m]
    columns = ["m", "s", "norm2", "tilde_norm2", "c_m", "limit", "pass"]
    rows = []
    for m in points:
        mtxt = ";".join(str(c) for c in m)
        cm = quantization.limit_constant(poly, args.p, m, tol=args.tol)
        limit = math.pi ** (args.p / 2.0) * cm
        values = []
        for s in grid:
            tilde = quantization.tilde_norm_squared(poly, args.p, m, s,
                                                    tol=args.tol)
            H = 0.5 * sum(float(c) ** 2 for c in m[:args.p])
            values.append(tilde.value)
            rows.append([mtxt, fmt(s), fmt(math.exp(2 * s * H) * tilde.value),
                         fmt(tilde.value), fmt(cm), fmt(limit),
                         str(tilde.converged)])
        if len(grid) >= 2:
            extrap = quantization.richardson_extrapolate(grid, values)
        else:
            extrap = values[-1]
        ok = abs(extrap - limit) <= max(args.tol, 0.02 * abs(limit))
        rows.append([mtxt, "inf", "", fmt(extrap), fmt(cm), fmt(limit),
                     str(ok)])
    write_output(emit(columns, rows, args), args)
    return EXIT_OK


def cmd_flow(args):
    poly = load_input(args)
    check_p(poly, args.p)
    grid = parse_s_grid(getattr(args, "s_grid"))
    base = guillemin_potential(poly)
    ray = geodesic.MabuchiRay(base, args.p)
    if args.point is not None:
        pts = [parse_point(args.point)]
    else:
        pts = [np.array([float(c) for c in poly.barycenter])]
    columns = ["point", "s", "frame_distance", "connection_gap"]
    rows = []
    for x in pts:
        ptxt = ";".join(fmt(v) for v in x)
        if not base.is_interior(x):
            rows.append([ptxt, "", "error: point not interior", ""])
            continue
        limit_frame = geodesic.polarization_frame_limit(ray, x)
        limit_conn = geodesic.connection_form_limit(ray, x)
        for s in grid:
            dist = geodesic.grassmann_distance(
                geodesic.polarization_frame_s(ray, x, s), limit_frame)
            gap = geodesic.connection_form_gap(
                geodesic.connection_form_s(ray, x, s), limit_conn)
            rows.append([ptxt, fmt(s), fmt(dist), fmt(gap)])
    write_output(emit(columns, rows, args), args)
    return EXIT_OK


def cmd_reduce(args):
    if args.alpha is not None:
        a = int(args.alpha)
        structure = reduction.c3_reduction(a, a, 0)
        s11 = reduction.reduced_scalar_curvature(structure, [1.0, 1.0])
        s22 = reduction.reduced_scalar_curvature(structure, [2.0, 2.0])
        columns = ["alpha", "class", "S_at_1_1", "S_at_2_2"]
        rows = [[fmt(args.alpha), structure.classification, fmt(s11),
                 fmt(s22)]]
        write_output(emit(columns, rows, args), args)
        return EXIT_OK
    poly = load_input(args)
    check_p(poly, args.p)
    levels, total, ok = reduction.reduction_level_report(poly, args.p)
    columns = ["c", "dim", "class"]
    rows = [[";".join(str(v) for v in row["c"]), str(row["dim"]),
             row["class"]] for row in levels]
    rows.append(["total", str(total), "ok" if ok else "mismatch"])
    write_output(emit(columns, rows, args), args)
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_curvature(args):
    if args.alpha is not None:
        a = int(args.alpha)
        structure = reduction.c3_reduction(a, a, 0)
        pot = structure.potential
    else:
        poly = load_input(args)
        pot = guillemin_potential(poly)
    if args.point is not None:
        x = parse_point(args.point)
    else:
        x = np.array([float(c) for c in pot.barycenter])
    try:
        S = abreu_scalar_curvature(pot, x)
    except DomainError as exc:
        raise UsageError(str(exc))
    columns = ["point", "scalar_curvature"]
    rows = [[";".join(fmt(v) for v in x), fmt(S)]]
    write_output(emit(columns, rows, args), args)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "points": cmd_points,
            "norms": cmd_norms, "flow": cmd_flow, "reduce": cmd_reduce,
            "curvature": cmd_curvature}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (polytope.PolytopeError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def console_main():  # pragma: no cover - thin wrapper
    raise SystemExit(main())


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
