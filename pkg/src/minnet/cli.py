"""Command-line interface.

::

    minnet validate --input data.json
    minnet solve --input data.json --p inf --out report.json
    minnet sample --input report.json --density 20 --out edges.csv
    minnet report --input report.json

``solve`` writes the report to ``--out`` and the bare network next to it as
``<stem>.network.json``. Exit codes: 0 success, 2 invalid input, 3 non-convex
data, 4 solver failure. ``MINNET_THREADS`` caps the BLAS thread pool.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import io
from .basis import build_basic_networks
from .errors import InvalidInput, MinNetError
from .geometry import build_triangulation, check_convexity
from .linf_solver import Certified, LinfOptions, solve_linf
from .lp_solver import NewtonOptions, solve_lp
from .netcore import evaluate, norms, residuals

logger = logging.getLogger("minnet")


def _p_value(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"p must be 'inf' or a number, got {text!r}") from None
    if not p > 1.0 or math.isinf(p):
        raise argparse.ArgumentTypeError("p must satisfy p > 1")
    return p


def _parse_args(argv=None):
    parser = argparse.ArgumentParser(prog="minnet", description="minimum norm curve networks on scattered data")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tri=True):
        p.add_argument("--input", required=True, help="input JSON path")
        p.add_argument("--out", help="output path (default: stdout)")
        if tri:
            p.add_argument("--triangulation", default="auto",
                           help="'auto' (Delaunay), 'lower_hull', or a JSON file of triangles")

    common(sub.add_parser("validate", help="check that the data are convex on the triangulation"))
    solve = sub.add_parser("solve", help="compute the minimum norm network")
    common(solve)
    solve.add_argument("--p", type=_p_value, default=math.inf, help="'inf' or a number > 1")
    solve.add_argument("--tol", type=float, default=None, help="solver tolerance")
    sample = sub.add_parser("sample", help="write per-edge polylines as CSV")
    common(sample, tri=False)
    sample.add_argument("--density", type=int, default=20, help="intervals per edge (>= 2)")
    common(sub.add_parser("report", help="re-score and print a stored solve report"), tri=False)
    return parser.parse_args(argv)


def _threads() -> int | None:
    raw = os.environ.get("MINNET_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInput(f"MINNET_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InvalidInput(f"MINNET_THREADS must be a positive integer, got {raw!r}")
    return n


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_problem(args):
    data, triangles = io.load_input(args.input)
    if args.triangulation not in ("auto", "lower_hull"):
        triangles = io.load_triangles(args.triangulation, data.n)
    method = "lower_hull" if args.triangulation == "lower_hull" else "delaunay"
    return data, build_triangulation(data, triangles, method=method)


def _cmd_validate(args) -> int:
    data, tri = _load_problem(args)
    report = check_convexity(data, tri)
    _emit(io.dumps(report.to_dict()), args.out)
    return 0 if report.is_convex else 3


def _certificate_dict(cert) -> dict:
    out = {"status": cert.status}
    if isinstance(cert, Certified):
        out.update(C=cert.C, alpha=cert.alpha, residual=cert.residual)
    elif hasattr(cert, "reason"):
        out["reason"] = cert.reason
    return out


def _score(net) -> tuple[list, dict, dict]:
    basics = build_basic_networks(net.data, net.tri)
    rep = residuals(net, basics, net.data)
    families = {
        "smoothness": rep.smoothness.tolist(),
        "lemma4": rep.lemma4.tolist(),
        "interpolation": rep.interpolation.tolist(),
    }
    keys = [[B.vertex, B.window] for B in basics]
    return keys, families, rep.max_abs()


def _cmd_solve(args) -> int:
    data, tri = _load_problem(args)
    threads = _threads()
    start = time.perf_counter()
    with threadpool_limits(limits=threads):
        if math.isinf(args.p):
            opts = LinfOptions() if args.tol is None else LinfOptions(tol=args.tol)
            sol = solve_linf(data, tri, opts)
            net, norm = sol.network, sol.C
            certificate, final = _certificate_dict(sol.certificate), None
        else:
            opts = NewtonOptions() if args.tol is None else NewtonOptions(tol=args.tol)
            sol = solve_lp(data, tri, args.p, opts)
            net, norm = sol.network, norms(sol.network, args.p)
            certificate, final = None, sol.final_residual
    elapsed = time.perf_counter() - start
    keys, families, worst = _score(net)
    notes = []
    if not sol.strictly_convex:
        notes.append("data are convex but not strictly convex; the minimizer may not be unique")
    if math.isinf(args.p):
        notes.append("uniqueness of the minimum L_inf network is not established; other optima may exist")
    report = io.SolveReport(
        p=args.p,
        norm=norm,
        edges=io.edge_summary(net),
        residuals=families,
        max_residuals=worst,
        basics=keys,
        convexity=check_convexity(data, tri).to_dict(),
        certificate=certificate,
        iterations=int(sol.iterations),
        final_residual=final,
        threads=threads,
        network=io.network_to_dict(net),
        timing_seconds=elapsed,
        notes=notes,
    )
    text = io.dumps(report.to_dict())
    _emit(text, args.out)
    if args.out:
        out = Path(args.out)
        io.write_json(out.with_name(out.stem + ".network.json"), io.network_to_dict(net))
    return 0


def sample_rows(net, density: int) -> list:
    """``density + 1`` equally spaced samples per edge as ``(i, j, t, x, y, z)``."""
    if density < 2:
        raise InvalidInput(f"density must be at least 2, got {density}")
    rows = []
    xy = net.data.xy
    for e, (i, j) in enumerate(net.tri.edges.tolist()):
        c = float(net.tri.lengths[e])
        u = (xy[j] - xy[i]) / c
        for k in range(density + 1):
            t = c * k / density
            x, y = xy[i] + t * u
            rows.append((i, j, t, float(x), float(y), evaluate(net, e, t)))
    return rows


def _cmd_sample(args) -> int:
    net = io.load_network(args.input)
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["edge_i", "edge_j", "t", "x", "y", "z"])
    for i, j, *vals in sample_rows(net, args.density):
        writer.writerow([i, j, *(repr(v) for v in vals)])
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_report(args) -> int:
    report = io.load_report(args.input)
    net = io.network_from_dict(report.network)
    _, families, worst = _score(net)
    stored = report.residuals
    same = all(np.array_equal(np.array(families[k]), np.array(stored[k])) for k in families)
    lines = [
        f"p                 {'inf' if math.isinf(report.p) else report.p}",
        f"norm              {report.norm!r}",
        f"edges             {len(report.edges)}",
        f"basic networks    {len(report.basics)}",
        f"convex            {report.convexity['is_convex']} (strict: {report.convexity['is_strictly_convex']})",
    ]
    if report.certificate is not None:
        cert = report.certificate
        extra = f" C={cert['C']!r}" if "C" in cert else f" ({cert.get('reason', '')})"
        lines.append(f"certificate       {cert['status']}{extra}")
    lines += [f"max |{k}|".ljust(21) + f"{v:.3e}" for k, v in worst.items()]
    lines += [
        f"iterations        {report.iterations}",
        f"time              {report.timing_seconds:.3f} s",
        f"re-scored         {'identical' if same else 'DIFFERENT'}",
    ]
    lines += [f"note: {n}" for n in report.notes]
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if same else 2


_COMMANDS = {"validate": _cmd_validate, "solve": _cmd_solve, "sample": _cmd_sample, "report": _cmd_report}


def main(argv=None) -> int:
    args = _parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except MinNetError as exc:
        print(f"minnet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"minnet: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
