"""Command-line interface: ``surfarea {lantern,area,converge,export}``.

Exit codes: 0 on success, 1 for usage errors, 2 when a computation or file
operation fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import analysis
from .area import (
    AreaMethod,
    AreaReport,
    exact_area_terms,
    graph_area_terms,
)
from .errors import InvalidParameter, SurfAreaError, UnknownField
from .fields import ScalarField, parse_field_spec
from .interp import Kind, interpolate_mesh
from .mesh import generate_aniso, generate_lantern, generate_uniform, write_off
from .quadrature import gauss_legendre, triangle_rule

log = logging.getLogger("surfarea")

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2

DEFAULT_FIELD = "cylinder-slice:a=1.1"
DEFAULT_ALPHAS = "1.0,1.2,1.6,2.0,2.4"
DEFAULT_NS = "16,32,64,128,256,512"
SCHEDULES = {"m=n": lambda n: n, "m=n^2": lambda n: n * n, "m=n^3": lambda n: n**3}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _domain(text):
    vals = _floats(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"domain needs four numbers a,b,c,d, got {text!r}")
    return tuple(vals)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="surfarea", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file whose keys mirror the long flags (dashes or underscores)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("lantern", help="Schwarz lantern: closed form vs summed triangle areas",
                       formatter_class=fmt)
    p.add_argument("--m", type=int, default=4, help="number of strips")
    p.add_argument("--n", type=int, default=4, help="triangles per ring (half the per-strip count)")
    p.add_argument("--r", type=float, default=1.0, help="cylinder radius")
    p.add_argument("--H", type=float, default=1.0, help="cylinder height")
    p.add_argument("--schedule", choices=sorted(SCHEDULES), default=None,
                   help="sweep n = n-min, 2 n-min, ... up to n-max with m tied to n")
    p.add_argument("--n-min", type=int, default=4, help="first n of a schedule")
    p.add_argument("--n-max", type=int, default=64, help="last n of a schedule")
    p.add_argument("--format", choices=("text", "json"), default="text", help="output format")

    p = sub.add_parser("area", help="area of a field's graph and of its interpolants", formatter_class=fmt)
    _common_field_args(p)
    p.add_argument("--N", type=int, default=32, help="cells along x")
    p.add_argument("--alpha", type=float, default=None,
                   help="anisotropy exponent of the strip mesh; omit for the uniform N x N mesh")
    p.add_argument("--kind", choices=("lagrange", "cr", "both"), default="both", help="interpolants to report")

    p = sub.add_parser("converge", help="Lagrange and CR area errors over N and alpha (CSV + gnuplot)",
                       formatter_class=fmt)
    _common_field_args(p)
    p.add_argument("--alphas", type=_floats, default=_floats(DEFAULT_ALPHAS), help="comma-separated alphas")
    p.add_argument("--Ns", type=_ints, default=_ints(DEFAULT_NS), help="comma-separated, increasing N values")
    p.add_argument("--kind", choices=("both", "lagrange-only", "cr-only"), default="both",
                   help="which error columns to compute")
    p.add_argument("--out", type=Path, default=Path("convergence.csv"), help="CSV output path")
    p.add_argument("--threads", type=int, default=1, help="worker threads; output does not depend on it")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="format of the summary on stdout")

    p = sub.add_parser("export", help="write the interpolant's graph as an OFF file", formatter_class=fmt)
    _common_field_args(p)
    p.add_argument("--N", type=int, default=12, help="cells along x")
    p.add_argument("--alpha", type=float, default=1.6, help="anisotropy exponent; 0 selects the uniform mesh")
    p.add_argument("--kind", choices=("lagrange", "cr"), default="lagrange", help="interpolant to export")
    p.add_argument("--out", type=Path, default=Path("surface.off"), help="OFF output path")
    return parser


def _common_field_args(p):
    p.add_argument("--field", default=DEFAULT_FIELD, help="field spec name:k1=v1,k2=v2")
    p.add_argument("--domain", type=_domain, default=(-1.0, 1.0, -1.0, 1.0), help="rectangle a,b,c,d")
    p.add_argument("--edge-order", type=int, default=5, help="Gauss-Legendre points per edge (CR)")
    p.add_argument("--quad-degree", type=int, default=8, help="triangle rule degree for exact areas")
    p.add_argument("--refine", type=int, default=3, help="4**refine subtriangles per quadrature cell")


def _apply_config(parser, argv):
    """Re-parse with defaults taken from ``--config`` so explicit flags still win."""
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        cfg = json.loads(args.config.read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"--config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"--config {args.config}: expected a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    for key, value in cfg.items():
        if key == "command":
            continue
        if key not in known or key == "help":
            raise UsageError(f"--config: unknown option {key!r} for '{args.command}'")
        action = known[key]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        if action.type is not None and isinstance(value, (str, int, float)):
            try:
                value = action.type(value)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"--config: bad value for {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"--config: {key!r} must be one of {sorted(action.choices)}")
        subparser.set_defaults(**{key: value})
    return parser.parse_args(argv)


def _validate(args):
    """Reject bad numeric flags before any work, naming the flag."""
    def need(cond, flag, msg):
        if not cond:
            raise UsageError(f"--{flag}: {msg}")

    if args.command == "lantern":
        need(args.m >= 1, "m", "must be >= 1")
        need(args.n >= 2, "n", "must be >= 2")
        need(args.r > 0, "r", "must be positive")
        need(args.H > 0, "H", "must be positive")
        if args.schedule:
            need(args.n_min >= 2, "n-min", "must be >= 2")
            need(args.n_max >= args.n_min, "n-max", "must be >= n-min")
        return
    need(1 <= args.edge_order <= 20, "edge-order", "must lie in [1, 20]")
    need(1 <= args.quad_degree <= 20, "quad-degree", "must lie in [1, 20]")
    need(0 <= args.refine <= 6, "refine", "must lie in [0, 6]")
    if args.command in ("area", "export"):
        need(args.N >= 1, "N", "must be >= 1")
        if args.alpha:
            need(args.alpha >= 1, "alpha", "must be >= 1")
            need(args.N >= 2, "N", "must be >= 2 for the strip mesh")
    if args.command == "converge":
        need(len(args.Ns) >= 1 and all(n >= 2 for n in args.Ns), "Ns", "values must be >= 2")
        need(all(b > a for a, b in zip(args.Ns, args.Ns[1:])), "Ns", "must be strictly increasing")
        need(len(args.alphas) >= 1 and all(a >= 1 for a in args.alphas), "alphas", "values must be >= 1")
        need(args.threads >= 1, "threads", "must be >= 1")


def _field(args) -> ScalarField:
    try:
        f = parse_field_spec(args.field, args.domain)
    except (UnknownField, InvalidParameter) as exc:
        raise UsageError(f"--field: {exc}") from None
    if not isinstance(f, ScalarField):
        raise UsageError(f"--field: {args.field!r} is not a scalar field")
    return f


# -- subcommands -------------------------------------------------------------


def cmd_lantern(args, out=sys.stdout) -> int:
    if args.schedule:
        rule = SCHEDULES[args.schedule]
        ratio = {"m=n": 0.0, "m=n^2": 1.0, "m=n^3": math.inf}[args.schedule]
        target = analysis.lantern_limit(args.r, args.H, ratio) if math.isfinite(ratio) else math.inf
        rows = []
        n = args.n_min
        while n <= args.n_max:
            m = rule(n)
            a = analysis.lantern_area_closed_form(m, n, args.r, args.H)
            gap = abs(a - target) / target if math.isfinite(target) else math.nan
            rows.append({"n": n, "m": m, "area": a, "limit": target, "rel_gap": gap})
            n *= 2
        if args.format == "json":
            json.dump({"schedule": args.schedule, "rows": rows}, out, indent=2)
            out.write("\n")
        else:
            out.write(f"schedule {args.schedule}, r={args.r:g}, H={args.H:g}, limit={target:.12g}\n")
            out.write(f"{'n':>6} {'m':>10} {'area':>20} {'rel_gap':>12}\n")
            for row in rows:
                out.write(f"{row['n']:>6} {row['m']:>10} {row['area']:>20.12g} {row['rel_gap']:>12.3e}\n")
        return EXIT_OK

    closed = analysis.lantern_area_closed_form(args.m, args.n, args.r, args.H)
    summed = generate_lantern(args.m, args.n, args.r, args.H).area()
    gap = abs(closed - summed) / closed
    report = {"m": args.m, "n": args.n, "r": args.r, "H": args.H,
              "closed_form": closed, "triangle_sum": summed, "rel_gap": gap,
              "cylinder_area": 2 * math.pi * args.r * args.H}
    if args.format == "json":
        json.dump(report, out, indent=2)
        out.write("\n")
    else:
        for k, v in report.items():
            out.write(f"{k:>14}: {v!r}\n")
    return EXIT_OK


def _area_reports(f, args):
    kinds = [Kind.LAGRANGE, Kind.CR] if args.kind == "both" else [Kind.parse(args.kind)]
    if args.alpha:
        mesh, weights = analysis.aniso_study_mesh(f, args.N, args.alpha, args.domain)
    else:
        mesh, weights = generate_uniform(args.N, args.domain), None

    def total(terms):
        return math.fsum(terms if weights is None else terms * weights)

    exact = total(exact_area_terms(f, mesh, triangle_rule(args.quad_degree, args.refine)))
    reports = {"exact": AreaReport(exact, AreaMethod.EXACT_QUADRATURE, mesh.fineness, mesh.max_circumradius)}
    for kind in kinds:
        s = interpolate_mesh(f, mesh, kind, gauss_legendre(args.edge_order))
        method = AreaMethod.CR_FUNCTIONAL if kind is Kind.CR else AreaMethod.PL_GRAPH
        reports[kind.value] = AreaReport(total(graph_area_terms(s)), method, mesh.fineness, mesh.max_circumradius)
    return reports


def cmd_area(args, out=sys.stdout) -> int:
    f = _field(args)
    reports = _area_reports(f, args)
    payload = {"field": args.field, "N": args.N, "alpha": args.alpha, "domain": list(args.domain)}
    payload.update({k: r.to_dict() for k, r in reports.items()})
    json.dump(payload, out, indent=2)
    out.write("\n")
    return EXIT_OK


def cmd_converge(args, out=sys.stdout) -> int:
    f = _field(args)
    kinds = {"both": (Kind.LAGRANGE, Kind.CR), "lagrange-only": (Kind.LAGRANGE,), "cr-only": (Kind.CR,)}[args.kind]
    records = analysis.run_convergence(
        f, args.alphas, args.Ns, kinds=kinds, domain=args.domain, edge_order=args.edge_order,
        quad_degree=args.quad_degree, refine=args.refine, threads=args.threads,
    )
    if len(records) != len(args.alphas) * len(args.Ns):
        log.error("only %d of %d rows computed", len(records), len(args.alphas) * len(args.Ns))
        return EXIT_COMPUTE
    try:
        csv_path = analysis.write_csv(records, args.out, kinds)
        gp_path = analysis.write_gnuplot(csv_path, args.alphas, kinds=kinds)
    except OSError as exc:
        raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    summary = {"csv": str(csv_path), "gnuplot": str(gp_path), "rows": len(records), "rates": {}}
    for tag in ("lagrange", "cr"):
        if Kind.parse(tag) not in kinds:
            continue
        for a in args.alphas:
            rows = [r for r in records if r.alpha == a]
            try:
                fit = analysis.fit_rate(rows, f"err_{tag}")
                summary["rates"][f"{tag}@{a:g}"] = round(fit.slope, 4)
            except SurfAreaError:
                pass
    if Kind.CR in kinds and len(args.alphas) > 1:
        summary["cr_collapse_ratio_max"] = max(analysis.collapse_ratios(records, "err_cr").values())
    if args.format == "json":
        json.dump(summary, out, indent=2)
        out.write("\n")
    else:
        out.write(analysis.format_csv(records, kinds))
    return EXIT_OK


def cmd_export(args, out=sys.stdout) -> int:
    f = _field(args)
    mesh = generate_aniso(args.N, args.alpha, args.domain) if args.alpha else generate_uniform(args.N, args.domain)
    s = interpolate_mesh(f, mesh, args.kind, gauss_legendre(args.edge_order))
    verts, faces = s.to_off_data()
    try:
        path = write_off(args.out, verts, faces)
    except OSError as exc:
        raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    out.write(f"wrote {path} ({len(verts)} vertices, {len(faces)} faces)\n")
    return EXIT_OK


COMMANDS = {"lantern": cmd_lantern, "area": cmd_area, "converge": cmd_converge, "export": cmd_export}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _validate(args)
        return COMMANDS[args.command](args, out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"surfarea: error: {exc}\n")
        return EXIT_USAGE
    except (SurfAreaError, OSError, RuntimeError) as exc:
        sys.stderr.write(f"surfarea: {exc}\n")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
