"""Command-line front end.

Subcommands: `ellipsoid` (the functional of a log-concave input),
`body-lyz` (the classical quadratic surface-area body), `slog` (optimal
Gaussian with constraint checks), `petty` (the two-sided chain report),
and `verify` (the full property battery). All input and output is JSON
with schema version "1"; plots are SVG. Exit codes: 0 success, 1 failed
checks, 2 parse errors, 3 computation errors.
"""

import argparse
import sys

from .bodies import lyz_body_matrix
from .ellipsoid import lyz_matrix
from .errors import FunlyzError, ParseError
from .integration import IntegrationSpec
from .jsonio import dump_report, load_body, load_log_concave
from .petty import build_projection, petty_chain_report
from .slog import solve_slog
from .svgplot import ellipse_level_sets_svg, polar_profile_svg
from .verify import run_battery

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_COMPUTATION_ERROR = 3


def _add_common(parser, needs_input=True):
    if needs_input:
        parser.add_argument("--input", required=True, help="input JSON document")
    parser.add_argument("--output", help="output JSON path (default: stdout)")
    parser.add_argument(
        "--backend", choices=("quadrature", "mc"), default="quadrature"
    )
    parser.add_argument("--budget", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--radius", type=float, default=8.0)
    parser.add_argument("--tolerance", type=float, default=1e-3)
    parser.add_argument("--parallel", action="store_true")
    parser.add_argument("--plot", action="store_true", help="write a 2-D SVG plot")


def _spec(args) -> IntegrationSpec:
    return IntegrationSpec(
        backend=args.backend,
        budget=args.budget,
        truncation_radius=args.radius,
        target_rel_tol=args.tolerance,
        seed=args.seed,
        parallel=args.parallel,
    )


def _emit(doc, args, plot_svg=None):
    text = dump_report(doc, args.output)
    if args.output is None:
        sys.stdout.write(text)
    if plot_svg is not None and getattr(args, "plot", False):
        plot_path = (args.output or "plot.json").rsplit(".", 1)[0] + ".svg"
        with open(plot_path, "w") as fh:
            fh.write(plot_svg)


def _cmd_ellipsoid(args) -> int:
    f = load_log_concave(args.input)
    spec = _spec(args)
    e = lyz_matrix(f, spec)
    doc = {
        "A": e.A.tolist(),
        "J": e.mass,
        "spec": e.spec_fingerprint,
        "rejects": e.rejects,
        "min_eig": e.min_eigenvalue,
        "degenerate": e.degenerate_flag,
        "source": e.source_fingerprint,
    }
    svg = ellipse_level_sets_svg(e.A) if f.dim == 2 else None
    _emit(doc, args, svg)
    return EXIT_OK


def _cmd_body_lyz(args) -> int:
    body = load_body(args.input)
    form = lyz_body_matrix(body)
    doc = {
        "Q": form.A.tolist(),
        "volume": body.volume(),
        "min_eig": form.min_eigenvalue,
    }
    svg = ellipse_level_sets_svg(form.A, levels=(1.0,)) if body.dim == 2 else None
    _emit(doc, args, svg)
    return EXIT_OK


def _cmd_slog(args) -> int:
    f = load_log_concave(args.input)
    spec = _spec(args)
    sol = solve_slog(f, spec)
    doc = {
        "M": sol.M.tolist(),
        "T": sol.T.tolist(),
        "J": sol.objective,
        "normalized_variation": sol.normalized_variation,
        "checks": sol.checks,
        "spec": spec.fingerprint(),
    }
    _emit(doc, args)
    return EXIT_OK


def _cmd_petty(args) -> int:
    f = load_log_concave(args.input)
    spec = _spec(args)
    rep = petty_chain_report(f, spec)
    doc = {
        "L": rep.lhs,
        "M": rep.middle,
        "R": rep.rhs,
        "gaps": {"left": rep.gap_left, "right": rep.gap_right},
        "errors": {
            "L": rep.lhs_stderr,
            "M": rep.middle_stderr,
            "R": rep.rhs_stderr,
        },
        "polar_mass": rep.polar_mass,
        "holds": rep.holds,
        "rejects": rep.rejects,
        "spec": spec.fingerprint(),
    }
    svg = None
    if args.plot and f.dim == 2:
        profile = build_projection(f, spec, num_directions=128)
        svg = polar_profile_svg(profile.directions, profile.values)
    _emit(doc, args, svg)
    return EXIT_OK if rep.holds else EXIT_CHECK_FAILED


def _cmd_verify(args) -> int:
    spec = _spec(args)
    report = run_battery(spec, quick=not args.full)
    _emit(report, args)
    return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="funlyz",
        description="LYZ ellipsoids of log-concave functions and their checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ellipsoid", help="ellipsoid functional of a log-concave input")
    _add_common(p)
    p.set_defaults(fn=_cmd_ellipsoid)

    p = sub.add_parser("body-lyz", help="quadratic surface-area body of a convex body")
    _add_common(p)
    p.set_defaults(fn=_cmd_body_lyz)

    p = sub.add_parser("slog", help="optimal Gaussian companion with checks")
    _add_common(p)
    p.set_defaults(fn=_cmd_slog)

    p = sub.add_parser("petty", help="two-sided projection inequality chain")
    _add_common(p)
    p.set_defaults(fn=_cmd_petty)

    p = sub.add_parser("verify", help="run the full property battery")
    _add_common(p, needs_input=False)
    p.add_argument("--full", action="store_true", help="full-size sample counts")
    p.set_defaults(fn=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        dump = {"error": {"type": "parse", "message": str(exc)}}
        sys.stderr.write(dump_report(dump))
        return EXIT_PARSE_ERROR
    except FunlyzError as exc:
        dump = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(dump_report(dump))
        return EXIT_COMPUTATION_ERROR


if __name__ == "__main__":
    sys.exit(main())
