# -*- coding: utf-8 -*-
"""
Command line front end of *qillum* (console script ``qillum``).

Sub-commands::

    qillum exponent  --probe tmsv --ns 20 --nb 0.01 --kappa 0.01 --eps 0.001 [--M 100]
    qillum curve     --probes tmsv,threemode --ns 10 --nb 0.01 --eps 0.001 --mmax 1e6 --log [--svg]
    qillum figure    fig2b [--svg]   |   qillum figure --list
    qillum sweep     grid.txt [--workers 4]
    qillum crossover --asymptotic    |   qillum crossover --exact --nb 1e4 --kappa 1e-3

Exit codes: 0 success, 1 numeric failure (a record carries an error flag), 2 usage error.
"""
import argparse
import json
import logging
import os
import sys

import matplotlib

from qillum import __version__
from qillum.postprocessing import (
    create_analysis,
    m_grid,
    read_figure_lib,
    reproduce_figure,
    save_svg,
)
from qillum.probes import create_scene
from qillum.stein import ASYMPTOTIC, EXACT, crossover_ns
from qillum.sweeps import (
    GridSpecError,
    RunManifest,
    evaluate_point,
    output_dir,
    read_grid_spec,
    run_sweep,
    write_csv,
    write_json,
)
from qillum.utils import QillumError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2

# reference scene used when --ns / --nb are omitted
DEFAULT_NS = 0.01
DEFAULT_NB = 20.0


def _add_scene_args(parser):
    parser.add_argument("--ns", type=float, default=DEFAULT_NS, help="mean signal photons N_S (default %(default)s)")
    parser.add_argument("--nb", type=float, default=DEFAULT_NB, help="mean background photons N_B (default %(default)s)")
    parser.add_argument("--kappa", type=float, default=0.01, help="target reflectivity (default %(default)s)")
    parser.add_argument("--eps", type=float, default=0.01, help="permitted type-I error epsilon (default %(default)s)")
    parser.add_argument("--path", choices=["closed", "generic"], default=None,
                        help="force the three-mode computation path")


def _add_output_args(parser, svg=False):
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--out", default=None, help="output file (default stdout)")
    parser.add_argument("--outdir", default=None,
                        help="directory for --out/--svg files (default $QILLUM_OUTPUT_DIR or the current directory)")
    if svg:
        parser.add_argument("--svg", nargs="?", const="", default=None,
                            help="also write an SVG chart (optional file name)")


def _figure_epilog():
    lib = read_figure_lib()
    lines = ["figure ids:"]
    lines += ["  {:6s} {}".format(k, lib[k].get("caption", "")) for k in sorted(lib)]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qillum",
        description="Error exponents of asymmetric quantum illumination with Gaussian probes.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", help="single-point a, b, R and P_err")
    p.add_argument("--probe", required=True, help="coherent, tmsv or threemode")
    _add_scene_args(p)
    p.add_argument("--M", type=int, default=0, help="copies; omitted reports the M -> infinity limit")
    p.add_argument("--C", type=float, default=None, help="three-mode correlation (default C_max)")
    _add_output_args(p)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("curve", help="R(M) curves for several probes")
    p.add_argument("--probes", default="tmsv,threemode", help="comma separated probe list")
    _add_scene_args(p)
    p.add_argument("--mmin", type=float, default=1)
    p.add_argument("--mmax", type=float, default=1e6)
    p.add_argument("--count", type=int, default=60)
    step = p.add_mutually_exclusive_group()
    step.add_argument("--log", dest="log", action="store_true", default=True, help="log-spaced M (default)")
    step.add_argument("--linear", dest="log", action="store_false", help="linearly spaced M")
    _add_output_args(p, svg=True)
    p.set_defaults(func=cmd_curve)

    lib_ids = sorted(read_figure_lib())
    p = sub.add_parser(
        "figure",
        help="reproduce a reference figure",
        epilog=_figure_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("fig_id", nargs="?", choices=lib_ids, help="figure id")
    p.add_argument("--list", action="store_true", help="list figure ids and exit")
    p.add_argument("--mmax", type=float, default=1e6)
    p.add_argument("--count", type=int, default=60)
    _add_output_args(p, svg=True)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sweep", help="evaluate a parameter grid spec file")
    p.add_argument("grid", help="grid spec file")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--path", choices=["closed", "generic"], default=None)
    _add_output_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crossover", help="signal strength N_S* where TMSV and three-mode R_max coincide")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--asymptotic", dest="mode", action="store_const", const=ASYMPTOTIC)
    mode.add_argument("--exact", dest="mode", action="store_const", const=EXACT)
    p.add_argument("--nb", type=float, default=None, help="background for --exact (>= 100)")
    p.add_argument("--kappa", type=float, default=None, help="reflectivity for --exact")
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_crossover, mode=ASYMPTOTIC)
    return parser


# ----------------------------------------------------------------------------------------------------------------------
# output helpers
def _target(args, name):
    return name if os.path.isabs(name) else os.path.join(output_dir(args.outdir), name)


def _emit(args, records, argv, extra=None):
    manifest = RunManifest.create(argv)
    if args.out:
        with open(_target(args, args.out), "w", newline="") as f:
            _write(args, f, records, manifest, extra)
    else:
        _write(args, sys.stdout, records, manifest, extra)
    return EXIT_NUMERIC if any(r.has_error for r in records) else EXIT_OK


def _write(args, stream, records, manifest, extra):
    if args.format == "json":
        write_json(records, stream, manifest, extra)
        return
    if extra:
        stream.write("".join("# {}: {}\n".format(k, json.dumps(v)) for k, v in extra.items()))
    write_csv(records, stream, manifest)


def _svg_path(args, default_name):
    return _target(args, args.svg or default_name)


# ----------------------------------------------------------------------------------------------------------------------
# commands
def cmd_exponent(args, argv):
    record = evaluate_point(
        args.probe, args.ns, args.nb, args.kappa, args.eps, M=args.M, C=args.C, path=args.path
    )
    return _emit(args, [record], argv)


def cmd_curve(args, argv):
    probes = [p.strip() for p in args.probes.split(",") if p.strip()]
    M_values = m_grid(args.mmin, args.mmax, args.count, log=args.log)
    scene = create_scene(N_S=args.ns, N_B=args.nb, kappa=args.kappa, epsilon=args.eps)
    analysis = create_analysis(probes=probes, scene=scene, path=args.path)
    records = analysis.curve_records(M_values)
    code = _emit(args, records, argv)
    if args.svg is not None:
        from qillum.postprocessing import plot_exponent_curves

        save_svg(plot_exponent_curves(analysis.get_results(M_values)), _svg_path(args, "curve.svg"))
    return code


def cmd_figure(args, argv):
    if args.list or args.fig_id is None:
        lib = read_figure_lib()
        for k in sorted(lib):
            print("{:6s} {}".format(k, lib[k].get("caption", "")))
        return EXIT_OK if args.list else EXIT_USAGE
    result = reproduce_figure(
        args.fig_id, M_values=m_grid(1, args.mmax, args.count), plot=args.svg is not None
    )
    extra = {"figure": args.fig_id, "annotations": result.annotations}
    if result.records:
        code = _emit(args, result.records, argv, extra)
    else:
        # ratio figures: tabulate the DataArray
        manifest = RunManifest.create(argv)
        table = result.data.to_dataframe().reset_index()
        stream = open(_target(args, args.out), "w", newline="") if args.out else sys.stdout
        try:
            if args.format == "json":
                rows = table.astype(object).where(table.notna(), None)
                doc = {"manifest": manifest.as_dict(), **extra, "data": rows.to_dict(orient="records")}
                json.dump(doc, stream, indent=2)
                stream.write("\n")
            else:
                stream.write(manifest.comment_lines())
                stream.write("".join("# {}: {}\n".format(k, json.dumps(v)) for k, v in extra.items()))
                table.to_csv(stream, index=False, float_format="%.17g", lineterminator="\n")
        finally:
            if args.out:
                stream.close()
        code = EXIT_NUMERIC if result.data.attrs.get("n_failed") else EXIT_OK
    if result.figure is not None:
        save_svg(result.figure, _svg_path(args, args.fig_id + ".svg"))
    return code


def cmd_sweep(args, argv):
    grid = read_grid_spec(args.grid)
    records = run_sweep(grid, workers=args.workers, path=args.path)
    return _emit(args, records, argv)


def cmd_crossover(args, argv):
    result = crossover_ns(mode=args.mode, tol=args.tol, N_B=args.nb, kappa=args.kappa, full_output=True)
    doc = {
        "ns_star": result.ns_star,
        "mode": result.mode,
        "tol": result.tol,
        "bracket": list(result.bracket),
        "residual": result.residual,
        "manifest": RunManifest.create(argv).as_dict(),
    }
    if args.mode == EXACT:
        doc.update({"N_B": args.nb, "kappa": args.kappa})
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def main(argv=None) -> int:
    matplotlib.use("Agg")
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        return args.func(args, argv)
    except GridSpecError as err:
        print("qillum: grid spec error: {}".format(err), file=sys.stderr)
        return EXIT_USAGE
    except QillumError as err:
        print("qillum: {}: {}".format(err.kind, err), file=sys.stderr)
        return EXIT_NUMERIC if err.kind != "invalid-argument" else EXIT_USAGE
    except OSError as err:
        print("qillum: {}".format(err), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
