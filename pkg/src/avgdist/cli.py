"""Command-line front end.

Exit codes: 0 success, 1 usage or parameter error, 2 invalid input data,
3 verification failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .energy import EnergyParams, ParameterError, avg_dist_mc, energy
from .geometry import GeometryError
from .optimizer import OptimizationConfig, minimize, start_polygon
from .report import (
    RunManifest,
    ShapeFileError,
    dumps,
    load_fixtures,
    load_shape,
    optimization_svg,
    save_shape,
    write_csv,
    write_json,
)
from .verification import ConstantBoundViolation, run_suite, search_constant

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3

SWEEP_COLUMNS = ["seed", "shape", "p", "lambda", "n_vertices", "avg_dist", "area", "perimeter",
                 "total", "claim1_margin", "area_bound_margin", "passed"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text: str) -> list:
    return [int(v) for v in _float_list(text)]


def _params(args) -> EnergyParams:
    return EnergyParams(args.p, args.lam, args.alpha, args.beta)


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))


def _finish(manifest: RunManifest, t0: float, out_dir: Path | None) -> None:
    manifest.duration_s = round(time.perf_counter() - t0, 3)
    if out_dir is not None:
        write_json(out_dir / "run_manifest.json", manifest.to_json())


def _out_dir(path) -> Path:
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    return d


# --- commands ------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    params = _params(args)
    P = load_shape(args.shape)
    e = energy(P, params)
    out = e.to_json()
    if args.mc_samples:
        est, se = avg_dist_mc(P, params.p, args.mc_samples, seed=args.seed)
        out.update(mc_estimate=est, mc_stderr=se, mc_samples=args.mc_samples,
                   mc_z=(e.avg_dist - est) / se if se > 0 else 0.0)
    _emit(out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    t0 = time.perf_counter()
    params = _params(args)
    start_shape = None
    if args.start == "file":
        if not args.shape:
            raise UsageError("--start file needs --shape")
        start_shape = load_shape(args.shape)
    config = OptimizationConfig(params=params, N=args.n, max_iters=args.max_iters,
                                step_init=args.step_init, step_min=args.step_min, seed=args.seed,
                                start=args.start, start_shape=start_shape,
                                symmetric=args.symmetric)
    out_dir = _out_dir(args.out_dir)
    result = minimize(config)
    files = ["result.json", "trace.csv", "shapes.svg", "final_shape.json"]
    manifest = RunManifest("optimize", config.to_json(), args.seed, __version__,
                           [args.shape] if args.shape else [], files)
    residuals = {"stationarity": result.residual_stationarity,
                 "theorem3": result.residual_theorem3}
    write_json(out_dir / "result.json", {
        "shape": result.shape.to_json(),
        "energy": result.energy.to_json(),
        "residuals": residuals,
        "isoperimetric_deficit": result.isoperimetric_deficit,
        "iterations": len(result.trace),
        "diagnostics": result.diagnostics,
        "manifest": manifest.numeric_json(),
    })
    write_csv(out_dir / "trace.csv", ["iteration", "total", "step"], result.trace)
    start_poly = start_polygon(config)
    (out_dir / "shapes.svg").write_text(optimization_svg(start_poly, result.shape))
    save_shape(out_dir / "final_shape.json", result.shape)
    _finish(manifest, t0, out_dir)
    _emit({"total": result.energy.total, "residuals": residuals,
           "isoperimetric_deficit": result.isoperimetric_deficit,
           "iterations": len(result.trace), "out_dir": str(out_dir)})
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    if args.corpus_size < 0:
        raise UsageError("--corpus-size must be >= 0")
    for p in args.p_list:
        EnergyParams(p, 1.0)
    for lam in args.lambda_list:
        EnergyParams(1.0, lam)
    fixtures = load_fixtures(args.fixtures) if args.fixtures else None
    reports, rows = [], []
    for i, seed in enumerate(args.seeds):
        reps, r = run_suite(args.corpus_size, seed, args.p_list, args.lambda_list,
                            fixtures if i == 0 else None)
        if len(args.seeds) > 1:
            for rep in reps:
                rep.name = f"seed={seed}:{rep.name}"
        reports += reps
        rows += [{"seed": seed, **row} for row in r]
    failures = [r for r in reports if not r.passed]
    out_dir = _out_dir(args.out_dir)
    params = {"corpus_size": args.corpus_size, "seeds": args.seeds, "p_list": args.p_list,
              "lambda_list": args.lambda_list}
    manifest = RunManifest("verify", params, args.seeds[0], __version__,
                           [args.fixtures] if args.fixtures else [],
                           ["verify_report.json", "verify_sweep.csv"])
    write_json(out_dir / "verify_report.json", {
        "passed": not failures, "n_checks": len(reports), "n_failures": len(failures),
        "reports": [r.to_json() for r in reports], "manifest": manifest.numeric_json()})
    write_csv(out_dir / "verify_sweep.csv", SWEEP_COLUMNS, rows)
    _finish(manifest, t0, out_dir)
    _emit({"passed": not failures, "n_checks": len(reports), "n_failures": len(failures),
           "failures": [r.to_json() for r in failures], "out_dir": str(out_dir)})
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_search_constant(args) -> int:
    t0 = time.perf_counter()
    EnergyParams(args.p, 1.0)
    if args.corpus_size < 1:
        raise UsageError("--corpus-size must be >= 1")
    out_dir = _out_dir(args.out_dir)
    manifest = RunManifest("search-constant",
                           {"p": args.p, "corpus_size": args.corpus_size, "refine": args.refine},
                           args.seed, __version__, [], ["constant.json", "best_shape.json"])
    status = EXIT_OK
    try:
        result = search_constant(args.p, args.corpus_size, args.seed, args.refine)
    except ConstantBoundViolation as exc:
        result, status = exc.result, EXIT_VERIFY
    out = result.to_json()
    out["bound_holds"] = status == EXIT_OK
    write_json(out_dir / "constant.json", {**out, "manifest": manifest.numeric_json()})
    save_shape(out_dir / "best_shape.json", result.best_shape)
    _finish(manifest, t0, out_dir)
    _emit(out)
    return status


# --- parser --------------------------------------------------------------------

def _energy_flags(sp) -> None:
    sp.add_argument("--p", type=float, default=1.0, help="distance exponent, >= 1")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0, help="penalty weight, > 0")
    sp.add_argument("--alpha", type=float, default=1.0, help="perimeter exponent of the ratio term")
    sp.add_argument("--beta", type=float, default=1.0, help="area exponent of the ratio term")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="avgdist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"avgdist {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("evaluate", help="energy breakdown of a shape file")
    sp.add_argument("shape", help='JSON file {"vertices": [[x, y], ...]}')
    _energy_flags(sp)
    sp.add_argument("--mc-samples", type=int, default=0, help="add a Monte-Carlo cross-check")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("optimize", help="minimise the energy over N-direction polygons")
    _energy_flags(sp)
    sp.add_argument("--n", type=int, default=64, help="number of support directions")
    sp.add_argument("--max-iters", type=int, default=400)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--start", choices=["regular", "random", "file"], default="regular")
    sp.add_argument("--shape", help="start shape file for --start file")
    sp.add_argument("--out-dir", default="avgdist_out")
    sp.add_argument("--step-init", type=float, default=0.02)
    sp.add_argument("--step-min", type=float, default=1e-5)
    sp.add_argument("--symmetric", action="store_true", help="search centrally symmetric shapes only")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("verify", help="run the inequality and closed-form check suite")
    sp.add_argument("--corpus-size", type=int, default=1000)
    sp.add_argument("--seed", "--seeds", dest="seeds", type=_int_list, default=[0],
                    help="corpus seed or comma-separated seeds")
    sp.add_argument("--p-list", type=_float_list, default=[1.0, 2.0, 3.0])
    sp.add_argument("--lambda-list", type=_float_list, default=[0.1, 1.0, 10.0])
    sp.add_argument("--fixtures", help="extra closed-form fixtures (JSON list)")
    sp.add_argument("--out-dir", default="avgdist_out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("search-constant", help="search the best constant of the distance inequality")
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--corpus-size", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--refine", action="store_true", help="pattern-search refinement of the best shape")
    sp.add_argument("--out-dir", default="avgdist_out")
    sp.set_defaults(func=cmd_search_constant)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ShapeFileError as exc:
        print(f"avgdist: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParameterError, UsageError) as exc:
        print(f"avgdist: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if isinstance(exc, GeometryError):
            raise
        print(f"avgdist: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
