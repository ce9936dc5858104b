"""Command-line entry point: ``privmeasure <command> [options]``.

Exit codes: 0 success, 2 invalid arguments or input, 3 audit violation.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .audit import regularity_audit
from .bench import DEFAULT_GRIDS, bench_accuracy, bench_walk
from .dataio import ingest, write_csv, write_json
from .errors import ArgumentError, InputError, ResourceError
from .interval import private_measure_interval
from .measures import WeightedMeasure
from .metric import delta_for_space, private_measure_metric
from .rng import stream
from .synth import dp_synthetic_data

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_AUDIT = 3

ACCURACY_COLUMNS = ["param", "alpha", "trials", "mean_w1", "std", "sem", "ci95_low",
                    "ci95_high", "rate", "c_hat", "reference"]
WALK_COLUMNS = ["n", "trials", "superregular", "superregular_std", "superregular_sem",
                "ratio_log2", "ratio_log2_sem", "iid", "iid_std", "iid_sem",
                "iid_ratio_sqrt", "floor"]


def parse_grid(text):
    """``"4:10"`` means ``2**4 .. 2**10``; otherwise a comma-separated list of numbers."""
    if text is None:
        return None
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            if hi < lo:
                raise ValueError
            return [2 ** k for k in range(lo, hi + 1)]
        return [int(v) if float(v).is_integer() else float(v) for v in text.split(",")]
    except ValueError:
        raise ArgumentError(f"bad grid {text!r}; use LO:HI exponents or a comma list") from None


def _levels(text):
    """Haar levels: ``"1:12"`` is the range 1..12 (not powers of two)."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ArgumentError(f"bad level list {text!r}") from None


def _point_rows(space, points):
    if space.coords is None:
        return [[int(p)] for p in points], ["index"]
    header = [f"x{k + 1}" for k in range(space.d)]
    return [list(map(float, space.coords[p])) for p in points], header


def _mechanism_provenance(args, command, extra):
    return {"command": command, "version": __version__, "seed": args.seed,
            "input": args.input, **extra}


def cmd_synth(args):
    data = ingest(args.input, args.format, d=args.dim, matrix=args.matrix)
    synth = dp_synthetic_data(data.space, data.points, args.epsilon, delta=args.delta,
                              rng=stream(args.seed))
    rows, header = _point_rows(synth.space, synth.points)
    write_csv(args.output, header, rows)
    if args.provenance:
        write_json(args.provenance, _mechanism_provenance(args, "synth", synth.provenance))
    print(f"wrote {synth.m} rows to {args.output} (alpha={synth.provenance['alpha']:g}, "
          f"delta={synth.provenance['delta']:.6g})")
    return EXIT_OK


def cmd_privatize(args):
    data = ingest(args.input, args.format, d=args.dim, weighted=args.weighted,
                  matrix=args.matrix)
    if data.weights is not None:
        mu = WeightedMeasure(data.space, data.points, data.weights)
    else:
        mu = WeightedMeasure.empirical(data.space, data.points)
    rng = stream(args.seed)
    if args.interval:
        if data.space.d != 1:
            raise ArgumentError("--interval needs 1-dimensional input")
        if np.any(np.diff(data.space.line_coords()) < 0):
            raise ArgumentError("--interval needs rows sorted by coordinate")
        res = private_measure_interval(mu, args.alpha, rng)
        diagnostics = {"alpha": args.alpha, "net_size": len(res.net)}
    else:
        delta = args.delta if args.delta is not None else delta_for_space(data.space, args.alpha)
        res = private_measure_metric(mu, args.alpha, delta, rng)
        diagnostics = res.diagnostics
    out = res.output
    rows, header = _point_rows(out.space, out.support)
    write_csv(args.output, header + ["weight"],
              [r + [float(w)] for r, w in zip(rows, out.weights)])
    if args.provenance:
        write_json(args.provenance, _mechanism_provenance(args, "privatize", diagnostics))
    print(f"wrote {len(out.support)} atoms to {args.output}")
    return EXIT_OK


def _print_table(columns, rows):
    print("  ".join(f"{c:>12}" for c in columns))
    for r in rows:
        print("  ".join(f"{r[c]:>12.6g}" if isinstance(r[c], float) else f"{r[c]:>12}"
                        for c in columns))


def cmd_bench_accuracy(args):
    grid = parse_grid(args.grid)
    if grid is not None and len(grid) < 5:
        print("warning: slope fits are meant for at least 5 grid points", file=sys.stderr)
    report = bench_accuracy(args.mode, grid=grid, trials=args.trials, seed=args.seed,
                            d=args.dim or 2, epsilon=args.epsilon or 1.0, workers=args.workers)
    _print_table(["param", "mean_w1", "sem", "rate", "c_hat", "reference"], report["rows"])
    if "slope" in report:
        print(f"slope {report['slope']:.4f} +- {report['slope_stderr']:.4f}; "
              f"c_hat spread {100 * report['c_hat_spread']:.1f}%; "
              f"reference {'ok' if report['reference_ok'] else 'VIOLATED'}")
    if args.output:
        write_csv(args.output, ACCURACY_COLUMNS,
                  [[r[c] for c in ACCURACY_COLUMNS] for r in report["rows"]])
    if args.report:
        write_json(args.report, {"command": "bench-accuracy", "version": __version__, **report})
    return EXIT_OK


def cmd_bench_walk(args):
    report = bench_walk(grid=parse_grid(args.grid), trials=args.trials, seed=args.seed,
                        workers=args.workers)
    _print_table(["n", "superregular", "ratio_log2", "iid", "iid_ratio_sqrt", "floor"],
                 report["rows"])
    print(f"bounded: {report['bounded']}; iid/superregular growth: "
          f"{report['growth_ratio']:.2f}; floor: {report['floor_ok']}")
    if args.output:
        write_csv(args.output, WALK_COLUMNS, [[r[c] for c in WALK_COLUMNS] for r in report["rows"]])
    if args.report:
        write_json(args.report, {"command": "bench-walk", "version": __version__, **report})
    return EXIT_OK


def cmd_audit_regularity(args):
    levels = _levels(args.levels)
    report = regularity_audit(levels, args.pairs, args.seed, fault_scale=args.fault_scale)
    for L, s in report["levels"].items():
        print(f"L={L:2d} pairs={s['pairs']} violations={s['violations']} "
              f"max gap/|x-y|_1={s['max_ratio']:.6f}")
    if args.report:
        write_json(args.report, {"command": "audit-regularity", "version": __version__,
                                 "seed": args.seed, **report})
    if not report["passed"]:
        w = report["witness"]
        print(f"FAIL: L={w['L']} gap={w['gap']!r} > |x-y|_1={w['bound']!r}", file=sys.stderr)
        print(f"witness x={w['x']}", file=sys.stderr)
        print(f"witness y={w['y']}", file=sys.stderr)
        return EXIT_AUDIT
    print("PASS")
    return EXIT_OK


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def build_parser():
    p = argparse.ArgumentParser(prog="privmeasure", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)

    def data_in(sp):
        sp.add_argument("--input", required=True)
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--dim", type=int, help="expected coordinate dimension")
        sp.add_argument("--matrix", action="store_true", help="CSV rows form a distance matrix")
        sp.add_argument("--delta", type=_positive(float), help="net scale (default: automatic)")
        sp.add_argument("--output", required=True)
        sp.add_argument("--provenance", help="JSON provenance path")

    s = sub.add_parser("synth", help="differentially private synthetic dataset")
    data_in(s)
    common(s)
    s.add_argument("--epsilon", type=_positive(float), required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("privatize", help="metrically private measure from a measure")
    data_in(s)
    common(s)
    s.add_argument("--alpha", type=_positive(float), required=True)
    s.add_argument("--weighted", action="store_true", help="last CSV column is a weight")
    s.add_argument("--interval", action="store_true", help="use the interval mechanism")
    s.set_defaults(func=cmd_privatize)

    s = sub.add_parser("bench-accuracy", help="accuracy scaling benchmark")
    common(s)
    s.add_argument("--mode", choices=["interval", "cube", "synth"], default="interval")
    s.add_argument("--grid", help="LO:HI exponents of 2, or a comma list")
    s.add_argument("--trials", type=_positive(int))
    s.add_argument("--dim", type=_positive(int))
    s.add_argument("--epsilon", type=_positive(float))
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output", help="CSV rows")
    s.add_argument("--report", help="JSON report")
    s.set_defaults(func=cmd_bench_accuracy)

    s = sub.add_parser("bench-walk", help="superregular vs i.i.d. walk growth")
    common(s)
    s.add_argument("--grid", help="LO:HI exponents of 2, or a comma list "
                   f"(default {DEFAULT_GRIDS['walk'][0]}..{DEFAULT_GRIDS['walk'][-1]})")
    s.add_argument("--trials", type=_positive(int))
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output")
    s.add_argument("--report")
    s.set_defaults(func=cmd_bench_walk)

    s = sub.add_parser("audit-regularity", help="check the noise density regularity bound")
    common(s)
    s.add_argument("--levels", default="1:12", help="LO:HI levels or a comma list")
    s.add_argument("--pairs", type=_positive(int), default=10_000)
    s.add_argument("--report")
    s.add_argument("--fault-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_audit_regularity)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ArgumentError, InputError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
