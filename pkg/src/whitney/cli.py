"""Command-line front end.

Subcommands:

    extend      evaluate a field's extension (classical or origin-averaged)
                at points from a CSV, writing a values CSV
    restrict    sample a built-in analytic function onto a point set,
                writing a field JSON
    decompose   dump the Whitney cubes intersecting a box (n <= 3)
    verify      run named invariant suites; exit 2 on any failed gate
    bench-norms run the dimension-growth studies, writing the report CSV,
                curve data files and figures

All randomness flows from --seed; a fixed seed reproduces output files
byte-identically.  Validation errors exit 1 with an ``E:<module>:<check>``
prefix on stderr; failed verify/bench gates exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .averaging import AveragingPlan, averaged_extension
from .cubes import DistanceOracle, enumerate_whitney_cubes
from .errors import WhitneyError, ValidationError
from .extension import ExtensionConfig, eval_extension, eval_extension_deriv
from .fields import (SmoothTestFunction, load_field, load_points_csv,
                     restrict, save_field)
from .harness import (ExperimentReport, SuiteConfig, fit_loglog_slope,
                      norm_growth_study, restriction_norm_study, verify_suite)
from .jets import multi_indices


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker bound for batch evaluation")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="whitney")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extend", help="evaluate the extension at points")
    p.add_argument("--field", required=True, help="field JSON path")
    p.add_argument("--points", required=True, help="points CSV path")
    p.add_argument("--m", type=int, default=None,
                   help="degree override (defaults to the field's)")
    p.add_argument("--mode", choices=("classical", "averaged"), default="classical")
    p.add_argument("--t", type=float, default=None,
                   help="cutoff width; defaults to 1/8 classical, 1/n averaged")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--origin", type=float, default=0.0,
                   help="origin shift, same value in every coordinate")
    p.add_argument("--truncation", type=float, default=1.0)
    p.add_argument("--alpha-max", type=int, default=0,
                   help="evaluate all derivative orders up to this")
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("restrict", help="restrict a built-in function to E")
    p.add_argument("--set", required=True, help="points CSV path for E")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--function", default="sines",
                   choices=("constant", "monomial", "sines", "gaussian"))
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("decompose", help="dump Whitney cubes meeting a box")
    p.add_argument("--set", required=True, help="points CSV path for E")
    p.add_argument("--box", required=True,
                   help="lo_1,..,lo_n,hi_1,..,hi_n")
    p.add_argument("--origin", type=float, default=0.0)
    p.add_argument("--min-level", type=int, default=None,
                   help="stop the (infinite) refinement at this level")
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--samples", type=int, default=1024)
    _add_common(p)

    p = sub.add_parser("bench-norms", help="dimension-growth studies")
    p.add_argument("--n", type=int, default=4, help="top dimension (range 1..n)")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--probes", type=int, default=8, help="probes per kind")
    p.add_argument("--study", choices=("growth", "restriction", "both"),
                   default="both")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock runtimes in the CSV (breaks "
                        "byte-determinism of reruns)")
    p.add_argument("--out", required=True, help="report CSV path")
    _add_common(p)
    return top


def _cmd_extend(args) -> int:
    f = load_field(args.field)
    pts = load_points_csv(args.points, f.n)
    m = f.m if args.m is None else args.m
    if m != f.m:
        raise ValidationError("cli", "degree_mismatch",
                              f"--m {m} does not match field degree {f.m}")
    t = args.t
    if t is None:
        t = 0.125 if args.mode == "classical" else None   # None -> 1/n rule
    cfg = ExtensionConfig(m=m, t=t, truncation=args.truncation)
    alphas = [a for a in multi_indices(f.n, max(args.alpha_max, 0))]
    origin = np.full(f.n, args.origin)
    lines = []
    header = [f"x{i}" for i in range(f.n)] + ["alpha_index", "value"]
    if args.mode == "averaged":
        header += ["n_samples", "seed", "std_error"]
    lines.append(",".join(header))
    plan = None
    if args.mode == "averaged":
        plan = AveragingPlan(args.samples, args.seed)

    def rows_for(x):
        out = []
        for ai, alpha in enumerate(alphas):
            if args.mode == "classical":
                if sum(alpha) == 0:
                    val = eval_extension(f, x, cfg, origin=origin)
                else:
                    val = eval_extension_deriv(f, x, alpha, cfg, origin=origin)
                row = [repr(float(v)) for v in x] + [str(ai), repr(float(val))]
            else:
                mean, se = averaged_extension(f, x, alpha, plan, cfg)
                row = ([repr(float(v)) for v in x]
                       + [str(ai), repr(float(mean)), str(args.samples),
                          str(args.seed), repr(float(se))])
            out.append(",".join(row))
        return out

    if args.jobs > 1:
        # points are independent; assembly order keeps output deterministic
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            for chunk in pool.map(rows_for, pts):
                lines.extend(chunk)
    else:
        for x in pts:
            lines.extend(rows_for(x))
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


def _cmd_restrict(args) -> int:
    pts = load_points_csv(args.set)
    n = pts.shape[1]
    fn = SmoothTestFunction(args.function, n, omega=args.omega, m_norm=args.m)
    save_field(restrict(fn, pts, args.m), args.out)
    return 0


def _cmd_decompose(args) -> int:
    pts = load_points_csv(args.set)
    oracle = DistanceOracle(pts)
    vals = [float(v) for v in args.box.split(",")]
    if len(vals) != 2 * oracle.n:
        raise ValidationError("cli", "box_shape",
                              f"--box needs {2 * oracle.n} numbers for n={oracle.n}")
    lo, hi = vals[:oracle.n], vals[oracle.n:]
    origin = np.full(oracle.n, args.origin)
    cubes = enumerate_whitney_cubes(oracle, lo, hi, origin,
                                    level_lo=args.min_level)
    payload = [{"level": c.level, "anchor": list(c.anchor), "dist_to_E": d}
               for c, d in cubes]
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


def _cmd_verify(args) -> int:
    cfg = SuiteConfig(n=args.n, m=args.m, n_samples=args.samples)
    report = verify_suite(args.suite, cfg, args.seed)
    for line in report.lines():
        print(line)
    return 0 if report.all_passed else 2


def _cmd_bench(args) -> int:
    from .plots import curve_data_files, growth_figure, restriction_figure
    n_range = range(1, args.n + 1)
    rows = []
    failed = False
    stem = args.out[:-4] if args.out.endswith(".csv") else args.out
    if args.study in ("growth", "both"):
        rep = norm_growth_study(n_range, args.m, probes_per_kind=args.probes,
                                n_samples=args.samples, seed=args.seed)
        rows.extend(rep.rows)
        growth_figure(rep, stem + "_growth.png")
        curve_data_files(rep, stem)
        ns, sups = rep.curve("averaged")
        if len(ns) >= 2:
            slope = fit_loglog_slope(ns, sups)
            gate = 2.5 * args.m + 0.5
            print(f"averaged slope {slope:.3f} vs gate {gate:.3f}")
            failed = failed or slope > gate
    if args.study in ("restriction", "both"):
        rep = restriction_norm_study(None, args.m, n_range, seed=args.seed)
        rows.extend(rep.rows)
        restriction_figure(rep, stem + "_restriction.png")
        slope = rep.rows[0].fitted_exponent
        if slope is not None:
            print(f"restriction slope {slope:.3f} vs gate {args.m + 0.3:.3f}")
            failed = failed or slope > args.m + 0.3
    full = ExperimentReport(rows)
    with open(args.out, "w") as fh:
        fh.write(full.to_csv(include_runtime=args.timings))
    return 2 if failed else 0


_DISPATCH = {
    "extend": _cmd_extend,
    "restrict": _cmd_restrict,
    "decompose": _cmd_decompose,
    "verify": _cmd_verify,
    "bench-norms": _cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("E:cli:jobs: --jobs must be >= 1", file=sys.stderr)
        return 1
    try:
        return _DISPATCH[args.command](args)
    except WhitneyError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
