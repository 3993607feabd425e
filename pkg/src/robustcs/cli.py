"""Command-line front end.

    robustcs track [FILE] [--epsilon E --sigma2 S | --kappa K --p P] ...
    robustcs simulate CONFIG.json [--out DIR]
    robustcs compare CONFIG.json [--methods rcs,nonrobust,trimmed] [--out DIR]
    robustcs figure {fig2,fig3,fig4} [--out DIR]

Exit codes: 0 success, 2 usage error, 3 data error, 4 I/O error. Output
directories default to ``$ROBUSTCS_OUTPUT_DIR`` or the working directory.
"""
import argparse
import json
import math
import os
import sys

from .confseq import PowerSchedule, RobustConfidenceSequence, default_lambda
from .figures import FIGURE_SEEDS, FIGURES, write_rows
from .martingales import RcsConfig
from .simulate import ExperimentConfig, fmt_float

EXIT_USAGE, EXIT_DATA, EXIT_IO = 2, 3, 4
OUTPUT_ENV = "ROBUSTCS_OUTPUT_DIR"


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _query_filter(spec):
    """Predicate over t for ``all`` or ``geom:<ratio>``."""
    if spec == "all":
        return lambda t: True
    if spec.startswith("geom:"):
        ratio = float(spec[5:])
        if ratio <= 1:
            raise CliError("geom ratio must exceed 1", EXIT_USAGE)
        state = {"next": 1.0}

        def pick(t):
            if t < math.ceil(state["next"]):
                return False
            while math.ceil(state["next"]) <= t:
                state["next"] *= ratio
            return True
        return pick
    raise CliError(f"bad --query {spec!r}; use 'all' or 'geom:<ratio>'", EXIT_USAGE)


def tracker_from_args(args):
    """Build the tracker described by the ``track`` flags."""
    if args.kappa is not None or args.p is not None:
        if args.sigma2 is not None:
            raise CliError("give either --sigma2 or --kappa/--p", EXIT_USAGE)
        p = 2.0 if args.p is None else args.p
        kappa = 1.0 if args.kappa is None else args.kappa
    else:
        p, kappa = 2.0, 1.0 if args.sigma2 is None else args.sigma2
    try:
        cfg = RcsConfig(p=p, kappa=kappa, epsilon=args.epsilon, alpha=args.alpha)
        lam = args.lam if args.lam is not None else default_lambda(cfg)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    schedule = PowerSchedule(lam, args.lambda_exponent) if args.lambda_exponent else lam
    return RobustConfidenceSequence(cfg, schedule=schedule, tol=args.tol)


def track(lines, out, tracker, query="all"):
    """Stream numbers from ``lines`` and write ``t,x,lower,upper,estimate``.

    The last observation is always reported.
    """
    pick = _query_filter(query)
    out.write("t,x,lower,upper,estimate\n")
    pending = None
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            x = float(text)
        except ValueError:
            raise CliError(f"line {lineno}: cannot parse {text!r} as a number",
                           EXIT_DATA) from None
        if not math.isfinite(x):
            raise CliError(f"line {lineno}: non-finite value {text!r}", EXIT_DATA)
        tracker.update(x)
        pending = x
        if pick(tracker.t):
            _emit(out, tracker, x)
            pending = None
    if pending is not None:
        _emit(out, tracker, pending)


def _emit(out, tracker, x):
    ci = tracker.interval()
    est = tracker.point_estimate()
    out.write(f"{tracker.t},{fmt_float(x)},{fmt_float(ci.lower)},"
              f"{fmt_float(ci.upper)},{fmt_float(est)}\n")


def _out_dir(path):
    path = path or os.environ.get(OUTPUT_ENV) or os.getcwd()
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {path!r}: {exc}", EXIT_IO) from None
    if not os.access(path, os.W_OK):
        raise CliError(f"output directory {path!r} is not writable", EXIT_IO)
    return path


def _load_config(path, seed):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path!r}: {exc}", EXIT_IO) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc})", EXIT_DATA) from None
    try:
        cfg = ExperimentConfig.from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path}: invalid experiment config ({exc})", EXIT_DATA) from None
    if seed is not None:
        cfg.base_seed = seed
    return cfg


def _run_and_write(cfg, method, out_dir, stem, n_jobs):
    report = cfg.run(method=method, n_jobs=n_jobs)
    try:
        report.to_csv(os.path.join(out_dir, f"{stem}.csv"))
        report.write_summary(os.path.join(out_dir, f"{stem}.json"))
    except OSError as exc:
        raise CliError(f"cannot write results: {exc}", EXIT_IO) from None
    return report.summary()


def cmd_track(args):
    tracker = tracker_from_args(args)
    if args.input in (None, "-"):
        track(sys.stdin, sys.stdout, tracker, args.query)
        return
    try:
        fh = open(args.input)
    except OSError as exc:
        raise CliError(f"cannot read {args.input!r}: {exc}", EXIT_IO) from None
    with fh:
        track(fh, sys.stdout, tracker, args.query)


def cmd_simulate(args):
    cfg = _load_config(args.config, args.seed)
    summary = _run_and_write(cfg, None, _out_dir(args.out), args.name, args.n_jobs)
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_compare(args):
    cfg = _load_config(args.config, args.seed)
    out_dir = _out_dir(args.out)
    summaries = {}
    for method in args.methods.split(","):
        try:
            summaries[method] = _run_and_write(cfg, method, out_dir, method, args.n_jobs)
        except ValueError as exc:
            raise CliError(f"method {method!r}: {exc}", EXIT_DATA) from None
    try:
        with open(os.path.join(out_dir, "compare.json"), "w") as fh:
            json.dump(summaries, fh, indent=2, sort_keys=True)
    except OSError as exc:
        raise CliError(f"cannot write results: {exc}", EXIT_IO) from None
    json.dump(summaries, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_figure(args):
    out_dir = _out_dir(args.out)
    kwargs = {"seed": args.seed}
    if args.horizon is not None:
        kwargs["horizon"] = args.horizon
    rows = FIGURES[args.id](**kwargs)
    path = os.path.join(out_dir, f"{args.id}.csv")
    try:
        write_rows(rows, path)
    except OSError as exc:
        raise CliError(f"cannot write {path!r}: {exc}", EXIT_IO) from None
    print(path)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="robustcs", description="Huber-robust confidence sequences for the mean.")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("track", help="track a robust CS over a stream of numbers")
    tr.add_argument("input", nargs="?", help="file with one number per line (default: stdin)")
    tr.add_argument("--epsilon", type=float, default=0.0, help="contamination radius (default 0)")
    tr.add_argument("--alpha", type=float, default=0.05, help="miscoverage level (default 0.05)")
    tr.add_argument("--sigma2", type=float, help="variance bound, p = 2 (default 1)")
    tr.add_argument("--kappa", type=float, help="p-th central moment bound (default 1)")
    tr.add_argument("--p", type=float, help="moment order in (1, 2] (default 2)")
    tr.add_argument("--lambda", dest="lam", type=float,
                    help="weight; default 0.5 sqrt(eps)/sigma (p=2) or (eps/kappa)^(1/p)")
    tr.add_argument("--lambda-exponent", type=float, default=0.0,
                    help="use lambda * t**u instead of a constant weight (default 0)")
    tr.add_argument("--tol", type=float, help="root tolerance (default 1e-9 max(1, kappa^(1/p)))")
    tr.add_argument("--query", default="all", help="'all' (default) or 'geom:<ratio>'")
    tr.set_defaults(func=cmd_track)

    for name, fn, helptext in (("simulate", cmd_simulate, "run a JSON experiment config"),
                               ("compare", cmd_compare, "run one config under several methods")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or cwd)")
        p.add_argument("--seed", type=int, help="override base_seed")
        p.add_argument("--n-jobs", type=int, default=1, help="worker processes (default 1)")
        if name == "simulate":
            p.add_argument("--name", default="report", help="output file stem (default 'report')")
        else:
            p.add_argument("--methods", default="rcs,nonrobust,trimmed",
                           help="comma-separated methods (default rcs,nonrobust,trimmed)")
        p.set_defaults(func=fn)

    fg = sub.add_parser("figure", help="write the data behind a figure as CSV")
    fg.add_argument("id", choices=sorted(FIGURES))
    fg.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or cwd)")
    fg.add_argument("--seed", type=int,
                    help="override the fixed seed " + str(FIGURE_SEEDS))
    fg.add_argument("--horizon", type=int, help="override the horizon")
    fg.set_defaults(func=cmd_figure)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return exc.code
    try:
        args.func(args)
    except CliError as exc:
        print(f"robustcs: error: {exc}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
