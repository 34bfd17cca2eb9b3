"""Command-line front end.

One subcommand per family statistic; flat key=value config files supply
defaults and command-line flags override them. Every command emits CSV
(appending to --output, or stdout) with an optional JSON mirror, and maps
error families to distinct exit codes.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import errors as err
from .arith import WeightSpec, weight_from_name
from .cache import get_ap_table
from .curve import TwistedCurve, conductor_validate
from .fixtures import load_curves
from .lfun import analytic_rank_class, load_zeros
from .primesum import (
    PrimeSumConfig,
    all_curves_prime_sum,
    admissible_twists,
    family_rank_aggregate,
    gauss_sum_check,
    poisson_identity_check,
    prime_sum_S,
    rank_estimator,
    sym2_prime_sum,
    sym3_prime_sum,
)
from .stats import (
    multiplicity_census,
    omega_moments,
    rank_distribution,
    root_number_sum,
    squarefree_char_sum,
    t_statistic,
    t_variance_scaling,
)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_FIXTURE = 4
EXIT_BOUNDS = 5
EXIT_DOMAIN = 6
EXIT_ZERODATA = 7
EXIT_VALIDATION = 8

_ERROR_CODES = [
    ((err.CapacityError, err.WorkBudgetError), EXIT_CAPACITY),
    ((err.FixtureError,), EXIT_FIXTURE),
    ((err.TableBoundError, err.MaskBoundError, err.InsufficientTableError),
     EXIT_BOUNDS),
    ((err.ZeroDataError, err.CoverageError), EXIT_ZERODATA),
    ((err.ConductorValidationError,), EXIT_VALIDATION),
    ((err.ConfigError,), EXIT_USAGE),
    ((err.TwistrankError,), EXIT_DOMAIN),
]


def load_config(path) -> Dict[str, str]:
    """Flat key=value config file; '#' starts a comment."""
    out: Dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise err.ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _emit(args, header: List[str], rows: List[List], summary: Dict) -> None:
    if args.output:
        path = Path(args.output)
        fresh = not path.exists() or path.stat().st_size == 0
        with open(path, "a", newline="") as fh:
            writer = csv.writer(fh)
            if fresh:
                writer.writerow(header)
            writer.writerows(rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    if args.json:
        Path(args.json).write_text(json.dumps(
            {"header": header, "rows": rows, "summary": summary},
            default=str, indent=2) + "\n")
    for key, value in summary.items():
        print(f"# {key} = {value}", file=sys.stderr)


def _fixture(args):
    fixtures = load_curves(args.curves)
    if args.curve not in fixtures:
        raise err.FixtureError(
            f"curve {args.curve!r} not in {args.curves} "
            f"(have {sorted(fixtures)})")
    return fixtures[args.curve]


def _table(args, fx, P=None):
    return get_ap_table(fx.curve, int(P if P is not None else args.P),
                        overrides=fx.ap_overrides, cache_dir=args.cache_dir,
                        workers=args.workers)


def _weights(args):
    w = weight_from_name(args.w, sigma=args.w_sigma)
    g = weight_from_name(args.g)
    return w, g


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def cmd_ap_table(args) -> None:
    fx = _fixture(args)
    conductor_validate(fx.curve)
    table = _table(args, fx)
    rows = [[int(p), int(a), int(t)]
            for p, a, t in zip(table.primes, table.ap, table.tags)]
    _emit(args, ["p", "a_p", "reduction_tag"], rows,
          {"curve": fx.curve.label, "P": table.bound, "entries": len(rows)})


def cmd_prime_sum(args) -> None:
    fx = _fixture(args)
    w, g = _weights(args)
    cfg = PrimeSumConfig(D=args.D, P=args.P, w=w, g=g,
                         coprime_only=not args.all_squarefree)
    table = _table(args, fx)
    t0 = time.perf_counter()
    res = prime_sum_S(fx.curve, table, cfg, workers=args.workers)
    wall = time.perf_counter() - t0
    _emit(args, ["D", "P", "w", "g", "S", "normalized", "path", "path_delta",
                 "wall_seconds"],
          [[cfg.D, cfg.P, args.w, args.g, res.S, res.normalized, res.path,
            res.path_delta, wall]],
          {"S": res.S, "normalized": res.normalized, "path_delta": res.path_delta})


def cmd_sym_check(args) -> None:
    fx = _fixture(args)
    h = weight_from_name(args.g)
    xs = [float(t) for t in args.x_grid.split(",")]
    table = _table(args, fx, P=max(xs) * h.decay_radius(1e-16) + 1)
    from .arith import mellin
    mh1 = mellin(h, 1.0).real
    rows = []
    for x in xs:
        s2 = sym2_prime_sum(table, x, h)
        s3 = sym3_prime_sum(table, x, h)
        rows.append([x, s2, s2 / x + mh1, s3, s3 / math.sqrt(x)])
    _emit(args, ["x", "sym2_sum", "sym2_residual", "sym3_sum",
                 "sym3_over_sqrt_x"], rows,
          {"curve": fx.curve.label, "mellin_h_1": mh1})


def cmd_rank_estimate(args) -> None:
    fx = _fixture(args)
    w, g = _weights(args)
    table = _table(args, fx)
    if args.d is not None:
        est = rank_estimator(fx.curve, table, args.d, args.P, g,
                             include_sym3=args.sym3)
        rows = [[est.d, est.r_hat, est.prime_term, est.sym2_term, est.sym3_term]]
        summary = {"r_hat": est.r_hat}
    else:
        cfg = PrimeSumConfig(D=args.D, P=args.P, w=w, g=g)
        agg = family_rank_aggregate(fx.curve, table, cfg,
                                    include_sym3=args.sym3, workers=args.workers)
        rows = [[int(d), float(r), float(wt), "", ""]
                for d, r, wt in zip(agg.dvals, agg.r_hat, agg.weights)]
        summary = {"family_average": agg.average, "weight_mass": agg.weight_mass,
                   "S": agg.S}
    _emit(args, ["d", "r_hat", "prime_term_or_weight", "sym2_term", "sym3_term"],
          rows, summary)


def cmd_analytic_rank(args) -> None:
    fx = _fixture(args)
    table = _table(args, fx)
    dvals = admissible_twists(fx.curve.N, args.D)
    rows = []
    classes = []
    for d in dvals:
        tw = TwistedCurve(base=fx.curve, d=int(d))
        rc = analytic_rank_class(tw, table, tol=args.tol)
        classes.append(rc)
        rows.append([int(d), rc.rank, rc.parity, rc.margin,
                     int(rc.low_confidence)])
    tally = rank_distribution(classes)
    _emit(args, ["d", "rank_class", "parity", "margin", "low_confidence"], rows,
          {"proportions": tally.proportions, "counts": tally.counts,
           "total": tally.total})


def cmd_root_numbers(args) -> None:
    fx = _fixture(args)
    grid = [float(t) for t in args.D_grid.split(",")]
    fit = root_number_sum(fx.curve, grid, mode=args.mode)
    rows = [[X, v] for X, v in zip(fit.X, fit.values)]
    _emit(args, ["D", "partial_sum"], rows,
          {"beta": fit.beta, "constant": fit.constant, "residual": fit.residual})


def cmd_char_sum(args) -> None:
    fx = _fixture(args)
    w, _ = _weights(args)
    rep = squarefree_char_sum(fx.curve, args.n, args.D, w)
    _emit(args, ["n", "D", "direct", "main_term", "residual"],
          [[rep.n, rep.D, rep.direct, rep.main_term, rep.residual]],
          {"residual": rep.residual})


def cmd_omega_moments(args) -> None:
    rep = omega_moments(args.D, args.q)
    _emit(args, ["D", "q", "moment", "bound", "ratio"],
          [[rep.D, rep.q, rep.moment, rep.bound, rep.ratio]],
          {"ratio": rep.ratio})


def cmd_all_curves_sum(args) -> None:
    w2 = WeightSpec.gaussian2d(args.w_sigma, args.w_sigma2)
    g = weight_from_name(args.g)
    S, norm = all_curves_prime_sum(args.A, args.B, args.P, w2, g,
                                   work_budget=args.budget)
    _emit(args, ["A", "B", "P", "S", "normalized"],
          [[args.A, args.B, args.P, S, norm]], {"S": S, "normalized": norm})


def cmd_poisson_check(args) -> None:
    w = WeightSpec.gaussian(args.w_sigma)
    rng = np.random.default_rng(args.seed)
    small_primes = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31]
    rows = []
    worst = 0.0
    for _ in range(args.trials):
        a = int(rng.integers(1, 6))
        c = int(rng.integers(1, 6))
        p = int(rng.choice(small_primes))
        x = int(rng.integers(0, p))
        rep = poisson_identity_check(a, c, p, args.D, w, x)
        worst = max(worst, rep.difference)
        rows.append([a, c, p, x, args.D, rep.difference])
    _emit(args, ["a", "c", "p", "x", "D", "abs_difference"], rows,
          {"max_difference": worst})


def cmd_gauss_check(args) -> None:
    from .arith import sieve_primes
    rows = []
    worst = 0.0
    for p in sieve_primes(args.P).primes:
        p = int(p)
        if p == 2:
            continue
        rep = gauss_sum_check(p)
        worst = max(worst, rep.max_deviation)
        rows.append([p, rep.max_deviation])
    _emit(args, ["p", "max_deviation"], rows, {"max_deviation": worst})


def _y_grid(args):
    return np.arange(args.y_min, args.y_max + 1e-12, args.y_step)


def cmd_t_stat(args) -> None:
    zeros = load_zeros(args.zeros)
    w, _ = _weights(args)
    N = _fixture(args).curve.N if args.curves and args.curve else 1
    ts = t_statistic(zeros, args.D, w, _y_grid(args), N=N)
    rows = [[float(y), float(v)] for y, v in zip(ts.y_grid, ts.values)]
    _emit(args, ["y", "T"], rows, {"mean": ts.mean, "variance": ts.variance})


def cmd_t_variance(args) -> None:
    zeros = load_zeros(args.zeros)
    w, _ = _weights(args)
    N = _fixture(args).curve.N if args.curves and args.curve else 1
    grid = [int(t) for t in args.D_grid.split(",")]
    rep = t_variance_scaling(zeros, grid, w, _y_grid(args), N=N)
    rows = [[D, v] for D, v in zip(rep.D_grid, rep.variances)]
    _emit(args, ["D", "variance"], rows,
          {"constant": rep.constant, "residual": rep.residual})


def cmd_census(args) -> None:
    zeros = load_zeros(args.zeros)
    rep = multiplicity_census(zeros, tol=args.tol)
    rows = [[g, m, " ".join(map(str, ds))] for g, m, ds in rep.clusters]
    _emit(args, ["gamma", "multiplicity", "twists"], rows,
          {"max_multiplicity": rep.max_multiplicity, "tol": rep.tol})


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value defaults file")
    p.add_argument("--curves", help="curve fixture CSV")
    p.add_argument("--curve", help="curve label within the fixture file")
    p.add_argument("--D", type=int, default=100)
    p.add_argument("--P", type=int, default=10**4)
    p.add_argument("--w", default="gaussian",
                   choices=["triangular", "exponential", "gaussian"])
    p.add_argument("--w-sigma", type=float, default=1.0)
    p.add_argument("--w-sigma2", type=float, default=1.0)
    p.add_argument("--g", default="triangular",
                   choices=["triangular", "exponential", "gaussian"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--budget", type=float, default=5e9)
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--output", default=None, help="CSV output path (appends)")
    p.add_argument("--json", default=None, help="JSON mirror path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistrank",
        description="Prime sums, rank estimators, and zero statistics "
                    "for quadratic twist families.")
    sub = parser.add_subparsers(dest="command")

    def add(name, fn, configure=None):
        p = sub.add_parser(name)
        _add_common(p)
        if configure:
            configure(p)
        p.set_defaults(func=fn)
        return p

    add("ap-table", cmd_ap_table)
    add("prime-sum", cmd_prime_sum,
        lambda p: p.add_argument("--all-squarefree", action="store_true"))
    add("sym-check", cmd_sym_check,
        lambda p: p.add_argument("--x-grid", default="10000,100000,1000000"))

    def rank_opts(p):
        p.add_argument("--d", type=int, default=None,
                       help="single twist; omit for the whole family")
        p.add_argument("--sym3", action="store_true")
    add("rank-estimate", cmd_rank_estimate, rank_opts)
    add("analytic-rank", cmd_analytic_rank,
        lambda p: p.add_argument("--tol", type=float, default=1e-3))

    def rn_opts(p):
        p.add_argument("--D-grid", default="1000,3162,10000,31623,100000")
        p.add_argument("--mode", default="coprime",
                       choices=["coprime", "all_squarefree"])
    add("root-numbers", cmd_root_numbers, rn_opts)
    add("char-sum", cmd_char_sum,
        lambda p: p.add_argument("--n", type=int, default=1))
    add("omega-moments", cmd_omega_moments,
        lambda p: p.add_argument("--q", type=int, default=3))

    def ac_opts(p):
        p.add_argument("--A", type=int, default=4)
        p.add_argument("--B", type=int, default=4)
    add("all-curves-sum", cmd_all_curves_sum, ac_opts)

    def poisson_opts(p):
        p.add_argument("--trials", type=int, default=20)
        p.add_argument("--seed", type=int, default=1)
    add("poisson-check", cmd_poisson_check, poisson_opts)
    add("gauss-check", cmd_gauss_check)

    def t_opts(p):
        p.add_argument("--zeros", required=True)
        p.add_argument("--y-min", type=float, default=2.0)
        p.add_argument("--y-max", type=float, default=1000.0)
        p.add_argument("--y-step", type=float, default=0.1)
    add("t-stat", cmd_t_stat, t_opts)
    add("t-variance", cmd_t_variance,
        lambda p: (t_opts(p), p.add_argument("--D-grid", default="50,100,200")))
    add("census", cmd_census,
        lambda p: (p.add_argument("--zeros", required=True),
                   p.add_argument("--tol", type=float, default=1e-6)))
    return parser


def _apply_config(parser, args, argv) -> argparse.Namespace:
    if not args.config:
        return args
    defaults = load_config(args.config)
    known = {a.dest for a in parser._actions}
    bad = set(defaults) - known
    # subcommand-specific keys are resolved per command; unknown keys fail
    ns = vars(args)
    for key, value in defaults.items():
        if key not in ns:
            if key not in known and bad:
                raise err.ConfigError(f"unknown config key {key!r}")
            continue
        # command line wins: only fill values the user left at default
        if f"--{key.replace('_', '-')}" in argv or f"--{key}" in argv:
            continue
        current = ns[key]
        if isinstance(current, bool):
            ns[key] = value.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            ns[key] = int(value)
        elif isinstance(current, float):
            ns[key] = float(value)
        else:
            ns[key] = value
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = _apply_config(parser, args, argv)
        args.func(args)
    except err.TwistrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for types, code in _ERROR_CODES:
            if isinstance(exc, types):
                return code
        return EXIT_UNEXPECTED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIXTURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
