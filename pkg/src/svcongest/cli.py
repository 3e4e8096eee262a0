"""Command line interface: ``svcongest <subcommand> ...``.

Exit codes: 0 success, 1 invalid input (message prefixed ``error:``),
2 enumeration cap refusal, 3 ``verify`` found a rho-move.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from svcongest.analysis import (
    ENUMERATION_CAP,
    EnumerationCapExceeded,
    brute_force_min,
    measured_poa,
    measured_stretch,
    profile_table,
    verify_approx_equilibrium,
)
from svcongest.bounds import BoundDomainError, bound_degree, bound_values, gamma_for_fraction, poa_bound, stretch_bound
from svcongest.game import PreconditionError, Profile
from svcongest.instances import GeneratorParams, generate, read_game, read_profile, write_game, write_profile
from svcongest.sharing import PROPORTIONAL, SHAPLEY_EXACT, SampleConfig, ShareMethod, share_report
from svcongest.solver import solve

EXIT_ERROR = 1
EXIT_CAP = 2
EXIT_NOT_EQUILIBRIUM = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"error: {message}\n")


def _add_method(p, default="shapley-exact"):
    p.add_argument("--method", choices=ShareMethod.KINDS, default=default)
    p.add_argument("--mu", type=float, default=None, help="sampling relative error (default: gamma, or 0.1)")
    p.add_argument("--batches", type=int, default=None, help="odd number of sampling batches")
    p.add_argument("--seed", type=int, default=None, help="sampling seed (required for sampling)")


def _method(args, gamma=None):
    if args.method == "shapley-exact":
        return SHAPLEY_EXACT
    if args.method == "proportional":
        return PROPORTIONAL
    if args.seed is None:
        raise PreconditionError("--seed is required for shapley-sampled")
    mu = args.mu if args.mu is not None else (gamma if gamma is not None else 0.1)
    return ShareMethod.sampled(SampleConfig(mu=mu, batch_count=args.batches, seed=args.seed))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svcongest", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the phased dynamics to an approximate equilibrium")
    p.add_argument("game")
    p.add_argument("--gamma", type=float, default=None, help="default: 0.25/theta fixed point")
    _add_method(p)
    p.add_argument("--initial", default=None, help="initial profile file (default: first strategies)")
    p.add_argument("--scan", choices=("restart", "cyclic"), default="restart")
    p.add_argument("--trace", required=True, help="move log, JSON lines")
    p.add_argument("--out", default=None, help="final profile (default: <trace>.profile.json)")
    p.add_argument("--summary", default=None, help="phase summary CSV (default: <trace>.summary.csv)")

    p = sub.add_parser("verify", help="worst deviation ratio of a profile")
    p.add_argument("game")
    p.add_argument("profile")
    p.add_argument("--rho", type=float, default=1.0)
    _add_method(p)

    p = sub.add_parser("shapley", help="per-(player, resource) shares of a profile")
    p.add_argument("game")
    p.add_argument("profile")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--sample", action="store_true")
    p.add_argument("--mu", type=float, default=0.1)
    p.add_argument("--batches", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("bounds", help="closed-form PoA, stretch and alpha")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=None)

    p = sub.add_parser("bruteforce", help="exact minimizer by enumeration")
    p.add_argument("game")
    p.add_argument("--objective", choices=("sc", "potential"), default="sc")
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP)
    p.add_argument("--out", default=None, help="write the minimizer as a profile file")

    p = sub.add_parser("metrics", help="measured PoA and stretch against their bounds")
    p.add_argument("game")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP)
    p.add_argument("--csv", action="store_true", help="print one CSV row per metric")

    p = sub.add_parser("generate", help="write a seeded random game")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--resources", type=int, default=4)
    p.add_argument("--strategies", type=int, default=2)
    p.add_argument("--size-min", type=int, default=1)
    p.add_argument("--size-max", type=int, default=2)
    p.add_argument("--weight-min", type=float, default=1.0)
    p.add_argument("--weight-max", type=float, default=3.0)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--coeff-min", type=float, default=0.0)
    p.add_argument("--coeff-max", type=float, default=1.0)
    return parser


def _kv(key, value, out):
    print(f"{key}: {value}", file=out)


def cmd_solve(args, out):
    game = read_game(args.game)
    initial = read_profile(args.initial, game) if args.initial else Profile((0,) * game.n)
    gamma = args.gamma if args.gamma is not None else gamma_for_fraction(bound_degree(game.d))
    method = _method(args, gamma)
    profile, trace, sched = solve(game, initial, gamma, method, scan=args.scan)
    trace_path = Path(args.trace)
    trace_path.write_text(trace.to_jsonl(), encoding="utf-8")
    out_path = Path(args.out) if args.out else trace_path.with_suffix(".profile.json")
    write_profile(profile, out_path)
    summary_path = Path(args.summary) if args.summary else trace_path.with_suffix(".summary.csv")
    summary_path.write_text(trace.summary_csv(), encoding="utf-8")
    _kv("gamma", repr(gamma), out)
    _kv("alpha", repr(sched.alpha), out)
    _kv("theta", repr(sched.theta), out)
    _kv("m", sched.m, out)
    _kv("steps", trace.steps, out)
    _kv("profile", json.dumps(list(profile.choice)), out)
    return 0


def cmd_verify(args, out):
    game = read_game(args.game)
    profile = read_profile(args.profile, game)
    rep = verify_approx_equilibrium(game, profile, _method(args), rhos=[args.rho])
    _kv("worst_ratio", repr(rep.worst_ratio), out)
    _kv("witness", "none" if rep.witness is None else f"player {rep.witness[0]} strategy {rep.witness[1]}", out)
    ok = rep.is_rho_pne(args.rho)
    _kv("rho_pne", f"{'yes' if ok else 'no'} (rho={args.rho!r})", out)
    return 0 if ok else EXIT_NOT_EQUILIBRIUM


def cmd_shapley(args, out):
    game = read_game(args.game)
    profile = read_profile(args.profile, game)
    if args.sample:
        if args.seed is None:
            raise PreconditionError("--seed is required with --sample")
        method = ShareMethod.sampled(SampleConfig(mu=args.mu, batch_count=args.batches, seed=args.seed))
    else:
        method = SHAPLEY_EXACT
    report = share_report(game, profile, method)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2), file=out)
        return 0
    _kv("method", report.method, out)
    for (i, e), v in sorted(report.shares.items()):
        print(f"share player={i} resource={e} value={v!r}", file=out)
    for e, r in sorted(report.residuals.items()):
        print(f"residual resource={e} value={r!r}", file=out)
    return 0


def cmd_bounds(args, out):
    bv = bound_values(args.d, args.rho, args.gamma)
    _kv("lambda", repr(bv.lam), out)
    _kv("mu_smooth", repr(bv.mu_smooth), out)
    _kv("poa_bound", repr(bv.poa_bound), out)
    _kv("stretch_bound", repr(bv.stretch_bound), out)
    _kv("limited_stretch_bound", repr(bv.limited_stretch_bound), out)
    if bv.alpha is not None:
        _kv("theta", repr(bv.theta), out)
        _kv("alpha", repr(bv.alpha), out)
    return 0


def cmd_bruteforce(args, out):
    game = read_game(args.game)
    profile, value = brute_force_min(game, args.objective, cap=args.cap)
    _kv("profile", json.dumps(list(profile.choice)), out)
    _kv("value", repr(value), out)
    if args.out:
        write_profile(profile, args.out)
    return 0


def cmd_metrics(args, out):
    game = read_game(args.game)
    table = profile_table(game, cap=args.cap)
    rows = []
    poa = measured_poa(game, args.rho, table=table)
    stretch = measured_stretch(game, args.rho, table=table)
    for name, meas, bound_fn in (("poa", poa, poa_bound), ("stretch", stretch, stretch_bound)):
        try:
            bound = bound_fn(args.rho, game.d)
        except BoundDomainError:
            bound = float("inf")
        value = "empty" if meas.empty else meas.value
        margin = "" if meas.empty else bound - meas.value
        rows.append((name, value, bound, margin))
    if args.csv:
        print("metric,d,n,rho,measured,bound,margin", file=out)
        for name, value, bound, margin in rows:
            print(f"{name},{game.d},{game.n},{args.rho!r},{value!r},{bound!r},{margin!r}", file=out)
    else:
        for name, value, bound, margin in rows:
            print(f"{name}: measured={value!r} bound={bound!r}", file=out)
    return 0


def cmd_generate(args, out):
    params = GeneratorParams(
        n=args.n,
        resources=args.resources,
        strategies=args.strategies,
        strategy_size=(args.size_min, args.size_max),
        weight_range=(args.weight_min, args.weight_max),
        degree=args.degree,
        coeff_range=(args.coeff_min, args.coeff_max),
        seed=args.seed,
    )
    write_game(generate(params), args.out)
    _kv("wrote", args.out, out)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "shapley": cmd_shapley,
    "bounds": cmd_bounds,
    "bruteforce": cmd_bruteforce,
    "metrics": cmd_metrics,
    "generate": cmd_generate,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.verbose:
        import logging

        logging.basicConfig(level=logging.DEBUG)
    try:
        return COMMANDS[args.command](args, out)
    except EnumerationCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (PreconditionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
