"""Command-line interface.

Exit status: 0 on success, 1 on domain errors (invalid input, guards,
unsolvable requests), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import os
import secrets
import sys
from fractions import Fraction
from importlib import resources
from typing import List, Optional

from .core import Energy, Parity, Reachability, ValidationError, as_fraction
from .gamefile import (
    load_game,
    load_reliability,
    parse_game,
    serialize_game,
)
from .generators import GeneratorParams, generate_random_game
from .qualitative import almost_sure_rtg_reach, qualitative_one_two, sure_win
from .reductions import (
    pair_probabilities,
    parse_qdimacs,
    qbf_oracle,
    qbf_to_game,
    reach_to_energy,
    reach_to_parity,
    reliability_oracle,
    reliability_to_game,
)
from .solvers import GuardExceeded
from .toss_as_you_go import CapNotStable, value_one
from .toss_at_start import estimate_value_two, exact_value_two

SEED_ENV = "RANDCTL_SEED"


class UsageError(Exception):
    pass


def _fraction_arg(text: str) -> Fraction:
    try:
        if "." in text or "e" in text.lower():
            raise ValueError
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected an integer or num/den fraction, got {text!r}")


def _resolve(path: str) -> str:
    """Use ``path`` if it exists, else a bundled data file of that name."""
    if os.path.exists(path):
        return path
    bundled = resources.files("randctl") / "data" / os.path.basename(path)
    if bundled.is_file():
        return str(bundled)
    return path


def _read(path: str) -> str:
    with open(_resolve(path), encoding="utf-8") as fh:
        return fh.read()


def _master_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")
    return secrets.randbits(64)


def _show(x: Fraction, decimal: Optional[int]) -> str:
    s = f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if decimal is not None:
        s += f" ({float(x):.{decimal}f})"
    return s


def _bool(b: bool) -> str:
    return "true" if b else "false"


def cmd_validate(args) -> int:
    gf = parse_game(_read(args.file))
    print(f"ok {gf.name}: {len(gf.graph.nodes)} nodes")
    return 0


def cmd_solve(args) -> int:
    gf = parse_game(_read(args.file))
    g, toss, obj = gf.graph, gf.toss, gf.objective
    if args.variant == "rtg-qualitative":
        if not isinstance(obj, Reachability):
            raise ValidationError("random-turn analysis supports reachability objectives only")
        print(f"almost_sure(rtg,reach)={_bool(almost_sure_rtg_reach(g, obj))}")
        return 0
    if args.variant == "toss-as-you-go":
        if args.estimate:
            raise UsageError("toss-as-you-go games are solved exactly; drop --estimate")
        value = value_one(g, toss, obj)
        print(_show(value, args.decimal))
        if args.threshold is not None:
            print(f"at_least({_show(args.threshold, None)})={_bool(value >= args.threshold)}")
        return 0
    if args.estimate:
        seed = _master_seed(args)
        rep = estimate_value_two(
            g, toss, obj, args.epsilon, args.delta, seed, args.trace_stride, workers=args.workers
        )
        print(_show(rep.estimate, args.decimal))
        print(f"samples={rep.samples} epsilon={rep.epsilon} delta={rep.delta} seed={seed}")
        if args.trace_stride:
            print("samples,estimate")
            for n, est in rep.trace:
                print(f"{n},{_show(est, None)}")
        if args.threshold is not None:
            print(f"at_least({_show(args.threshold, None)})={_bool(rep.estimate >= args.threshold)}")
        return 0
    value = exact_value_two(g, toss, obj, workers=args.workers)
    print(_show(value, args.decimal))
    if args.threshold is not None:
        print(f"at_least({_show(args.threshold, None)})={_bool(value >= args.threshold)}")
    return 0


def cmd_qualitative(args) -> int:
    gf = parse_game(_read(args.file))
    g, obj = gf.graph, gf.objective
    res = sure_win(g, obj)
    q = qualitative_one_two(g, obj)
    rtg = _bool(almost_sure_rtg_reach(g, obj)) if isinstance(obj, Reachability) else "n/a"
    print(f"sure={_bool(res.surely_wins)} almost_sure(one/two)={_bool(q.almost_sure)} almost_sure(rtg,reach)={rtg}")
    if args.witness and res.witness is not None:
        print("stem=" + ",".join(res.witness.stem))
        print("cycle=" + ",".join(res.witness.cycle))
    return 0


def cmd_reduce(args) -> int:
    if (args.source is None) == (args.transform is None):
        raise UsageError("give exactly one of --from or --transform")
    if args.source == "qbf":
        pcnf = parse_qdimacs(_read(args.file))
        graph, toss, obj, theta = qbf_to_game(pcnf)
        p, q = pair_probabilities(pcnf.n)
        head = [f"# threshold={theta} p={p} q={q}"]
        if args.oracle:
            head.append(f"# qbf_true={_bool(qbf_oracle(pcnf))}")
        text = "\n".join(head) + "\n" + serialize_game(graph, toss, obj, "qbf")
    elif args.source == "reliability":
        inst = load_reliability(_resolve(args.file))
        graph, toss, obj = reliability_to_game(inst)
        head = ""
        if args.oracle:
            head = f"# reliability={reliability_oracle(inst)}\n"
        text = head + serialize_game(graph, toss, obj, "reliability")
    else:
        gf = parse_game(_read(args.file))
        if not isinstance(gf.objective, Reachability):
            raise ValidationError("transforms start from a reachability objective")
        if args.transform == "parity":
            new = reach_to_parity(gf.graph, gf.objective)
        else:
            new = reach_to_energy(gf.graph, gf.objective, "one" if args.transform == "energy-one" else "two")
        text = serialize_game(gf.graph, gf.toss, new, gf.name)
    _emit(text, args.output)
    return 0


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    seed = _master_seed(args)
    params = GeneratorParams(
        nodes=args.nodes,
        max_outdegree=args.max_outdegree,
        kind=args.objective,
        priorities=args.priorities,
        weight_bound=args.weight_bound,
        credit=args.credit,
        toss=args.toss,
        seed=seed,
    )
    try:
        params.validate()
    except ValueError as err:
        raise UsageError(str(err))
    graph, toss, obj = generate_random_game(params)
    _emit(f"# seed={seed}\n" + serialize_game(graph, toss, obj, f"random-{seed}"), args.output)
    return 0


def cmd_experiment(args) -> int:
    from .experiment import profile_games, run_convergence_experiment, write_csvs

    seed = _master_seed(args)
    nodes = 20 if args.full_profile else args.nodes
    kinds = ["reachability", "parity", "energy"] if args.objective == "all" else [args.objective]
    print(f"seed={seed}")
    for kind in kinds:
        games = profile_games(kind, args.games, nodes, seed)
        res = run_convergence_experiment(
            games, args.epsilon, args.delta, args.samples, args.stride, seed, workers=args.workers
        )
        paths = write_csvs(res, args.out, prefix=f"{kind}-" if len(kinds) > 1 else "")
        last = res.aggregate[-1]
        print(f"{kind}: games={len(games)} samples={last[0]} mean_error={last[1]:.6g} "
              f"hoeffding_eps={last[3]:.6g} files={len(paths)}")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randctl", description="Games with randomised node ownership.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a game file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="winning probability or qualitative answer")
    p.add_argument("file")
    p.add_argument("--variant", choices=["rtg-qualitative", "toss-as-you-go", "toss-at-start"],
                   default="toss-at-start")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact value (default)")
    mode.add_argument("--estimate", action="store_true", help="Monte-Carlo estimate (toss-at-start)")
    p.add_argument("--epsilon", type=_fraction_arg, default=Fraction(1, 20))
    p.add_argument("--delta", type=_fraction_arg, default=Fraction(1, 20))
    p.add_argument("--threshold", type=_fraction_arg)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace-stride", type=int)
    p.add_argument("--decimal", type=int, metavar="DIGITS", help="also print a decimal rendering")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("qualitative", help="sure and almost-sure winning")
    p.add_argument("file")
    p.add_argument("--witness", action="store_true", help="print a violating lasso if any")
    p.set_defaults(func=cmd_qualitative)

    p = sub.add_parser("reduce", help="build games from QBF or reliability inputs, or transform objectives")
    p.add_argument("file")
    p.add_argument("--from", dest="source", choices=["qbf", "reliability"])
    p.add_argument("--transform", choices=["parity", "energy-one", "energy-two"])
    p.add_argument("--oracle", action="store_true", help="also report the source problem's answer")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("generate", help="seeded random game")
    p.add_argument("--nodes", type=int, default=12)
    p.add_argument("--max-outdegree", type=int, default=12)
    p.add_argument("--objective", choices=["reachability", "parity", "energy"], default="reachability")
    p.add_argument("--priorities", type=int, default=6)
    p.add_argument("--weight-bound", type=int, default=10)
    p.add_argument("--credit", type=int, default=0)
    p.add_argument("--toss", type=_fraction_arg, default=Fraction(1, 2))
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="convergence of sampled estimates (CSV output)")
    p.add_argument("--objective", choices=["all", "reachability", "parity", "energy"], default="all")
    p.add_argument("--games", type=int, default=10)
    p.add_argument("--nodes", type=int, default=12)
    p.add_argument("--full-profile", action="store_true", help="20-node games (slow exact baselines)")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--stride", type=int, default=1000)
    p.add_argument("--epsilon", type=_fraction_arg, default=Fraction(1, 200))
    p.add_argument("--delta", type=_fraction_arg, default=Fraction(1, 20))
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="experiment-out")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    if getattr(args, "trace_stride", None) is not None and args.trace_stride < 1:
        parser.error("--trace-stride must be positive")
    try:
        return args.func(args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"randctl: error: {err}", file=sys.stderr)
        return 2
    except (ValidationError, GuardExceeded, CapNotStable, ValueError, OSError) as err:
        print(f"randctl: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
