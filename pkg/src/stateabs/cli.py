"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .abstraction import PartitionError, Strategy, WeightingPolicy
from .anytime import AnytimeConfig, abstract_iter
from .bench import BENCH_COLUMNS, bench_policies
from .inference import evaluate_exact, marginals_by_enumeration
from .io import (FormatError, csv_text, load_network, parse_network, read_summary, render_plot,
                 save_network, write_trace)
from .models import ParamStyle, TrafficConfig, gen_chain, gen_commuter, gen_traffic
from .network import (EvidenceError, Network, NetworkError, ResourceGuardError, parse_evidence,
                      validate_network)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _prior(text: str) -> tuple[float, float]:
    try:
        p, q = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected p,q got {text!r}") from None
    return p, q


def _echo(settings: dict) -> None:
    print("config: " + json.dumps(settings, sort_keys=True), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stateabs", description="Anytime Bayesian-network evaluation by state-space abstraction")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("net")

    p = sub.add_parser("query", help="exact marginals")
    p.add_argument("net")
    p.add_argument("--evidence", nargs="+", action="extend", default=[], metavar="VAR=STATE")
    p.add_argument("--oracle", action="store_true", help="use brute-force enumeration")

    p = sub.add_parser("anytime", help="run iterative refinement")
    p.add_argument("net")
    p.add_argument("--evidence", nargs="+", action="extend", default=[], metavar="VAR=STATE")
    p.add_argument("--policy", choices=["average", "cf", "exact"], default="average")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="per-node")
    p.add_argument("--budget-ms", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--score", action="store_true", help="attach relscores against the exact marginals")
    p.add_argument("--run-id", default="run")
    p.add_argument("--fixed-clock", action="store_true", help="report iteration count instead of time")
    p.add_argument("--out", required=True)

    g = sub.add_parser("gen", help="generate a model")
    gsub = g.add_subparsers(dest="model", required=True, parser_class=_Parser)
    p = gsub.add_parser("commuter")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--style", choices=["uniform", "skewed", "deterministic"], default="uniform")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p = gsub.add_parser("traffic")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--sd", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p = gsub.add_parser("chain")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--root-prior", type=_prior, default=(0.5, 0.5))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench-policies", help="average vs CF on random chains")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--root-prior", type=_prior, default=(0.5, 0.5))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", help="SVG of avg_relscore against time")
    p.add_argument("summary")
    p.add_argument("--out", required=True)
    return ap


def _print_marginals(net: Network, marg) -> None:
    for name in marg:
        tag = " (evidence)" if marg.is_evidence(name) else ""
        print(f"{name}{tag}")
        for label, p in zip(net.var(name).states, marg[name]):
            print(f"  {label}\t{p:.10f}")


def _cmd_validate(args) -> int:
    text = Path(args.net).read_text(encoding="utf-8")
    try:
        net = parse_network(text)
    except NetworkError as exc:
        print("valid: no")
        for v in exc.violations:
            print(f"error: {v}")
        return EXIT_DATA
    report = validate_network(net)
    print(report)
    return EXIT_OK if report.ok else EXIT_DATA


def _cmd_query(args) -> int:
    net = load_network(args.net)
    evidence = parse_evidence(net, args.evidence)
    marg = marginals_by_enumeration(net, evidence) if args.oracle else evaluate_exact(net, evidence)
    _print_marginals(net, marg)
    return EXIT_OK


def _cmd_anytime(args) -> int:
    net = load_network(args.net)
    evidence = parse_evidence(net, args.evidence)
    for flag, val in (("--budget-ms", args.budget_ms), ("--max-iters", args.max_iters)):
        if val is not None and val < 0:
            raise UsageError(f"{flag} must be nonnegative")
    reference = evaluate_exact(net, evidence) if args.score else None
    config = AnytimeConfig(
        policy=WeightingPolicy.named(args.policy, net),
        strategy=args.strategy,
        max_iterations=args.max_iters,
        budget=args.budget_ms / 1000.0 if args.budget_ms is not None else None,
        score_against=reference,
        fixed_clock=args.fixed_clock,
    )
    _echo({"command": "anytime", "net": args.net, "evidence": args.evidence, "run_id": args.run_id,
           "out": args.out, **config.echo()})
    trace = abstract_iter(net, evidence, config)
    write_trace(trace, args.run_id, args.out)
    final = trace.final
    score = "" if final.avg_relscore is None else f", avg relscore {final.avg_relscore:.6f}"
    print(f"{len(trace)} iterations, terminated: {trace.reason}{score}")
    if trace.error:
        print(f"stopped early: {trace.error}", file=sys.stderr)
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.model == "commuter":
        net = gen_commuter(args.states, ParamStyle.named(args.style), args.seed)
        settings = {"states": args.states, "style": args.style}
    elif args.model == "traffic":
        net = gen_traffic(TrafficConfig(stages=args.stages, states_per_node=args.states, sd=args.sd, seed=args.seed))
        settings = {"stages": args.stages, "states": args.states, "sd": args.sd}
    else:
        net = gen_chain(args.states, args.seed, args.root_prior)
        settings = {"states": args.states, "root_prior": list(args.root_prior)}
    _echo({"command": "gen", "model": args.model, "seed": args.seed, "out": args.out, **settings})
    save_network(net, args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    _echo({"command": "bench-policies", "trials": args.trials, "states": args.states,
           "root_prior": list(args.root_prior), "seed": args.seed, "out": args.out})
    rows = bench_policies(args.trials, args.states, args.root_prior, args.seed)
    text = csv_text(BENCH_COLUMNS, ([str(t), str(g), p, repr(e)] for t, g, p, e in rows))
    Path(args.out).write_text(text, encoding="utf-8", newline="")
    return EXIT_OK


def _cmd_plot(args) -> int:
    rows = read_summary(args.summary)
    svg = render_plot(rows)
    _echo({"command": "plot", "summary": args.summary, "out": args.out})
    Path(args.out).write_text(svg, encoding="utf-8", newline="")
    return EXIT_OK


COMMANDS = {"validate": _cmd_validate, "query": _cmd_query, "anytime": _cmd_anytime,
            "gen": _cmd_gen, "bench-policies": _cmd_bench, "plot": _cmd_plot}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (NetworkError, EvidenceError, FormatError, PartitionError, FileNotFoundError,
            IsADirectoryError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
