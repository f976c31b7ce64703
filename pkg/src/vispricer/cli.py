"""Command-line entry point: ``vispricer <command> ...``.

Exit codes: 0 success, 1 validation error, 2 failed oracle check.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .checks import run_checks
from .experiment import ConfigError, build_market, dataset_stats, load_config, run_experiment
from .graph import EdgeListParseError, load_edge_list
from .market import PriceError
from .pricing import (
    PoolTooLargeError,
    Subroutine,
    candidate_price_search,
    discretized_price_search,
)
from .shapley import CoalitionGame, PermutationSampler, shapley_exact, shapley_sampled

VALIDATION_ERRORS = (ConfigError, EdgeListParseError, PriceError, PoolTooLargeError,
                     ValueError, KeyError, OSError)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vispricer", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="node and arc counts of an edge list")
    p.add_argument("edgelist")
    p.add_argument("--undirected", action="store_true")

    p = sub.add_parser("optimize", help="price search and supplier selection")
    p.add_argument("--config", required=True)
    p.add_argument("--subroutine", choices=[s.value for s in Subroutine])
    p.add_argument("--budget", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=float)
    g.add_argument("--candidate-prices", action="store_true")

    p = sub.add_parser("shapley", help="divide the improvement at the optimized price")
    p.add_argument("--config", required=True)
    p.add_argument("--subroutine", choices=[s.value for s in Subroutine])
    p.add_argument("--budget", type=int)
    p.add_argument("--epsilon", type=float)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--rounds", type=int)
    p.add_argument("--delta", type=float)

    p = sub.add_parser("experiment", help="full sweep with CSV output")
    p.add_argument("--config", required=True)

    p = sub.add_parser("oracle", help="brute-force cross-checks, PASS/FAIL per check")
    p.add_argument("--config", required=True)
    return ap


def _solve(args, cfg):
    inst = build_market(cfg)
    inst = inst.with_budget(args.budget or cfg.budget_list[0])
    sub = Subroutine.parse(args.subroutine or cfg.subroutines[0])
    kwargs = {"max_pool": cfg.brute_limit} if sub is Subroutine.BRUTE else {}
    if getattr(args, "candidate_prices", False):
        sol = candidate_price_search(inst, sub, **kwargs)
    else:
        eps = args.epsilon if args.epsilon is not None else cfg.epsilon_list[0]
        sol = discretized_price_search(inst, eps, sub, **kwargs)
    return inst, sol


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "stats":
            g = load_edge_list(args.edgelist, args.undirected)
            _dump(dataclasses.asdict(dataset_stats(g)))
            return 0

        cfg = load_config(args.config)
        if args.command == "optimize":
            inst, sol = _solve(args, cfg)
            _dump(sol.to_dict(inst))
        elif args.command == "shapley":
            inst, sol = _solve(args, cfg)
            game = CoalitionGame.from_market(inst, sol.price.p, sol.selection.chosen)
            delta = args.delta if args.delta is not None else cfg.shapley_delta
            if args.exact:
                alloc = shapley_exact(game, sol.price.q)
                delta = None
            else:
                sampler = PermutationSampler(cfg.seed, args.rounds or cfg.shapley_rounds)
                alloc = shapley_sampled(game, sampler, sol.price.q, delta)
            _dump(alloc.to_dict(inst.graph.label, game.grand_value, delta))
        elif args.command == "experiment":
            records = run_experiment(cfg)
            print(f"{len(records)} runs written to {cfg.output_dir}")
        elif args.command == "oracle":
            inst = build_market(cfg)
            results = run_checks(inst, cfg.epsilon_list[0], cfg.budget_list, cfg.brute_limit)
            for r in results:
                print(f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}".rstrip())
            return 0 if all(r.passed for r in results) else 2
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
