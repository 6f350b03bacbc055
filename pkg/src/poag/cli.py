"""Command-line entry point: ``poag <subcommand> ...``.

Exit codes: 0 success, 1 a requested check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import boltzmann as bz
from . import examples, product
from .beliefs import filter as belief_filter
from .blackwell import interfering_actions, policy_interferes_action_level
from .errors import BudgetExceededError, PoagError
from .game import HUMAN, load_game, load_policy, save_game
from .solvers import add_channel, boltzmann_response, optimal_pairs, policy_interferes_policy_level


class InputError(Exception):
    pass


def _budget(args):
    if args.budget is not None:
        os.environ["POAG_BUDGET"] = str(args.budget)
    return args.budget


def _game(args):
    if not os.path.exists(args.game):
        raise InputError(f"game file not found: {args.game}")
    try:
        game = load_game(args.game)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed game file {args.game}: {exc}") from exc
    if getattr(args, "channel", None):
        game = add_channel(game, args.channel)
    return game


def _policy(game, path):
    if not os.path.exists(path):
        raise InputError(f"policy file not found: {path}")
    try:
        return load_policy(game, path)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed policy file {path}: {exc}") from exc


def _emit(doc, args, text_lines):
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
    if args.json:
        json.dump(doc, sys.stdout, indent=2)
        print()
    else:
        print("\n".join(text_lines))


# -- subcommands -------------------------------------------------------------

def cmd_solve(args) -> int:
    game = _game(args)
    report = optimal_pairs(game, _budget(args), threads=args.threads)
    doc = report.to_dict(policy_level=args.policy_level)
    lines = [f"game {game.name}: optimal value {report.value:.10g}",
             f"enumerated {report.candidates} {report.enumerated} policies; "
             f"{len(report.pairs)} optimal families"]
    for i, entry in enumerate(doc["pairs"]):
        f = entry["flags"]
        lines.append(f"  pair {i}: action-level={f['action_level_interference']} "
                     f"policy-level={f['policy_level_interference']} "
                     f"acts-naively={f['human_acts_naively']}")
    _emit(doc, args, lines)
    return 0


def cmd_audit(args) -> int:
    game = _game(args)
    _budget(args)
    piA = _policy(game, args.assistant_policy)
    act = policy_interferes_action_level(game, piA)
    pol = policy_interferes_policy_level(game, piA, args.t, args.budget)
    doc = {"game": game.name,
           "interfering_actions": sorted(map(list, interfering_actions(game))),
           "action_level": {"interferes": act.interferes, "history": act.history, "action": act.action},
           "policy_level": {"interferes": pol.interferes, "t": pol.t,
                            "alternative": None if pol.alternative is None else
                            [[list(map(list, h)), a] for h, a in pol.alternative.items()]}}
    lines = [f"action level: {'interferes' if act else 'clean'}"
             + (f" (plays {act.action} after {act.history})" if act else ""),
             f"policy level: {'interferes' if pol else 'clean'}"
             + (f" at step {pol.t}" if pol else "")]
    _emit(doc, args, lines)
    if args.expect_clean and (act.interferes or pol.interferes):
        return 1
    return 0


def _history(arg):
    if os.path.exists(arg):
        with open(arg) as fh:
            return json.load(fh)
    try:
        return json.loads(arg)
    except json.JSONDecodeError as exc:
        raise InputError(f"--history must be a JSON list of [action, observation] pairs: {exc}")


def cmd_belief(args) -> int:
    game = _game(args)
    piA = _policy(game, args.assistant_policy)
    b = belief_filter(game, piA, _history(args.history))
    doc = {"state": b.state_marginal(), "theta": b.theta_marginal(), "entropy": b.entropy(),
           "support": [{"states": list(a.state_history), "assistant_obs": list(a.assistant_obs_history),
                        "assistant_actions": list(a.assistant_action_history), "theta": a.theta,
                        "p": p} for a, p in b.support]}
    lines = [f"P({s}) = {p:.6g}" for s, p in sorted(doc["state"].items())]
    lines.append(f"entropy = {doc['entropy']:.6g} nats")
    _emit(doc, args, lines)
    return 0


def cmd_boltzmann(args) -> int:
    game = _game(args)
    piA = _policy(game, args.assistant_policy)
    pol = boltzmann_response(game, piA, args.beta)
    doc = pol.to_dict(game)
    lines = [f"{h['history']}: " + ", ".join(f"{a}={p:.6g}" for a, p in h["dist"].items())
             for h in doc["rules"]]
    _emit(doc, args, lines)
    return 0


def _problem_pair(args):
    if args.problem == "man-tldr":
        return bz.man_tldr_problems()
    if not os.path.exists(args.problem):
        raise InputError(f"problem file not found: {args.problem}")
    with open(args.problem) as fh:
        spec = json.load(fh)
    try:
        if "informative" in spec:
            return (bz.SignalDecisionProblem.from_dict(spec["informative"]),
                    bz.SignalDecisionProblem.from_dict(spec["garbled"]))
        return bz.SignalDecisionProblem.from_dict(spec), None
    except (KeyError, ValueError) as exc:
        raise InputError(f"malformed problem file: {exc}") from exc


def cmd_analyze_boltzmann(args) -> int:
    informative, garbled = _problem_pair(args)
    betas = np.linspace(args.beta_min, args.beta_max, args.steps)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("beta,eu_with,eu_without\n")
        for b in map(float, betas):
            without = bz.curve(garbled, b) if garbled is not None else bz.eu_without_signal(informative, b)
            out.write(f"{b!r},{bz.eu_with_signal(informative, b)!r},{without!r}\n")
    finally:
        if args.out:
            out.close()
    if garbled is not None:
        try:
            beta_star = bz.interference_threshold((informative, garbled), beta_max=args.beta_max)
            print(f"# threshold beta = {beta_star:.8f}", file=sys.stderr)
        except PoagError as exc:
            print(f"# no threshold: {exc}", file=sys.stderr)
    return 0


def cmd_example(args) -> int:
    game = examples.build(args.name, args.n)
    if args.emit:
        save_game(game, args.emit)
        print(f"wrote {game.name} to {args.emit}")
    else:
        json.dump(game.to_dict(), sys.stdout, indent=2)
        print()
    return 0


def _int_range(text: str) -> list:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def _betas(text: str) -> list:
    return [math.inf if x.strip().lower() in ("inf", "infinity") else float(x) for x in text.split(",")]


def cmd_product(args) -> int:
    rows = product.sweep(args.d, _int_range(args.k_sweep), _int_range(args.private_obs),
                         _betas(args.beta_sweep), args.trials, args.seed)
    product.write_csv(rows, args.out if args.out else sys.stdout)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="poag", formatter_class=fmt,
                                description="Exact analysis of small assistance games.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, game=True):
        if game:
            sp.add_argument("--game", required=True, help="game JSON file")
        sp.add_argument("--out", default=None, help="also write the JSON document here")
        sp.add_argument("--json", action="store_true", help="print JSON instead of text")

    s = sub.add_parser("solve", formatter_class=fmt, help="optimal policy pairs with flags")
    common(s)
    s.add_argument("--budget", type=int, default=None, help="enumeration budget (else POAG_BUDGET)")
    s.add_argument("--channel", choices=["a2h", "h2a", "both"], default=None, help="add a communication channel first")
    s.add_argument("--threads", type=int, default=os.cpu_count(), help="worker processes")
    s.add_argument("--policy-level", action="store_true", help="also run policy-level checks")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("audit", formatter_class=fmt, help="interference audit of an assistant policy")
    common(s)
    s.add_argument("--assistant-policy", required=True, help="assistant policy JSON file")
    s.add_argument("--t", type=int, default=None, help="step to check (default: every step)")
    s.add_argument("--budget", type=int, default=None, help="enumeration budget (else POAG_BUDGET)")
    s.add_argument("--channel", choices=["a2h", "h2a", "both"], default=None, help="add a communication channel first")
    s.add_argument("--expect-clean", action="store_true", help="exit 1 if any interference is found")
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("belief", formatter_class=fmt, help="human posterior after a history")
    common(s)
    s.add_argument("--assistant-policy", required=True, help="assistant policy JSON file")
    s.add_argument("--history", required=True, help="JSON list of [action, observation] or a file")
    s.set_defaults(func=cmd_belief)

    s = sub.add_parser("boltzmann", formatter_class=fmt, help="Boltzmann-rational human response")
    common(s)
    s.add_argument("--assistant-policy", required=True, help="assistant policy JSON file")
    s.add_argument("--beta", type=float, default=1.0, help="rationality; larger is sharper")
    s.set_defaults(func=cmd_boltzmann)

    a = sub.add_parser("analyze", formatter_class=fmt, help="closed-form analyses")
    asub = a.add_subparsers(dest="analysis", required=True)
    s = asub.add_parser("boltzmann", formatter_class=fmt, help="EU curves with and without a signal")
    s.add_argument("--problem", default="man-tldr", help="problem JSON (or a pair) or 'man-tldr'")
    s.add_argument("--beta-min", type=float, default=0.0, help="first grid point")
    s.add_argument("--beta-max", type=float, default=10.0, help="last grid point and threshold search bound")
    s.add_argument("--steps", type=int, default=101, help="grid size")
    s.add_argument("--out", default=None, help="CSV path; stdout if unset")
    s.set_defaults(func=cmd_analyze_boltzmann)

    s = sub.add_parser("example", formatter_class=fmt, help="emit a built-in game")
    s.add_argument("name", choices=sorted(examples.BUILTIN))
    s.add_argument("--n", type=int, default=None, help="size parameter (cuda-versions)")
    s.add_argument("--emit", default=None, help="write the game JSON here")
    s.set_defaults(func=cmd_example)

    e = sub.add_parser("experiment", formatter_class=fmt, help="Monte Carlo experiments")
    esub = e.add_subparsers(dest="experiment", required=True)
    s = esub.add_parser("product-select", formatter_class=fmt, help="product-selection sweep")
    s.add_argument("--d", type=int, default=5, help="number of products")
    s.add_argument("--k-sweep", default="0..4", help="interference counts: list or range")
    s.add_argument("--private-obs", default="0", help="value, list or range like 0..5")
    s.add_argument("--beta-sweep", default=",".join(map(str, product.DEFAULT_BETAS)),
                   help="comma-separated rationality values; 'inf' allowed")
    s.add_argument("--trials", type=int, default=30_000, help="Monte Carlo trials per configuration")
    s.add_argument("--seed", type=int, default=0, help="base seed of the counter-based stream")
    s.add_argument("--out", default=None, help="CSV path; stdout if unset")
    s.add_argument("--threads", type=int, default=os.cpu_count(), help="accepted for symmetry; trials run in one vectorized pass")
    s.set_defaults(func=cmd_product)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"poag: budget exceeded: {exc}", file=sys.stderr)
    except InputError as exc:
        print(f"poag: {exc}", file=sys.stderr)
    except PoagError as exc:
        print(f"poag: invalid input: {exc}", file=sys.stderr)
    except (ValueError, KeyError) as exc:
        print(f"poag: invalid input: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
