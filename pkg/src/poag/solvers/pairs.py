"""Optimal policy pairs by enumerating one side and best-responding with the other."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from ..blackwell import flagged_action_indices
from ..game import ASSISTANT, HUMAN, Poag, Policy, other
from ._tree import VALUE_TOL, PolicySet, budget_from_env, check_budget, tree
from .naive import acts_naively, observes_naively
from .policy_level import policy_interferes_policy_level
from .response import respond


@dataclass
class PairFlags:
    action_level: bool
    policy_level: bool | None = None
    observes_naively: bool | None = None
    acts_naively: bool | None = None


@dataclass
class OptimalPair:
    """A family of optimal pairs: every selection from the two tie sets is optimal."""

    human_choices: PolicySet
    assistant_choices: PolicySet
    value: float
    _flags: PairFlags | None = field(default=None, repr=False)

    @property
    def human(self) -> Policy:
        return self.human_choices.canonical("optimal human")

    @property
    def assistant(self) -> Policy:
        return self.assistant_choices.canonical("optimal assistant")

    def assistant_must_interfere(self, game: Poag) -> bool:
        """Every selection plays a flagged action somewhere (the canonical pick avoids them when it can)."""
        flagged = flagged_action_indices(game)
        return any(c[0] in flagged for c in self.assistant_choices.choices.values())

    def assistant_can_interfere(self, game: Poag) -> bool:
        flagged = flagged_action_indices(game)
        return any(a in flagged for c in self.assistant_choices.choices.values() for a in c)


@dataclass
class SolveReport:
    game: Poag
    value: float
    pairs: list
    enumerated: str  # player whose policies were enumerated
    candidates: int

    def flags(self, i: int, policy_level: bool = False, observes: bool = False) -> PairFlags:
        """Flags of pair ``i``'s canonical representatives, computed on demand.

        ``acts_naively`` asks whether some selection from the human's tie sets
        acts naively under the canonical assistant's induced beliefs.
        """
        pair = self.pairs[i]
        f = pair._flags
        if f is None:
            f = PairFlags(pair.assistant_must_interfere(self.game))
            f.acts_naively = acts_naively(self.game, pair.human_choices, pair.assistant).holds
            pair._flags = f
        if policy_level and f.policy_level is None:
            f.policy_level = policy_interferes_policy_level(self.game, pair.assistant).interferes
        if observes and f.observes_naively is None:
            f.observes_naively = observes_naively(self.game, pair.human).holds
        return f

    def to_dict(self, policy_level: bool = False, observes: bool = False) -> dict:
        g = self.game
        out = []
        for i, pair in enumerate(self.pairs):
            f = self.flags(i, policy_level, observes)
            out.append({
                "value": pair.value,
                "human": pair.human.to_dict(g),
                "assistant": pair.assistant.to_dict(g),
                "flags": {"action_level_interference": f.action_level,
                          "policy_level_interference": f.policy_level,
                          "human_observes_naively": f.observes_naively,
                          "human_acts_naively": f.acts_naively},
            })
        return {"game": g.name, "value": self.value, "enumerated": self.enumerated,
                "candidates": self.candidates, "pairs": out}


def _solve_chunk(args):
    game, side, allowed_resp, chunk = args
    out = []
    n = game.n_actions(side)
    for choice in chunk:
        fixed = PolicySet(side, n, choice)
        br = respond(game, other(side), fixed.canonical(), allowed_resp)
        out.append((br.value, fixed, br.choices))
    return out


def optimal_pairs(game: Poag, budget: int | None = None, *, assistant_actions=None,
                  threads: int | None = None) -> SolveReport:
    """All optimal deterministic pairs, grouped into tie-set families.

    The side with fewer policies is enumerated; the other best-responds.
    ``assistant_actions`` (indices) restricts the assistant, e.g. to actions
    that are not flagged as interfering.
    """
    budget = budget_from_env(budget)
    allowed = None if assistant_actions is None else frozenset(assistant_actions)
    counts = {HUMAN: tree(game, HUMAN).count(cap=budget),
              ASSISTANT: tree(game, ASSISTANT).count(allowed, cap=budget)}
    side = min((HUMAN, ASSISTANT), key=lambda p: (counts[p], p != HUMAN))
    check_budget(counts[side], budget, f"deterministic {side} policies")
    side_allowed = allowed if side == ASSISTANT else None
    resp_allowed = allowed if side == HUMAN else None
    candidates = list(tree(game, side).enumerate(side_allowed))
    threads = threads or int(os.environ.get("POAG_THREADS", "1"))
    if threads > 1 and len(candidates) > 2000:
        size = -(-len(candidates) // threads)
        chunks = [(game, side, resp_allowed, candidates[i:i + size])
                  for i in range(0, len(candidates), size)]
        with ProcessPoolExecutor(threads) as pool:
            results = [r for part in pool.map(_solve_chunk, chunks) for r in part]
    else:
        results = _solve_chunk((game, side, resp_allowed, candidates))
    best = max(v for v, _, _ in results)
    pairs = []
    for value, fixed, resp in results:  # enumeration order keeps the result deterministic
        if value >= best - VALUE_TOL:
            h, a = (fixed, resp) if side == HUMAN else (resp, fixed)
            pairs.append(OptimalPair(h, a, value))
    return SolveReport(game, float(best), pairs, side, len(candidates))


def optimal_value(game: Poag, *, non_interfering: bool = False, budget: int | None = None) -> float:
    allowed = None
    if non_interfering:
        allowed = frozenset(range(game.n_actions(ASSISTANT))) - flagged_action_indices(game)
    return optimal_pairs(game, budget, assistant_actions=allowed).value
