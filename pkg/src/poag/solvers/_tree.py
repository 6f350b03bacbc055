"""Decision trees of one player: possible states, possible observations, action classes.

A history is *self-reachable* when some opponent behaviour gives it positive
probability.  Along such histories the player only ever knows a set of
possible (state, theta) pairs, which is all enumeration needs.
"""
from __future__ import annotations

import itertools
import os
import weakref
from dataclasses import dataclass, field

import numpy as np

from ..blackwell import flagged_action_indices
from ..errors import BudgetExceededError
from ..game import ASSISTANT, HUMAN, Poag, Policy, other

DEFAULT_BUDGET = 1_000_000
VALUE_TOL = 1e-9


def budget_from_env(budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    return int(os.environ.get("POAG_BUDGET", DEFAULT_BUDGET))


def joint(player: str, own: int, opp: int) -> tuple:
    """(aH, aA) from the player's own action and the opponent's."""
    return (own, opp) if player == HUMAN else (opp, own)


def obs_pair(player: str, oH: int, oA: int) -> tuple:
    """(own observation, opponent observation)."""
    return (oH, oA) if player == HUMAN else (oA, oH)


class Tree:
    """Cached support computations for one player of one game."""

    def __init__(self, game: Poag, player: str):
        self.game = game
        self.player = player
        self.n_own = game.n_actions(player)
        self.n_opp = game.n_actions(other(player))
        self.kernel = game.player_obs_kernel(player)
        self.flagged = flagged_action_indices(game) if player == ASSISTANT else frozenset()
        self._classes: dict = {}
        self._steps: dict = {}
        self._obs: dict = {}

    def root(self) -> frozenset:
        return frozenset((s, th) for s, th, _ in self.game.initial_support)

    def possible_obs(self, sup: frozenset, a: int) -> tuple:
        key = (sup, a)
        if key not in self._obs:
            g, found = self.game, set()
            for s, _ in sup:
                for b in range(self.n_opp):
                    aH, aA = joint(self.player, a, b)
                    for s2, _ in g.transition_support[s, aH, aA]:
                        found.update(np.flatnonzero(self.kernel[s2, aH, aA] > 0).tolist())
            self._obs[key] = tuple(sorted(found))
        return self._obs[key]

    def step(self, sup: frozenset, a: int, o: int) -> frozenset:
        key = (sup, a, o)
        if key not in self._steps:
            g, out = self.game, set()
            for s, th in sup:
                for b in range(self.n_opp):
                    aH, aA = joint(self.player, a, b)
                    for s2, _ in g.transition_support[s, aH, aA]:
                        if self.kernel[s2, aH, aA, o] > 0:
                            out.add((s2, th))
            self._steps[key] = frozenset(out)
        return self._steps[key]

    def _signature(self, sup: frozenset, a: int) -> bytes:
        g = self.game
        parts = []
        for s, th in sorted(sup):
            for b in range(self.n_opp):
                aH, aA = joint(self.player, a, b)
                row = g.transition[s, aH, aA]
                parts.append(np.round(row, 12))
                parts.append(np.round([g.reward[s, aH, aA, th]], 12))
                nz = np.flatnonzero(row > 0)
                parts.append(np.round(g.obs_kernel[nz, aH, aA].ravel(), 12))
        return np.concatenate(parts).tobytes()

    def classes(self, sup: frozenset, allowed: frozenset | None = None) -> tuple:
        """Own actions grouped by identical behaviour on every possible state.

        Each class is ordered by preference: non-flagged actions first (for the
        assistant), then declared order.  Classes follow their first member.
        """
        key = (sup, allowed)
        if key in self._classes:
            return self._classes[key]
        groups: dict = {}
        for a in range(self.n_own):
            if allowed is not None and a not in allowed:
                continue
            groups.setdefault(self._signature(sup, a), []).append(a)
        out = []
        for members in groups.values():
            members.sort(key=lambda a: (a in self.flagged, a))
            out.append(tuple(members))
        out.sort(key=lambda c: c[0])
        self._classes[key] = tuple(out)
        return self._classes[key]

    # -- enumeration of deterministic policies (one action class per point) --
    def count(self, allowed: frozenset | None = None, cap: int | None = None,
              max_depth: int | None = None) -> int:
        memo: dict = {}
        last = self.game.horizon - 1 if max_depth is None else max_depth

        def n(t, sup):
            key = (t, sup)
            if key in memo:
                return memo[key]
            total = 0
            for cls in self.classes(sup, allowed):
                sub = 1
                if t < last:
                    for o in self.possible_obs(sup, cls[0]):
                        sub *= n(t + 1, self.step(sup, cls[0], o))
                        if cap is not None and sub > cap:
                            sub = cap + 1
                            break
                total += sub
                if cap is not None and total > cap:
                    total = cap + 1
                    break
            memo[key] = total
            return total

        return n(0, self.root())

    def enumerate(self, allowed: frozenset | None = None, max_depth: int | None = None):
        """Yield {history: action class} for each deterministic policy.

        ``max_depth`` stops at histories of that length (partial policies).
        """
        last = self.game.horizon - 1 if max_depth is None else max_depth

        def gen(t, h, sup):
            for cls in self.classes(sup, allowed):
                a = cls[0]
                if t == last:
                    yield {h: cls}
                    continue
                kids = [(h + ((a, o),), self.step(sup, a, o)) for o in self.possible_obs(sup, a)]
                subs = [list(gen(t + 1, hk, sk)) for hk, sk in kids]
                for combo in itertools.product(*subs):
                    d = {h: cls}
                    for part in combo:
                        d.update(part)
                    yield d

        yield from gen(0, (), self.root())


_TREES: "weakref.WeakKeyDictionary[Poag, dict]" = weakref.WeakKeyDictionary()


def tree(game: Poag, player: str) -> Tree:
    per = _TREES.setdefault(game, {})
    if player not in per:
        per[player] = Tree(game, player)
    return per[player]


@dataclass
class PolicySet:
    """Deterministic policies described by a tuple of interchangeable actions per history.

    Every action in ``choices[h]`` is optimal (or, for enumerated policies,
    behaviourally identical) at ``h``; the first one is the canonical pick.
    """

    player: str
    n_actions: int
    choices: dict = field(default_factory=dict)

    def canonical(self, name: str = "") -> Policy:
        return Policy(self.player, self.n_actions, {h: c[0] for h, c in self.choices.items()},
                      name=name)

    def size(self) -> int:
        return int(np.prod([len(c) for c in self.choices.values()], dtype=float))


def check_budget(needed: int, budget: int, what: str) -> None:
    if needed > budget:
        raise BudgetExceededError(needed, budget, what)
