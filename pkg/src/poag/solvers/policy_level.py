"""Policy-level interference: could a same-effect change at one step inform the human more?

For a step t the human knows the assistant's policy, so what matters is the
family of distributions of her next observation given the next state.  We
search over deterministic replacements of the assistant's step-t choices,
where each replacement at an assistant history must have the same effect on
transitions and rewards as the original choice there.  A replacement is a
witness when its family is strictly more informative for every enumerated
human partial policy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blackwell import EFFECT_TOL, ObservationFamily, at_most_as_informative, flagged_action_indices
from ..errors import BudgetExceededError
from ..game import ASSISTANT, HUMAN, Poag, Policy, forward_step, initial_frontier
from ._tree import PolicySet, budget_from_env, check_budget, tree


@dataclass(frozen=True)
class PolicyLevelVerdict:
    interferes: bool
    t: int | None = None
    alternative: dict | None = None  # {assistant history ids: action id} at step t
    human_policies: int = 0
    nodes: int = 0

    def __bool__(self):
        return self.interferes


def _same_effect_candidates(game: Poag, dist: np.ndarray) -> tuple:
    """Deterministic actions whose transition and reward rows equal the mixture's."""
    T = np.tensordot(game.transition, dist, axes=([2], [0]))
    R = np.tensordot(game.reward, dist, axes=([2], [0]))
    flagged = flagged_action_indices(game)
    out = [a for a in range(game.n_actions(ASSISTANT))
           if np.abs(game.transition[:, :, a] - T).max() <= EFFECT_TOL
           and np.abs(game.reward[:, :, a] - R).max() <= EFFECT_TOL]
    out.sort(key=lambda a: (a in flagged, a))
    return tuple(out)


class _Context:
    """Observation families for one human partial policy at one step."""

    def __init__(self, game: Poag, piH: Policy, piA: Policy, t: int, candidates: dict, frontier=None):
        if frontier is None:
            frontier = reach(game, piH, piA, t)
        S, OH = game.n_states, game.n_obs(HUMAN)
        OHk = game.human_obs_kernel
        self.orig = np.zeros((S, OH))
        self.contrib: dict = {}
        self.dep: dict = {}
        for (s, th, hH, hA), w in frontier.items():
            dH = piH.dist(hH)
            dA = piA.dist(hA)
            if hA not in candidates:
                candidates[hA] = _same_effect_candidates(game, dA)
            per = self.contrib.setdefault(hA, {})
            for aH in np.flatnonzero(dH):
                wh = w * dH[aH]
                for a in set(candidates[hA]) | set(np.flatnonzero(dA).tolist()):
                    block = per.setdefault(a, np.zeros((S, OH)))
                    T = game.transition[s, aH, a]
                    block += wh * T[:, None] * OHk[:, aH, a, :]
                    if dA[a] > 0:
                        self.orig += wh * dA[a] * T[:, None] * OHk[:, aH, a, :]
                for s2 in np.flatnonzero(game.transition[s, aH, int(np.flatnonzero(dA)[0])] > 0):
                    self.dep.setdefault(int(s2), set()).add(hA)
        mass = self.orig.sum(axis=1)
        self.rows = np.flatnonzero(mass > 0)
        self.mass = mass

    def family(self, matrix: np.ndarray, rows) -> ObservationFamily:
        rows = list(rows)
        return ObservationFamily.from_array(matrix[rows] / self.mass[rows, None], states=rows)

    def alternative(self, assign: dict) -> np.ndarray:
        out = np.zeros_like(self.orig)
        for hA, per in self.contrib.items():
            out += per[assign[hA]]
        return out

    def schedule(self, position: dict) -> None:
        """Rows that become complete once order[:k+1] is assigned, by k."""
        self.new_rows: dict = {}
        for s2 in self.rows:
            k = max((position[h] for h in self.dep.get(int(s2), ())), default=-1)
            self.new_rows.setdefault(k, []).append(int(s2))
        done: list = []
        self.rows_upto: dict = {}
        for k in sorted(self.new_rows):
            done = done + self.new_rows[k]
            self.rows_upto[k] = sorted(done)
        self.assigned_at = sorted((position[h], h) for h in self.contrib)


def reach(game: Poag, piH: Policy, piA: Policy, t: int) -> dict:
    frontier = initial_frontier(game)
    for k in range(t):
        _, frontier = forward_step(game, frontier, piH, piA, k)
    return frontier


def _human_partials(game: Poag, t: int, budget: int):
    """(key, policy) per human partial policy; the key fixes the play before step t."""
    trH = tree(game, HUMAN)
    n_h = trH.count(max_depth=t, cap=budget)
    check_budget(n_h, budget, f"human partial policies up to step {t}")
    for choice in trH.enumerate(max_depth=t):
        key = tuple(sorted((h, c[0]) for h, c in choice.items() if len(h) < t))
        yield key, PolicySet(HUMAN, game.n_actions(HUMAN), choice).canonical()


def _contexts(game: Poag, piA: Policy, t: int, budget: int, human_policies, candidates: dict):
    frontiers: dict = {}
    source = (_human_partials(game, t, budget) if human_policies is None
              else ((None, piH) for piH in human_policies))
    for key, piH in source:
        if key is None:
            frontier = reach(game, piH, piA, t)
        else:
            if key not in frontiers:
                frontiers[key] = reach(game, piH, piA, t)
            frontier = frontiers[key]
        yield _Context(game, piH, piA, t, candidates, frontier)


INITIAL_ACTIVE = 8


def _check_step(game: Poag, piA: Policy, t: int, budget: int, human_policies=None) -> PolicyLevelVerdict:
    """Witness search against a growing set of human partial policies.

    A witness must beat the original for every human policy, so the search
    starts from a few of them: no witness there means none at all.  A
    candidate found on the active set is checked against the rest, and the
    first human policy that refutes it joins the active set.
    """
    candidates: dict = {}
    stream = _contexts(game, piA, t, budget, human_policies, candidates)
    seen: list = []  # every context built so far, in enumeration order
    active: list = []
    cache: dict = {}
    nodes = 0

    def leq(ctx, x, y, rows):
        key = (x[rows].tobytes(), y[rows].tobytes(), tuple(rows))
        if key not in cache:
            cache[key] = bool(at_most_as_informative(ctx.family(x, rows), ctx.family(y, rows)))
        return cache[key]

    def valid(ctx, assign) -> bool:
        if any(h not in assign for h in ctx.contrib):
            return False
        alt = ctx.alternative(assign)
        rows = list(ctx.rows)
        return leq(ctx, ctx.orig, alt, rows) and not leq(ctx, alt, ctx.orig, rows)

    def search_active():
        nonlocal nodes
        order = sorted(set().union(*(c.contrib for c in active)), key=lambda h: (len(h), h))
        position = {h: k for k, h in enumerate(order)}
        for ctx in active:
            ctx.schedule(position)
        assign: dict = {}

        def partial_ok(k: int) -> bool:
            # rows completed earlier see no change from the step-k assignment
            for ctx in active:
                if k not in ctx.new_rows:
                    continue
                alt = np.zeros_like(ctx.orig)
                for pos, hA in ctx.assigned_at:
                    if pos > k:
                        break
                    alt += ctx.contrib[hA][assign[hA]]
                if not leq(ctx, ctx.orig, alt, ctx.rows_upto[k]):
                    return False
            return True

        def search(k: int) -> bool:
            nonlocal nodes
            if k == len(order):
                return all(not leq(ctx, ctx.alternative(assign), ctx.orig, list(ctx.rows)) for ctx in active)
            hA = order[k]
            for a in candidates[hA]:
                nodes += 1
                if nodes > budget:
                    raise BudgetExceededError(nodes, budget, "policy-level alternative search")
                assign[hA] = a
                if partial_ok(k) and search(k + 1):
                    return True
            assign.pop(hA, None)
            return False

        return dict(assign) if order and search(0) else None

    for ctx in stream:
        seen.append(ctx)
        active.append(ctx)
        if len(active) == INITIAL_ACTIVE:
            break
    while active:
        assign = search_active()
        if assign is None:
            return PolicyLevelVerdict(False, t, None, len(seen), nodes)
        refuter = next((c for c in seen if c not in active and not valid(c, assign)), None)
        if refuter is None:
            for ctx in stream:
                seen.append(ctx)
                if not valid(ctx, assign):
                    refuter = ctx
                    break
        if refuter is None:
            alt = {tuple(map(tuple, game.history_to_ids(ASSISTANT, h))): game.assistant_actions[a]
                   for h, a in assign.items()}
            return PolicyLevelVerdict(True, t, alt, len(seen), nodes)
        active.append(refuter)
    return PolicyLevelVerdict(False, t, None, 0, nodes)


def policy_interferes_policy_level(game: Poag, piA: Policy, t: int | None = None,
                                   budget: int | None = None, *,
                                   human_policies=None) -> PolicyLevelVerdict:
    """Policy-level interference check at step ``t`` (every step when ``None``).

    Steps run over 0..horizon-2: the observation after the final step lies
    outside the episode.  Alternatives are deterministic per assistant history;
    the human side is every deterministic partial policy up to ``t``.

    ``human_policies`` replaces that enumeration with the given policies.  A
    witness must beat the original for each of them, so a clean verdict under
    a subset is also clean for the full set; an interfering one may not be.
    """
    budget = budget_from_env(budget)
    steps = range(game.horizon - 1) if t is None else [t]
    last = PolicyLevelVerdict(False)
    for k in steps:
        if not 0 <= k < game.horizon - 1:
            raise ValueError(f"step {k} has no following observation within the horizon")
        last = _check_step(game, piA, k, budget, human_policies)
        if last.interferes:
            return last
    return last
