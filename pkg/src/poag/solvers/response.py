"""Exact responses to a fixed opponent: best responses and Boltzmann-rational ones.

Both run backward induction over the responder's own histories while carrying
unnormalized masses over (state, theta, opponent history).  Dividing by the
history's total mass gives the responder's belief, so masses are enough.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..game import HUMAN, Poag, Policy, other
from ._tree import VALUE_TOL, PolicySet, joint, obs_pair, tree


@dataclass
class BestResponse:
    policy: Policy
    value: float
    choices: PolicySet  # every tied optimal action per reachable history

    def __iter__(self):  # allows `policy, value = best_response(...)`
        yield self.policy
        yield self.value


def _expand(game: Poag, responder: str, fixed: Policy, W: dict, a: int, last: bool):
    """Immediate reward mass and child weights for own action ``a``."""
    R, tsup, osup = game.reward, game.transition_support, game.obs_support
    imm = 0.0
    kids: dict = {}
    for (s, th, hF), w in W.items():
        dF = fixed.dist(hF)
        for b in np.flatnonzero(dF):
            wb = w * dF[b]
            aH, aA = joint(responder, a, int(b))
            imm += wb * R[s, aH, aA, th]
            if last:
                continue
            for s2, pt in tsup[s, aH, aA]:
                for oH, oA, po in osup[s2, aH, aA]:
                    own, opp = obs_pair(responder, oH, oA)
                    child = kids.setdefault(own, {})
                    key = (s2, th, hF + ((int(b), opp),))
                    child[key] = child.get(key, 0.0) + wb * pt * po
    return imm, kids


def _root(game: Poag) -> dict:
    return {(s, th, ()): p for s, th, p in game.initial_support}


def respond(game: Poag, responder: str, fixed: Policy, allowed: frozenset | None = None) -> BestResponse:
    """Best response of ``responder`` to ``fixed`` with full tie sets.

    ``allowed`` restricts the responder's actions.  Actions that behave
    identically on every state the responder considers possible are evaluated
    once; the whole class joins the tie set.
    """
    tr = tree(game, responder)
    gamma, horizon = game.gamma, game.horizon
    choices: dict = {}

    def node(t, h, W):
        mass = sum(W.values())
        sup = frozenset((s, th) for s, th, _ in W)
        last = t == horizon - 1
        scored = []
        for cls in tr.classes(sup, allowed):
            a = cls[0]
            imm, kids = _expand(game, responder, fixed, W, a, last)
            q = imm
            for o in sorted(kids):
                q += gamma * node(t + 1, h + ((a, o),), kids[o])
            scored.append((q, cls))
        best = max(q for q, _ in scored)
        tol = VALUE_TOL * max(mass, 1e-300)
        tied = [a for q, cls in scored if best - q <= tol for a in cls]
        tied.sort(key=lambda a: (a in tr.flagged, a))
        choices[h] = tuple(tied)
        return best

    value = node(0, (), _root(game))
    ps = PolicySet(responder, game.n_actions(responder), choices)
    return BestResponse(ps.canonical(name=f"best response of {responder}"), float(value), ps)


def best_response(game: Poag, fixed: Policy, budget: int | None = None) -> BestResponse:
    """Deterministic best response to ``fixed`` (the responder is the other player).

    Ties go to the first action in declared order, except that the assistant
    prefers actions that are not flagged as interfering.
    """
    from ._tree import budget_from_env, check_budget
    responder = other(fixed.player)
    # the response table has one entry per self-reachable history
    tr = tree(game, responder)
    check_budget(_history_count(tr), budget_from_env(budget), "best response table")
    return respond(game, responder, fixed)


def _history_count(tr) -> int:
    horizon = tr.game.horizon
    memo: dict = {}

    def n(t, sup):
        if (t, sup) in memo:
            return memo[t, sup]
        total = 1
        if t < horizon - 1:
            for a in range(tr.n_own):
                for o in tr.possible_obs(sup, a):
                    total += n(t + 1, tr.step(sup, a, o))
        memo[t, sup] = total
        return total

    return n(0, tr.root())


def boltzmann_response(game: Poag, piA: Policy, beta: float, *, player: str = HUMAN,
                       with_values: bool = False):
    """Soft best response: pi(a | h) proportional to exp(beta * Q(h, a)).

    Q is the expected reward-to-go from the current step given the history,
    with continuation under the soft policy itself.  ``beta=inf`` gives the
    uniform distribution over maximizers.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if piA.player == player:
        raise ValueError("the fixed policy must belong to the other player")
    n = game.n_actions(player)
    gamma, horizon = game.gamma, game.horizon
    table: dict = {}
    qtable: dict = {}

    def node(t, h, W):
        mass = sum(W.values())
        last = t == horizon - 1
        q_un = np.zeros(n)
        for a in range(n):
            imm, kids = _expand(game, player, piA, W, a, last)
            q_un[a] = imm + gamma * sum(node(t + 1, h + ((a, o),), kids[o]) for o in sorted(kids))
        q = q_un / mass
        if math.isinf(beta):
            pol = (q >= q.max() - VALUE_TOL).astype(float)
        else:
            pol = np.exp(beta * (q - q.max()))
        pol /= pol.sum()
        table[h] = pol
        qtable[h] = q
        return float(pol @ q_un)

    node(0, (), _root(game))
    policy = Policy(player, n, table, name=f"boltzmann(beta={beta})")
    return (policy, qtable) if with_values else policy
