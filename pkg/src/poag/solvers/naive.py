"""Naivety checks for human policies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blackwell import flagged_action_indices
from ..errors import UndefinedHistoryError
from ..game import ASSISTANT, HUMAN, Poag, Policy, evaluate_pair
from ..simplex import find_feasible
from ._tree import VALUE_TOL, PolicySet, budget_from_env, check_budget, joint, tree
from .response import respond


@dataclass(frozen=True)
class NaivetyVerdict:
    holds: bool
    history: tuple | None = None  # first offending human history (ids)
    witness: Policy | None = None  # assistant policy, for observes_naively

    def __bool__(self):
        return self.holds


def myopic_support_ok(rewards: np.ndarray, support) -> bool:
    """Is there a belief over assistant actions making every action in ``support`` optimal?

    ``rewards[aH, aA]`` are expected immediate rewards.  Feasibility of
    alpha >= 0, sum(alpha) = 1, (r[a] - r[b]) . alpha >= 0 for a in support, all b.
    """
    support = list(support)
    nH, nA = rewards.shape
    for aA in range(nA):  # pure beliefs settle most cases
        col = rewards[:, aA]
        if all(col[a] >= col.max() - VALUE_TOL for a in support):
            return True
    gaps = [rewards[a] - rewards[b] for a in support for b in range(nH) if b != a]
    m = len(gaps)
    A = np.zeros((m + 1, nA + m))
    A[0, :nA] = 1.0
    for i, g in enumerate(gaps):
        A[i + 1, :nA] = g
        A[i + 1, nA + i] = -1.0
    b = np.zeros(m + 1)
    b[0] = 1.0
    return find_feasible(A, b).feasible


def _transition_inert(game: Poag, sup) -> bool:
    """Human actions leave transitions unchanged on every possible state."""
    T = game.transition
    for s, _ in sup:
        block = T[s]  # [aH, aA, s']
        if np.abs(block - block[:1]).max() > 1e-12:
            return False
    return True


def acts_naively(game: Poag, piH: Policy | PolicySet, piA: Policy | None = None) -> NaivetyVerdict:
    """Does the human play myopically optimal actions wherever her actions are transition-inert?

    Inertness is judged on every state that some assistant policy makes
    possible.  The beliefs that weigh immediate rewards come from filtering
    under ``piA`` (uniform when omitted).  Given a ``PolicySet`` the answer is
    whether some selection from its tie sets acts naively.
    """
    if piA is None:
        piA = Policy.uniform(game, ASSISTANT)
    trH = tree(game, HUMAN)
    existential = isinstance(piH, PolicySet)
    R, tsup, osup = game.reward, game.transition_support, game.obs_support
    nH, nA = game.n_actions(HUMAN), game.n_actions(ASSISTANT)
    last = game.horizon - 1

    def options(h, sup):
        if existential:
            return [(a,) for a in piH.choices[h]]
        d = piH.dist(h)
        return [tuple(int(a) for a in np.flatnonzero(d))]

    def rep(sup, a):
        for cls in trH.classes(sup):
            if a in cls:
                return cls[0]
        return a

    def visit(t, h, sup, W):
        """Returns None when fine, else the offending history."""
        inert = _transition_inert(game, sup)
        rewards = None
        if inert:
            mass = sum(W.values())
            rewards = np.zeros((nH, nA))
            for (s, th, _), w in W.items():
                rewards += w * R[s, :, :, th]
            rewards /= mass
        failure = h
        for acts in options(h, sup):
            if inert and not myopic_support_ok(rewards, acts):
                continue
            if t == last:
                return None
            bad = None
            for a in acts:
                kids: dict = {}
                for (s, th, hA), w in W.items():
                    dA = piA.dist(hA)
                    for b in np.flatnonzero(dA):
                        for s2, pt in tsup[s, a, b]:
                            for oH, oA, po in osup[s2, a, b]:
                                key = (s2, th, hA + ((int(b), oA),))
                                kid = kids.setdefault(oH, {})
                                kid[key] = kid.get(key, 0.0) + w * dA[b] * pt * po
                r = rep(sup, a) if existential else a
                for o in sorted(kids):
                    bad = visit(t + 1, h + ((r, o),), trH.step(sup, r, o), kids[o])
                    if bad is not None:
                        break
                if bad is not None:
                    break
            if bad is None:
                return None
            failure = bad
        return failure

    W0 = {(s, th, ()): p for s, th, p in game.initial_support}
    bad = visit(0, (), trH.root(), W0)
    if bad is None:
        return NaivetyVerdict(True)
    return NaivetyVerdict(False, tuple(map(tuple, game.history_to_ids(HUMAN, bad))))


def observes_naively(game: Poag, piH: Policy, budget: int | None = None) -> NaivetyVerdict:
    """Is ``piH`` a best response to some deterministic non-interfering assistant policy?"""
    allowed = frozenset(range(game.n_actions(ASSISTANT))) - flagged_action_indices(game)
    trA = tree(game, ASSISTANT)
    check_budget(trA.count(allowed, cap=budget_from_env(budget)), budget_from_env(budget),
                 "non-interfering assistant policies")
    for choice in trA.enumerate(allowed):
        piA = PolicySet(ASSISTANT, game.n_actions(ASSISTANT), choice).canonical("witness")
        try:
            value = evaluate_pair(game, piH, piA)
        except UndefinedHistoryError:
            continue
        if value >= respond(game, HUMAN, piA).value - VALUE_TOL:
            return NaivetyVerdict(True, witness=piA)
    return NaivetyVerdict(False)
