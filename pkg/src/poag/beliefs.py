"""Human belief formation: fold the assistant into the environment and Bayes-filter.

With the assistant's policy fixed, the human faces a single-agent POMDP whose
hidden state carries the whole state history, the assistant's observation and
action histories, and theta.  Filtering that POMDP gives calibrated beliefs
whether or not the assistant interferes with her observations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ZeroProbabilityHistoryError
from .game import ASSISTANT, HUMAN, Poag, Policy


@dataclass(frozen=True)
class AugmentedState:
    state_history: tuple
    assistant_obs_history: tuple
    assistant_action_history: tuple
    theta: str

    @property
    def state(self) -> str:
        return self.state_history[-1]

    @property
    def last_assistant_action(self):
        return self.assistant_action_history[-1] if self.assistant_action_history else None


@dataclass(frozen=True)
class Belief:
    support: tuple  # ((AugmentedState, probability), ...)

    def state_marginal(self) -> dict:
        out: dict = {}
        for aug, p in self.support:
            out[aug.state] = out.get(aug.state, 0.0) + float(p)
        return out

    def theta_marginal(self) -> dict:
        out: dict = {}
        for aug, p in self.support:
            out[aug.theta] = out.get(aug.theta, 0.0) + p
        return out

    def entropy(self) -> float:
        return posterior_entropy(self.state_marginal())


def posterior_entropy(dist) -> float:
    """Shannon entropy in nats of a mapping or sequence of probabilities."""
    vals = dist.values() if isinstance(dist, Mapping) else dist
    return -sum(p * math.log(p) for p in vals if p > 0)


# internal particle: (state index history, theta, assistant history of (aA, oA) pairs)
_Key = tuple


class EmbeddedPomdp:
    """Single-agent POMDP seen by the human once the assistant's policy is fixed."""

    def __init__(self, game: Poag, piA: Policy):
        self.game = game
        self.piA = piA

    def initial(self) -> dict:
        return {((s,), th, ()): p for s, th, p in self.game.initial_support}

    def step(self, key: _Key, aH: int) -> list:
        """[(next key, human observation, probability)] for human action ``aH``.

        The probability factors as piA(aA | hA) T(s' | s, aH, aA) O(oH, oA | s', aH, aA).
        """
        game = self.game
        states, th, hA = key
        s = states[-1]
        dA = self.piA.dist(hA)
        out = []
        for aA in np.flatnonzero(dA):
            for s2, pt in game.transition_support[s, aH, aA]:
                for oH, oA, po in game.obs_support[s2, aH, aA]:
                    out.append(((states + (s2,), th, hA + ((int(aA), oA),)), oH,
                                dA[aA] * pt * po))
        return out

    def propagate(self, weights: Mapping, aH: int, oH: int) -> dict:
        nxt: dict = {}
        for key, w in weights.items():
            for key2, o, p in self.step(key, aH):
                if o == oH:
                    nxt[key2] = nxt.get(key2, 0.0) + w * p
        return nxt

    def reachable(self, t: int) -> set:
        """Augmented states with positive probability after t steps, any human actions."""
        layer = set(self.initial())
        for _ in range(t):
            layer = {k2 for k in layer for aH in range(len(self.game.human_actions))
                     for k2, _, p in self.step(k, aH) if p > 0}
        return layer

    def to_augmented(self, key: _Key) -> AugmentedState:
        g = self.game
        states, th, hA = key
        return AugmentedState(tuple(g.states[s] for s in states),
                              tuple(g.assistant_obs[o] for _, o in hA),
                              tuple(g.assistant_actions[a] for a, _ in hA),
                              g.thetas[th])


def embed_pomdp(game: Poag, piA: Policy) -> EmbeddedPomdp:
    return EmbeddedPomdp(game, piA)


def _as_history(game: Poag, history) -> tuple:
    h = tuple(history)
    if h and not isinstance(h[0][0], (int, np.integer)):
        return game.history_from_ids(HUMAN, h)
    return tuple((int(a), int(o)) for a, o in h)


def _unnormalized(game: Poag, piA: Policy, history) -> dict:
    pomdp = EmbeddedPomdp(game, piA)
    weights = pomdp.initial()
    for aH, oH in history:
        weights = pomdp.propagate(weights, aH, oH)
        if not weights:
            break
    return weights


def _to_belief(game: Poag, piA: Policy, weights: Mapping, total: float) -> Belief:
    pomdp = EmbeddedPomdp(game, piA)
    items = sorted(weights.items())
    return Belief(tuple((pomdp.to_augmented(k), float(w / total)) for k, w in items if w > 0))


def filter(game: Poag, piA: Policy, human_history: Iterable) -> Belief:  # noqa: A001
    """Exact posterior over augmented states given the human's own history.

    ``human_history`` holds (action, observation) pairs, as ids or indices.
    """
    h = _as_history(game, human_history)
    weights = _unnormalized(game, piA, h)
    total = sum(weights.values())
    if total <= 0:
        raise ZeroProbabilityHistoryError(
            f"history {game.history_to_ids(HUMAN, h)} has probability zero under {piA!r}")
    return _to_belief(game, piA, weights, total)


def history_likelihood(game: Poag, piA: Policy, human_history: Iterable) -> float:
    """P(observations | human actions) under ``piA``."""
    return float(sum(_unnormalized(game, piA, _as_history(game, human_history)).values()))


@dataclass(frozen=True)
class PolicyPosterior:
    candidates: tuple  # policies, in prior order
    posterior: tuple  # probabilities
    belief: Belief

    def as_dict(self) -> dict:
        return {getattr(c, "name", "") or i: p for i, (c, p) in
                enumerate(zip(self.candidates, self.posterior))}


def filter_with_policy_prior(game: Poag, prior: Sequence, human_history: Iterable) -> PolicyPosterior:
    """Joint posterior over (candidate assistant policy, augmented state).

    ``prior`` is a sequence of (Policy, weight) pairs.
    """
    h = _as_history(game, human_history)
    cands, weights = zip(*prior)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    likes, parts = [], []
    for pol in cands:
        part = _unnormalized(game, pol, h)
        parts.append(part)
        likes.append(sum(part.values()))
    joint = w * np.asarray(likes)
    total = joint.sum()
    if total <= 0:
        raise ZeroProbabilityHistoryError("history is impossible under every candidate policy")
    post = joint / total
    mixed = []
    for k, (pol, part) in enumerate(zip(cands, parts)):
        if joint[k] <= 0:
            continue
        b = _to_belief(game, pol, part, likes[k])
        mixed.extend((aug, p * post[k]) for aug, p in b.support)
    merged: dict = {}
    for aug, p in mixed:
        merged[aug] = merged.get(aug, 0.0) + p
    belief = Belief(tuple(sorted(merged.items(), key=lambda kv: (kv[0].state_history,
                                                                 kv[0].assistant_obs_history,
                                                                 kv[0].assistant_action_history))))
    return PolicyPosterior(tuple(cands), tuple(float(x) for x in post), belief)


UpdateRule = Callable[[Policy, object], Policy]


def update_policy_prior(prior: Sequence, update: UpdateRule, transcript) -> list:
    """Push a prior over assistant policies through a known update rule.

    The update rule is a pure function (policy, iteration transcript) -> policy,
    so the prior over next-iteration policies is the pushforward of the current one.
    """
    return [(update(pol, transcript), w) for pol, w in prior]


def true_state_probability(belief: Belief, state: str) -> float:
    return belief.state_marginal().get(state, 0.0)
