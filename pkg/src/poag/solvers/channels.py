"""Cost-free message channels between the players.

The sender's action becomes (action, message) and the receiver's observation
becomes (observation, message) with the message delivered verbatim on the
next step.  Messages never touch transitions or rewards.  The message set is
the sender's observation set, so any observation can be forwarded.
"""
from __future__ import annotations

import numpy as np

from ..game import Poag, Policy, Step, Trajectory
from ._tree import check_budget

SEP = "@"
DIRECTIONS = {"a2h": (True, False), "h2a": (False, True), "both": (True, True),
              "A->H": (True, False), "H->A": (False, True), "H<->A": (True, True)}


def _pair_ids(base, msgs):
    return tuple(f"{x}{SEP}{m}" for x in base for m in msgs)


MAX_DENSE_ENTRIES = 200_000_000


def channel_size(game: Poag, direction: str = "a2h") -> int:
    """Entries of the channel game's dense observation array."""
    a2h, h2a = DIRECTIONS[direction]
    nA = len(game.assistant_obs) if a2h else 1
    nH = len(game.human_obs) if h2a else 1
    S, AH, AA, OH, OA = game.obs_kernel.shape
    return S * (AH * nH) * (AA * nA) * (OH * nA) * (OA * nH)


def add_channel(game: Poag, direction: str = "a2h") -> Poag:
    try:
        a2h, h2a = DIRECTIONS[direction]
    except KeyError:
        raise ValueError(f"direction must be one of {sorted(DIRECTIONS)}") from None
    check_budget(channel_size(game, direction), MAX_DENSE_ENTRIES, "dense channel-game observation entries")
    clash = [x for x in game.human_actions + game.assistant_actions + game.human_obs + game.assistant_obs
             if SEP in x]
    if clash:
        raise ValueError(f"labels may not contain {SEP!r}: {clash[:3]}")
    ma = game.assistant_obs if a2h else ("",)
    mh = game.human_obs if h2a else ("",)
    nA, nH = len(ma), len(mh)
    T = np.repeat(np.repeat(game.transition, nH, axis=1), nA, axis=2)
    R = np.repeat(np.repeat(game.reward, nH, axis=1), nA, axis=2)
    # O[s', (h, mh), (a, ma), (oh, ma'), (oa, mh')] = [ma = ma'][mh = mh'] O[s', h, a, oh, oa]
    O = np.einsum("shaxy,mn,pq->shpamxnyq", game.obs_kernel, np.eye(nA), np.eye(nH), optimize=True)
    S, AH, AA, OH, OA = game.obs_kernel.shape
    O = O.reshape(S, AH * nH, AA * nA, OH * nA, OA * nH)
    suffix = "+".join(d for d, on in (("a2h", a2h), ("h2a", h2a)) if on)
    return Poag(
        states=game.states,
        human_actions=_pair_ids(game.human_actions, mh) if h2a else game.human_actions,
        assistant_actions=_pair_ids(game.assistant_actions, ma) if a2h else game.assistant_actions,
        thetas=game.thetas,
        human_obs=_pair_ids(game.human_obs, ma) if a2h else game.human_obs,
        assistant_obs=_pair_ids(game.assistant_obs, mh) if h2a else game.assistant_obs,
        transition=T, reward=R, obs_kernel=O, initial=game.initial,
        gamma=game.gamma, horizon=game.horizon, name=f"{game.name}[{suffix}]")


def strip_message(label: str | None) -> str | None:
    return None if label is None else label.split(SEP, 1)[0]


def strip_trajectory(traj: Trajectory) -> Trajectory:
    """Drop every message component, leaving a trajectory of the base game."""
    steps = tuple(Step(st.state, strip_message(st.human_action), strip_message(st.assistant_action),
                       strip_message(st.human_obs), strip_message(st.assistant_obs), st.reward)
                  for st in traj.steps)
    return Trajectory(traj.theta, steps, traj.gamma)


def lift_policy(channel_game: Poag, base_game: Poag, policy: Policy, forward: bool = True) -> Policy:
    """Run a base-game policy in a channel game.

    Messages are stripped from the player's own history before consulting
    ``policy``.  If the player can send, it forwards its latest base
    observation (the first observation label before anything is seen), or
    always sends the first message when ``forward`` is false.  Histories the
    base policy leaves undefined (off its equilibrium path) get the first action.
    """
    player = policy.player
    n_base = len(base_game.actions(player))
    labels = channel_game.actions(player)
    n_sent = len(labels) // n_base  # messages per action (1 if the player cannot send)
    n_recv = len(channel_game.observations(player)) // len(base_game.observations(player))
    fallback = policy.with_fallback(0)

    def rule(h):
        base_h = tuple((a // n_sent, o // n_recv) for a, o in h)
        dist = fallback.dist(base_h)
        if n_sent == 1:
            return dist
        msg = base_h[-1][1] if (forward and base_h) else 0
        out = np.zeros(len(labels))
        out[np.arange(n_base) * n_sent + msg] = dist
        return out

    return Policy(player, len(labels), rule=rule, name=f"{policy.name or 'policy'} with forwarding")
