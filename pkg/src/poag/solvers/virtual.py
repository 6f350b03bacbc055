"""Policies with private memory and their history-only equivalents."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..game import HUMAN, Poag, Policy, initial_frontier


@dataclass
class VirtualStatePolicy:
    """pi(action, next virtual state | virtual state, own history).

    ``rule(v, history)`` returns {(action index, next virtual state): p}.
    """

    player: str
    virtual_states: tuple
    initial_virtual_state: object
    rule: Callable

    def dist(self, v, history) -> dict:
        out = self.rule(v, history)
        total = sum(out.values())
        if not np.isclose(total, 1.0, atol=1e-9) or min(out.values(), default=0) < 0:
            raise ValueError(f"rule at ({v!r}, {history!r}) is not a distribution")
        return out


def _memory_posterior(vp: VirtualStatePolicy, history) -> dict:
    """P(current virtual state | own history), or {} if the own actions are impossible."""
    belief = {vp.initial_virtual_state: 1.0}
    for k, (a, _) in enumerate(history):
        prefix = history[:k]
        nxt: dict = {}
        for v, p in belief.items():
            for (act, v2), q in vp.dist(v, prefix).items():
                if act == a and q > 0:
                    nxt[v2] = nxt.get(v2, 0.0) + p * q
        total = sum(nxt.values())
        if total <= 0:
            return {}
        belief = {v: p / total for v, p in nxt.items()}
        # observations carry no information about memory once the action is known
    return belief


def flatten_virtual_policy(game: Poag, vp: VirtualStatePolicy) -> Policy:
    """History policy with the same trajectory law: average the memory out."""
    n = game.n_actions(vp.player)

    def rule(h):
        belief = _memory_posterior(vp, h)
        if not belief:
            return None
        out = np.zeros(n)
        for v, p in belief.items():
            for (a, _), q in vp.dist(v, h).items():
                out[a] += p * q
        return out

    return Policy(vp.player, n, rule=rule, name="flattened")


def trajectory_law(game: Poag, player_policy, other_policy: Policy) -> dict:
    """Exact law of (state, theta, human history, assistant history) paths.

    ``player_policy`` may be a VirtualStatePolicy; then its memory is carried
    in the chain and marginalized at the end.  Keys are full paths.
    """
    virtual = isinstance(player_policy, VirtualStatePolicy)
    vp_player = player_policy.player
    R, tsup, osup = game.reward, game.transition_support, game.obs_support
    layer = {}
    for (s, th, hH, hA), p in initial_frontier(game).items():
        v0 = player_policy.initial_virtual_state if virtual else None
        layer[((s,), th, hH, hA, v0)] = p
    value = 0.0
    for t in range(game.horizon):
        nxt: dict = {}
        for (path, th, hH, hA, v), p in layer.items():
            s = path[-1]
            own = hH if vp_player == HUMAN else hA
            opp = other_policy.dist(hA if vp_player == HUMAN else hH)
            if virtual:
                moves = player_policy.dist(v, own).items()
            else:
                d = player_policy.dist(own)
                moves = (((int(a), None), d[a]) for a in np.flatnonzero(d))
            for (a, v2), q in moves:
                for b in np.flatnonzero(opp):
                    aH, aA = (a, int(b)) if vp_player == HUMAN else (int(b), a)
                    w = p * q * opp[b]
                    value += game.gamma ** t * w * R[s, aH, aA, th]
                    for s2, pt in tsup[s, aH, aA]:
                        for oH, oA, po in osup[s2, aH, aA]:
                            key = (path + (s2,), th, hH + ((aH, oH),), hA + ((aA, oA),), v2)
                            nxt[key] = nxt.get(key, 0.0) + w * pt * po
        layer = nxt
    law: dict = {}
    for (path, th, hH, hA, _), p in layer.items():
        key = (path, th, hH, hA)
        law[key] = law.get(key, 0.0) + p
    return {"law": law, "value": value}
