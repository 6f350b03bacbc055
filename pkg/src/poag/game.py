"""Finite two-player assistance games: data model, validation, evaluation, sampling.

Everything is stored by index.  The id tuples (``states``, ``human_actions``,
...) translate between indices and the string ids used in game files.

Array layout::

    transition[s, aH, aA, s']          next-state distribution
    reward[s, aH, aA, theta]           immediate reward
    obs_kernel[s', aH, aA, oH, oA]     joint observation distribution
    initial[s, theta]                  distribution over start state and theta

A player's history is a tuple of ``(action, observation)`` index pairs: the
action taken at step i and the observation received on arriving at step i+1.
At step t a history therefore has length t.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .errors import GameValidationError, UndefinedHistoryError

HUMAN = "H"
ASSISTANT = "A"
PLAYERS = (HUMAN, ASSISTANT)

PROB_TOL = 1e-9

History = tuple  # tuple[tuple[int, int], ...]


def other(player: str) -> str:
    return ASSISTANT if player == HUMAN else HUMAN


def _check_player(player: str) -> str:
    if player not in PLAYERS:
        raise ValueError(f"player must be 'H' or 'A', got {player!r}")
    return player


@dataclass(frozen=True, eq=False)
class Poag:
    states: tuple
    human_actions: tuple
    assistant_actions: tuple
    thetas: tuple
    human_obs: tuple
    assistant_obs: tuple
    transition: np.ndarray
    reward: np.ndarray
    obs_kernel: np.ndarray
    initial: np.ndarray
    gamma: float = 1.0
    horizon: int = 1
    name: str = ""
    # (kind, label) rows absent from the source file; reported by validate()
    missing: tuple = field(default=())

    # -- shape helpers -------------------------------------------------
    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_thetas(self) -> int:
        return len(self.thetas)

    def actions(self, player: str) -> tuple:
        return self.human_actions if _check_player(player) == HUMAN else self.assistant_actions

    def observations(self, player: str) -> tuple:
        return self.human_obs if _check_player(player) == HUMAN else self.assistant_obs

    def n_actions(self, player: str) -> int:
        return len(self.actions(player))

    def n_obs(self, player: str) -> int:
        return len(self.observations(player))

    @cached_property
    def human_obs_kernel(self) -> np.ndarray:
        """O^H[s', aH, aA, oH]."""
        return self.obs_kernel.sum(axis=4)

    @cached_property
    def assistant_obs_kernel(self) -> np.ndarray:
        """O^A[s', aH, aA, oA]."""
        return self.obs_kernel.sum(axis=3)

    def player_obs_kernel(self, player: str) -> np.ndarray:
        return self.human_obs_kernel if player == HUMAN else self.assistant_obs_kernel

    @cached_property
    def _index(self) -> dict:
        return {
            "states": {s: i for i, s in enumerate(self.states)},
            "H": {a: i for i, a in enumerate(self.human_actions)},
            "A": {a: i for i, a in enumerate(self.assistant_actions)},
            "thetas": {t: i for i, t in enumerate(self.thetas)},
            "oH": {o: i for i, o in enumerate(self.human_obs)},
            "oA": {o: i for i, o in enumerate(self.assistant_obs)},
        }

    def state_index(self, s) -> int:
        return s if isinstance(s, (int, np.integer)) else self._index["states"][s]

    def action_index(self, player: str, a) -> int:
        return a if isinstance(a, (int, np.integer)) else self._index[player][a]

    def obs_index(self, player: str, o) -> int:
        if isinstance(o, (int, np.integer)):
            return o
        return self._index["oH" if player == HUMAN else "oA"][o]

    def history_from_ids(self, player: str, pairs: Iterable) -> History:
        return tuple((self.action_index(player, a), self.obs_index(player, o)) for a, o in pairs)

    def history_to_ids(self, player: str, history: History) -> list:
        acts, obs = self.actions(player), self.observations(player)
        return [[acts[a], obs[o]] for a, o in history]

    # -- sparse views used by the forward passes ------------------------
    @cached_property
    def transition_support(self) -> dict:
        out = {}
        S, AH, AA, _ = self.transition.shape
        for s, h, a in itertools.product(range(S), range(AH), range(AA)):
            row = self.transition[s, h, a]
            nz = np.flatnonzero(row > 0)
            out[s, h, a] = tuple((int(j), float(row[j])) for j in nz)
        return out

    @cached_property
    def obs_support(self) -> dict:
        out = {}
        S, AH, AA, OH, OA = self.obs_kernel.shape
        for s, h, a in itertools.product(range(S), range(AH), range(AA)):
            block = self.obs_kernel[s, h, a]
            nz = np.argwhere(block > 0)
            out[s, h, a] = tuple((int(i), int(j), float(block[i, j])) for i, j in nz)
        return out

    @cached_property
    def initial_support(self) -> tuple:
        nz = np.argwhere(self.initial > 0)
        return tuple((int(s), int(th), float(self.initial[s, th])) for s, th in nz)

    # -- construction ----------------------------------------------------
    @classmethod
    def from_functions(cls, *, states, human_actions, assistant_actions, thetas,
                       human_obs, assistant_obs, transition: Callable, reward: Callable,
                       observe: Callable, initial: Mapping, gamma=1.0, horizon=1,
                       name="") -> "Poag":
        """Build a game from callables returning id-keyed mappings.

        ``transition(s, aH, aA) -> {s': p}``, ``reward(s, aH, aA, theta) -> float``,
        ``observe(s', aH, aA) -> {(oH, oA): p}``, ``initial = {(s, theta): p}``.
        """
        states, thetas = tuple(states), tuple(thetas)
        ah, aa = tuple(human_actions), tuple(assistant_actions)
        oh, oa = tuple(human_obs), tuple(assistant_obs)
        si = {s: i for i, s in enumerate(states)}
        ohi = {o: i for i, o in enumerate(oh)}
        oai = {o: i for i, o in enumerate(oa)}
        ti = {t: i for i, t in enumerate(thetas)}
        S, AH, AA, TH = len(states), len(ah), len(aa), len(thetas)
        T = np.zeros((S, AH, AA, S))
        R = np.zeros((S, AH, AA, TH))
        O = np.zeros((S, AH, AA, len(oh), len(oa)))
        for (i, s), (j, h), (k, a) in itertools.product(enumerate(states), enumerate(ah), enumerate(aa)):
            for s2, p in transition(s, h, a).items():
                T[i, j, k, si[s2]] += p
            for t, th in enumerate(thetas):
                R[i, j, k, t] = reward(s, h, a, th)
            for (o1, o2), p in observe(s, h, a).items():
                O[i, j, k, ohi[o1], oai[o2]] += p
        P0 = np.zeros((S, TH))
        for (s, th), p in initial.items():
            P0[si[s], ti[th]] += p
        return cls(states, ah, aa, thetas, oh, oa, T, R, O, P0, float(gamma), int(horizon), name)

    @classmethod
    def from_dict(cls, spec: Mapping) -> "Poag":
        required = ("states", "human_actions", "assistant_actions", "thetas", "transition",
                    "reward", "human_obs", "assistant_obs", "obs_kernel", "initial",
                    "gamma", "horizon")
        absent = [k for k in required if k not in spec]
        if absent:
            raise GameValidationError([f"missing top-level key {k!r}" for k in absent])
        states = tuple(map(str, spec["states"]))
        ah = tuple(map(str, spec["human_actions"]))
        aa = tuple(map(str, spec["assistant_actions"]))
        thetas = tuple(map(str, spec["thetas"]))
        oh = tuple(map(str, spec["human_obs"]))
        oa = tuple(map(str, spec["assistant_obs"]))
        S, AH, AA, TH = len(states), len(ah), len(aa), len(thetas)
        idx = lambda seq: {v: i for i, v in enumerate(seq)}
        si, hi, ai, ti, ohi, oai = map(idx, (states, ah, aa, thetas, oh, oa))
        problems, missing = [], []

        def lookup(table, name, i, key):
            try:
                return table[key]
            except KeyError:
                problems.append(f"{name}: unknown id {key!r}")
                return None

        T = np.zeros((S, AH, AA, S))
        R = np.zeros((S, AH, AA, TH))
        O = np.zeros((S, AH, AA, len(oh), len(oa)))
        for s, h, a in itertools.product(states, ah, aa):
            row = spec["transition"].get(s, {}).get(h, {}).get(a)
            if row is None:
                missing.append(("transition", f"({s}, {h}, {a})"))
            else:
                for s2, p in row.items():
                    j = lookup(si, "transition", 0, s2)
                    if j is not None:
                        T[si[s], hi[h], ai[a], j] += float(p)
            rew = spec["reward"].get(s, {}).get(h, {}).get(a, {})
            if isinstance(rew, (int, float)):
                R[si[s], hi[h], ai[a], :] = float(rew)
            else:
                for th, r in rew.items():
                    j = lookup(ti, "reward", 0, th)
                    if j is not None:
                        R[si[s], hi[h], ai[a], j] = float(r)
            block = spec["obs_kernel"].get(s, {}).get(h, {}).get(a)
            if block is None:
                missing.append(("obs_kernel", f"({s}, {h}, {a})"))
            else:
                for o1, inner in block.items():
                    for o2, p in inner.items():
                        j1 = lookup(ohi, "obs_kernel", 0, o1)
                        j2 = lookup(oai, "obs_kernel", 0, o2)
                        if j1 is not None and j2 is not None:
                            O[si[s], hi[h], ai[a], j1, j2] += float(p)
        P0 = np.zeros((S, TH))
        for s, inner in spec["initial"].items():
            for th, p in inner.items():
                i, j = lookup(si, "initial", 0, s), lookup(ti, "initial", 0, th)
                if i is not None and j is not None:
                    P0[i, j] += float(p)
        if problems:
            raise GameValidationError(problems)
        return cls(states, ah, aa, thetas, oh, oa, T, R, O, P0, float(spec["gamma"]),
                   int(spec["horizon"]), str(spec.get("name", "")), tuple(missing))

    def to_dict(self) -> dict:
        def dist(vec, ids):
            return {ids[i]: float(vec[i]) for i in np.flatnonzero(vec)}

        trans, rew, obs = {}, {}, {}
        for (i, s), (j, h), (k, a) in itertools.product(
                enumerate(self.states), enumerate(self.human_actions), enumerate(self.assistant_actions)):
            trans.setdefault(s, {}).setdefault(h, {})[a] = dist(self.transition[i, j, k], self.states)
            rew.setdefault(s, {}).setdefault(h, {})[a] = {
                th: float(self.reward[i, j, k, t]) for t, th in enumerate(self.thetas)}
            block = self.obs_kernel[i, j, k]
            obs.setdefault(s, {}).setdefault(h, {})[a] = {
                self.human_obs[r]: dist(block[r], self.assistant_obs)
                for r in range(block.shape[0]) if block[r].any()}
        init = {}
        for i, t in zip(*np.nonzero(self.initial)):
            init.setdefault(self.states[i], {})[self.thetas[t]] = float(self.initial[i, t])
        return {
            "name": self.name,
            "states": list(self.states),
            "human_actions": list(self.human_actions),
            "assistant_actions": list(self.assistant_actions),
            "thetas": list(self.thetas),
            "human_obs": list(self.human_obs),
            "assistant_obs": list(self.assistant_obs),
            "transition": trans,
            "reward": rew,
            "obs_kernel": obs,
            "initial": init,
            "gamma": self.gamma,
            "horizon": self.horizon,
        }

    def relabel_states(self, mapping: Mapping) -> "Poag":
        """Same game with state ids renamed and reordered by their new ids."""
        new_ids = [mapping[s] for s in self.states]
        order = np.argsort(new_ids, kind="stable")
        T = self.transition[order][..., order]
        return Poag(tuple(new_ids[i] for i in order), self.human_actions, self.assistant_actions,
                    self.thetas, self.human_obs, self.assistant_obs, T, self.reward[order],
                    self.obs_kernel[order], self.initial[order], self.gamma, self.horizon,
                    self.name)

    def with_gamma(self, gamma: float) -> "Poag":
        return Poag(self.states, self.human_actions, self.assistant_actions, self.thetas,
                    self.human_obs, self.assistant_obs, self.transition, self.reward,
                    self.obs_kernel, self.initial, float(gamma), self.horizon, self.name)


def load_game(path) -> Poag:
    """Read a game file; raises GameValidationError unless every row is a distribution."""
    with open(path) as fh:
        return ensure_valid(Poag.from_dict(json.load(fh)))


def save_game(game: Poag, path) -> None:
    Path(path).write_text(json.dumps(game.to_dict(), indent=1, sort_keys=False))


def validate(game: Poag) -> list:
    """Return a list of human-readable violations; empty iff the game is well formed."""
    out = [f"{kind} entry {label} is missing (totality)" for kind, label in game.missing]
    missing_rows = set(game.missing)

    def check(name, vec, label):
        if (vec < -PROB_TOL).any():
            out.append(f"{name} {label} has negative mass")
        total = float(vec.sum())
        if abs(total - 1.0) > PROB_TOL and (name, label) not in missing_rows:
            out.append(f"{name} {label} sums to {total:.12g}, not 1")

    for (i, s), (j, h), (k, a) in itertools.product(
            enumerate(game.states), enumerate(game.human_actions), enumerate(game.assistant_actions)):
        label = f"({s}, {h}, {a})"
        check("transition", game.transition[i, j, k], label)
        check("obs_kernel", game.obs_kernel[i, j, k].ravel(), label)
    check("initial", game.initial.ravel(), "distribution")
    if not np.isfinite(game.reward).all():
        out.append("reward has non-finite entries")
    if not 0.0 <= game.gamma <= 1.0:
        out.append(f"gamma {game.gamma} outside [0, 1]")
    if game.horizon < 1:
        out.append(f"horizon {game.horizon} must be >= 1")
    return out


def ensure_valid(game: Poag) -> Poag:
    problems = validate(game)
    if problems:
        raise GameValidationError(problems)
    return game


# -- policies -----------------------------------------------------------

class Policy:
    """A history-conditioned action rule for one player.

    ``table`` maps histories to probability vectors over the player's actions.
    ``rule`` (optional) is consulted for histories missing from the table; it
    may return an action index or a probability vector.
    """

    def __init__(self, player: str, n_actions: int, table: Mapping | None = None,
                 rule: Callable | None = None, name: str = ""):
        self.player = _check_player(player)
        self.n_actions = int(n_actions)
        self.table = {}
        self.rule = rule
        self.name = name
        for h, d in (table or {}).items():
            self.table[tuple(h)] = self._as_dist(d)

    def _as_dist(self, d) -> np.ndarray:
        if isinstance(d, (int, np.integer)):
            v = np.zeros(self.n_actions)
            v[int(d)] = 1.0
            return v
        v = np.asarray(d, dtype=float)
        if v.shape != (self.n_actions,):
            raise ValueError(f"distribution has shape {v.shape}, expected ({self.n_actions},)")
        return v

    def dist(self, history: History) -> np.ndarray:
        try:
            return self.table[history]
        except KeyError:
            pass
        if self.rule is None:
            raise UndefinedHistoryError(self.player, history)
        d = self.rule(history)
        if d is None:
            raise UndefinedHistoryError(self.player, history)
        v = self._as_dist(d)
        self.table[history] = v
        return v

    def action(self, history: History) -> int:
        """Most likely action, lowest index on ties."""
        return int(np.argmax(self.dist(history)))

    def defined_histories(self) -> list:
        return sorted(self.table, key=lambda h: (len(h), h))

    @property
    def deterministic(self) -> bool:
        return all(np.isclose(d.max(), 1.0) for d in self.table.values())

    # convenience constructors
    @classmethod
    def constant(cls, game: Poag, player: str, action) -> "Policy":
        a = game.action_index(player, action)
        return cls(player, game.n_actions(player), rule=lambda h: a,
                   name=f"always {game.actions(player)[a]}")

    @classmethod
    def uniform(cls, game: Poag, player: str) -> "Policy":
        n = game.n_actions(player)
        return cls(player, n, rule=lambda h: np.full(n, 1.0 / n), name="uniform")

    @classmethod
    def from_rule(cls, game: Poag, player: str, rule: Callable, name: str = "") -> "Policy":
        """``rule(history_of_ids) -> action id | {action id: p}``."""
        acts = game.actions(player)

        def wrapped(h):
            out = rule(game.history_to_ids(player, h))
            if isinstance(out, Mapping):
                v = np.zeros(len(acts))
                for a, p in out.items():
                    v[game.action_index(player, a)] += p
                return v
            return game.action_index(player, out)

        return cls(player, len(acts), rule=wrapped, name=name)

    def with_fallback(self, action: int = 0) -> "Policy":
        """Copy that plays ``action`` wherever this policy is undefined."""
        base = self

        def rule(h):
            try:
                return base.dist(h)
            except UndefinedHistoryError:
                return action

        return Policy(self.player, self.n_actions, rule=rule, name=self.name)

    def materialize(self, game: Poag) -> "Policy":
        """Copy with an explicit table over every history up to the horizon."""
        table = {h: self.dist(h) for h in enumerate_histories(game, self.player)}
        return Policy(self.player, self.n_actions, table, name=self.name)

    def to_dict(self, game: Poag) -> dict:
        acts = game.actions(self.player)
        rules = []
        for h in self.defined_histories():
            d = self.table[h]
            rules.append({"history": game.history_to_ids(self.player, h),
                          "dist": {acts[i]: float(d[i]) for i in np.flatnonzero(d)}})
        return {"player": self.player, "name": self.name, "rules": rules}

    @classmethod
    def from_dict(cls, game: Poag, spec: Mapping) -> "Policy":
        player = spec.get("player", ASSISTANT)
        n = game.n_actions(player)
        if "constant" in spec:
            return cls.constant(game, player, spec["constant"])
        table = {}
        for entry in spec.get("rules", []):
            h = game.history_from_ids(player, entry["history"])
            v = np.zeros(n)
            for a, p in entry["dist"].items():
                v[game.action_index(player, a)] += float(p)
            table[h] = v
        rule = None
        if "default" in spec:
            d = game.action_index(player, spec["default"])
            rule = lambda h: d
        return cls(player, n, table, rule, spec.get("name", ""))

    def __repr__(self):
        return f"Policy({self.player}, {self.name or len(self.table)})"


def load_policy(game: Poag, path) -> Policy:
    with open(path) as fh:
        return Policy.from_dict(game, json.load(fh))


def enumerate_histories(game: Poag, player: str, max_len: int | None = None) -> Iterator:
    """Every history (reachable or not) of length < horizon, shortest first."""
    steps = list(itertools.product(range(game.n_actions(player)), range(game.n_obs(player))))
    top = game.horizon - 1 if max_len is None else max_len
    for t in range(top + 1):
        yield from itertools.product(steps, repeat=t)


# -- exact evaluation -----------------------------------------------------

def forward_step(game: Poag, frontier: Mapping, piH: Policy, piA: Policy, t: int):
    """Advance a {(s, theta, hH, hA): prob} frontier by one step.

    Returns (expected reward at step t, next frontier).
    """
    R = game.reward
    tsup, osup = game.transition_support, game.obs_support
    value = 0.0
    nxt: dict = {}
    last = t == game.horizon - 1
    for (s, th, hH, hA), p in frontier.items():
        dH, dA = piH.dist(hH), piA.dist(hA)
        for aH in np.flatnonzero(dH):
            wH = p * dH[aH]
            for aA in np.flatnonzero(dA):
                w = wH * dA[aA]
                value += w * R[s, aH, aA, th]
                if last:
                    continue
                for s2, pt in tsup[s, aH, aA]:
                    for oH, oA, po in osup[s2, aH, aA]:
                        key = (s2, th, hH + ((int(aH), oH),), hA + ((int(aA), oA),))
                        nxt[key] = nxt.get(key, 0.0) + w * pt * po
    return value, nxt


def initial_frontier(game: Poag) -> dict:
    return {(s, th, (), ()): p for s, th, p in game.initial_support}


def evaluate_pair(game: Poag, piH: Policy, piA: Policy) -> float:
    """Exact expected discounted return over the horizon."""
    frontier = initial_frontier(game)
    total, disc = 0.0, 1.0
    for t in range(game.horizon):
        v, frontier = forward_step(game, frontier, piH, piA, t)
        total += disc * v
        disc *= game.gamma
        if not frontier:
            break
    return total


def step_rewards(game: Poag, piH: Policy, piA: Policy) -> list:
    """Undiscounted expected reward at each step."""
    frontier = initial_frontier(game)
    out = []
    for t in range(game.horizon):
        v, frontier = forward_step(game, frontier, piH, piA, t)
        out.append(v)
    return out


# -- sampling -------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    state: str
    human_action: str
    assistant_action: str
    human_obs: str | None
    assistant_obs: str | None
    reward: float


@dataclass(frozen=True)
class Trajectory:
    theta: str
    steps: tuple
    gamma: float = 1.0

    @property
    def discounted_return(self) -> float:
        return sum(self.gamma ** t * st.reward for t, st in enumerate(self.steps))


def sample_trajectory(game: Poag, piH: Policy, piA: Policy, seed: int) -> Trajectory:
    rng = np.random.default_rng(seed)
    flat = game.initial.ravel()
    s, th = divmod(int(rng.choice(flat.size, p=flat / flat.sum())), game.n_thetas)
    hH, hA = (), ()
    steps = []
    for t in range(game.horizon):
        dH, dA = piH.dist(hH), piA.dist(hA)
        aH = int(rng.choice(dH.size, p=dH / dH.sum()))
        aA = int(rng.choice(dA.size, p=dA / dA.sum()))
        r = float(game.reward[s, aH, aA, th])
        row = game.transition[s, aH, aA]
        s2 = int(rng.choice(row.size, p=row / row.sum()))
        block = game.obs_kernel[s2, aH, aA].ravel()
        oH, oA = divmod(int(rng.choice(block.size, p=block / block.sum())), game.n_obs(ASSISTANT))
        steps.append(Step(game.states[s], game.human_actions[aH], game.assistant_actions[aA],
                          game.human_obs[oH], game.assistant_obs[oA], r))
        hH += ((aH, oH),)
        hA += ((aA, oA),)
        s = s2
    return Trajectory(game.thetas[th], tuple(steps), game.gamma)


# -- observation structure ------------------------------------------------

def marginal_obs(game: Poag, player: str, s_next, aH, aA) -> dict:
    s = game.state_index(s_next)
    h, a = game.action_index(HUMAN, aH), game.action_index(ASSISTANT, aA)
    vec = game.player_obs_kernel(player)[s, h, a]
    ids = game.observations(player)
    return {ids[i]: float(vec[i]) for i in np.flatnonzero(vec > 0)}


@dataclass(frozen=True)
class PrivateInfoReport:
    no_private_info: bool
    mapping: dict | None = None  # other player's obs id -> this player's obs id
    conflict: tuple | None = None  # ((o_other, o_self_1), (o_other, o_self_2))

    def __bool__(self):
        return self.no_private_info


def has_no_private_info(game: Poag, player: str = ASSISTANT) -> PrivateInfoReport:
    """Is ``player``'s observation a function of the other player's, on every kernel support?"""
    _check_player(player)
    f: dict = {}
    support = np.argwhere(game.obs_kernel > 0)
    for _, _, _, oH, oA in support:
        src, dst = (oH, oA) if player == ASSISTANT else (oA, oH)
        prev = f.setdefault(int(src), int(dst))
        if prev != dst:
            so, do = game.observations(other(player)), game.observations(player)
            return PrivateInfoReport(False, None, ((so[src], do[prev]), (so[src], do[dst])))
    so, do = game.observations(other(player)), game.observations(player)
    return PrivateInfoReport(True, {so[k]: do[v] for k, v in sorted(f.items())})
