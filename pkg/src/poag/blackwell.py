"""Informativeness order on observation families and action-level interference."""
from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError
from .game import ASSISTANT, HUMAN, Poag, Policy
from .simplex import find_feasible

EFFECT_TOL = 1e-12


@dataclass(frozen=True)
class ObservationFamily:
    """Per-state distributions over a shared outcome set (rows index states)."""

    states: tuple
    outcomes: tuple
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.states), len(self.outcomes)):
            raise DimensionMismatchError(
                f"probs shape {p.shape} does not match {len(self.states)} states x "
                f"{len(self.outcomes)} outcomes")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_array(cls, probs, states=None, outcomes=None) -> "ObservationFamily":
        p = np.asarray(probs, dtype=float)
        states = tuple(range(p.shape[0])) if states is None else tuple(states)
        outcomes = tuple(range(p.shape[1])) if outcomes is None else tuple(outcomes)
        return cls(states, outcomes, p)

    def garble(self, F) -> "ObservationFamily":
        """Push each row through ``F[out, in]``."""
        F = np.asarray(F, dtype=float)
        return ObservationFamily(self.states, tuple(range(F.shape[0])), self.probs @ F.T)

    def restrict(self, keep) -> "ObservationFamily":
        keep = list(keep)
        return ObservationFamily(tuple(self.states[i] for i in keep), self.outcomes,
                                 self.probs[keep])


@dataclass(frozen=True)
class Comparison:
    holds: bool
    garbling: np.ndarray | None = None  # F[out, in]; columns sum to one

    def __bool__(self):
        return self.holds


def _common_alphabet(phat: ObservationFamily, p: ObservationFamily):
    if len(phat.states) != len(p.states):
        raise DimensionMismatchError(
            f"families cover {len(phat.states)} and {len(p.states)} states")
    if phat.states != p.states and not all(
            isinstance(s, int) for s in phat.states + p.states):
        raise DimensionMismatchError("families are indexed by different states")
    if phat.outcomes == p.outcomes:
        return phat.outcomes, phat.probs, p.probs
    # different alphabets: embed both into their disjoint union
    union = tuple(p.outcomes) + tuple(o for o in phat.outcomes if o not in p.outcomes)
    pos = {o: i for i, o in enumerate(union)}
    P = np.zeros((len(p.states), len(union)))
    Q = np.zeros_like(P)
    P[:, [pos[o] for o in p.outcomes]] = p.probs
    Q[:, [pos[o] for o in phat.outcomes]] = phat.probs
    return union, Q, P


def _deterministic_check(Q, P):
    """Both families are point masses per state: the order is functional dependence."""
    n = P.shape[1]
    src, dst = P.argmax(axis=1), Q.argmax(axis=1)
    f = {}
    for a, b in zip(src, dst):
        if f.setdefault(int(a), int(b)) != b:
            return Comparison(False)
    F = np.eye(n)
    for a, b in f.items():
        F[:, a] = 0.0
        F[b, a] = 1.0
    return Comparison(True, F)


def garbling_lp(Q: np.ndarray, P: np.ndarray, mode: str = "auto") -> Comparison:
    """Find column-stochastic F with ``F @ P[s] == Q[s]`` for every state row s."""
    S, n = P.shape
    if Q.shape != P.shape:
        raise DimensionMismatchError(f"shapes {Q.shape} and {P.shape} differ")
    # identical state rows give identical constraints
    rows = {}
    for s in range(S):
        rows.setdefault((P[s].tobytes(), Q[s].tobytes()), s)
    keep = sorted(rows.values())
    P, Q = P[keep], Q[keep]
    used = np.flatnonzero((P > 0).any(axis=0))
    # F[o_out, o_in] must vanish when some state puts mass on o_in but none on o_out
    allowed = np.ones((n, n), dtype=bool)
    for s in range(P.shape[0]):
        allowed[np.ix_(Q[s] <= 0, P[s] > 0)] = False
    var = [(i, j) for j in used for i in range(n) if allowed[i, j]]
    if any(not allowed[:, j].any() for j in used):
        return Comparison(False)
    col = {v: k for k, v in enumerate(var)}
    A_rows, b = [], []
    for j in used:  # column sums
        r = np.zeros(len(var))
        for i in range(n):
            if (i, j) in col:
                r[col[i, j]] = 1.0
        A_rows.append(r)
        b.append(1.0)
    for s in range(P.shape[0]):
        for i in range(n):
            r = np.zeros(len(var))
            for j in used:
                if (i, j) in col and P[s, j] > 0:
                    r[col[i, j]] = P[s, j]
            if r.any() or Q[s, i] > 0:
                A_rows.append(r)
                b.append(Q[s, i])
    res = find_feasible(np.array(A_rows), np.array(b), mode=mode)
    if not res.feasible:
        return Comparison(False)
    F = np.eye(n)
    F[:, used] = 0.0
    for (i, j), k in col.items():
        F[i, j] = res.x[k]
    F[:, used] /= F[:, used].sum(axis=0, keepdims=True)
    return Comparison(True, F)


def _is_point_mass(M):
    return bool(np.all(np.isclose(M.max(axis=1), 1.0, atol=1e-12)))


def at_most_as_informative(phat: ObservationFamily, p: ObservationFamily,
                           mode: str = "auto") -> Comparison:
    """Is ``phat`` a garbling of ``p``?  Returns the garbling when it is."""
    _, Q, P = _common_alphabet(phat, p)
    if mode != "exact" and _is_point_mass(P) and _is_point_mass(Q):
        return _deterministic_check(Q, P)
    return garbling_lp(Q, P, mode)


def strictly_more_informative(p: ObservationFamily, phat: ObservationFamily,
                              mode: str = "auto") -> bool:
    return bool(at_most_as_informative(phat, p, mode)) and not at_most_as_informative(p, phat, mode)


def expected_posterior_entropy(family: ObservationFamily, prior) -> float:
    """Average entropy (nats) of the state posterior after one draw from ``family``."""
    prior = np.asarray(prior, dtype=float)
    joint = prior[:, None] * family.probs
    total = 0.0
    for col in joint.T:
        mass = col.sum()
        if mass > 0:
            q = col[col > 0] / mass
            total -= mass * float(np.sum(q * np.log(q)))
    return total


# -- action-level interference -------------------------------------------

def human_family(game: Poag, aH: int, aA: int) -> ObservationFamily:
    return ObservationFamily(game.states, game.human_obs, game.human_obs_kernel[:, aH, aA, :])


def same_effect(game: Poag, a: int, b: int) -> bool:
    """Identical transition rows and rewards for every state, human action and theta."""
    return (np.abs(game.transition[:, :, a] - game.transition[:, :, b]).max() <= EFFECT_TOL
            and np.abs(game.reward[:, :, a] - game.reward[:, :, b]).max() <= EFFECT_TOL)


def effect_classes(game: Poag) -> list:
    classes: list = []
    for a in range(len(game.assistant_actions)):
        for cls in classes:
            if same_effect(game, cls[0], a):
                cls.append(a)
                break
        else:
            classes.append([a])
    return classes


_FLAG_CACHE: "weakref.WeakKeyDictionary[Poag, dict]" = weakref.WeakKeyDictionary()


def _flag_table(game: Poag) -> dict:
    """{flagged action index: lowest-index witness}."""
    try:
        return _FLAG_CACHE[game]
    except KeyError:
        pass
    AH = len(game.human_actions)
    leq = {}

    def at_most(x, y, h):  # family of action x at most as informative as action y
        key = (x, y, h)
        if key not in leq:
            leq[key] = bool(at_most_as_informative(human_family(game, h, x), human_family(game, h, y)))
        return leq[key]

    flags = {}
    for cls in effect_classes(game):
        for hat, wit in itertools.permutations(cls, 2):
            if hat in flags:
                continue
            if all(at_most(hat, wit, h) and not at_most(wit, hat, h) for h in range(AH)):
                flags[hat] = wit
    # permutations visit witnesses in index order, so flags[hat] is the lowest witness
    _FLAG_CACHE[game] = flags
    return flags


def interfering_actions(game: Poag) -> set:
    """Set of (flagged action id, witness action id) pairs."""
    acts = game.assistant_actions
    return {(acts[h], acts[w]) for h, w in _flag_table(game).items()}


def flagged_action_indices(game: Poag) -> frozenset:
    return frozenset(_flag_table(game))


@dataclass(frozen=True)
class InterferenceVerdict:
    interferes: bool
    history: tuple | None = None
    action: str | None = None

    def __bool__(self):
        return self.interferes


def _own_histories(game: Poag, piA: Policy):
    from .solvers._tree import tree  # deferred: solvers import this module

    tr = tree(game, ASSISTANT)

    def walk(h, sup):
        yield h
        if len(h) + 1 < game.horizon:
            for a in np.flatnonzero(piA.dist(h)):
                for o in tr.possible_obs(sup, int(a)):
                    yield from walk(h + ((int(a), o),), tr.step(sup, int(a), o))

    return walk((), tr.root())


def policy_interferes_action_level(game: Poag, piA: Policy,
                                   histories: Sequence | None = None) -> InterferenceVerdict:
    """Does ``piA`` put positive probability on a flagged action at any history?

    Table policies are checked on the histories they define; rule-based
    policies on every history whose own actions the policy itself could take.
    """
    flagged = flagged_action_indices(game)
    if not flagged:
        return InterferenceVerdict(False)
    if histories is None:
        histories = piA.defined_histories() if piA.rule is None else _own_histories(game, piA)
    idx = sorted(flagged)
    for h in histories:
        d = piA.dist(h)
        hits = [a for a in idx if d[a] > 0]
        if hits:
            return InterferenceVerdict(True, tuple(game.history_to_ids(ASSISTANT, h)),
                                       game.assistant_actions[hits[0]])
    return InterferenceVerdict(False)


__all__ = [
    "ObservationFamily", "Comparison", "at_most_as_informative", "strictly_more_informative",
    "interfering_actions", "policy_interferes_action_level", "effect_classes", "same_effect",
    "expected_posterior_entropy", "garbling_lp", "HUMAN",
]
