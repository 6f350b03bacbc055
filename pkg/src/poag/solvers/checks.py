"""Random small games and exact checks of the structural results on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blackwell import flagged_action_indices, policy_interferes_action_level
from ..game import ASSISTANT, HUMAN, Poag, ensure_valid, evaluate_pair
from .channels import add_channel, lift_policy
from .naive import acts_naively
from .pairs import optimal_pairs
from .policy_level import policy_interferes_policy_level
from .response import respond

TOL = 1e-9


def random_game(rng: np.random.Generator, *, max_states: int = 4, max_actions: int = 3,
                max_obs: int = 2, max_horizon: int = 2, assistant_sees_less: bool = False,
                name: str = "random") -> Poag:
    """A small random game; some assistant actions copy another's effect but blur the human's view.

    With ``assistant_sees_less`` the assistant's observation is a function of
    the human's, so the assistant has no private information.
    """
    S = int(rng.integers(2, max_states + 1))
    AH = int(rng.integers(2, max_actions + 1))
    AA = int(rng.integers(2, max_actions + 1))
    OH = int(rng.integers(1, max_obs + 1)) if not assistant_sees_less else max_obs
    OA = int(rng.integers(1, max_obs + 1))
    horizon = int(rng.integers(1, max_horizon + 1))
    nth = int(rng.integers(1, 3))

    def sparse_dist(size, n):
        out = rng.dirichlet(np.full(n, 0.5), size=size)
        out[out < 0.1] = 0.0
        return out / out.sum(axis=-1, keepdims=True)

    T = sparse_dist((S, AH, AA), S)
    R = np.round(rng.normal(size=(S, AH, AA, nth)), 2)
    OHk = sparse_dist((S, AH, AA), OH)
    # blurred copies: same effect as action 0, human view merged into one outcome
    for a in range(1, AA):
        if rng.random() < 0.4:
            T[:, :, a] = T[:, :, 0]
            R[:, :, a] = R[:, :, 0]
            OHk[:, :, a] = 0.0
            OHk[:, :, a, int(rng.integers(OH))] = 1.0
    if assistant_sees_less:
        f = rng.integers(OA, size=OH)
        O = np.zeros((S, AH, AA, OH, OA))
        for oh in range(OH):
            O[..., oh, f[oh]] = OHk[..., oh]
    else:
        OAk = sparse_dist((S, AH, AA), OA)
        O = OHk[..., :, None] * OAk[..., None, :]
    P0 = rng.dirichlet(np.ones(S * nth)).reshape(S, nth)
    game = Poag(tuple(f"s{i}" for i in range(S)), tuple(f"h{i}" for i in range(AH)),
                tuple(f"a{i}" for i in range(AA)), tuple(f"t{i}" for i in range(nth)),
                tuple(f"oh{i}" for i in range(OH)), tuple(f"oa{i}" for i in range(OA)),
                T, R, O, P0, gamma=float(rng.choice([1.0, 0.9])), horizon=horizon, name=name)
    return ensure_valid(game)


def _non_flagged(game: Poag) -> frozenset:
    return frozenset(range(game.n_actions(ASSISTANT))) - flagged_action_indices(game)


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    detail: str = ""

    def __bool__(self):
        return self.holds


def check_non_interfering_optimum(game: Poag, budget: int | None = None) -> CheckResult:
    """Restricting the assistant to non-flagged actions loses no value."""
    full = optimal_pairs(game, budget).value
    restricted = optimal_pairs(game, budget, assistant_actions=_non_flagged(game)).value
    return CheckResult(restricted >= full - TOL, f"optimum {full:.6g}, non-interfering {restricted:.6g}")


def check_policy_level_clean_optimum(game: Poag, budget: int | None = None) -> CheckResult:
    """Some optimal assistant policy is clean at the policy level at every step."""
    report = optimal_pairs(game, budget)
    for i, pair in enumerate(report.pairs):
        if not policy_interferes_policy_level(game, pair.assistant, budget=budget):
            return CheckResult(True, f"pair {i} of {len(report.pairs)}")
    return CheckResult(False, f"all {len(report.pairs)} optimal families interfere")


def check_channel_removes_interference(game: Poag, budget: int | None = None) -> CheckResult:
    return check_non_interfering_optimum(add_channel(game, "a2h"), budget)


def check_two_way_channel(game: Poag, budget: int | None = None) -> CheckResult:
    """With channels both ways: an optimal pair with a clean assistant and a naive human."""
    g2 = add_channel(game, "both")
    full = optimal_pairs(g2, budget).value
    report = optimal_pairs(g2, budget, assistant_actions=_non_flagged(g2))
    if report.value < full - TOL:
        return CheckResult(False, f"non-interfering optimum {report.value:.6g} < {full:.6g}")
    for i, pair in enumerate(report.pairs):
        if not acts_naively(g2, pair.human_choices, pair.assistant):
            continue
        if not policy_interferes_policy_level(g2, pair.assistant, budget=budget):
            return CheckResult(True, f"pair {i} of {len(report.pairs)}")
    return CheckResult(False, "no optimal family with a naive human and a clean assistant")


def full_information_value(game: Poag) -> float:
    """Value of a single planner who sees state and theta: an upper bound for any pair."""
    V = np.zeros((game.n_states, game.n_thetas))
    for _ in range(game.horizon):
        Q = game.reward + game.gamma * np.einsum("shaz,zt->shat", game.transition, V)
        V = Q.max(axis=(1, 2))
    return float(game.initial.ravel() @ V.ravel())


def certify_channel(game: Poag, direction: str, budget: int | None = None) -> CheckResult:
    """Constructive version of the channel checks for games too large to enumerate.

    Optimal base-game pairs (unrestricted and non-interfering) are lifted into
    the channel game with the sender forwarding its observations; the
    assistant is also re-optimized over non-flagged actions.  A pair that
    reaches the full-information bound is optimal, so it certifies the claim
    if its assistant is clean (action level for "a2h"; policy level against
    the pair's human, plus a naive human, for "both").  Failure to find one
    is reported as a failed check.
    """
    g2 = add_channel(game, direction)
    bound = full_information_value(game)
    allowed = _non_flagged(g2)
    bases = optimal_pairs(game, budget).pairs + optimal_pairs(
        game, budget, assistant_actions=_non_flagged(game)).pairs
    best = -np.inf
    for pair in bases:
        lifted_h = lift_policy(g2, game, pair.human)
        options = (lift_policy(g2, game, pair.assistant),
                   respond(g2, ASSISTANT, lifted_h, allowed).policy.with_fallback())
        for piA in options:
            human = respond(g2, HUMAN, piA)
            piH = human.policy.with_fallback()
            value = evaluate_pair(g2, piH, piA)
            best = max(best, value)
            if value < bound - TOL:
                continue
            if direction == "a2h":
                if not policy_interferes_action_level(g2, piA):
                    return CheckResult(True, f"value {value:.6g} reaches the bound with a clean assistant")
            elif acts_naively(g2, piH, piA) and not policy_interferes_policy_level(
                    g2, piA, budget=budget, human_policies=[piH]):
                return CheckResult(True, f"value {value:.6g} reaches the bound; naive human, clean assistant")
    return CheckResult(False, f"no lifted pair certified (best {best:.6g}, bound {bound:.6g})")
