"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line."""
from __future__ import annotations

import math
import time
from collections import defaultdict

import numpy as np
import pytest

from poag import boltzmann as bz
from poag import examples as ex
from poag.beliefs import filter as belief_filter
from poag.blackwell import flagged_action_indices
from poag.game import ASSISTANT, HUMAN, Policy, evaluate_pair, has_no_private_info, other, sample_trajectory
from poag.product import (INF, ProductGameConfig, assistant_interference, brute_force_interference,
                          run_experiment, trial_draws)
from poag.errors import BudgetExceededError
from poag.solvers import (VirtualStatePolicy, acts_naively, boltzmann_response, certify_channel,
                          check_channel_removes_interference,
                          check_non_interfering_optimum, check_policy_level_clean_optimum,
                          check_two_way_channel, flatten_virtual_policy, optimal_pairs,
                          policy_interferes_policy_level, random_game, trajectory_law)

MAN_EU = 3.86234
TLDR_EU = 3.92806


def report(n: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def test_criterion_1_boltzmann_constants():
    t0 = time.perf_counter()
    man, tldr = bz.man_tldr_problems()
    with_man = bz.eu_with_signal(man, 1.0)
    with_tldr = bz.eu_with_signal(tldr, 1.0)
    elapsed = time.perf_counter() - t0
    ok = abs(with_man - MAN_EU) < 1e-4 and abs(with_tldr - TLDR_EU) < 1e-4 and elapsed < 1
    report(1, ok, f"man {with_man:.6f}, tldr {with_tldr:.6f}, {elapsed:.3f}s")
    assert with_man == pytest.approx(MAN_EU, abs=1e-4)
    assert with_tldr == pytest.approx(TLDR_EU, abs=1e-4)
    assert elapsed < 1


def test_criterion_2_interference_threshold():
    t0 = time.perf_counter()
    man, tldr = bz.man_tldr_problems()
    beta_star = bz.interference_threshold((man, tldr))
    elapsed = time.perf_counter() - t0
    ok = abs(beta_star - 0.77361) < 1e-4 and elapsed < 1
    report(2, ok, f"threshold {beta_star:.6f}, {elapsed:.3f}s")
    assert beta_star == pytest.approx(0.77361, abs=1e-4)
    assert elapsed < 1


def test_criterion_3_game_encoding_matches_closed_form():
    t0 = time.perf_counter()
    game = ex.man_tldr()
    man_p, tldr_p = bz.man_tldr_problems()
    values = {}
    for action, problem in (("man", man_p), ("tldr", tldr_p)):
        piA = Policy.constant(game, ASSISTANT, action)
        piH = boltzmann_response(game, piA, 1.0)
        values[action] = (evaluate_pair(game, piH, piA), bz.eu_with_signal(problem, 1.0))
    elapsed = time.perf_counter() - t0
    ok = all(abs(a - b) <= 1e-9 for a, b in values.values()) and elapsed < 10
    report(3, ok, ", ".join(f"{k} game {a:.12f} vs closed form {b:.12f}" for k, (a, b) in values.items())
           + f", {elapsed:.2f}s")
    for a, b in values.values():
        assert abs(a - b) <= 1e-9
    assert elapsed < 10


def test_criterion_4_product_selection_trends():
    t0 = time.perf_counter()
    d, trials, seed = 5, 30_000, 7
    draws = trial_draws(seed, trials, d)

    def means(p, beta):
        return [run_experiment(ProductGameConfig(d, k, p, beta, trials, seed), draws=draws).mean
                for k in range(5)]

    a, b, c = means(0, INF), means(5, INF), means(2, 0.01)
    elapsed = time.perf_counter() - t0
    a_ok = (all(x > y for x, y in zip(a, a[1:])) and abs(a[0] - 4 / 3) < 0.01
            and abs(a[4] - 1.0) < 0.01)
    best_b = int(np.argmax(b))
    b_ok = best_b in (2, 3) and abs(b[best_b] - 1.4167) < 0.01
    c_ok = int(np.argmax(c)) == 4
    ok = a_ok and b_ok and c_ok and elapsed < 120
    report(4, ok, f"(a) {np.round(a, 4).tolist()} (b) best k={best_b} at {b[best_b]:.4f} "
                  f"(c) {np.round(c, 4).tolist()}, {elapsed:.2f}s")
    assert a_ok and b_ok and c_ok
    assert elapsed < 120


def test_criterion_5_interference_rule_matches_brute_force():
    t0 = time.perf_counter()
    misses = []
    for i in range(100):
        rng = np.random.default_rng([5, i])
        d = int(rng.integers(2, 6))
        k = int(rng.integers(0, d + 1))
        p = int(rng.integers(0, d + 1))
        beta = (INF, 0.3, 1.0, 3.0, 10.0)[int(rng.integers(5))]
        r_obs = {j: float(rng.random()) for j in range(p)}
        chosen = assistant_interference(r_obs, d, k)
        oracle = brute_force_interference(r_obs, d, k, beta, seed=i)
        gap = oracle.payoff - oracle.payoffs[chosen][0]
        if gap > 2 * oracle.gap_stderr(chosen) + 1e-12:
            misses.append((i, d, k, p, beta, gap))
    elapsed = time.perf_counter() - t0
    ok = not misses and elapsed < 300
    report(5, ok, f"{len(misses)} of 100 draws outside 2 SE, {elapsed:.1f}s")
    assert not misses
    assert elapsed < 300


def test_criterion_6_structural_checks_on_random_games():
    t0 = time.perf_counter()
    failures = defaultdict(list)
    counted = defaultdict(int)
    undecided = []
    games = [random_game(np.random.default_rng([7, i]), assistant_sees_less=(i % 2 == 0), name=f"random-{i}")
             for i in range(50)]
    builtins = [ex.revealing_errors(), ex.man_tldr(), ex.cuda_versions(3), ex.node_scheduling()]
    exact_channel = {"a2h": check_channel_removes_interference, "both": check_two_way_channel}
    for g in games + builtins:
        if has_no_private_info(g):
            counted["no-private-info"] += 1
            if not check_non_interfering_optimum(g):
                failures["no-private-info"].append(g.name)
        counted["policy-level"] += 1
        if not check_policy_level_clean_optimum(g):
            failures["policy-level"].append(g.name)
        for direction, check in exact_channel.items():
            label = f"channel {direction}"
            try:
                result = check(g)
            except BudgetExceededError:
                # too large to enumerate: look for a constructive certificate instead
                try:
                    result = certify_channel(g, direction)
                except BudgetExceededError as exc:
                    undecided.append(f"{g.name}/{direction} ({exc.what})")
                    continue
                if not result:
                    undecided.append(f"{g.name}/{direction} ({result.detail})")
                    continue
                label += " (certified)"
            counted[label] += 1
            if not result:
                failures[label].append(g.name)
    elapsed = time.perf_counter() - t0
    n_flagged = sum(bool(flagged_action_indices(g)) for g in games)
    ok = not failures and elapsed < 600
    report(6, ok, f"checks {dict(counted)}, counterexamples {dict(failures) or 0}, "
                  f"{n_flagged} random games with interfering actions, "
                  f"not decidable by enumeration or certificate: {undecided}, {elapsed:.1f}s")
    assert not failures
    assert n_flagged > 0
    assert elapsed < 600


def test_criterion_7_interference_witnesses():
    t0 = time.perf_counter()
    cuda = ex.cuda_versions(3)
    rep = optimal_pairs(cuda)
    all_interfere = all(p.assistant_must_interfere(cuda) for p in rep.pairs)
    clean = sum(not policy_interferes_policy_level(cuda, p.assistant) for p in rep.pairs)

    node = ex.node_scheduling()
    nrep = optimal_pairs(node)
    every_pair = True
    witness = False
    for p in nrep.pairs:
        naive = bool(acts_naively(node, p.human_choices, p.assistant))
        interferes = p.assistant_can_interfere(node)
        every_pair &= (not naive) or interferes
        witness |= naive and interferes
    elapsed = time.perf_counter() - t0
    ok = all_interfere and clean >= 1 and every_pair and witness and elapsed < 300
    report(7, ok, f"cuda3: {len(rep.pairs)} optimal families all interfere={all_interfere}, "
                  f"{clean} policy-level clean; node: disjunction={every_pair}, naive+interfering optimal="
                  f"{witness}, {elapsed:.1f}s")
    assert all_interfere and clean >= 1
    assert every_pair and witness
    assert elapsed < 300


def test_criterion_8_small_and_large_beta_behaviour():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    small = large = deriv = 0
    for _ in range(200):
        prob = bz.random_problem(rng)
        small += bz.eu_with_signal(prob, 1e-4) >= bz.eu_without_signal(prob, 1e-4) - 1e-9
        h = 1e-4
        for which in ("with", "without"):
            # the curves are defined for beta >= 0 only; extend them as the softmax formula does
            fd = (_eu_signed(prob, h, which) - _eu_signed(prob, -h, which)) / (2 * h)
            deriv += abs(fd - bz.derivative_at_zero(prob, which)) <= 1e-6
    tried = large_plain = 0
    while tried < 200:
        prob = bz.random_problem(rng, best_first=True)
        if bz.signal_is_trivial(prob):
            continue
        tried += 1
        # same best action everywhere: eu_without > eu_with iff the shortfall without is smaller;
        # the plain utilities agree to machine precision at this beta, so compare in log space
        large += bz.log_regret(prob, 1e3, "without") < bz.log_regret(prob, 1e3, "with")
        large_plain += bz.eu_without_signal(prob, 1e3) >= bz.eu_with_signal(prob, 1e3) - 1e-12
    elapsed = time.perf_counter() - t0
    ok = small == 200 and large == 200 and large_plain == 200 and deriv == 400 and elapsed < 60
    report(8, ok, f"small-beta {small}/200, large-beta {large}/200 (plain utilities never reversed beyond 1e-12: "
                  f"{large_plain}/200), derivative {deriv}/400, {elapsed:.2f}s")
    assert small == 200 and large == 200 and large_plain == 200 and deriv == 400
    assert elapsed < 60


def _eu_signed(prob, beta, which):
    rows = prob.rows if which == "with" else prob.no_signal[None, :]
    weights = prob.signal_probs if which == "with" else np.ones(1)
    w = np.exp(beta * (rows - rows.max(axis=1, keepdims=True)))
    w /= w.sum(axis=1, keepdims=True)
    return float(weights @ (w * rows).sum(axis=1))


def test_criterion_9_calibration_under_interference():
    t0 = time.perf_counter()
    game = ex.man_tldr()
    piA = Policy.constant(game, ASSISTANT, "tldr")
    piH = Policy.uniform(game, HUMAN)
    assert "tldr" in {game.assistant_actions[a] for a in flagged_action_indices(game)}
    cache: dict = {}
    forecasts, outcomes = [], []
    steps = 0
    seed = 0
    while steps < 50_000:
        traj = sample_trajectory(game, piH, piA, seed=seed)
        seed += 1
        hist = ()
        for t, st in enumerate(traj.steps):
            if t > 0:
                if hist not in cache:
                    cache[hist] = belief_filter(game, piA, hist).state_marginal()
                marg = cache[hist]
                for s in game.states:
                    forecasts.append(marg.get(s, 0.0))
                    outcomes.append(float(s == st.state))
                steps += 1
            hist += ((st.human_action, st.human_obs),)
    q = np.array(forecasts)
    y = np.array(outcomes)
    bad = []
    rows = []
    for b in np.arange(0, 1.0, 0.1):
        sel = (q >= b - 1e-12) & (q < b + 0.1 - 1e-12) if b < 0.9 else (q >= b - 1e-12)
        n = int(sel.sum())
        if n < 30:
            continue
        freq = y[sel].mean()
        qbar = q[sel].mean()
        se = math.sqrt(max(qbar * (1 - qbar), 1e-12) / n)
        hi = b + 0.1 if b < 0.9 else 1.0
        rows.append(f"[{b:.1f},{hi:.1f}) n={n} freq={freq:.4f}")
        if not (b - 3 * se <= freq <= hi + 3 * se) or abs(freq - qbar) > 3 * se + 1e-12:
            bad.append(round(b, 1))
    elapsed = time.perf_counter() - t0
    ok = not bad and steps >= 50_000 and elapsed < 120
    report(9, ok, f"{steps} filtered steps; " + "; ".join(rows) + f"; {elapsed:.1f}s")
    assert not bad
    assert elapsed < 120


def test_criterion_10_flattening_preserves_value():
    t0 = time.perf_counter()
    worst_law = worst_value = 0.0
    for i in range(20):
        rng = np.random.default_rng([3, i])
        game = random_game(rng)
        player = HUMAN if i % 2 else ASSISTANT
        n = game.n_actions(player)
        memory = ("m0", "m1")
        table: dict = {}

        def rule(v, h, rng=rng, n=n, table=table):
            if (v, h) not in table:
                p = rng.dirichlet(np.ones(2 * n))
                table[v, h] = {(a, memory[m]): p[2 * a + m] for a in range(n) for m in range(2)}
            return table[v, h]

        vp = VirtualStatePolicy(player, memory, "m0", rule)
        opp = Policy.uniform(game, other(player))
        flat = flatten_virtual_policy(game, vp)
        ref = trajectory_law(game, vp, opp)
        got = trajectory_law(game, flat, opp)
        keys = set(ref["law"]) | set(got["law"])
        worst_law = max(worst_law, max(abs(ref["law"].get(k, 0) - got["law"].get(k, 0)) for k in keys))
        value = evaluate_pair(game, flat, opp) if player == HUMAN else evaluate_pair(game, opp, flat)
        worst_value = max(worst_value, abs(value - ref["value"]))
    elapsed = time.perf_counter() - t0
    ok = worst_value <= 1e-9 and worst_law <= 1e-9 and elapsed < 60
    report(10, ok, f"max value error {worst_value:.2e}, max law error {worst_law:.2e}, {elapsed:.2f}s")
    assert worst_value <= 1e-9 and worst_law <= 1e-9
    assert elapsed < 60
