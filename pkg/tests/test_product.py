import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poag import product as pr


def test_config_validation():
    with pytest.raises(ValueError):
        pr.ProductGameConfig(d=3, k=4)
    with pytest.raises(ValueError):
        pr.ProductGameConfig(d=3, private_obs=5)
    with pytest.raises(ValueError):
        pr.ProductGameConfig(trials=0)
    with pytest.raises(ValueError):
        pr.ProductGameConfig(beta=-1.0)


def test_no_interference_closed_forms():
    # rational chooser: E[max of 5 uniforms] + 1/2; uniform chooser: 1/2 + 1/2
    rational = pr.run_experiment(pr.ProductGameConfig(d=5, k=0, beta=math.inf, trials=200_000, base_seed=1))
    assert abs(rational.mean - 4 / 3) < 4 * rational.stderr
    blind = pr.run_experiment(pr.ProductGameConfig(d=5, k=0, beta=0.0, trials=200_000, base_seed=2))
    assert abs(blind.mean - 1.0) < 4 * blind.stderr
    # hide the two lowest of five known values: top-3 mean of R plus max of three uniforms
    informed = pr.run_experiment(pr.ProductGameConfig(d=5, k=2, private_obs=5, beta=math.inf, trials=30_000))
    assert informed.mean == pytest.approx(17 / 12, abs=0.01)
    last = pr.run_experiment(pr.ProductGameConfig(d=5, k=4, private_obs=0, beta=math.inf, trials=30_000))
    assert last.mean == pytest.approx(1.0, abs=0.01)


def test_assistant_hides_lowest_estimates():
    assert pr.assistant_interference({0: 0.9, 1: 0.1, 2: 0.7, 3: 0.2}, 5, 2) == frozenset({1, 3})
    # unobserved products tie at one half; lower index goes first
    assert pr.assistant_interference({}, 4, 2) == frozenset({0, 1})
    assert pr.assistant_interference({0: 0.6}, 3, 1) == frozenset({1})
    assert pr.assistant_interference({}, 3, 0) == frozenset()


def test_human_select():
    assert pr.human_select([0.2, -math.inf, 0.9], math.inf).tolist() == [0.0, 0.0, 1.0]
    p = pr.human_select([0.0, math.log(3.0), -math.inf], 1.0)
    assert p == pytest.approx([0.25, 0.75, 0.0])
    assert pr.human_select([0.4, 0.4], math.inf).tolist() == [1.0, 0.0]
    assert pr.human_select([1.0, 0.0], 1.0) == pytest.approx([math.e / (math.e + 1), 1 / (math.e + 1)])
    assert pr.human_select([-math.inf] * 3, 2.0) == pytest.approx([1 / 3] * 3)
    assert pr.human_select([-math.inf] * 3, math.inf) == pytest.approx([1 / 3] * 3)
    assert pr.human_select([0.3, 0.8, -math.inf], 0.0) == pytest.approx([0.5, 0.5, 0.0])


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(0, 50), st.integers(1, 20))
def test_trial_block_is_independent_of_split(seed, d, start, n):
    H, R, u = pr.trial_draws(seed, start + n, d)
    h2, r2, u2 = pr.trial_draws(seed, n, d, start=start)
    assert np.array_equal(H[start:], h2) and np.array_equal(R[start:], r2) and np.array_equal(u[start:], u2)


def test_runs_are_deterministic_and_records_agree():
    cfg = pr.ProductGameConfig(d=4, k=2, private_obs=2, beta=3.0, trials=500, base_seed=11)
    a, b = pr.run_experiment(cfg, records=True), pr.run_experiment(cfg)
    assert a.mean == b.mean and a.stderr == b.stderr
    assert np.mean([r.payoff for r in a.records]) == pytest.approx(a.mean)
    for r in a.records[:50]:
        assert r.chosen not in r.interfered and len(r.interfered) == 2
        assert r.payoff == pytest.approx(r.human_values[r.chosen] + r.assistant_values[r.chosen])
        obs = {i: r.assistant_values[i] for i in range(2)}
        assert r.interfered == pr.assistant_interference(obs, 4, 2)


def test_csv_round_trip(tmp_path):
    rows = pr.sweep(3, [0, 1], [0, 3], [0.5, math.inf], trials=300, seed=4)
    path = tmp_path / "sweep.csv"
    pr.write_csv(rows, path)
    assert pr.read_csv(path) == rows
    assert len(rows) == 8


def test_brute_force_agrees_with_the_heuristic_without_private_values():
    res = pr.brute_force_interference({}, d=3, k=1, beta=math.inf, samples=2000, seed=1)
    # with nothing observed every product is exchangeable
    scores = [m for m, _ in res.payoffs.values()]
    assert max(scores) - min(scores) < 1e-12
    assert res.subset == frozenset({0})
    known = pr.brute_force_interference({0: 0.1, 1: 0.5, 2: 0.9}, d=3, k=1, beta=math.inf, samples=2000)
    assert known.subset == frozenset({0})
    assert pr.brute_force_interference({}, d=4, k=0, beta=1.0, samples=100).subset == frozenset()
    low = pr.brute_force_interference({0: 0.05, 1: 0.95, 2: 0.6}, d=3, k=1, beta=5.0, samples=2000, seed=1)
    assert low.subset == frozenset({0})


def test_hiding_low_value_products_helps_with_private_information():
    full = pr.sweep(5, [0, 2], [5], [math.inf], trials=20_000, seed=3)
    by_k = {r["k"]: r["mean_payoff"] for r in full}
    assert by_k[2] > by_k[0]
