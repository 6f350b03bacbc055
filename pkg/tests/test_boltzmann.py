import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poag import boltzmann as bz
from poag.errors import ThresholdError

seeds = st.integers(0, 10_000)
betas = st.floats(0.0, 50.0)


def logistic(x):
    return 1.0 / (1.0 + math.exp(-x))


def test_tower_rule_is_enforced():
    with pytest.raises(ValueError, match="mixture"):
        bz.SignalDecisionProblem(np.array([0.5, 0.5]), np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        bz.SignalDecisionProblem.from_rows([0.7, 0.7], [[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        bz.SignalDecisionProblem.from_rows([0.5, 0.5], [[1, 0, 2], [0, 1]])


def test_softmax_limits():
    assert bz.softmax([1.0, 2.0, 3.0], 0.0) == pytest.approx([1 / 3] * 3)
    assert bz.softmax([1.0, 3.0, 3.0], math.inf) == pytest.approx([0, 0.5, 0.5])
    assert bz.softmax([0.0, 1000.0], 5.0) == pytest.approx([0.0, 1.0])


def test_man_and_tldr_closed_forms():
    man, tldr = bz.man_tldr_problems()
    for beta in (0.0, 0.3, 1.0, 2.5):
        want_man = 0.5 * (7 * logistic(7 * beta) + logistic(beta))
        want_tldr = 4 * logistic(4 * beta)
        assert bz.eu_with_signal(man, beta) == pytest.approx(want_man, rel=1e-13)
        assert bz.eu_with_signal(tldr, beta) == pytest.approx(want_tldr, rel=1e-13)
    assert bz.eu_without_signal(man, 1.0) == pytest.approx(2.0)


@given(seeds)
def test_uniform_chooser_gets_the_mean(seed):
    prob = bz.random_problem(np.random.default_rng(seed))
    assert bz.eu_with_signal(prob, 0.0) == pytest.approx(prob.rows.mean(axis=1) @ prob.signal_probs)
    assert bz.eu_without_signal(prob, 0.0) == pytest.approx(prob.no_signal.mean())
    # with beta = 0 the signal is useless: both averages coincide by the tower rule
    assert bz.eu_with_signal(prob, 0.0) == pytest.approx(bz.eu_without_signal(prob, 0.0))


@given(seeds)
def test_signal_never_hurts_a_perfect_chooser(seed):
    prob = bz.random_problem(np.random.default_rng(seed))
    assert bz.eu_with_signal(prob, math.inf) >= bz.eu_without_signal(prob, math.inf) - 1e-12


@given(seeds)
def test_initial_slope_is_a_variance(seed):
    prob = bz.random_problem(np.random.default_rng(seed))
    h = 1e-5
    for which, fn in (("with", bz.eu_with_signal), ("without", bz.eu_without_signal)):
        slope = (fn(prob, 2 * h) - fn(prob, 0.0)) / (2 * h)
        fd = (-3 * fn(prob, 0.0) + 4 * fn(prob, h) - fn(prob, 2 * h)) / (2 * h)
        assert fd == pytest.approx(bz.derivative_at_zero(prob, which), abs=1e-6)
        assert slope == pytest.approx(bz.derivative_at_zero(prob, which), abs=1e-3)


@given(seeds, st.floats(0.01, 30.0))
def test_log_regret_matches_direct_shortfall(seed, beta):
    prob = bz.random_problem(np.random.default_rng(seed))
    best_with = prob.signal_probs @ prob.rows.max(axis=1)
    direct_with = best_with - bz.eu_with_signal(prob, beta)
    direct_without = prob.no_signal.max() - bz.eu_without_signal(prob, beta)
    if direct_with > 1e-9:
        assert math.exp(bz.log_regret(prob, beta, "with")) == pytest.approx(direct_with, rel=1e-6)
    if direct_without > 1e-9:
        assert math.exp(bz.log_regret(prob, beta, "without")) == pytest.approx(direct_without, rel=1e-6)


def test_threshold_errors():
    flat = bz.SignalDecisionProblem.constant([1.0, 2.0])
    with pytest.raises(ThresholdError):
        bz.interference_threshold((flat, flat))
    man, tldr = bz.man_tldr_problems()
    beta = bz.interference_threshold((man, tldr))
    assert bz.eu_with_signal(man, beta) == pytest.approx(bz.eu_with_signal(tldr, beta), abs=1e-9)


def test_problem_json_round_trip(tmp_path):
    man, _ = bz.man_tldr_problems()
    path = tmp_path / "man.json"
    path.write_text(json.dumps(man.to_dict()))
    back = bz.load_problem(path)
    assert np.array_equal(back.rows, man.rows) and back.actions == man.actions
    assert bz.eu_with_signal(back, 1.3) == bz.eu_with_signal(man, 1.3)


def test_decision_accuracy_bounds():
    man, tldr = bz.man_tldr_problems()
    acc = bz.decision_accuracy(man, 1.0)
    assert acc == pytest.approx([logistic(7), logistic(1), logistic(7), logistic(1)])
    assert bz.decision_accuracy(tldr, math.inf) == pytest.approx([1.0, 1.0])
