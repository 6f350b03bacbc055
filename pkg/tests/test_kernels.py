import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poag import _kernels as kn
from poag import product as pr

needs_numba = pytest.mark.skipif(not kn.USE_NUMBA, reason="numba kernels disabled")


@needs_numba
@settings(max_examples=30)
@given(st.integers(0, 10_000), st.integers(1, 7), st.data())
def test_numba_and_numpy_simulations_agree(seed, d, data):
    k = data.draw(st.integers(0, d))
    obs = data.draw(st.integers(0, d))
    beta = data.draw(st.sampled_from([0.0, 0.1, 1.0, 30.0, math.inf]))
    H, R, u = pr.trial_draws(seed, 300, d)
    p1, c1 = kn.simulate(H, R, u, obs, k, beta)
    p2, c2 = kn.simulate_numpy(H, R, u, obs, k, beta)
    assert np.array_equal(c1, c2)
    assert np.allclose(p1, p2, rtol=0, atol=1e-15)


@needs_numba
@given(st.integers(0, 10_000), st.sampled_from([0.0, 2.0, math.inf]))
def test_expected_payoff_kernels_agree(seed, beta):
    rng = np.random.default_rng(seed)
    H, U = rng.random((100, 4)), rng.random((100, 4))
    mask = rng.random(4) < 0.5
    assert np.allclose(kn.expected_payoff(H, U, mask, beta), kn.expected_payoff_numpy(H, U, mask, beta),
                       rtol=1e-13, atol=1e-15)


def test_all_hidden_means_uniform_choice():
    p = kn.choice_probs_numpy(np.array([[0.1, 0.9]]), np.array([[True, True]]), 1.0)
    assert p.tolist() == [[0.5, 0.5]]


def _sweep_csv(env_flag):
    env = dict(os.environ, POAG_NO_NUMBA=env_flag)
    cmd = [sys.executable, "-m", "poag", "experiment", "product-select", "--d", "4", "--k-sweep", "0..2",
           "--private-obs", "0,4", "--beta-sweep", "0.5,inf", "--trials", "2000", "--seed", "9"]
    return subprocess.run(cmd, env=env, check=True, capture_output=True, text=True).stdout


def test_backends_write_identical_csv():
    assert _sweep_csv("1") == _sweep_csv("0")


@needs_numba
@pytest.mark.parametrize("d", range(1, 6))
def test_backends_agree_on_every_small_configuration(d):
    H, R, u = pr.trial_draws(3, 400, d)
    for k in range(d + 1):
        for obs in range(d + 1):
            for beta in (0.0, 0.1, 1.0, 30.0, math.inf):
                p1, c1 = kn.simulate(H, R, u, obs, k, beta)
                p2, c2 = kn.simulate_numpy(H, R, u, obs, k, beta)
                assert np.array_equal(c1, c2), (k, obs, beta)
                assert np.allclose(p1, p2, rtol=0, atol=1e-15)
