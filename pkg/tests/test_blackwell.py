import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from poag import examples as ex
from poag.blackwell import (ObservationFamily, at_most_as_informative, expected_posterior_entropy,
                            flagged_action_indices, garbling_lp, interfering_actions,
                            policy_interferes_action_level, strictly_more_informative)
from poag.errors import DimensionMismatchError
from poag.game import ASSISTANT, Policy
from poag.simplex import find_feasible

seeds = st.integers(0, 100_000)


def stochastic(rng, rows, cols, sparse=True):
    M = rng.dirichlet(np.full(cols, 0.5), size=rows)
    if sparse:
        M[M < 0.15] = 0.0
        M /= M.sum(axis=1, keepdims=True)
    return M


def scipy_garbling_exists(Q, P):
    """Oracle: F >= 0 with unit column sums and F P[s] = Q[s] for all s."""
    S, n = P.shape
    A, b = [], []
    for j in range(n):
        row = np.zeros(n * n)
        row[[i * n + j for i in range(n)]] = 1
        A.append(row)
        b.append(1.0)
    for s in range(S):
        for i in range(n):
            row = np.zeros(n * n)
            row[i * n:(i + 1) * n] = P[s]
            A.append(row)
            b.append(Q[s, i])
    res = linprog(np.zeros(n * n), A_eq=np.array(A), b_eq=np.array(b), bounds=(0, None), method="highs")
    return res.status == 0


@given(seeds)
def test_feasibility_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 5)), int(rng.integers(1, 6))
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    if rng.random() < 0.5:
        b = A @ rng.integers(0, 3, size=n)  # feasible by construction
    else:
        b = rng.integers(-4, 5, size=m).astype(float)
    ours = find_feasible(A, b)
    res = linprog(np.zeros(n), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert bool(ours) == (res.status == 0)
    if ours:
        assert np.all(ours.x >= -1e-12)
        assert np.allclose(A @ ours.x, b, atol=1e-7)
    assert bool(find_feasible(A, b, mode="exact")) == bool(ours)


@given(seeds)
def test_garbling_of_a_family_is_never_more_informative(seed):
    rng = np.random.default_rng(seed)
    S, n = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    P = stochastic(rng, S, n)
    F = stochastic(rng, n, n).T  # column-stochastic
    p = ObservationFamily.from_array(P)
    q = p.garble(F)
    comp = at_most_as_informative(q, p)
    assert comp
    assert np.allclose(P @ comp.garbling.T, q.probs, atol=1e-7)
    assert np.allclose(comp.garbling.sum(axis=0), 1.0)
    assert at_most_as_informative(p, p)  # reflexive


@given(seeds)
def test_garbling_lp_matches_scipy_oracle(seed):
    rng = np.random.default_rng(seed)
    S, n = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    P = stochastic(rng, S, n)
    Q = stochastic(rng, S, n) if rng.random() < 0.5 else P @ stochastic(rng, n, n)
    assert bool(garbling_lp(Q, P)) == scipy_garbling_exists(Q, P)


def test_exact_mode_agrees_on_boundary_case():
    P = np.array([[1.0, 0.0], [0.0, 1.0]])
    Q = np.array([[2 / 3, 1 / 3], [1 / 3, 2 / 3]])
    assert garbling_lp(Q, P, mode="exact") and garbling_lp(Q, P, mode="float")
    assert not garbling_lp(P, Q, mode="exact") and not garbling_lp(P, Q, mode="float")


def test_strict_order_and_incomparability():
    full = ObservationFamily.from_array(np.eye(3))
    blank = ObservationFamily.from_array(np.ones((3, 1)))
    assert strictly_more_informative(full, blank)
    assert not strictly_more_informative(blank, full)
    assert not strictly_more_informative(full, full)
    first = ObservationFamily.from_array([[1, 0], [0, 1], [0, 1]])  # tells s0 apart
    last = ObservationFamily.from_array([[1, 0], [1, 0], [0, 1]])  # tells s2 apart
    assert not at_most_as_informative(first, last)
    assert not at_most_as_informative(last, first)


def test_different_alphabets_use_disjoint_union():
    a = ObservationFamily(("x", "y"), ("hi", "lo"), np.eye(2))
    b = ObservationFamily(("x", "y"), ("blank",), np.ones((2, 1)))
    assert at_most_as_informative(b, a) and not at_most_as_informative(a, b)
    with pytest.raises(DimensionMismatchError):
        at_most_as_informative(a, ObservationFamily.from_array(np.eye(3)))


@given(seeds)
def test_garbling_never_lowers_posterior_entropy(seed):
    rng = np.random.default_rng(seed)
    P = stochastic(rng, 3, 3)
    prior = rng.dirichlet(np.ones(3))
    p = ObservationFamily.from_array(P)
    q = p.garble(stochastic(rng, 3, 3).T)
    assert expected_posterior_entropy(q, prior) >= expected_posterior_entropy(p, prior) - 1e-12


def test_flagged_actions_in_examples():
    g = ex.revealing_errors()
    assert {g.assistant_actions[a] for a in flagged_action_indices(g)} == {"install"}
    m = ex.man_tldr()
    assert {m.assistant_actions[a] for a in flagged_action_indices(m)} == {"tldr"}
    assert interfering_actions(m)
    c = ex.cuda_versions(2)
    assert {c.assistant_actions[a] for a in flagged_action_indices(c)} == {"10", "01", "00"}
    n = ex.node_scheduling()
    assert {n.assistant_actions[a] for a in flagged_action_indices(n)} == {"relabel"}


def test_action_level_policy_check():
    m = ex.man_tldr()
    verdict = policy_interferes_action_level(m, Policy.constant(m, ASSISTANT, "tldr"))
    assert verdict and verdict.action == "tldr"
    assert not policy_interferes_action_level(m, Policy.constant(m, ASSISTANT, "man"))
    c = ex.cuda_versions(3)
    assert policy_interferes_action_level(c, ex.suppress_incompatible(c))
