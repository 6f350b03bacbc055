"""Single-decision analysis for a softmax chooser who may or may not receive a signal.

A problem has ``n`` actions, signal outcomes with probabilities ``p_s`` and a
payoff row per outcome; the no-signal row is the probability-weighted mixture
of the outcome rows.  All curves are exact closed forms.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ThresholdError

TOWER_TOL = 1e-9


@dataclass(frozen=True)
class SignalDecisionProblem:
    signal_probs: np.ndarray  # (k,)
    rows: np.ndarray  # (k, n) payoffs after each signal outcome
    no_signal: np.ndarray  # (n,) expected payoffs without the signal
    actions: tuple = ()
    outcomes: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.signal_probs, dtype=float).ravel()
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        y0 = np.asarray(self.no_signal, dtype=float).ravel()
        if rows.size == 0:
            rows = y0[None, :]
            p = np.ones(1)
        if rows.shape != (p.size, y0.size):
            raise ValueError(f"rows have shape {rows.shape}, expected ({p.size}, {y0.size})")
        if np.any(p < 0) or abs(p.sum() - 1) > TOWER_TOL:
            raise ValueError("signal probabilities must be non-negative and sum to one")
        gap = np.abs(p @ rows - y0).max()
        if gap > TOWER_TOL:
            raise ValueError(f"no-signal row differs from the mixture of signal rows by {gap:.3g}")
        object.__setattr__(self, "signal_probs", p)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "no_signal", y0)

    @classmethod
    def from_rows(cls, signal_probs, rows, **labels) -> "SignalDecisionProblem":
        p = np.asarray(signal_probs, dtype=float)
        rows = np.asarray(rows, dtype=float)
        return cls(p, rows, p @ rows, **labels)

    @classmethod
    def constant(cls, payoffs) -> "SignalDecisionProblem":
        """A problem whose signal says nothing."""
        y0 = np.asarray(payoffs, dtype=float)
        return cls(np.ones(1), y0[None, :], y0)

    @property
    def n(self) -> int:
        return self.no_signal.size

    @property
    def k(self) -> int:
        return self.signal_probs.size

    def to_dict(self) -> dict:
        return {"actions": list(self.actions), "outcomes": list(self.outcomes),
                "signal_probs": self.signal_probs.tolist(), "rows": self.rows.tolist(),
                "no_signal": self.no_signal.tolist()}

    @classmethod
    def from_dict(cls, spec: dict) -> "SignalDecisionProblem":
        rows = spec.get("rows", [])
        p = spec.get("signal_probs", [])
        y0 = spec.get("no_signal")
        if y0 is None:
            y0 = (np.asarray(p, dtype=float) @ np.asarray(rows, dtype=float)).tolist()
        return cls(np.asarray(p, dtype=float), np.asarray(rows, dtype=float), np.asarray(y0),
                   tuple(spec.get("actions", ())), tuple(spec.get("outcomes", ())))


def load_problem(path) -> SignalDecisionProblem:
    with open(path) as fh:
        return SignalDecisionProblem.from_dict(json.load(fh))


def softmax(values, beta: float) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if math.isinf(beta):
        w = (v >= v.max(axis=-1, keepdims=True)).astype(float)
    else:
        w = np.exp(beta * (v - v.max(axis=-1, keepdims=True)))
    return w / w.sum(axis=-1, keepdims=True)


def _soft_value(rows, beta: float) -> np.ndarray:
    return (softmax(rows, beta) * rows).sum(axis=-1)


def eu_without_signal(problem: SignalDecisionProblem, beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return float(_soft_value(problem.no_signal, beta))


def eu_with_signal(problem: SignalDecisionProblem, beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return float(problem.signal_probs @ _soft_value(problem.rows, beta))


def derivative_at_zero(problem: SignalDecisionProblem, which: str = "with") -> float:
    """Slope of the expected-utility curve at beta = 0: a variance under uniform choice."""
    if which == "without":
        return float(np.var(problem.no_signal))
    if which == "with":
        return float(problem.signal_probs @ np.var(problem.rows, axis=1))
    raise ValueError("which must be 'with' or 'without'")


def _logsumexp(x: np.ndarray, axis=None) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(x - m).sum(axis=axis, keepdims=True)) + m
    return out if axis is None else np.squeeze(out, axis=axis)


def log_regret(problem: SignalDecisionProblem, beta: float, which: str = "with") -> float:
    """log E[best payoff - chosen payoff], computed in log space.

    Stays resolvable at large beta, where both utility curves agree with the
    best value to machine precision.  When one action is best after every
    outcome, eu_without > eu_with exactly when log_regret is smaller without.
    """
    if which == "with":
        rows, p = problem.rows, problem.signal_probs
    elif which == "without":
        rows, p = problem.no_signal[None, :], np.ones(1)
    else:
        raise ValueError("which must be 'with' or 'without'")
    gap = rows.max(axis=1, keepdims=True) - rows
    logw = -beta * gap - _logsumexp(-beta * gap, axis=1)[:, None]
    with np.errstate(divide="ignore"):
        terms = logw + np.log(gap) + np.log(p)[:, None]
    return float(_logsumexp(terms.ravel()).item())


def decision_accuracy(problem: SignalDecisionProblem, beta: float) -> np.ndarray:
    """Per signal outcome: probability that the chooser picks a best action."""
    pol = softmax(problem.rows, beta)
    best = problem.rows >= problem.rows.max(axis=1, keepdims=True) - 1e-12
    return (pol * best).sum(axis=1)


def curve(problem: SignalDecisionProblem, beta: float) -> float:
    """Expected utility of a chooser who sees the problem's signal."""
    return eu_with_signal(problem, beta)


@dataclass(frozen=True)
class ThresholdScan:
    betas: np.ndarray
    gaps: np.ndarray  # eu(garbled) - eu(signal)
    crossings: tuple


def interference_threshold(pair, beta_max: float = 10.0, n_scan: int = 2000,
                           tol: float = 1e-8) -> float:
    """Smallest beta above which the garbled view beats the informative one.

    ``pair`` is (informative problem, garbled problem).  The gap is scanned on
    (0, beta_max] and must change sign exactly once; bisection then runs
    until the gap is within ``tol``.
    """
    informative, garbled = pair

    def gap(b):
        return curve(garbled, b) - curve(informative, b)

    betas = np.linspace(beta_max / n_scan, beta_max, n_scan)
    gaps = np.array([gap(b) for b in betas])
    signs = np.sign(np.where(np.abs(gaps) <= 1e-15, 0.0, gaps))
    nz = np.flatnonzero(signs)
    cross = tuple(int(nz[i]) for i in range(len(nz) - 1) if signs[nz[i]] != signs[nz[i + 1]])
    scan = ThresholdScan(betas, gaps, cross)
    if not cross:
        raise ThresholdError(f"no sign change of the utility gap on (0, {beta_max}]", scan)
    if len(cross) > 1:
        raise ThresholdError(f"{len(cross)} sign changes on (0, {beta_max}]", scan)
    i = cross[0]
    lo, hi = betas[i], betas[nz[nz > i][0]]
    glo = gap(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = gap(mid)
        if abs(gm) <= tol and hi - lo <= 1e-10:
            return float(mid)
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def man_tldr_problems() -> tuple:
    """The manual-versus-summary pair: full signal over four cases, or only the flag class."""
    man = SignalDecisionProblem.from_rows(
        [0.25] * 4, [[7, 0], [1, 0], [0, 7], [0, 1]],
        actions=("flag1", "flag2"), outcomes=("s_a", "s_b", "s_c", "s_d"))
    tldr = SignalDecisionProblem.from_rows(
        [0.5, 0.5], [[4, 0], [0, 4]], actions=("flag1", "flag2"), outcomes=("1", "2"))
    return man, tldr


def random_problem(rng: np.random.Generator, n: int | None = None, k: int | None = None,
                   best_first: bool = False) -> SignalDecisionProblem:
    """Random problem satisfying the tower rule by construction.

    ``best_first`` makes action 0 strictly best after every outcome.
    """
    n = int(rng.integers(2, 6)) if n is None else n
    k = int(rng.integers(2, 6)) if k is None else k
    rows = rng.normal(size=(k, n))
    if best_first:
        rows[:, 0] = rows[:, 1:].max(axis=1) + rng.uniform(0.1, 2.0, size=k)
    p = rng.dirichlet(np.ones(k))
    return SignalDecisionProblem.from_rows(p, rows)


def signal_is_trivial(problem: SignalDecisionProblem, tol: float = 1e-12) -> bool:
    return bool(np.abs(problem.rows - problem.no_signal).max() <= tol)
