"""Product-selection game: the assistant hides k products, the human picks by softmax.

Each product has a human-visible attribute and an assistant-side attribute,
both uniform on [0, 1]; the payoff is their sum for the chosen product.  The
assistant sees the first ``private_obs`` assistant-side attributes.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

INF = math.inf


@dataclass(frozen=True)
class ProductGameConfig:
    d: int = 5
    k: int = 0
    private_obs: int = 0
    beta: float = INF
    trials: int = 30_000
    base_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.k <= self.d:
            raise ValueError("need 0 <= k <= d")
        if not 0 <= self.private_obs <= self.d:
            raise ValueError("need 0 <= private_obs <= d")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not self.beta >= 0:
            raise ValueError("beta must be non-negative")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    human_values: tuple
    assistant_values: tuple
    interfered: frozenset  # 0-based product indices
    chosen: int
    payoff: float


@dataclass
class ExperimentSummary:
    config: ProductGameConfig
    mean: float
    stderr: float
    records: list = field(default_factory=list)


def trial_draws(base_seed: int, trials: int, d: int, start: int = 0) -> tuple:
    """(H, R, u) for trials start..start+trials-1.

    One Philox stream keyed by ``base_seed``; trial i owns a fixed block of
    counters, so any range of trials is regenerated by advancing the counter,
    independent of how the work is split or ordered.
    """
    width = -(-(2 * d + 1) // 4) * 4  # Philox emits four 64-bit words per counter step
    bitgen = np.random.Philox(key=int(base_seed))
    bitgen.advance(start * width // 4)
    out = np.random.Generator(bitgen).random((trials, width))
    return out[:, :d], out[:, d:2 * d], out[:, 2 * d]


def assistant_interference(r_observed, d: int, k: int) -> frozenset:
    """Hide the k products with the smallest estimated assistant-side value.

    Unobserved values are estimated at 0.5; ties go to the smaller index.
    ``r_observed`` maps 0-based product index to its observed value.
    """
    r_hat = [r_observed.get(i, 0.5) for i in range(d)]
    order = sorted(range(d), key=lambda i: (r_hat[i], i))
    return frozenset(order[:k])


def human_select(h_seen, beta: float) -> np.ndarray:
    """Softmax over seen values; ``-inf`` marks hidden products."""
    h = np.asarray(h_seen, dtype=float)
    hidden = np.isneginf(h)
    return _kernels.choice_probs_numpy(np.where(hidden, 0.0, h)[None, :], hidden[None, :], beta)[0]


def run_experiment(config: ProductGameConfig, records: bool = False, draws=None) -> ExperimentSummary:
    H, R, u = draws if draws is not None else trial_draws(config.base_seed, config.trials, config.d)
    pay, chosen = _kernels.simulate(H, R, u, config.private_obs, config.k, config.beta)
    mean = float(pay.mean())
    se = float(pay.std(ddof=1) / math.sqrt(pay.size)) if pay.size > 1 else 0.0
    out = ExperimentSummary(config, mean, se)
    if records:
        for t in range(pay.size):
            obs = {i: R[t, i] for i in range(config.private_obs)}
            out.records.append(TrialRecord(t, tuple(H[t]), tuple(R[t]),
                                           assistant_interference(obs, config.d, config.k),
                                           int(chosen[t]), float(pay[t])))
    return out


@dataclass(frozen=True)
class BruteForceResult:
    subset: frozenset
    payoff: float
    stderr: float
    payoffs: dict  # subset -> (mean, stderr)

    def gap_stderr(self, subset) -> float:
        """Standard error of payoff(best) - payoff(subset) under shared samples."""
        return self._gap_se[frozenset(subset)]

    _gap_se: dict = field(default_factory=dict, repr=False, compare=False)


def brute_force_interference(r_observed, d: int, k: int, beta: float, samples: int = 4_000,
                             seed: int = 0) -> BruteForceResult:
    """Score every k-subset by Monte Carlo over the human-side values.

    The assistant-side values enter the payoff linearly and are independent of
    the human's choice, so they are integrated exactly (observed value, else
    1/2).  Each draw is averaged over all orderings of the products (for
    d <= 6), so subsets that are exchangeable get identical scores instead of
    noise-driven differences.
    """
    rng = np.random.default_rng(seed)
    base = rng.random((samples, d))
    perms = list(itertools.permutations(range(d))) if d <= 6 else [tuple(range(d))]
    H = np.concatenate([base[:, list(p)] for p in perms])
    r_mean = np.array([r_observed.get(i, 0.5) for i in range(d)])
    U = H + r_mean
    per = {}
    for combo in itertools.combinations(range(d), k):
        mask = np.zeros(d, dtype=bool)
        mask[list(combo)] = True
        vals = _kernels.expected_payoff(H, U, mask, beta)
        per[frozenset(combo)] = vals.reshape(len(perms), samples).mean(axis=0)
    means = {s: float(v.mean()) for s, v in per.items()}
    best = max(sorted(per, key=sorted), key=lambda s: means[s])
    gap_se = {s: float((per[best] - v).std(ddof=1) / math.sqrt(samples)) for s, v in per.items()}
    ses = {s: float(v.std(ddof=1) / math.sqrt(samples)) for s, v in per.items()}
    return BruteForceResult(best, means[best], ses[best],
                            {s: (means[s], ses[s]) for s in per}, gap_se)


DEFAULT_BETAS = (0.01, 0.03, 0.1, 0.3, 1, 3, 10, 30, 100)
CSV_COLUMNS = ("beta", "private_obs", "k", "mean_payoff", "stderr", "trials", "seed")


def sweep(d: int, ks, private_obs_values, betas, trials: int, seed: int) -> list:
    """Rows for every (beta, private_obs, k); all configs share the same trial draws."""
    draws = trial_draws(seed, trials, d)
    rows = []
    for beta in betas:
        for p in private_obs_values:
            for k in ks:
                cfg = ProductGameConfig(d, k, p, beta, trials, seed)
                s = run_experiment(cfg, draws=draws)
                rows.append({"beta": beta, "private_obs": p, "k": k, "mean_payoff": s.mean,
                             "stderr": s.stderr, "trials": trials, "seed": seed})
    return rows


def write_csv(rows, path_or_file) -> None:
    def emit(fh):
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "beta": "inf" if math.isinf(r["beta"]) else repr(float(r["beta"])),
                        "mean_payoff": repr(r["mean_payoff"]), "stderr": repr(r["stderr"])})
    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def read_csv(path) -> list:
    """Inverse of ``write_csv``."""
    with open(path, newline="") as fh:
        rows = []
        for r in csv.DictReader(fh):
            rows.append({"beta": math.inf if r["beta"] == "inf" else float(r["beta"]),
                         "private_obs": int(r["private_obs"]), "k": int(r["k"]),
                         "mean_payoff": float(r["mean_payoff"]), "stderr": float(r["stderr"]),
                         "trials": int(r["trials"]), "seed": int(r["seed"])})
        return rows
