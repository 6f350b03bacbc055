"""Hot loops for the product-selection simulation.

Each kernel has a numba version and a vectorized numpy version with the same
contract.  Set ``POAG_NO_NUMBA=1`` to force numpy (also used when numba is
missing).  Both produce identical results on identical inputs.
"""
from __future__ import annotations

import math
import os

import numpy as np

USE_NUMBA = os.environ.get("POAG_NO_NUMBA", "") not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


# -- numpy reference ---------------------------------------------------------

def interfered_mask_numpy(r_hat: np.ndarray, k: int) -> np.ndarray:
    """Boolean (trials, d): the k smallest estimates per row, ties to the lower index."""
    order = np.argsort(r_hat, axis=1, kind="stable")
    mask = np.zeros(r_hat.shape, dtype=bool)
    if k:
        np.put_along_axis(mask, order[:, :k], True, axis=1)
    return mask


def choice_probs_numpy(h_seen: np.ndarray, mask: np.ndarray, beta: float) -> np.ndarray:
    """Selection probabilities over products; masked entries read as minus infinity."""
    visible = ~mask
    blind = ~visible.any(axis=1)
    visible[blind] = True
    h_seen = np.where(blind[:, None], 0.0, h_seen)  # everything hidden: uniform
    if math.isinf(beta):
        vals = np.where(visible, h_seen, -np.inf)
        top = vals.max(axis=1, keepdims=True)
        first = np.argmax(vals >= top, axis=1)  # argmax with index tie-break
        w = np.zeros(h_seen.shape)
        w[np.arange(len(w)), first] = 1.0
        w[blind] = 1.0 / h_seen.shape[1]
        return w
    vals = np.where(visible, beta * h_seen, -np.inf)
    vals = vals - vals.max(axis=1, keepdims=True)
    w = np.where(visible, np.exp(vals), 0.0)
    return w / w.sum(axis=1, keepdims=True)


def simulate_numpy(H, R, u, private_obs: int, k: int, beta: float):
    """(payoffs, chosen indices) for every trial row."""
    r_hat = np.full(R.shape, 0.5)
    r_hat[:, :private_obs] = R[:, :private_obs]
    mask = interfered_mask_numpy(r_hat, k)
    probs = choice_probs_numpy(H, mask, beta)
    cdf = np.cumsum(probs, axis=1)
    hit = (cdf > (u * cdf[:, -1])[:, None]) & (probs > 0)
    last_pos = probs.shape[1] - 1 - np.argmax((probs > 0)[:, ::-1], axis=1)
    chosen = np.where(hit.any(axis=1), np.argmax(hit, axis=1), last_pos)
    idx = np.arange(len(chosen))
    return H[idx, chosen] + R[idx, chosen], chosen


def expected_payoff_numpy(H, U, mask_row: np.ndarray, beta: float) -> np.ndarray:
    """Exact expected payoff of the softmax choice for each sample row, one fixed mask."""
    mask = np.broadcast_to(mask_row, H.shape).copy()
    return (choice_probs_numpy(H, mask, beta) * U).sum(axis=1)


# -- numba versions ----------------------------------------------------------

if USE_NUMBA:
    @njit(cache=True)
    def _probs_row(h, hidden, beta, out):
        d = h.size
        n_vis = 0
        for i in range(d):
            if not hidden[i]:
                n_vis += 1
        for i in range(d):
            out[i] = 0.0
        if n_vis == 0:
            for i in range(d):
                out[i] = 1.0 / d
            return
        if math.isinf(beta):
            best = -1
            for i in range(d):
                if not hidden[i] and (best < 0 or h[i] > h[best]):
                    best = i
            out[best] = 1.0
            return
        top = -np.inf
        for i in range(d):
            if not hidden[i] and beta * h[i] > top:
                top = beta * h[i]
        total = 0.0
        for i in range(d):
            if not hidden[i]:
                out[i] = math.exp(beta * h[i] - top)
                total += out[i]
        for i in range(d):
            out[i] /= total

    @njit(cache=True)
    def _simulate_numba(H, R, u, private_obs, k, beta):
        n, d = H.shape
        pay = np.empty(n)
        chosen = np.empty(n, dtype=np.int64)
        r_hat = np.empty(d)
        hidden = np.zeros(d, dtype=np.bool_)
        probs = np.empty(d)
        for t in range(n):
            for i in range(d):
                r_hat[i] = R[t, i] if i < private_obs else 0.5
                hidden[i] = False
            order = np.argsort(r_hat, kind="mergesort")
            for j in range(k):
                hidden[order[j]] = True
            _probs_row(H[t], hidden, beta, probs)
            total = 0.0
            for i in range(d):
                total += probs[i]
            target = u[t] * total
            acc = 0.0
            pick = -1
            for i in range(d):
                if probs[i] > 0:
                    pick = i
                    acc += probs[i]
                    if acc > target:
                        break
            chosen[t] = pick
            pay[t] = H[t, pick] + R[t, pick]
        return pay, chosen

    @njit(cache=True)
    def _expected_numba(H, U, mask_row, beta):
        n, d = H.shape
        out = np.empty(n)
        probs = np.empty(d)
        for t in range(n):
            _probs_row(H[t], mask_row, beta, probs)
            acc = 0.0
            for i in range(d):
                acc += probs[i] * U[t, i]
            out[t] = acc
        return out


def simulate(H, R, u, private_obs: int, k: int, beta: float):
    if USE_NUMBA:
        return _simulate_numba(np.ascontiguousarray(H), np.ascontiguousarray(R),
                               np.ascontiguousarray(u), int(private_obs), int(k), float(beta))
    return simulate_numpy(H, R, u, private_obs, k, beta)


def expected_payoff(H, U, mask_row, beta: float) -> np.ndarray:
    if USE_NUMBA:
        return _expected_numba(np.ascontiguousarray(H), np.ascontiguousarray(U),
                               np.asarray(mask_row, dtype=np.bool_), float(beta))
    return expected_payoff_numpy(H, U, np.asarray(mask_row, dtype=bool), beta)
