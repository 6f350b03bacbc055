"""Phase-one simplex for feasibility of ``A x = b, x >= 0``.

Two arithmetic back ends share the same pivoting code path: floating point
(numpy tableau) and exact rationals (``fractions.Fraction``).  Bland's rule
is used throughout, so the method terminates on degenerate problems.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-12
# phase-one optima inside this band are re-decided in exact arithmetic
GRAY_ZONE = (1e-13, 1e-6)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    x: np.ndarray | None
    infeasibility: float  # optimal sum of artificial variables
    exact: bool = False

    def __bool__(self):
        return self.feasible


def _prepare(A, b):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] != b.size:
        raise ValueError(f"A has {A.shape[0]} rows but b has {b.size}")
    flip = b < 0
    A, b = A.copy(), b.copy()
    A[flip] *= -1
    b[flip] *= -1
    return A, b


def _phase_one_float(A, b, max_iter):
    m, n = A.shape
    # tableau columns: n originals, m artificials, rhs
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))
    for _ in range(max_iter):
        cost = T[m, :n + m]
        cand = np.flatnonzero(cost < -PIVOT_TOL)
        if cand.size == 0:
            break
        col = int(cand[0])
        column = T[:m, col]
        pos = np.flatnonzero(column > PIVOT_TOL)
        if pos.size == 0:  # unbounded direction; cannot happen in phase one
            break
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[np.abs(ratios - best) <= 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        T[row] /= T[row, col]
        others = np.arange(m + 1) != row
        T[others] -= np.outer(T[others, col], T[row])
        basis[row] = col
    else:
        raise RuntimeError("simplex iteration limit reached")
    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    return x[:n], float(-T[m, -1])


def _phase_one_exact(A, b, max_iter):
    m, n = len(A), len(A[0]) if A else 0
    T = [list(A[i]) + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    T.append([-sum((A[i][j] for i in range(m)), Fraction(0)) for j in range(n)]
             + [Fraction(0)] * m + [-sum(b, Fraction(0))])
    basis = list(range(n, n + m))
    for _ in range(max_iter):
        col = next((j for j in range(n + m) if T[m][j] < 0), None)
        if col is None:
            break
        rows = [i for i in range(m) if T[i][col] > 0]
        if not rows:
            break
        best = min(T[i][-1] / T[i][col] for i in rows)
        row = min((i for i in rows if T[i][-1] / T[i][col] == best), key=lambda i: basis[i])
        piv = T[row][col]
        T[row] = [v / piv for v in T[row]]
        for i in range(m + 1):
            if i != row and T[i][col] != 0:
                f = T[i][col]
                T[i] = [vi - f * vr for vi, vr in zip(T[i], T[row])]
        basis[row] = col
    else:
        raise RuntimeError("simplex iteration limit reached")
    x = [Fraction(0)] * (n + m)
    for i, j in enumerate(basis):
        x[j] = T[i][-1]
    return x[:n], -T[m][-1]


def to_fraction(v, max_denominator: int = 10**9) -> Fraction:
    return Fraction(v).limit_denominator(max_denominator)


def find_feasible(A, b, *, mode: str = "auto", tol: float = FEAS_TOL,
                  max_iter: int = 100_000) -> Feasibility:
    """Decide whether ``{x >= 0 : A x = b}`` is non-empty.

    ``mode`` is ``"float"``, ``"exact"`` or ``"auto"`` (float, with an exact
    re-check when the phase-one optimum is too close to zero to trust).
    """
    A, b = _prepare(A, b)
    if A.shape[0] == 0:
        return Feasibility(True, np.zeros(A.shape[1]), 0.0)
    if mode in ("float", "auto"):
        x, infeas = _phase_one_float(A, b, max_iter)
        x = np.clip(x, 0.0, None)
        if mode == "float" or not GRAY_ZONE[0] < infeas < GRAY_ZONE[1]:
            ok = infeas <= tol and np.abs(A @ x - b).max(initial=0.0) <= 1e3 * tol
            return Feasibility(bool(ok), x if ok else None, infeas)
    elif mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    Af = [[to_fraction(v) for v in row] for row in A]
    bf = [to_fraction(v) for v in b]
    xf, infeas = _phase_one_exact(Af, bf, max_iter)
    ok = infeas == 0
    x = np.array([float(v) for v in xf]) if ok else None
    return Feasibility(ok, x, float(infeas), exact=True)
