"""Gated maximum-score linear assignment on rectangular matrices.

Scores follow a maximize convention. A pair may be matched only if its
score reaches the gate, and a pair whose score is not positive never adds
anything, so it is left unmatched. Among optimal matchings the
lexicographically smallest sorted list of ``(row, col)`` pairs is
returned.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidInputError


class Assignment(NamedTuple):
    matches: list[tuple[int, int]]
    unmatched_rows: list[int]
    unmatched_cols: list[int]

    def total(self, scores) -> float:
        scores = np.asarray(scores, dtype=float)
        return math.fsum(scores[r, c] for r, c in self.matches)


def _optimum(w: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    if w.size == 0:
        return 0.0, np.zeros(0, int), np.zeros(0, int)
    rows, cols = linear_sum_assignment(w, maximize=True)
    keep = w[rows, cols] > 0
    rows, cols = rows[keep], cols[keep]
    return math.fsum(w[rows, cols]), rows, cols


def solve(scores, gate: float = -math.inf) -> Assignment:
    """Match rows to columns maximizing the total score of matched pairs.

    Parameters
    ----------
    scores : array_like, shape (M, N)
        Finite scores, higher is better. Rows are detections, columns tracks.
    gate : float
        Minimum score a matched pair must reach.

    Returns
    -------
    Assignment
        ``matches`` sorted by row, plus sorted unmatched rows and columns.
    """
    m = np.array(scores, dtype=float)
    if m.ndim != 2:
        if m.size == 0:
            m = m.reshape(0, 0)
        else:
            raise InvalidInputError(f"score matrix must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("score matrix has non-finite entries")
    if math.isnan(gate):
        raise InvalidInputError("gate is NaN")
    n_rows, n_cols = m.shape
    # infeasible and non-positive pairs carry zero weight and are dropped after solving
    w = np.where((m >= gate) & (m > 0), m, 0.0)
    best, rows, cols = _optimum(w)

    chosen = dict(zip(rows.tolist(), cols.tolist()))
    fixed: list[tuple[int, int]] = []
    fixed_total = 0.0
    free_rows = list(range(n_rows))
    free_cols = list(range(n_cols))
    tol = 1e-12 * max(1.0, abs(best))
    # Walk rows in order, trying to move each onto a smaller column while
    # keeping the optimum; this picks the lexicographically smallest optimum.
    for r in range(n_rows):
        free_rows.remove(r)
        current = chosen.get(r)
        bound = 0.0
        if free_rows and free_cols:
            bound = float(w[np.ix_(free_rows, free_cols)].max(axis=1).sum())
        for c in free_cols:
            if current is not None and c >= current:
                break
            if w[r, c] <= 0 or fixed_total + w[r, c] + bound < best - tol:
                continue
            sub = w[np.ix_(free_rows, [k for k in free_cols if k != c])]
            rest, _, _ = _optimum(sub)
            if fixed_total + w[r, c] + rest >= best - tol:
                current = c
                break
        if current is not None:
            fixed.append((r, current))
            fixed_total += w[r, current]
            free_cols.remove(current)
            if current != chosen.get(r):
                # re-anchor the remaining rows on an optimum that contains the fixed pairs
                sub_cols = list(free_cols)
                _, sr, sc = _optimum(w[np.ix_(free_rows, sub_cols)])
                chosen = {free_rows[i]: sub_cols[j] for i, j in zip(sr.tolist(), sc.tolist())}

    matched_rows = {r for r, _ in fixed}
    matched_cols = {c for _, c in fixed}
    return Assignment(
        matches=fixed,
        unmatched_rows=[r for r in range(n_rows) if r not in matched_rows],
        unmatched_cols=[c for c in range(n_cols) if c not in matched_cols],
    )
