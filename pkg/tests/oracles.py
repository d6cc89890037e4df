"""Independent brute-force references used by several test modules."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

from masort.geometry import BBox


def best_matching_value(scores, gate) -> Fraction:
    """Exact best total over all partial matchings whose pairs reach ``gate``.

    Exhaustive over (row, used-column set) with exact rational sums.
    """
    m = np.asarray(scores, dtype=float)
    n_rows, n_cols = m.shape
    exact = [[Fraction(float(v)) for v in row] for row in m]

    @lru_cache(maxsize=None)
    def best(r, used):
        if r == n_rows:
            return Fraction(0)
        out = best(r + 1, used)
        for c in range(n_cols):
            if not used & (1 << c) and m[r, c] >= gate:
                out = max(out, exact[r][c] + best(r + 1, used | (1 << c)))
        return out

    return best(0, 0)


def all_matchings(n_rows, n_cols):
    """Every partial matching as a sorted list of (row, col) pairs."""
    for k in range(min(n_rows, n_cols) + 1):
        for rows in itertools.combinations(range(n_rows), k):
            for cols in itertools.permutations(range(n_cols), k):
                yield list(zip(rows, cols))


def lexmin_optimal_matching(scores, gate):
    """Lexicographically smallest optimal matching made of positive, gated pairs."""
    m = np.asarray(scores, dtype=float)
    best_val, best = None, None
    for match in all_matchings(*m.shape):
        if any(m[r, c] < gate or m[r, c] <= 0 for r, c in match):
            continue
        val = sum(Fraction(float(m[r, c])) for r, c in match)
        if best_val is None or val > best_val or (val == best_val and match < best):
            best_val, best = val, match
    return best


def idf1_brute(gt, pred, thr):
    """IDF1 by trying every partial bijection between gt and predicted ids."""
    from masort.geometry import iou

    gt_ids = sorted({i for items in gt.values() for i, _ in items})
    pr_ids = sorted({i for items in pred.values() for i, _ in items})
    n_gt = sum(len(v) for v in gt.values())
    n_pr = sum(len(v) for v in pred.values())
    # co-located box counts per id pair
    overlap = {}
    for f in set(gt) & set(pred):
        for g, gb in gt[f]:
            for p, pb in pred[f]:
                if iou(gb, pb) >= thr:
                    overlap[g, p] = overlap.get((g, p), 0) + 1
    best = 0
    for match in all_matchings(len(gt_ids), len(pr_ids)):
        best = max(best, sum(overlap.get((gt_ids[a], pr_ids[b]), 0) for a, b in match))
    idtp = best
    return 2 * idtp / (n_gt + n_pr), idtp, n_pr - idtp, n_gt - idtp


def assa_brute(gt, pred, alpha):
    """AssA at one threshold, enumerating every per-frame matching.

    Per frame, the matching maximizes the summed product of global
    alignment score and IoU over all pairs; matched pairs below ``alpha``
    are then discarded. This is the association-aware matching rule of the
    HOTA protocol, spelled out by enumeration instead of a solver.
    """
    from masort.geometry import iou

    frames = sorted(set(gt) | set(pred))
    # global alignment: potential matches counted with IoU-normalized weights
    pot = {}
    gt_count, pr_count = {}, {}
    for f in frames:
        g_items, p_items = gt.get(f, []), pred.get(f, [])
        for g, _ in g_items:
            gt_count[g] = gt_count.get(g, 0) + 1
        for p, _ in p_items:
            pr_count[p] = pr_count.get(p, 0) + 1
        if not g_items or not p_items:
            continue
        sim = np.array([[iou(gb, pb) for _, pb in p_items] for _, gb in g_items])
        denom = sim.sum(0)[None, :] + sim.sum(1)[:, None] - sim
        sim_iou = np.divide(sim, denom, out=np.zeros_like(sim), where=denom > np.finfo(float).eps)
        for a, (g, _) in enumerate(g_items):
            for b, (p, _) in enumerate(p_items):
                pot[g, p] = pot.get((g, p), 0.0) + sim_iou[a, b]
    align = {k: v / (gt_count[k[0]] + pr_count[k[1]] - v) for k, v in pot.items()}

    matches = {}
    tp = 0
    for f in frames:
        g_items, p_items = gt.get(f, []), pred.get(f, [])
        best_key, best_match = None, []
        for match in all_matchings(len(g_items), len(p_items)):
            key = sum(align.get((g_items[a][0], p_items[b][0]), 0.0) * iou(g_items[a][1], p_items[b][1])
                      for a, b in match)
            if best_key is None or key > best_key + 1e-12:
                best_key, best_match = key, match
        best_match = [(a, b) for a, b in best_match
                      if iou(g_items[a][1], p_items[b][1]) >= alpha - np.finfo(float).eps]
        for a, b in best_match:
            pair = (g_items[a][0], p_items[b][0])
            matches[pair] = matches.get(pair, 0) + 1
            tp += 1
    if tp == 0:
        return 0.0
    total = 0.0
    for (g, p), n in matches.items():
        total += n * n / (gt_count[g] + pr_count[p] - n)
    return total / tp


def random_instance(rng, n_obj=None, n_frames=None):
    """Up to 3 objects over up to 12 frames with jitter, drops, swaps and stray boxes."""
    n_obj = n_obj or int(rng.integers(1, 4))
    n_frames = n_frames or int(rng.integers(2, 13))
    gt, pred = {}, {}
    starts = rng.uniform(0, 60, size=(n_obj, 2))
    vel = rng.uniform(-4, 4, size=(n_obj, 2))
    labels = list(range(1, n_obj + 1))
    for f in range(1, n_frames + 1):
        if rng.random() < 0.2:
            labels = list(rng.permutation(labels))
        for k in range(n_obj):
            if rng.random() < 0.1:
                continue
            x, y = starts[k] + vel[k] * f
            gt.setdefault(f, []).append((k + 1, BBox(x, y, 20.0, 30.0)))
            if rng.random() < 0.15:
                continue
            j = rng.normal(0, 3, size=4)
            pred.setdefault(f, []).append(
                (int(labels[k]) + (10 if rng.random() < 0.1 else 0),
                 BBox(x + j[0], y + j[1], 20.0 + abs(j[2]), 30.0 + abs(j[3]))))
        if rng.random() < 0.2:
            pred.setdefault(f, []).append((7, BBox(*rng.uniform(0, 80, 2), 20.0, 30.0)))
    if not gt:
        gt[1] = [(1, BBox(0, 0, 20, 30))]
    # drop duplicate ids within a frame that the id perturbation may create
    for f, items in pred.items():
        seen, keep = set(), []
        for i, b in items:
            if i not in seen:
                seen.add(i)
                keep.append((i, b))
        pred[f] = keep
    return gt, pred
