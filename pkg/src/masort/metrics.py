"""Tracking evaluation: CLEAR MOT, identity (IDF1) and HOTA.

The three protocols follow the public MOTChallenge evaluation toolkit:

* CLEAR matches per frame on IoU, favouring the previous frame's pairs, and
  counts an identity switch whenever a ground-truth object is matched to a
  different prediction id than the last time it was matched.
* IDF1 finds one global bijection between ground-truth and predicted
  trajectories that maximises the number of co-located boxes.
* HOTA sweeps the localisation threshold ``alpha`` over 0.05..0.95 and
  averages ``sqrt(DetA * AssA)``; per-frame matching is weighted by a global
  alignment score so that matches agree with long-term associations.

Inputs are ``{frame: [(id, BBox), ...]}`` mappings.

Worked values for the fixture sequences in ``tests/fixtures/metrics``
(boxes exact, so every true pair has IoU 1 and HOTA is flat over alpha):

* perfect: FP = FN = IDSW = 0, so MOTA = IDF1 = HOTA = 1.
* single_fp, 1 object x 10 frames plus one stray box: MOTA = 1 - 1/10 = 0.9.
* id_swap, 2 objects x 10 frames, ids exchanged from frame 6: each object
  switches once, MOTA = 1 - 2/20 = 0.9. The best bijection keeps 5 of 10
  frames per object, IDF1 = 2*10 / (20 + 20) = 0.5.
* split_track, 1 object x 10 frames reported as id 1 (frames 1-5) then
  id 2 (6-10): one switch, MOTA = 0.9; IDTP = 5, IDF1 = 10/20 = 0.5;
  DetA = 1 and each true pair has A = 5 / (10 + 5 - 5) = 0.5, so
  AssA = 0.5 and HOTA = sqrt(0.5).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import UndefinedMetricError
from .geometry import BBox, iou_matrix

ALPHAS = np.arange(0.05, 0.99, 0.05)
_EPS = np.finfo(float).eps

Tracks = Mapping[int, Sequence[tuple[int, BBox]]]


@dataclass
class _Frames:
    gt_ids: list[np.ndarray]
    pred_ids: list[np.ndarray]
    sims: list[np.ndarray]
    n_gt_ids: int
    n_pred_ids: int
    n_gt_dets: int
    n_pred_dets: int


def _prepare(gt: Tracks, pred: Tracks) -> _Frames:
    frames = sorted(set(gt) | set(pred))
    gt_map: dict[int, int] = {}
    pred_map: dict[int, int] = {}
    for f in frames:
        for tid, _ in gt.get(f, ()):
            gt_map.setdefault(tid, len(gt_map))
        for tid, _ in pred.get(f, ()):
            pred_map.setdefault(tid, len(pred_map))
    out = _Frames([], [], [], len(gt_map), len(pred_map), 0, 0)
    for f in frames:
        g = list(gt.get(f, ()))
        p = list(pred.get(f, ()))
        out.gt_ids.append(np.array([gt_map[t] for t, _ in g], dtype=int))
        out.pred_ids.append(np.array([pred_map[t] for t, _ in p], dtype=int))
        out.sims.append(iou_matrix([b for _, b in g], [b for _, b in p]))
        out.n_gt_dets += len(g)
        out.n_pred_dets += len(p)
    if out.n_gt_dets == 0:
        raise UndefinedMetricError("ground truth contains no boxes")
    return out


@dataclass
class ClearResult:
    mota: float
    tp: int
    fp: int
    fn: int
    idsw: int
    motp: float = 0.0


def _clear(d: _Frames, iou_thresh: float) -> ClearResult:
    tp = fp = fn = idsw = 0
    motp_sum = 0.0
    prev_id = np.full(d.n_gt_ids, np.nan)
    prev_step_id = np.full(d.n_gt_ids, np.nan)
    for gt_t, pr_t, sim in zip(d.gt_ids, d.pred_ids, d.sims):
        if len(gt_t) == 0:
            fp += len(pr_t)
            continue
        if len(pr_t) == 0:
            fn += len(gt_t)
            continue
        carried = pr_t[None, :] == prev_step_id[gt_t[:, None]]
        score = 1000.0 * carried + sim
        score[sim < iou_thresh - _EPS] = 0.0
        rows, cols = linear_sum_assignment(-score)
        keep = score[rows, cols] > 0 + _EPS
        rows, cols = rows[keep], cols[keep]
        matched_gt = gt_t[rows]
        matched_pr = pr_t[cols]
        before = prev_id[matched_gt]
        idsw += int(np.sum(~np.isnan(before) & (before != matched_pr)))
        prev_id[matched_gt] = matched_pr
        prev_step_id[:] = np.nan
        prev_step_id[matched_gt] = matched_pr
        n = len(rows)
        tp += n
        fn += len(gt_t) - n
        fp += len(pr_t) - n
        motp_sum += float(sim[rows, cols].sum())
    total = tp + fn
    mota = (tp - fp - idsw) / total
    return ClearResult(mota=mota, tp=tp, fp=fp, fn=fn, idsw=idsw, motp=motp_sum / max(1, tp))


def clear_mota(gt: Tracks, pred: Tracks, iou_thresh: float = 0.5) -> ClearResult:
    """CLEAR MOT accuracy and its counts.

    ``mota = 1 - (FN + FP + IDSW) / total_gt``. Raises
    :class:`UndefinedMetricError` when the ground truth is empty.
    """
    _check_thresh(iou_thresh)
    return _clear(_prepare(gt, pred), iou_thresh)


@dataclass
class IdentityResult:
    idf1: float
    idtp: int
    idfp: int
    idfn: int


def _identity(d: _Frames, iou_thresh: float) -> IdentityResult:
    overlap = np.zeros((d.n_gt_ids, d.n_pred_ids))
    for gt_t, pr_t, sim in zip(d.gt_ids, d.pred_ids, d.sims):
        gi, pi = np.nonzero(sim >= iou_thresh - _EPS)
        np.add.at(overlap, (gt_t[gi], pr_t[pi]), 1)
    if overlap.size:
        rows, cols = linear_sum_assignment(overlap, maximize=True)
        idtp = int(round(overlap[rows, cols].sum()))
    else:
        idtp = 0
    idfn = d.n_gt_dets - idtp
    idfp = d.n_pred_dets - idtp
    idf1 = 2 * idtp / max(1, 2 * idtp + idfp + idfn)
    return IdentityResult(idf1=idf1, idtp=idtp, idfp=idfp, idfn=idfn)


def idf1(gt: Tracks, pred: Tracks, iou_thresh: float = 0.5) -> IdentityResult:
    """Identity F1 under the best global one-to-one trajectory mapping."""
    _check_thresh(iou_thresh)
    return _identity(_prepare(gt, pred), iou_thresh)


@dataclass
class HotaResult:
    hota: float
    deta: float
    assa: float
    per_alpha: list[tuple[float, float, float, float]]
    tp: np.ndarray
    fn: np.ndarray
    fp: np.ndarray
    assa_alpha: np.ndarray = field(repr=False, default=None)


def _hota(d: _Frames) -> HotaResult:
    n_a = len(ALPHAS)
    tp = np.zeros(n_a)
    fn = np.zeros(n_a)
    fp = np.zeros(n_a)
    potential = np.zeros((d.n_gt_ids, d.n_pred_ids))
    gt_count = np.zeros((d.n_gt_ids, 1))
    pred_count = np.zeros((1, d.n_pred_ids))
    for gt_t, pr_t, sim in zip(d.gt_ids, d.pred_ids, d.sims):
        denom = sim.sum(0)[None, :] + sim.sum(1)[:, None] - sim
        sim_iou = np.zeros_like(sim)
        mask = denom > _EPS
        sim_iou[mask] = sim[mask] / denom[mask]
        potential[gt_t[:, None], pr_t[None, :]] += sim_iou
        gt_count[gt_t] += 1
        pred_count[0, pr_t] += 1
    alignment = potential / (gt_count + pred_count - potential)

    match_counts = [np.zeros((d.n_gt_ids, d.n_pred_ids)) for _ in ALPHAS]
    for gt_t, pr_t, sim in zip(d.gt_ids, d.pred_ids, d.sims):
        if len(gt_t) == 0:
            fp += len(pr_t)
            continue
        if len(pr_t) == 0:
            fn += len(gt_t)
            continue
        score = alignment[gt_t[:, None], pr_t[None, :]] * sim
        rows, cols = linear_sum_assignment(-score)
        for a, alpha in enumerate(ALPHAS):
            ok = sim[rows, cols] >= alpha - _EPS
            r, c = rows[ok], cols[ok]
            n = len(r)
            tp[a] += n
            fn[a] += len(gt_t) - n
            fp[a] += len(pr_t) - n
            if n:
                match_counts[a][gt_t[r], pr_t[c]] += 1

    assa = np.zeros(n_a)
    for a in range(n_a):
        mc = match_counts[a]
        ass = mc / np.maximum(1, gt_count + pred_count - mc)
        assa[a] = np.sum(mc * ass) / max(1.0, tp[a])
    deta = tp / np.maximum(1, tp + fn + fp)
    hota_a = np.sqrt(deta * assa)
    per_alpha = [(float(al), float(h), float(de), float(aa))
                 for al, h, de, aa in zip(ALPHAS, hota_a, deta, assa)]
    return HotaResult(hota=float(hota_a.mean()), deta=float(deta.mean()), assa=float(assa.mean()),
                      per_alpha=per_alpha, tp=tp, fn=fn, fp=fp, assa_alpha=assa)


def hota(gt: Tracks, pred: Tracks) -> HotaResult:
    """HOTA with its DetA/AssA factors per alpha and averaged over the alpha grid."""
    return _hota(_prepare(gt, pred))


@dataclass
class MetricsReport:
    hota: float
    deta: float
    assa: float
    per_alpha: list[tuple[float, float, float, float]]
    mota: float
    idf1: float
    clear: ClearResult
    identity: IdentityResult
    hota_counts: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        """Machine-readable report. Top-level keys follow MOTChallenge names."""
        return {
            "HOTA": self.hota,
            "DetA": self.deta,
            "AssA": self.assa,
            "MOTA": self.mota,
            "IDF1": self.idf1,
            "TP": self.clear.tp,
            "FP": self.clear.fp,
            "FN": self.clear.fn,
            "IDSW": self.clear.idsw,
            "IDTP": self.identity.idtp,
            "IDFP": self.identity.idfp,
            "IDFN": self.identity.idfn,
            "per_alpha": [
                {"alpha": round(a, 2), "HOTA": h, "DetA": de, "AssA": aa}
                for a, h, de, aa in self.per_alpha
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def table(self) -> str:
        rows = [
            ("HOTA", f"{100 * self.hota:.3f}"),
            ("DetA", f"{100 * self.deta:.3f}"),
            ("AssA", f"{100 * self.assa:.3f}"),
            ("MOTA", f"{100 * self.mota:.3f}"),
            ("IDF1", f"{100 * self.idf1:.3f}"),
            ("TP", str(self.clear.tp)),
            ("FP", str(self.clear.fp)),
            ("FN", str(self.clear.fn)),
            ("IDSW", str(self.clear.idsw)),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v:>10}" for k, v in rows) + "\n"


def evaluate(gt: Tracks, pred: Tracks, iou_thresh: float = 0.5) -> MetricsReport:
    """All metrics for one sequence."""
    _check_thresh(iou_thresh)
    d = _prepare(gt, pred)
    c = _clear(d, iou_thresh)
    i = _identity(d, iou_thresh)
    h = _hota(d)
    return MetricsReport(
        hota=h.hota, deta=h.deta, assa=h.assa, per_alpha=h.per_alpha,
        mota=c.mota, idf1=i.idf1, clear=c, identity=i,
        hota_counts={"tp": h.tp, "fn": h.fn, "fp": h.fp, "assa": h.assa_alpha},
    )


def combine(reports: Sequence[MetricsReport], mode: str = "pooled") -> MetricsReport:
    """Aggregate per-sequence reports.

    ``pooled`` sums counts over sequences (AssA weighted by each
    sequence's HOTA true positives); ``mean`` averages each metric.
    """
    if not reports:
        raise UndefinedMetricError("no sequences to combine")
    if mode == "mean":
        per_alpha = []
        for k in range(len(ALPHAS)):
            vals = np.array([r.per_alpha[k] for r in reports])
            per_alpha.append(tuple(float(v) for v in vals.mean(axis=0)))
        return MetricsReport(
            hota=float(np.mean([r.hota for r in reports])),
            deta=float(np.mean([r.deta for r in reports])),
            assa=float(np.mean([r.assa for r in reports])),
            per_alpha=per_alpha,
            mota=float(np.mean([r.mota for r in reports])),
            idf1=float(np.mean([r.idf1 for r in reports])),
            clear=_sum_clear(reports), identity=_sum_identity(reports),
        )
    if mode != "pooled":
        raise ValueError(f"unknown aggregation mode {mode!r}")
    tp = sum(r.hota_counts["tp"] for r in reports)
    fn = sum(r.hota_counts["fn"] for r in reports)
    fp = sum(r.hota_counts["fp"] for r in reports)
    assa = sum(r.hota_counts["assa"] * r.hota_counts["tp"] for r in reports) / np.maximum(1.0, tp)
    deta = tp / np.maximum(1, tp + fn + fp)
    hota_a = np.sqrt(deta * assa)
    c = _sum_clear(reports)
    i = _sum_identity(reports)
    return MetricsReport(
        hota=float(hota_a.mean()), deta=float(deta.mean()), assa=float(assa.mean()),
        per_alpha=[(float(a), float(h), float(de), float(aa)) for a, h, de, aa in zip(ALPHAS, hota_a, deta, assa)],
        mota=c.mota, idf1=i.idf1, clear=c, identity=i,
        hota_counts={"tp": tp, "fn": fn, "fp": fp, "assa": assa},
    )


def _sum_clear(reports) -> ClearResult:
    tp = sum(r.clear.tp for r in reports)
    fp = sum(r.clear.fp for r in reports)
    fn = sum(r.clear.fn for r in reports)
    idsw = sum(r.clear.idsw for r in reports)
    motp = sum(r.clear.motp * r.clear.tp for r in reports) / max(1, tp)
    return ClearResult(mota=(tp - fp - idsw) / max(1, tp + fn), tp=tp, fp=fp, fn=fn, idsw=idsw, motp=motp)


def _sum_identity(reports) -> IdentityResult:
    idtp = sum(r.identity.idtp for r in reports)
    idfp = sum(r.identity.idfp for r in reports)
    idfn = sum(r.identity.idfn for r in reports)
    return IdentityResult(idf1=2 * idtp / max(1, 2 * idtp + idfp + idfn), idtp=idtp, idfp=idfp, idfn=idfn)


def _check_thresh(t: float) -> None:
    if not (0.0 < t < 1.0) or math.isnan(t):
        raise ValueError(f"iou_thresh must be in (0, 1), got {t}")
