"""MA-SORT: online tracking with appearance/motion weights set per frame.

Each frame the tracker

1. predicts every live track one step ahead,
2. measures how alike the frame's detection embeddings are and derives
   the appearance and motion weights from it,
3. fuses ``w_m * (IoU + lambda * C_v) + w_a * C_a`` into one score matrix,
4. solves a single gated assignment,
5. updates matched tracks (replaying the gap along a virtual trajectory
   when a lost track comes back) and manages track lifecycles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np

from . import assignment
from .appearance import (
    MOTION_ONLY_WEIGHTS,
    NEUTRAL_WEIGHTS,
    AdaptiveWeights,
    adaptive_weights,
    appearance_matrix,
    ema_update,
    uniformity,
)
from .errors import ConfigurationError, InvalidInputError, SequencingError
from .geometry import BBox, Detection, iou_matrix
from .motion import DEFAULT_MOTION, KalmanState, MotionConfig, kf_init, kf_predict, kf_update, oru_reupdate


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    LOST = "lost"
    REMOVED = "removed"


_ALLOWED = {
    TrackStatus.TENTATIVE: {TrackStatus.CONFIRMED, TrackStatus.REMOVED},
    TrackStatus.CONFIRMED: {TrackStatus.LOST},
    TrackStatus.LOST: {TrackStatus.CONFIRMED, TrackStatus.REMOVED},
    TrackStatus.REMOVED: set(),
}


@dataclass(frozen=True)
class TrackerConfig:
    """Tracker hyper-parameters.

    ``theta`` (degrees) sets how alike detections must look before
    appearance loses weight. ``lambda_`` weighs the direction-consistency
    term, ``gate`` is the minimum fused score of an accepted match.
    ``iou_min`` is a motion feasibility floor: pairs whose IoU with the
    predicted box is below it cannot match however alike they look.
    ``use_oru`` switches the occlusion re-update off for ablations, and
    ``clamp_weights`` keeps the appearance weight within [0, 1].
    """

    theta: float = 67.5
    lambda_: float = 0.2
    gate: float = 0.25
    iou_min: float = 0.1
    min_hits: int = 3
    max_age: int = 30
    delta_t: int = 3
    alpha_ema: float = 0.95
    clamp_weights: bool = True
    use_oru: bool = True
    motion: MotionConfig = DEFAULT_MOTION

    def __post_init__(self):
        if not (0.0 < self.theta < 90.0):
            raise ConfigurationError(f"theta must be in (0, 90) degrees, got {self.theta}")
        if not (self.lambda_ >= 0 and math.isfinite(self.lambda_)):
            raise ConfigurationError(f"lambda must be a finite non-negative number, got {self.lambda_}")
        if not math.isfinite(self.gate):
            raise ConfigurationError("gate must be finite")
        if not (0.0 <= self.iou_min <= 1.0):
            raise ConfigurationError(f"iou_min must be in [0, 1], got {self.iou_min}")
        if self.min_hits < 1:
            raise ConfigurationError("min_hits must be >= 1")
        if self.max_age < 0:
            raise ConfigurationError("max_age must be >= 0")
        if self.delta_t < 1:
            raise ConfigurationError("delta_t must be >= 1")
        if not (0.0 <= self.alpha_ema <= 1.0):
            raise ConfigurationError("alpha_ema must be in [0, 1]")

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "motion":
                continue
            out["lambda" if f.name == "lambda_" else f.name] = getattr(self, f.name)
        return out


@dataclass
class Track:
    id: int
    state: KalmanState
    checkpoint: KalmanState
    ema_feat: Optional[np.ndarray] = None
    history: dict[int, BBox] = field(default_factory=dict)
    hits: int = 1
    hit_streak: int = 1
    age: int = 0
    time_since_update: int = 0
    status: TrackStatus = TrackStatus.TENTATIVE

    @property
    def last_frame(self) -> int:
        return next(reversed(self.history))

    @property
    def last_observation(self) -> BBox:
        return self.history[self.last_frame]

    def set_status(self, new: TrackStatus) -> None:
        if new == self.status:
            return
        if new not in _ALLOWED[self.status]:
            raise SequencingError(f"track {self.id}: illegal transition {self.status.value} -> {new.value}")
        self.status = new


@dataclass(frozen=True)
class FrameDiagnostics:
    """What the tracker decided on one frame, for instrumentation."""

    frame: int
    n_detections: int
    n_tracks: int
    mu_det: Optional[float]
    weights: AdaptiveWeights
    mode: str
    matches: tuple[tuple[int, int], ...]


def _direction(p: tuple[float, float], q: tuple[float, float]) -> np.ndarray:
    return np.array([q[0] - p[0], q[1] - p[1]], dtype=float)


def velocity_consistency(track: Track, det: BBox, delta_t: int = 3) -> float:
    """Cosine between a track's recent heading and the step to ``det``.

    The heading runs from an earlier observation (the oldest one within
    ``delta_t`` frames of the latest, else the newest one before that
    window) to the latest observation. The step runs from the latest
    observation's center to the detection's center. Returns 0 when the
    track has fewer than two observations or either direction is zero.
    """
    if len(track.history) < 2:
        return 0.0
    frames = list(track.history)
    latest = frames[-1]
    earlier = [f for f in frames[:-1] if f >= latest - delta_t]
    ref = earlier[0] if earlier else frames[-2]
    u = _direction(track.history[ref].center, track.history[latest].center)
    v = _direction(track.history[latest].center, det.center)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def velocity_matrix(tracks: Sequence[Track], dets: Sequence[BBox], delta_t: int = 3) -> np.ndarray:
    """:func:`velocity_consistency` for every (detection, track) pair."""
    out = np.zeros((len(dets), len(tracks)))
    for j, trk in enumerate(tracks):
        for i, d in enumerate(dets):
            out[i, j] = velocity_consistency(trk, d, delta_t)
    return out


def fused_cost(iou_m, cv_m, ca_m, w: AdaptiveWeights, lambda_: float) -> np.ndarray:
    """``w_m * (iou + lambda * cv) + w_a * ca``, entrywise."""
    iou_m = np.asarray(iou_m, dtype=float)
    cv_m = np.asarray(cv_m, dtype=float)
    ca_m = np.asarray(ca_m, dtype=float)
    if not (iou_m.shape == cv_m.shape == ca_m.shape) or iou_m.ndim != 2:
        raise InvalidInputError(
            f"cost matrices must share one 2-D shape, got {iou_m.shape}, {cv_m.shape}, {ca_m.shape}")
    return w.w_m * (iou_m + lambda_ * cv_m) + w.w_a * ca_m


def mask_infeasible(scores: np.ndarray, iou_m: np.ndarray, iou_min: float, gate: float) -> np.ndarray:
    """Push pairs with ``IoU < iou_min`` strictly below the gate so they cannot match."""
    if iou_min <= 0 or scores.size == 0:
        return scores
    floor = min(gate, 0.0) - 1.0
    return np.where(iou_m >= iou_min, scores, floor)


Solver = Callable[..., assignment.Assignment]


class MASort:
    """Stateful online tracker; feed frames in increasing order with :meth:`step`.

    Parameters
    ----------
    config : TrackerConfig
    solver : callable, optional
        Replacement for :func:`masort.assignment.solve`, e.g. to count calls.
    on_frame : callable, optional
        Receives a :class:`FrameDiagnostics` after every step.
    """

    def __init__(self, config: TrackerConfig | None = None, solver: Solver | None = None,
                 on_frame: Callable[[FrameDiagnostics], None] | None = None):
        self.config = config or TrackerConfig()
        self.solver = solver or assignment.solve
        self.on_frame = on_frame
        self.tracks: list[Track] = []
        self.frame: Optional[int] = None
        self._next_id = 1

    @property
    def live_tracks(self) -> list[Track]:
        return [t for t in self.tracks if t.status != TrackStatus.REMOVED]

    def _features_mode(self, detections: Sequence[Detection]) -> str:
        have = [d.feature is not None for d in detections]
        if all(have) and have:
            return "appearance"
        if not any(have):
            return "motion-only"
        raise InvalidInputError("frame mixes detections with and without features")

    def step(self, frame_index: int, detections: Sequence[Detection]) -> list[tuple[int, BBox]]:
        """Process one frame and return ``(track id, box)`` for confirmed tracks it updated."""
        cfg = self.config
        if self.frame is not None and frame_index <= self.frame:
            raise SequencingError(f"frame {frame_index} does not follow frame {self.frame}")
        self.frame = frame_index
        mode = self._features_mode(detections)

        tracks = self.live_tracks
        predicted = []
        for trk in tracks:
            trk.state, box = kf_predict(trk.state, cfg.motion)
            trk.age += 1
            predicted.append(box)

        boxes = [d.bbox for d in detections]
        mu_det = None
        if not detections:
            weights = NEUTRAL_WEIGHTS
        elif mode == "motion-only":
            weights = MOTION_ONLY_WEIGHTS
        else:
            mu_det = uniformity([d.feature for d in detections]).mu_det
            weights = adaptive_weights(mu_det, cfg.theta, clamp=cfg.clamp_weights)

        iou_m = iou_matrix(boxes, predicted)
        cv_m = velocity_matrix(tracks, boxes, cfg.delta_t)
        ca_m = np.zeros_like(iou_m)
        if mode == "appearance" and tracks:
            with_feat = [j for j, t in enumerate(tracks) if t.ema_feat is not None]
            if with_feat:
                ca_m[:, with_feat] = appearance_matrix(
                    [d.feature for d in detections], [tracks[j].ema_feat for j in with_feat])
        scores = fused_cost(iou_m, cv_m, ca_m, weights, cfg.lambda_)
        scores = mask_infeasible(scores, iou_m, cfg.iou_min, cfg.gate)
        result = self.solver(scores, cfg.gate)

        for i, j in result.matches:
            self._update_track(tracks[j], detections[i], frame_index)
        for j in result.unmatched_cols:
            self._miss_track(tracks[j])
        for i in result.unmatched_rows:
            self._spawn(detections[i], frame_index)

        self.tracks = [t for t in self.tracks if t.status != TrackStatus.REMOVED]
        outputs = sorted(
            (t.id, t.history[frame_index]) for t in self.tracks
            if t.status == TrackStatus.CONFIRMED and t.time_since_update == 0
        )
        if self.on_frame is not None:
            self.on_frame(FrameDiagnostics(
                frame=frame_index, n_detections=len(detections), n_tracks=len(tracks),
                mu_det=mu_det, weights=weights, mode=mode,
                matches=tuple((i, tracks[j].id) for i, j in result.matches),
            ))
        return outputs

    def _update_track(self, trk: Track, det: Detection, frame: int) -> None:
        cfg = self.config
        gap = frame - trk.last_frame
        if cfg.use_oru and gap > 1:
            trk.state = oru_reupdate(trk.checkpoint, trk.last_observation, det.bbox, gap, cfg.motion)
        else:
            trk.state = kf_update(trk.state, det.bbox, cfg.motion)
        trk.checkpoint = trk.state
        if det.feature is not None:
            trk.ema_feat = det.feature if trk.ema_feat is None else ema_update(
                trk.ema_feat, det.feature, cfg.alpha_ema)
        trk.history[frame] = det.bbox
        trk.hits += 1
        trk.hit_streak = trk.hit_streak + 1 if trk.time_since_update == 0 else 1
        trk.time_since_update = 0
        if trk.status == TrackStatus.LOST:
            trk.set_status(TrackStatus.CONFIRMED)
        elif trk.status == TrackStatus.TENTATIVE and trk.hit_streak >= cfg.min_hits:
            trk.set_status(TrackStatus.CONFIRMED)

    def _miss_track(self, trk: Track) -> None:
        trk.time_since_update += 1
        trk.hit_streak = 0
        if trk.status == TrackStatus.TENTATIVE:
            trk.set_status(TrackStatus.REMOVED)
        elif trk.status == TrackStatus.CONFIRMED:
            trk.set_status(TrackStatus.LOST)
        if trk.status == TrackStatus.LOST and trk.time_since_update > self.config.max_age:
            trk.set_status(TrackStatus.REMOVED)

    def _spawn(self, det: Detection, frame: int) -> Track:
        state = kf_init(det.bbox, self.config.motion)
        trk = Track(id=self._next_id, state=state, checkpoint=state, ema_feat=det.feature,
                    history={frame: det.bbox})
        self._next_id += 1
        if self.config.min_hits <= 1:
            trk.set_status(TrackStatus.CONFIRMED)
        self.tracks.append(trk)
        return trk


def run(detections: dict[int, Sequence[Detection]], config: TrackerConfig | None = None,
        **kwargs) -> dict[int, list[tuple[int, BBox]]]:
    """Track a whole sequence given as ``{frame: detections}``.

    Frames missing from the mapping between its first and last frame are
    fed as empty frames so lost tracks age correctly.
    """
    tracker = MASort(config, **kwargs)
    out: dict[int, list[tuple[int, BBox]]] = {}
    if not detections:
        return out
    first, last = min(detections), max(detections)
    for frame in range(first, last + 1):
        res = tracker.step(frame, detections.get(frame, []))
        if res:
            out[frame] = res
    return out
