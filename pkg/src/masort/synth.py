"""Deterministic synthetic tracking scenarios and QGM proposal pools.

All randomness comes from NumPy's PCG64 bit generator seeded with
``ScenarioConfig.seed``, drawn in a fixed order, so the same config always
reproduces the same boxes, features and files.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .geometry import BBox, Detection
from .mot_io import write_detections, write_features, write_gt, write_proposals
from .qgm import Proposal

MOTIONS = ("constant-velocity", "sinusoidal-crossing")
FEATURE_MODES = ("distinct", "identical", "clustered")


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of a synthetic sequence.

    ``occlusion_windows`` holds ``(object_id, start, end)`` triples (1-based
    ids, inclusive frames) during which the object yields no detection.
    ``waypoints`` optionally pins constant-velocity objects to explicit
    ``((x_start, y_start), (x_end, y_end))`` top-left positions.
    """

    seed: int = 0
    n_objects: int = 5
    n_frames: int = 100
    arena: tuple[float, float] = (640.0, 480.0)
    motion: str = "constant-velocity"
    feature_dim: int = 16
    feature_mode: str = "distinct"
    cos_floor: float = 0.9
    feature_noise: float = 0.0
    det_noise_std: float = 0.0
    fp_rate: float = 0.0
    fn_rate: float = 0.0
    occlusion_windows: tuple[tuple[int, int, int], ...] = ()
    min_size: tuple[float, float] = (24.0, 48.0)
    max_size: tuple[float, float] = (48.0, 96.0)
    waypoints: Optional[tuple[tuple[tuple[float, float], tuple[float, float]], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "arena", tuple(float(v) for v in self.arena))
        object.__setattr__(self, "min_size", tuple(float(v) for v in self.min_size))
        object.__setattr__(self, "max_size", tuple(float(v) for v in self.max_size))
        object.__setattr__(self, "occlusion_windows",
                           tuple(tuple(int(v) for v in w) for w in self.occlusion_windows))
        if self.waypoints is not None:
            object.__setattr__(self, "waypoints", tuple(
                (tuple(float(v) for v in a), tuple(float(v) for v in b)) for a, b in self.waypoints))
        self.validate()

    def validate(self) -> None:
        if self.n_objects < 0 or self.n_frames < 1:
            raise ConfigurationError("need n_objects >= 0 and n_frames >= 1")
        if self.motion not in MOTIONS:
            raise ConfigurationError(f"motion must be one of {MOTIONS}, got {self.motion!r}")
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigurationError(f"feature_mode must be one of {FEATURE_MODES}, got {self.feature_mode!r}")
        if self.feature_dim < 1:
            raise ConfigurationError("feature_dim must be >= 1")
        if not (-1.0 < self.cos_floor < 1.0):
            raise ConfigurationError("cos_floor must be in (-1, 1)")
        for name in ("feature_noise", "det_noise_std", "fp_rate"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if not (0.0 <= self.fn_rate <= 1.0):
            raise ConfigurationError("fn_rate must be in [0, 1]")
        aw, ah = self.arena
        if not (aw > 0 and ah > 0):
            raise ConfigurationError("arena must have positive size")
        if any(lo <= 0 or lo > hi for lo, hi in zip(self.min_size, self.max_size)):
            raise ConfigurationError("object sizes need 0 < min_size <= max_size")
        if self.max_size[0] >= aw or self.max_size[1] >= ah:
            raise ConfigurationError(f"objects up to {self.max_size} do not fit in arena {self.arena}")
        for obj, start, end in self.occlusion_windows:
            if not (1 <= obj <= self.n_objects) or start > end:
                raise ConfigurationError(f"bad occlusion window {(obj, start, end)}")
        if self.waypoints is not None and len(self.waypoints) != self.n_objects:
            raise ConfigurationError("waypoints must list one (start, end) pair per object")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Scenario:
    """Generated sequence: ground truth, detections and which object each detection came from."""

    config: ScenarioConfig
    gt: dict[int, list[tuple[int, BBox]]]
    detections: dict[int, list[Detection]]
    sources: dict[int, list[int]]
    object_features: np.ndarray = field(repr=False)

    def write(self, out_dir) -> dict[str, Path]:
        """Write ``gt.txt``, ``det.txt``, ``feat.txt`` and ``scenario.json`` into ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "gt": out / "gt.txt",
            "det": out / "det.txt",
            "feat": out / "feat.txt",
            "scenario": out / "scenario.json",
        }
        write_gt(paths["gt"], self.gt)
        write_detections(paths["det"], self.detections)
        write_features(paths["feat"], self.detections)
        paths["scenario"].write_text(json.dumps(self.config.to_dict(), indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8", newline="\n")
        return paths


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _orthonormal(rng: np.random.Generator, dim: int, k: int) -> np.ndarray:
    """``k`` orthonormal rows of length ``dim`` (requires ``k <= dim``)."""
    a = rng.standard_normal((dim, k))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
    return q.T[:k]


def _unit_rows(rng: np.random.Generator, k: int, dim: int) -> np.ndarray:
    v = rng.standard_normal((k, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def cluster_features(rng: np.random.Generator, n: int, dim: int, cos_floor: float,
                     n_outliers: int = 0, outlier_cos: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Unit features for one tight class plus optional far-away outliers.

    Class members sit at half the floor angle from a shared center, so any
    two of them have cosine at least ``cos_floor``. When the dimension
    allows, members and outliers use mutually orthogonal offsets, which
    bounds every outlier-to-member cosine by ``outlier_cos``.
    """
    half = math.acos(cos_floor) / 2.0
    if dim >= 1 + n + n_outliers:
        basis = _orthonormal(rng, dim, 1 + n + n_outliers)
        center, offsets, far = basis[0], basis[1:1 + n], basis[1 + n:]
    else:
        if n_outliers:
            raise ConfigurationError(f"feature_dim {dim} too small for {n} members and {n_outliers} outliers")
        center = _unit_rows(rng, 1, dim)[0]
        raw = rng.standard_normal((n, dim))
        raw -= np.outer(raw @ center, center)
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
        offsets = raw / np.where(norms == 0, 1.0, norms)
        far = np.zeros((0, dim))
    members = math.cos(half) * center + math.sin(half) * offsets
    psi = math.acos(outlier_cos)
    outliers = math.cos(psi) * center + math.sin(psi) * far
    return members, outliers


def _object_features(rng: np.random.Generator, cfg: ScenarioConfig) -> np.ndarray:
    n, dim = cfg.n_objects, cfg.feature_dim
    if n == 0:
        return np.zeros((0, dim))
    if cfg.feature_mode == "identical":
        return np.repeat(_unit_rows(rng, 1, dim), n, axis=0)
    if cfg.feature_mode == "distinct":
        if n <= dim:
            return _orthonormal(rng, dim, n)
        return _unit_rows(rng, n, dim)
    members, _ = cluster_features(rng, n, dim, cfg.cos_floor)
    return members


def _trajectories(rng: np.random.Generator, cfg: ScenarioConfig, sizes: np.ndarray) -> np.ndarray:
    """Top-left positions, shape ``(n_objects, n_frames, 2)``."""
    aw, ah = cfg.arena
    n, t = cfg.n_objects, cfg.n_frames
    frac = np.arange(t) / max(1, t - 1)
    pos = np.zeros((n, t, 2))
    if cfg.motion == "constant-velocity":
        for k in range(n):
            w, h = sizes[k]
            if cfg.waypoints is not None:
                start, end = np.array(cfg.waypoints[k][0]), np.array(cfg.waypoints[k][1])
            else:
                start = rng.uniform([0, 0], [aw - w, ah - h])
                end = rng.uniform([0, 0], [aw - w, ah - h])
            pos[k] = start + frac[:, None] * (end - start)
    else:
        for k in range(n):
            w, h = sizes[k]
            margin = rng.uniform(0.0, 0.1) * (aw - w)
            x0, x1 = margin, aw - w - margin
            if k % 2:
                x0, x1 = x1, x0
            yc = rng.uniform(0.3, 0.7) * (ah - h)
            amp = min(yc, ah - h - yc) * rng.uniform(0.3, 0.9)
            periods = rng.uniform(0.5, 1.5)
            phase = rng.uniform(0, 2 * math.pi)
            pos[k, :, 0] = x0 + frac * (x1 - x0)
            pos[k, :, 1] = yc + amp * np.sin(2 * math.pi * periods * frac + phase)
    for k in range(n):
        w, h = sizes[k]
        pos[k, :, 0] = np.clip(pos[k, :, 0], 0.0, aw - w)
        pos[k, :, 1] = np.clip(pos[k, :, 1], 0.0, ah - h)
    return pos


def _clip_box(x: float, y: float, w: float, h: float, arena) -> BBox:
    aw, ah = arena
    w = min(max(w, 1.0), aw)
    h = min(max(h, 1.0), ah)
    x = min(max(x, 0.0), aw - w)
    y = min(max(y, 0.0), ah - h)
    return BBox(float(x), float(y), float(w), float(h))


def generate(cfg: ScenarioConfig) -> Scenario:
    """Build ground truth and noisy detections with features for ``cfg``.

    With zero noise and zero drop/false-positive rates the detections are
    exactly the ground-truth boxes.
    """
    cfg.validate()
    rng = _rng(cfg.seed)
    sizes = rng.uniform(cfg.min_size, cfg.max_size, size=(cfg.n_objects, 2))
    pos = _trajectories(rng, cfg, sizes)
    feats = _object_features(rng, cfg)
    shared = feats[0] if cfg.feature_mode == "identical" and len(feats) else None
    occluded = {(o, f) for o, s, e in cfg.occlusion_windows for f in range(s, e + 1)}

    gt: dict[int, list[tuple[int, BBox]]] = {}
    dets: dict[int, list[Detection]] = {}
    sources: dict[int, list[int]] = {}
    for t in range(cfg.n_frames):
        frame = t + 1
        rows = []
        frame_gt = []
        for k in range(cfg.n_objects):
            oid = k + 1
            w, h = sizes[k]
            box = BBox(float(pos[k, t, 0]), float(pos[k, t, 1]), float(w), float(h))
            frame_gt.append((oid, box))
            drop = rng.random() < cfg.fn_rate
            noise = rng.normal(0.0, cfg.det_noise_std, size=4) if cfg.det_noise_std > 0 else np.zeros(4)
            fnoise = rng.normal(0.0, cfg.feature_noise, size=cfg.feature_dim) if cfg.feature_noise > 0 else None
            if drop or (oid, frame) in occluded:
                continue
            if cfg.det_noise_std > 0:
                dbox = _clip_box(box.x + noise[0], box.y + noise[1], box.w + noise[2], box.h + noise[3], cfg.arena)
            else:
                dbox = box
            f = feats[k] if fnoise is None else feats[k] + fnoise
            if not np.any(f):
                f = feats[k]
            rows.append((oid, Detection(dbox, 1.0, f)))
        n_fp = int(rng.poisson(cfg.fp_rate)) if cfg.fp_rate > 0 else 0
        for _ in range(n_fp):
            w, h = rng.uniform(cfg.min_size, cfg.max_size)
            x, y = rng.uniform([0, 0], [cfg.arena[0] - w, cfg.arena[1] - h])
            f = shared if shared is not None else _unit_rows(rng, 1, cfg.feature_dim)[0]
            rows.append((0, Detection(BBox(float(x), float(y), float(w), float(h)), 0.5, f)))
        if len(rows) > 1:
            rows = [rows[i] for i in rng.permutation(len(rows))]
        gt[frame] = frame_gt
        if rows:
            dets[frame] = [d for _, d in rows]
            sources[frame] = [s for s, _ in rows]
    gt = {f: v for f, v in gt.items() if v}
    return Scenario(config=cfg, gt=gt, detections=dets, sources=sources, object_features=feats)


@dataclass
class ProposalPool:
    """Proposals with a label per proposal: ``class``, ``distractor`` or ``background``."""

    proposals: list[Proposal]
    labels: list[str]


def generate_proposal_pool(seed: int = 0, n_frames: int = 4, n_class: int = 8, n_distractors: int = 6,
                           n_background: int = 4, feature_dim: int = 64, cos_floor: float = 0.9,
                           distractor_cos: float = 0.5, arena=(640.0, 480.0)) -> ProposalPool:
    """A QGM fixture: a tight class cluster, planted distractors, and background.

    Class members have the highest specific-prompt scores, so the top
    ``n_class`` queries are always class members. Class members and
    distractors both pass the general-prompt threshold of 0.3; background
    proposals fall below it. Class features pairwise exceed ``cos_floor``;
    distractor features stay at or below ``distractor_cos`` against every
    class member.
    """
    if n_class < 1:
        raise ConfigurationError("need at least one class proposal")
    rng = _rng(seed)
    props: list[Proposal] = []
    labels: list[str] = []
    for frame in range(1, n_frames + 1):
        members, outliers = cluster_features(rng, n_class, feature_dim, cos_floor, n_distractors, distractor_cos)
        spec_class = rng.uniform(0.55, 0.95, size=n_class)
        spec_other = rng.uniform(0.0, 0.5, size=n_distractors + n_background)
        gen_class = rng.uniform(0.35, 0.95, size=n_class)
        gen_dis = rng.uniform(0.35, 0.9, size=n_distractors)
        gen_bg = rng.uniform(0.0, 0.29, size=n_background)
        bg_feats = _unit_rows(rng, n_background, feature_dim)
        rows = []
        for i in range(n_class):
            rows.append(("class", members[i], spec_class[i], gen_class[i]))
        for i in range(n_distractors):
            rows.append(("distractor", outliers[i], spec_other[i], gen_dis[i]))
        for i in range(n_background):
            rows.append(("background", bg_feats[i], spec_other[n_distractors + i], gen_bg[i]))
        for i in rng.permutation(len(rows)):
            label, feat, s_spec, s_gen = rows[i]
            w, h = rng.uniform([20, 20], [80, 80])
            x, y = rng.uniform([0, 0], [arena[0] - w, arena[1] - h])
            props.append(Proposal(BBox(float(x), float(y), float(w), float(h)), float(s_spec), float(s_gen),
                                  feat, frame=frame))
            labels.append(label)
    return ProposalPool(props, labels)


def write_proposal_pool(path, pool: ProposalPool) -> None:
    write_proposals(path, pool.proposals)


def pairwise_cosines(feats: Sequence[np.ndarray]) -> np.ndarray:
    f = np.stack([np.asarray(v, float) / np.linalg.norm(v) for v in feats])
    return f @ f.T
