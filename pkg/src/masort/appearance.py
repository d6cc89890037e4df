"""Appearance cues: cosine similarity, detection uniformity and adaptive weights.

The uniformity statistic measures how alike the re-ID embeddings of one
frame's detections are. Frames full of look-alike objects push the
appearance weight towards zero and hand its share to motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InvalidInputError

DEFAULT_THETA_DEG = 67.5
DEFAULT_ALPHA_EMA = 0.95

# mu_det this close to 1 is round-off from averaging identical vectors
_UNIT_SNAP = 1e-12


def as_feature(values) -> np.ndarray:
    """Validate a 1-D embedding and return it scaled to unit norm."""
    f = np.asarray(values, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise InvalidInputError(f"feature must be a non-empty 1-D vector, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise InvalidInputError("feature has non-finite entries")
    norm = float(np.linalg.norm(f))
    if norm == 0.0:
        raise InvalidInputError("feature has zero norm")
    return f / norm


def cosine(f, g) -> float:
    """Cosine of the angle between two vectors, clipped to [-1, 1]."""
    a = as_feature(f)
    b = as_feature(g)
    if a.shape != b.shape:
        raise InvalidInputError(f"feature dimensions differ: {a.shape} vs {b.shape}")
    return float(np.clip(a @ b, -1.0, 1.0))


def appearance_matrix(det_feats: Sequence, track_feats: Sequence) -> np.ndarray:
    """Cosine similarity matrix, rows are detections and columns tracks."""
    m, n = len(det_feats), len(track_feats)
    if m == 0 or n == 0:
        return np.zeros((m, n))
    d = np.stack([as_feature(f) for f in det_feats])
    t = np.stack([as_feature(f) for f in track_feats])
    if d.shape[1] != t.shape[1]:
        raise InvalidInputError(f"feature dimensions differ: {d.shape[1]} vs {t.shape[1]}")
    return np.clip(d @ t.T, -1.0, 1.0)


@dataclass(frozen=True)
class UniformityStats:
    """Mean embedding ``mu`` and mean cosine ``mu_det`` of a frame's detections."""

    mu: np.ndarray
    mu_det: float


def uniformity(det_feats: Sequence) -> UniformityStats:
    """Average feature and average cosine of each feature with that average.

    Features are unit-normalized before averaging. A single detection, or
    any set of identical vectors, gives ``mu_det == 1.0`` exactly.
    """
    if len(det_feats) == 0:
        raise InvalidInputError("uniformity needs at least one detection feature")
    feats = np.stack([as_feature(f) for f in det_feats])
    mu = feats.mean(axis=0)
    mu_norm = float(np.linalg.norm(mu))
    if mu_norm == 0.0:
        raise InvalidInputError("mean feature has zero norm")
    mu_det = float(np.clip(np.mean(feats @ (mu / mu_norm)), -1.0, 1.0))
    if 1.0 - mu_det <= _UNIT_SNAP:
        mu_det = 1.0
    return UniformityStats(mu=mu, mu_det=mu_det)


@dataclass(frozen=True)
class AdaptiveWeights:
    """Appearance weight ``w_a`` and motion weight ``w_m``; they always sum to 2."""

    w_a: float
    w_m: float


NEUTRAL_WEIGHTS = AdaptiveWeights(1.0, 1.0)
MOTION_ONLY_WEIGHTS = AdaptiveWeights(0.0, 2.0)


def adaptive_weights(mu_det: float, theta: float = DEFAULT_THETA_DEG, clamp: bool = True) -> AdaptiveWeights:
    """Split a total weight of 2 between appearance and motion.

    ``w_a = (1 - mu_det) / (1 - cos(theta))`` and ``w_m = 2 - w_a``.
    ``theta`` is in degrees and must lie in the open interval (0, 90).

    With ``clamp`` on, ``w_a`` is limited to [0, 1] so motion never weighs
    less than appearance. Frames whose detections look less alike than the
    angle ``theta`` would otherwise give appearance more than half the
    budget.
    """
    if not (0.0 < theta < 90.0) or not math.isfinite(theta):
        raise ConfigurationError(f"theta must be in (0, 90) degrees, got {theta}")
    if not (-1.0 <= mu_det <= 1.0):
        raise InvalidInputError(f"mu_det must be in [-1, 1], got {mu_det}")
    w_a = (1.0 - mu_det) / (1.0 - math.cos(math.radians(theta)))
    if clamp:
        w_a = min(1.0, max(0.0, w_a))
    return AdaptiveWeights(w_a=w_a, w_m=2.0 - w_a)


def ema_update(track_feat, det_feat, alpha_ema: float = DEFAULT_ALPHA_EMA) -> np.ndarray:
    """Blend a track's stored embedding with a new detection embedding.

    Returns the unit-normalized ``alpha_ema * track + (1 - alpha_ema) * det``.
    """
    if not (0.0 <= alpha_ema <= 1.0):
        raise InvalidInputError(f"alpha_ema must be in [0, 1], got {alpha_ema}")
    t = as_feature(track_feat)
    d = as_feature(det_feat)
    if t.shape != d.shape:
        raise InvalidInputError(f"feature dimensions differ: {t.shape} vs {d.shape}")
    if alpha_ema == 1.0:
        return t
    if alpha_ema == 0.0:
        return d
    return as_feature(alpha_ema * t + (1.0 - alpha_ema) * d)
