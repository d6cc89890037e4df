"""Constant-velocity Kalman filter over boxes, with occlusion re-update.

State layout is ``(cx, cy, s, r, vcx, vcy, vs)``: box center, area, aspect
ratio (w/h, held static) and the velocities of center and area. Noise
standard deviations scale with the current box size so that the filter
behaves the same for near and far objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import BBox, center_form, from_center_form

DIM_X = 7
DIM_Z = 4

_F = np.eye(DIM_X)
_F[0, 4] = _F[1, 5] = _F[2, 6] = 1.0
_H = np.eye(DIM_Z, DIM_X)
_F.setflags(write=False)
_H.setflags(write=False)


@dataclass(frozen=True)
class MotionConfig:
    """Noise scales of the box filter.

    Position-like standard deviations are ``std_weight_position`` times the
    box side length (``sqrt(s)``), velocity ones ``std_weight_velocity``
    times it. Area terms use twice the relative weight times ``s``, aspect
    terms ``std_weight_aspect`` times ``r``.
    """

    std_weight_position: float = 1.0 / 20
    std_weight_velocity: float = 1.0 / 160
    std_weight_aspect: float = 1.0 / 20
    init_position_scale: float = 2.0
    init_velocity_scale: float = 160.0
    min_area: float = 1e-6

    def __post_init__(self):
        for name in ("std_weight_position", "std_weight_velocity", "std_weight_aspect",
                     "init_position_scale", "init_velocity_scale", "min_area"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")


DEFAULT_MOTION = MotionConfig()


@dataclass(frozen=True)
class KalmanState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(DIM_X)
        cov = np.array(self.covariance, dtype=float).reshape(DIM_X, DIM_X)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    def bbox(self, min_area: float = DEFAULT_MOTION.min_area) -> BBox:
        """Box view of the mean, area floor-clamped at ``min_area``."""
        cx, cy, s, r = self.mean[:4]
        return from_center_form(cx, cy, max(s, min_area), r)


def _size(mean: np.ndarray, cfg: MotionConfig) -> tuple[float, float, float]:
    s = max(mean[2], cfg.min_area)
    r = abs(mean[3]) if mean[3] != 0 else 1.0
    return np.sqrt(s), s, r


def _measurement_noise(mean: np.ndarray, cfg: MotionConfig) -> np.ndarray:
    side, s, r = _size(mean, cfg)
    wp = cfg.std_weight_position
    std = [wp * side, wp * side, 2 * wp * s, cfg.std_weight_aspect * r]
    return np.diag(np.square(std))


def _process_noise(mean: np.ndarray, cfg: MotionConfig) -> np.ndarray:
    side, s, r = _size(mean, cfg)
    wp, wv = cfg.std_weight_position, cfg.std_weight_velocity
    std = [wp * side, wp * side, 2 * wp * s, 0.1 * cfg.std_weight_aspect * r,
           wv * side, wv * side, 2 * wv * s]
    return np.diag(np.square(std))


def _symmetrize(p: np.ndarray) -> np.ndarray:
    return 0.5 * (p + p.T)


def kf_init(b: BBox, cfg: MotionConfig = DEFAULT_MOTION) -> KalmanState:
    """Start a filter at box ``b`` with zero velocity.

    Velocity uncertainty is set much larger than position uncertainty since
    a single box says nothing about motion.
    """
    z = np.array(center_form(b))
    mean = np.concatenate([z, np.zeros(3)])
    side, s, r = _size(mean, cfg)
    wp, wv = cfg.std_weight_position, cfg.std_weight_velocity
    kp, kv = cfg.init_position_scale, cfg.init_velocity_scale
    std = [kp * wp * side, kp * wp * side, kp * 2 * wp * s, kp * cfg.std_weight_aspect * r,
           kv * wv * side, kv * wv * side, kv * 2 * wv * s]
    return KalmanState(mean, np.diag(np.square(std)))


def kf_predict(state: KalmanState, cfg: MotionConfig = DEFAULT_MOTION) -> tuple[KalmanState, BBox]:
    """Advance one frame; returns the prior state and its box view.

    An area velocity that would drive the area to zero or below is dropped
    first, so a shrinking box cannot collapse the size-scaled noise.
    """
    x = state.mean
    if x[2] + x[6] <= 0:
        x = x.copy()
        x[6] = 0.0
    q = _process_noise(x, cfg)
    mean = _F @ x
    cov = _symmetrize(_F @ state.covariance @ _F.T + q)
    new = KalmanState(mean, cov)
    return new, new.bbox(cfg.min_area)


def kf_update(state: KalmanState, obs: BBox, cfg: MotionConfig = DEFAULT_MOTION) -> KalmanState:
    """Correct ``state`` with an observed box."""
    return _update_z(state, np.array(center_form(obs)), cfg)


def _update_z(state: KalmanState, z: np.ndarray, cfg: MotionConfig) -> KalmanState:
    x, p = state.mean, state.covariance
    r = _measurement_noise(x, cfg)
    s = _H @ p @ _H.T + r
    # K = P H^T S^-1, solved rather than inverted
    k = np.linalg.solve(s, _H @ p).T
    innovation = z - _H @ x
    mean = x + k @ innovation
    ikh = np.eye(DIM_X) - k @ _H
    # Joseph form keeps the covariance positive-definite
    cov = _symmetrize(ikh @ p @ ikh.T + k @ r @ k.T)
    return KalmanState(mean, cov)


def oru_reupdate(checkpoint: KalmanState, last_obs: BBox, new_obs: BBox, gap: int,
                 cfg: MotionConfig = DEFAULT_MOTION) -> KalmanState:
    """Replay an occlusion gap along a straight virtual trajectory.

    ``checkpoint`` is the filter posterior saved at the last real update,
    when ``last_obs`` was observed; ``new_obs`` arrives ``gap`` frames later.
    The filter is rerun from the checkpoint for ``gap`` predict/update
    cycles, fed with center-form observations interpolated in equal steps
    from ``last_obs`` to ``new_obs``. The last virtual observation is
    ``new_obs`` itself. Virtual observations use the ordinary measurement
    noise.

    ``gap == 1`` is exactly one predict plus one update with ``new_obs``.
    """
    if int(gap) != gap or gap < 1:
        raise InvalidInputError(f"gap must be a positive integer, got {gap}")
    gap = int(gap)
    z0 = np.array(center_form(last_obs))
    z1 = np.array(center_form(new_obs))
    state = checkpoint
    for step in range(1, gap + 1):
        state, _ = kf_predict(state, cfg)
        z = z1 if step == gap else z0 + (z1 - z0) * (step / gap)
        state = _update_z(state, z, cfg)
    return state


def virtual_observations(last_obs: BBox, new_obs: BBox, gap: int) -> np.ndarray:
    """The ``(gap, 4)`` center-form observations :func:`oru_reupdate` feeds."""
    if int(gap) != gap or gap < 1:
        raise InvalidInputError(f"gap must be a positive integer, got {gap}")
    z0 = np.array(center_form(last_obs))
    z1 = np.array(center_form(new_obs))
    steps = np.arange(1, gap + 1)[:, None] / gap
    out = z0 + (z1 - z0) * steps
    out[-1] = z1
    return out
