"""Axis-aligned boxes, center-form conversion and IoU."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .appearance import as_feature
from .errors import InvalidInputError


@dataclass(frozen=True)
class BBox:
    """Box in top-left / width / height pixel form.

    Coordinates are real valued. ``w`` and ``h`` must be strictly positive
    and every field finite; construction fails otherwise.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError(f"non-finite box {vals}")
        if self.w <= 0 or self.h <= 0:
            raise InvalidInputError(f"box needs positive width and height, got {vals}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=float)

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x + dx, self.y + dy, self.w, self.h)


@dataclass
class Detection:
    """One detector output for a frame.

    ``feature`` is optional; when given it is unit-normalized here so every
    downstream cosine is a plain dot product.
    """

    bbox: BBox
    conf: float = 1.0
    feature: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.conf):
            raise InvalidInputError(f"non-finite detection confidence {self.conf}")
        if self.feature is not None:
            self.feature = as_feature(self.feature)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Boxes that only touch along an edge have zero intersection area and
    therefore IoU 0.
    """
    _check_box(a)
    _check_box(b)
    if a == b:
        return 1.0
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return min(1.0, max(0.0, inter / union))


def iou_matrix(boxes_a: Sequence[BBox] | np.ndarray, boxes_b: Sequence[BBox] | np.ndarray) -> np.ndarray:
    """Pairwise IoU between two box collections.

    Accepts sequences of :class:`BBox` or ``(K, 4)`` arrays in x, y, w, h
    form. Returns an ``(len(a), len(b))`` array.
    """
    a = _as_tlwh(boxes_a)
    b = _as_tlwh(boxes_b)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    ax1, ay1 = a[:, 0:1], a[:, 1:2]
    ax2, ay2 = ax1 + a[:, 2:3], ay1 + a[:, 3:4]
    bx1, by1 = b[None, :, 0], b[None, :, 1]
    bx2, by2 = bx1 + b[None, :, 2], by1 + b[None, :, 3]
    iw = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0, None)
    ih = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0, None)
    inter = iw * ih
    union = (a[:, 2:3] * a[:, 3:4]) + (b[None, :, 2] * b[None, :, 3]) - inter
    out = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)
    # identical boxes must score exactly 1 regardless of round-off
    same = np.all(a[:, None, :] == b[None, :, :], axis=2)
    out[same] = 1.0
    return np.clip(out, 0.0, 1.0)


def center_form(b: BBox) -> tuple[float, float, float, float]:
    """Return ``(cx, cy, s, r)``: center, area and aspect ratio w/h."""
    _check_box(b)
    return (b.x + b.w / 2.0, b.y + b.h / 2.0, b.w * b.h, b.w / b.h)


def from_center_form(cx: float, cy: float, s: float, r: float) -> BBox:
    """Inverse of :func:`center_form`."""
    if not (s > 0 and r > 0):
        raise InvalidInputError(f"area and aspect ratio must be positive, got s={s}, r={r}")
    w = math.sqrt(s * r)
    h = s / w
    return BBox(cx - w / 2.0, cy - h / 2.0, w, h)


def _check_box(b) -> None:
    if not isinstance(b, BBox):
        raise InvalidInputError(f"expected BBox, got {type(b).__name__}")


def _as_tlwh(boxes) -> np.ndarray:
    if isinstance(boxes, np.ndarray):
        arr = np.asarray(boxes, dtype=float).reshape(-1, 4)
    else:
        arr = np.array([b.as_array() for b in boxes], dtype=float).reshape(-1, 4)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("non-finite box coordinates")
    if np.any(arr[:, 2:] <= 0):
        raise InvalidInputError("box needs positive width and height")
    return arr
