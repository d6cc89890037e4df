"""Readers and writers for the text formats the tracker consumes and emits.

Formats (all UTF-8, LF line endings, ``.`` as decimal point):

MOT detections
    ``frame,id,x,y,w,h,conf[,...]``; the id column is ignored.
MOT ground truth / results
    ``frame,id,x,y,w,h,conf[,...]``. For ground truth a ``conf`` of 0 marks
    an ignored row. Results are written as ``frame,id,x,y,w,h,1,-1,-1,-1``
    with two decimals per box coordinate.
Feature sidecar
    Header ``D=<dim> count=<n>`` then rows ``frame,det_index,v1..vD``.
    ``det_index`` is the 0-based position of the detection within its
    frame in the detection file.
Proposal file
    Same header, rows ``frame,x,y,w,h,s_spec,s_gen,v1..vD``.
Refer annotation
    JSON object with ``object``, ``attributes``, ``tracks`` and optional
    ``other_attributes``.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import AlignmentError, InvalidInputError, ParseError, SchemaError
from .geometry import BBox, Detection
from .qgm import Proposal

log = logging.getLogger(__name__)

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_HEADER = re.compile(r"^D=(\d+)\s+count=(\d+)$")

Tracks = dict[int, list[tuple[int, BBox]]]


class FrameDetections(dict):
    """``{frame: [Detection, ...]}`` plus the number of skipped degenerate rows."""

    skipped: int = 0


def _float(tok: str, path, lineno) -> float:
    tok = tok.strip()
    if not _NUMBER.match(tok):
        raise ParseError(f"malformed number {tok!r}", path, lineno)
    v = float(tok)
    if not math.isfinite(v):
        raise ParseError(f"non-finite number {tok!r}", path, lineno)
    return v


def _int(tok: str, path, lineno) -> int:
    v = _float(tok, path, lineno)
    if v != int(v):
        raise ParseError(f"expected an integer, got {tok!r}", path, lineno)
    return int(v)


def _lines(path) -> Iterable[tuple[int, str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line.strip():
                yield lineno, line


def read_detections(path) -> FrameDetections:
    """Parse a MOT detection file into per-frame :class:`Detection` lists.

    Rows with a non-positive width or height are skipped and counted in
    ``result.skipped``.
    """
    out = FrameDetections()
    for lineno, line in _lines(path):
        cols = line.split(",")
        if len(cols) < 7:
            raise ParseError(f"expected at least 7 columns, got {len(cols)}", path, lineno)
        frame = _int(cols[0], path, lineno)
        _float(cols[1], path, lineno)
        x, y, w, h, conf = (_float(c, path, lineno) for c in cols[2:7])
        if w <= 0 or h <= 0:
            out.skipped += 1
            continue
        out.setdefault(frame, []).append(Detection(BBox(x, y, w, h), conf))
    if out.skipped:
        log.warning("%s: skipped %d rows with non-positive size", path, out.skipped)
    result = FrameDetections(sorted(out.items()))
    result.skipped = out.skipped
    return result


def read_tracks(path, keep_ignored: bool = False) -> Tracks:
    """Parse a MOT ground-truth or result file into ``{frame: [(id, box), ...]}``.

    Rows whose seventh column is 0 are ignore regions in MOT ground truth
    and are dropped unless ``keep_ignored``.
    """
    out: Tracks = {}
    for lineno, line in _lines(path):
        cols = line.split(",")
        if len(cols) < 6:
            raise ParseError(f"expected at least 6 columns, got {len(cols)}", path, lineno)
        frame = _int(cols[0], path, lineno)
        tid = _int(cols[1], path, lineno)
        x, y, w, h = (_float(c, path, lineno) for c in cols[2:6])
        if len(cols) >= 7 and _float(cols[6], path, lineno) == 0 and not keep_ignored:
            continue
        try:
            box = BBox(x, y, w, h)
        except InvalidInputError as exc:
            raise ParseError(str(exc), path, lineno) from None
        out.setdefault(frame, []).append((tid, box))
    return {f: out[f] for f in sorted(out)}


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _full(v: float) -> str:
    return repr(float(v))


def format_results(outputs: Mapping[int, Sequence[tuple[int, BBox]]]) -> str:
    rows = []
    for frame in sorted(outputs):
        for tid, b in sorted(outputs[frame], key=lambda p: p[0]):
            if tid <= 0:
                raise InvalidInputError(f"track ids must be positive, got {tid}")
            rows.append(f"{frame},{tid},{_fmt(b.x)},{_fmt(b.y)},{_fmt(b.w)},{_fmt(b.h)},1,-1,-1,-1\n")
    return "".join(rows)


def write_results(path, outputs: Mapping[int, Sequence[tuple[int, BBox]]]) -> None:
    """Write tracker outputs sorted by (frame, id) with 2-decimal boxes."""
    text = format_results(outputs)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_gt(path, tracks: Mapping[int, Sequence[tuple[int, BBox]]]) -> None:
    """Write ground truth as ``frame,id,x,y,w,h,1,1,1`` rows at full precision."""
    rows = []
    for frame in sorted(tracks):
        for tid, b in sorted(tracks[frame], key=lambda p: p[0]):
            rows.append(f"{frame},{tid},{_full(b.x)},{_full(b.y)},{_full(b.w)},{_full(b.h)},1,1,1\n")
    Path(path).write_text("".join(rows), encoding="utf-8", newline="\n")


def write_detections(path, detections: Mapping[int, Sequence[Detection]]) -> None:
    """Write detections as ``frame,-1,x,y,w,h,conf,-1,-1,-1`` at full precision."""
    rows = []
    for frame in sorted(detections):
        for d in detections[frame]:
            b = d.bbox
            rows.append(f"{frame},-1,{_full(b.x)},{_full(b.y)},{_full(b.w)},{_full(b.h)},{_full(d.conf)},-1,-1,-1\n")
    Path(path).write_text("".join(rows), encoding="utf-8", newline="\n")


def _read_header(path, lines) -> tuple[int, int]:
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise SchemaError("missing 'D=<dim> count=<n>' header", path, 1) from None
    m = _HEADER.match(header.strip())
    if not m:
        raise SchemaError(f"bad header {header!r}, expected 'D=<dim> count=<n>'", path, lineno)
    dim, count = int(m.group(1)), int(m.group(2))
    if dim < 1:
        raise SchemaError("feature dimension must be >= 1", path, lineno)
    return dim, count


def read_features(path) -> dict[int, dict[int, np.ndarray]]:
    """Parse a feature sidecar into ``{frame: {det_index: unit vector}}``."""
    lines = iter(_lines(path))
    dim, count = _read_header(path, lines)
    out: dict[int, dict[int, np.ndarray]] = {}
    n = 0
    for lineno, line in lines:
        cols = line.split(",")
        if len(cols) != 2 + dim:
            raise SchemaError(f"expected {dim} feature values, got {len(cols) - 2}", path, lineno)
        frame = _int(cols[0], path, lineno)
        idx = _int(cols[1], path, lineno)
        vec = np.array([_float(c, path, lineno) for c in cols[2:]])
        if not np.any(vec):
            raise ParseError("zero feature vector", path, lineno)
        slot = out.setdefault(frame, {})
        if idx in slot:
            raise SchemaError(f"duplicate feature row for frame {frame} index {idx}", path, lineno)
        slot[idx] = vec / np.linalg.norm(vec)
        n += 1
    if n != count:
        raise SchemaError(f"header declares {count} rows, found {n}", path)
    return {f: out[f] for f in sorted(out)}


def attach_features(detections: Mapping[int, Sequence[Detection]],
                    features: Mapping[int, Mapping[int, np.ndarray]]) -> dict[int, list[Detection]]:
    """Join detections with sidecar features by (frame, index within frame).

    Every detection must receive exactly one feature and every feature must
    belong to a detection.
    """
    extra = sorted(set(features) - set(detections))
    if extra:
        raise AlignmentError(f"features reference frames absent from detections: {extra[:5]}")
    out: dict[int, list[Detection]] = {}
    for frame in sorted(detections):
        dets = detections[frame]
        feats = features.get(frame, {})
        if set(feats) != set(range(len(dets))):
            raise AlignmentError(
                f"frame {frame}: {len(dets)} detections but feature indices {sorted(feats)[:10]}")
        out[frame] = [Detection(d.bbox, d.conf, feats[i]) for i, d in enumerate(dets)]
    return out


def _fmt_vec(v) -> str:
    return ",".join(repr(float(x)) for x in v)


def write_features(path, detections: Mapping[int, Sequence[Detection]]) -> None:
    """Write the feature sidecar for detections that all carry features."""
    rows = []
    dim = None
    for frame in sorted(detections):
        for i, d in enumerate(detections[frame]):
            if d.feature is None:
                raise InvalidInputError(f"frame {frame} detection {i} has no feature")
            if dim is None:
                dim = len(d.feature)
            elif len(d.feature) != dim:
                raise InvalidInputError("feature dimensions differ between detections")
            rows.append(f"{frame},{i},{_fmt_vec(d.feature)}\n")
    header = f"D={dim or 1} count={len(rows)}\n"
    Path(path).write_text(header + "".join(rows), encoding="utf-8", newline="\n")


def read_proposals(path) -> list[Proposal]:
    """Parse a proposal file. Proposals keep file order and carry their frame."""
    lines = iter(_lines(path))
    dim, count = _read_header(path, lines)
    out = []
    for lineno, line in lines:
        cols = line.split(",")
        if len(cols) != 7 + dim:
            raise SchemaError(f"expected {dim} feature values, got {len(cols) - 7}", path, lineno)
        frame = _int(cols[0], path, lineno)
        x, y, w, h, s_spec, s_gen = (_float(c, path, lineno) for c in cols[1:7])
        vec = [_float(c, path, lineno) for c in cols[7:]]
        try:
            out.append(Proposal(BBox(x, y, w, h), s_spec, s_gen, np.array(vec), frame=frame))
        except InvalidInputError as exc:
            raise ParseError(str(exc), path, lineno) from None
    if len(out) != count:
        raise SchemaError(f"header declares {count} rows, found {len(out)}", path)
    return out


def write_proposals(path, proposals: Sequence[Proposal]) -> None:
    dims = {len(p.feature) for p in proposals}
    if len(dims) > 1:
        raise InvalidInputError("feature dimensions differ between proposals")
    dim = dims.pop() if dims else 1
    rows = [
        f"{p.frame},{_full(p.bbox.x)},{_full(p.bbox.y)},{_full(p.bbox.w)},{_full(p.bbox.h)},"
        f"{_full(p.s_spec)},{_full(p.s_gen)},{_fmt_vec(p.feature)}\n"
        for p in proposals
    ]
    Path(path).write_text(f"D={dim} count={len(rows)}\n" + "".join(rows), encoding="utf-8", newline="\n")


@dataclass
class ReferAnnotation:
    object: str
    attributes: list[str]
    tracks: Path
    other_attributes: list[str] = field(default_factory=list)

    @property
    def general_prompt(self) -> str:
        return self.object

    @property
    def specific_prompt(self) -> str:
        return " ".join([*self.attributes, self.object])


def _text_list(value, key: str, path) -> list[str]:
    if isinstance(value, str):
        return [value] if value.strip() else []
    if isinstance(value, list) and all(isinstance(v, str) for v in value):
        return [v for v in value if v.strip()]
    raise SchemaError(f"'{key}' must be a string or a list of strings", path)


def read_refer_annotation(path) -> ReferAnnotation:
    """Load a Refer-GMOT annotation; ``tracks`` resolves against the file's directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(data, dict):
        raise SchemaError("annotation must be a JSON object", path)
    for key in ("object", "attributes", "tracks"):
        if key not in data:
            raise SchemaError(f"missing required key '{key}'", path)
    obj = data["object"]
    if not isinstance(obj, str) or not obj.strip():
        raise SchemaError("'object' must be a non-empty string", path)
    if not isinstance(data["tracks"], str):
        raise SchemaError("'tracks' must be a path string", path)
    return ReferAnnotation(
        object=obj.strip(),
        attributes=_text_list(data["attributes"], "attributes", path),
        tracks=(path.parent / data["tracks"]),
        other_attributes=_text_list(data.get("other_attributes", []), "other_attributes", path),
    )


@dataclass
class SequenceBundle:
    name: str
    frames: int
    detections: dict[int, list[Detection]]
    gt: Optional[Tracks] = None
    meta: Optional[ReferAnnotation] = None


def load_sequence(name: str, det_path, feat_path=None, gt_path=None, annotation_path=None) -> SequenceBundle:
    """Read every file of one sequence and join detections with features."""
    dets = read_detections(det_path)
    if feat_path is not None:
        dets = attach_features(dets, read_features(feat_path))
    meta = read_refer_annotation(annotation_path) if annotation_path is not None else None
    if gt_path is None and meta is not None:
        gt_path = meta.tracks
    gt = read_tracks(gt_path) if gt_path is not None else None
    frames = max([*dets, *(gt or {})], default=0)
    return SequenceBundle(name=name, frames=frames, detections=dict(dets), gt=gt, meta=meta)
