"""Query-guided matching: prune grounding proposals with high-confidence templates.

A frame's proposals carry two alignment scores, one against the specific
prompt (attributes plus object name) and one against the general prompt
(object name only). The top-scoring specific proposals act as templates.
General-prompt candidates survive only if their backbone feature looks
like at least one template.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .appearance import as_feature
from .errors import ConfigurationError, InvalidInputError
from .geometry import BBox


@dataclass(eq=False)
class Proposal:
    """A grounding proposal.

    ``s_spec`` and ``s_gen`` are per-proposal alignment scores (already
    reduced over prompt tokens). ``feature`` is the backbone visual
    feature, unit-normalized on construction. Proposals compare by
    identity, so the same record is never emitted twice.
    """

    bbox: BBox
    s_spec: float
    s_gen: float
    feature: np.ndarray = field(repr=False)
    frame: int = 1

    def __post_init__(self):
        for name in ("s_spec", "s_gen"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvalidInputError(f"{name} must be in [0, 1], got {v}")
        self.feature = as_feature(self.feature)


@dataclass(frozen=True)
class FilterConfig:
    kappa: int = 5
    t_gen: float = 0.3
    tau_sim: float = 0.85

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ConfigurationError(f"kappa must be a positive integer, got {self.kappa}")
        if not (0.0 <= self.t_gen <= 1.0):
            raise ConfigurationError(f"t_gen must be in [0, 1], got {self.t_gen}")
        if not (0.0 <= self.tau_sim <= 1.0):
            raise ConfigurationError(f"tau_sim must be in [0, 1], got {self.tau_sim}")


def select_queries(props: Sequence[Proposal], kappa: int = 5) -> list[Proposal]:
    """The ``kappa`` proposals with the highest ``s_spec``, best first.

    Ties keep input order.
    """
    if not props:
        raise InvalidInputError("cannot select queries from an empty proposal list")
    if kappa < 1:
        raise ConfigurationError(f"kappa must be >= 1, got {kappa}")
    order = sorted(range(len(props)), key=lambda i: (-props[i].s_spec, i))
    return [props[i] for i in order[:kappa]]


def select_candidates(props: Sequence[Proposal], t_gen: float = 0.3) -> list[Proposal]:
    """Proposals with ``s_gen >= t_gen``, in input order."""
    return [p for p in props if p.s_gen >= t_gen]


def similarity_matrix(queries: Sequence[Proposal], candidates: Sequence[Proposal]) -> np.ndarray:
    """Cosine similarity of backbone features, queries by candidates."""
    if not queries or not candidates:
        return np.zeros((len(queries), len(candidates)))
    q = np.stack([p.feature for p in queries])
    t = np.stack([p.feature for p in candidates])
    if q.shape[1] != t.shape[1]:
        raise InvalidInputError(f"feature dimensions differ: {q.shape[1]} vs {t.shape[1]}")
    return np.clip(q @ t.T, -1.0, 1.0)


def qgm_filter(queries: Sequence[Proposal], candidates: Sequence[Proposal],
               tau_sim: float = 0.85) -> list[Proposal]:
    """Queries followed by every candidate whose best query cosine reaches ``tau_sim``.

    A candidate that is itself one of the queries is not repeated.
    """
    if not queries:
        raise InvalidInputError("query set is empty")
    sim = similarity_matrix(queries, candidates)
    best = sim.max(axis=0) if len(candidates) else np.zeros(0)
    seen = {id(q) for q in queries}
    out = list(queries)
    for cand, s in zip(candidates, best):
        if id(cand) in seen:
            continue
        # identical features give cosine 1 up to round-off
        if s >= tau_sim or (tau_sim <= 1.0 and s >= 1.0 - 1e-12):
            out.append(cand)
            seen.add(id(cand))
    return out


def filter_frame(props: Sequence[Proposal], config: FilterConfig | None = None) -> list[Proposal]:
    """Run query selection, candidate selection and matching on one frame."""
    cfg = config or FilterConfig()
    queries = select_queries(props, cfg.kappa)
    candidates = select_candidates(props, cfg.t_gen)
    return qgm_filter(queries, candidates, cfg.tau_sim)


def filter_proposals(props: Sequence[Proposal], config: FilterConfig | None = None) -> dict[int, list[Proposal]]:
    """Apply :func:`filter_frame` independently to every frame present in ``props``."""
    by_frame: dict[int, list[Proposal]] = {}
    for p in props:
        by_frame.setdefault(p.frame, []).append(p)
    return {f: filter_frame(by_frame[f], config) for f in sorted(by_frame)}
