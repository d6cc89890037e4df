"""Online multi-object tracking with appearance/motion balancing.

Modules
-------
geometry     boxes and IoU
motion       constant-velocity Kalman filter with occlusion re-update
assignment   gated optimal assignment
appearance   cosine similarity, detection uniformity, adaptive weights
tracker      the MA-SORT tracker
qgm          query-guided filtering of grounding proposals
mot_io       MOT text formats, feature/proposal sidecars, Refer-GMOT JSON
metrics      CLEAR MOT, IDF1 and HOTA
synth        deterministic synthetic scenarios
cli          ``masort`` command line
"""

__version__ = "0.1.0"

from .appearance import AdaptiveWeights, adaptive_weights, cosine, uniformity
from .assignment import solve
from .geometry import BBox, Detection, iou
from .metrics import evaluate
from .tracker import MASort, TrackerConfig

__all__ = [
    "AdaptiveWeights",
    "BBox",
    "Detection",
    "MASort",
    "TrackerConfig",
    "adaptive_weights",
    "cosine",
    "evaluate",
    "iou",
    "solve",
    "uniformity",
]
