"""
Recovering from an occlusion
============================

While an object is hidden its filter coasts on prediction alone. On
re-association the tracker can rewind to the last matched state and replay
a straight virtual path to the new observation.
"""

import numpy as np

from masort.geometry import BBox, Detection
from masort.motion import kf_init, kf_update, oru_reupdate, virtual_observations
from masort.tracker import MASort, TrackerConfig

# The virtual path is linear in center, area and aspect, ending on the new box.
path = virtual_observations(BBox(0, 0, 10, 20), BBox(40, 0, 10, 20), gap=4)
print("virtual centers x:", path[:, 0])

# Re-updating from a checkpoint along that path.
box = BBox(0, 0, 10, 20)
state = kf_update(kf_init(box), box)
after = oru_reupdate(state, box, BBox(40, 0, 10, 20), gap=4)
print("velocity after re-update: vx=%.3f" % after.mean[4])


# An object that speeds up from 8 to 14 px/frame while hidden.
def x(f):
    return 10 + 8 * f if f < 12 else 98 + 14 * (f - 11)


dets = {f: [Detection(BBox(x(f), 50, 80, 120))] for f in range(1, 25) if not 12 <= f <= 18}
for use_oru in (True, False):
    trk = MASort(TrackerConfig(min_hits=1, use_oru=use_oru))
    for f in range(1, 20):
        trk.step(f, dets.get(f, []))
    t = trk.tracks[0]
    print(f"use_oru={use_oru!s:5}  id={t.id}  vx={t.state.mean[4]:.3f}  (true 14)")
