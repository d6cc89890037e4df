"""
How much to trust appearance
============================

The tracker blends motion and appearance with two weights that always sum to
2. When every detection in a frame looks alike, appearance carries no
information and its weight drops to zero.
"""

import numpy as np

from masort.appearance import adaptive_weights, uniformity

# Uniformity is the mean cosine between each detection feature and the
# frame's mean feature. Identical features give exactly 1.
same = [np.array([1.0, 0.0, 0.0])] * 4
print("identical features  mu_det =", uniformity(same).mu_det)

rng = np.random.default_rng(0)
varied = list(rng.normal(size=(4, 16)))
print("random features     mu_det = %.3f" % uniformity(varied).mu_det)

# Sweep uniformity at the default angle of 67.5 degrees. The balance point
# where both weights equal 1 sits at cos(67.5 deg).
theta = 67.5
for mu in (1.0, 0.9, 0.7, np.cos(np.radians(theta)), 0.2):
    w = adaptive_weights(float(mu), theta)
    print(f"mu_det={mu:.4f}  w_a={w.w_a:.6f}  w_m={w.w_m:.6f}")

# A larger angle hands appearance less weight at the same uniformity.
for th in (22.5, 45.0, 67.5, 80.0):
    print(f"theta={th:5.1f}  w_a(0.7)={adaptive_weights(0.7, th).w_a:.4f}")
