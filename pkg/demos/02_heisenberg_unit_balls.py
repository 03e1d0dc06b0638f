"""Vertical chords of the Heisenberg unit balls.

For the Korányi gauge the longest vertical chord runs along the axis. The
Carnot-Carathéodory ball is pinched at the poles, so its longest chord sits
off the axis and is exactly twice the axis chord.
"""
import math

import numpy as np

from gmtlab import heisenberg as hb

for metric in ("koranyi", "cc"):
    profile = hb.unit_ball_profile(metric)
    alpha, beta, where = hb.alpha_beta(profile)
    print(f"{metric:8s} longest chord {alpha:.6f} at planar radius {where:.4f}; axis chord {beta:.6f}; "
          f"ratio {alpha / beta:.4f}")

print(f"1/pi = {1 / math.pi:.6f}, 1/(2 pi) = {1 / (2 * math.pi):.6f}, 2/pi = {2 / math.pi:.4f}")

# Closed-form distances agree with numerically shot geodesics.
for p in ([0.0, 0.0, 0.1], [0.4, 0.1, 0.05], [1.0, 0.0, -0.3]):
    p = np.array(p)
    print(p, f"closed form {hb.cc_norm(p):.10f}", f"shooting {hb.cc_norm_shooting(p):.10f}")
