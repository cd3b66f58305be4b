"""
Boundary complexity of a mask
=============================

The isoperimetric quotient 4 pi A / P^2 is 1 for a circle and drops as the
outline gets more convoluted. Each mask is cropped to its bounding box and
stretched to a square first, so a long thin object is not counted as
complex just for its aspect ratio. Very thin shapes still pick up
staircase edges when stretched, so treat their scores with care.
"""

import math

import numpy as np

from mos import c_ipq

n = 800
c = (n - 1) / 2
yy, xx = np.mgrid[:n, :n]
rad, th = np.hypot(yy - c, xx - c), np.arctan2(yy - c, xx - c)

shapes = {
    "disk": rad <= 256,
    "square": np.ones((300, 300), bool),
}
for lobes in (6, 12, 24):
    shapes[f"star, {lobes} lobes"] = rad <= 240 * (1 + 0.3 * np.cos(lobes * th))

for name, m in shapes.items():
    r = c_ipq(m)
    print(f"{name:16s} C_IPQ {r.c_ipq:.4f}  (area {r.area}, perimeter {r.perimeter:.1f})")

# The perimeter is a marching-squares contour. On a pixelated circle it runs
# a little long, so a large disk settles near this value instead of 1.
print("marching-squares disk limit:", 1 / ((4 / math.pi) * (2 * math.sqrt(2) - 2)) ** 2)
