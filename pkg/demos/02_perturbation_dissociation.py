"""
Same IoU, different boundary quality
====================================

Erode a disk by two pixels, then cut one chunk out of its edge, sized so
that both corruptions lose the same amount of IoU. The erosion damages the
whole contour; the chunk leaves most of it intact. mBA tells them apart.
"""

import numpy as np

from mos import evaluate
from mos.perturb import erode_perturb, iou_target_perturb, match_chunk_to_iou

n = 1024
yy, xx = np.mgrid[:n, :n]
gt = (yy - (n - 1) / 2) ** 2 + (xx - (n - 1) / 2) ** 2 <= 400**2

eroded = erode_perturb(gt, 2)
e = evaluate(eroded.astype(float), gt)

# Binary-search the chunk diameter until the IoU matches the eroded mask.
chunked, diameter = match_chunk_to_iou(gt, e.iou, seed=7)
c = evaluate(chunked.astype(float), gt)

print(f"erode by 2       IoU {e.iou:.4f}  mBA {e.mba:.4f}")
print(f"chunk d={diameter:<4d}     IoU {c.iou:.4f}  mBA {c.mba:.4f}")

# Random corruptions with a prescribed IoU budget, reproducible per seed.
for seed in range(3):
    m = iou_target_perturb(gt, (0.85, 0.95), seed=seed)
    r = evaluate(m.astype(float), gt)
    print(f"seed {seed}: IoU {r.iou:.4f}  mBA {r.mba:.4f}  MQ {r.mq:.4f}")
