"""
Refining the most uncertain points
==================================

One refinement block upsamples a coarse score map by two, ranks pixels by
how close they sit to 0.5, and re-scores only the top fraction with a small
perceptron that sees interpolated features plus the coarse value.
"""

import numpy as np

from mos.hierpr import MlpWeights, hierpr_block
from mos.resample import resize_bilinear

rng = np.random.default_rng(0)

# A blurry coarse prediction of a disk at 32 x 32.
yy, xx = np.mgrid[:32, :32]
coarse = np.clip(0.5 + (10 - np.hypot(yy - 15.5, xx - 15.5)) / 6, 0, 1)

# Features at the target resolution: here just a sharp copy of the answer
# plus noise, in two channels.
yy, xx = np.mgrid[:64, :64]
truth = np.hypot(yy - 31.5, xx - 31.5) <= 20
features = np.stack([truth + 0.1 * rng.normal(size=truth.shape), rng.normal(size=truth.shape)])

# Hand-set weights: trust channel 0, ignore the rest.
w = MlpWeights.zeros(channels=2, h1=1, h2=1)
w.w1[0, 0] = 1.0
w.w2[0, 0] = 1.0
w.w3[0, 0], w.b3[0] = 12.0, -6.0

out = hierpr_block(coarse, features, w, fraction=0.1)
plain = resize_bilinear(coarse, 64, 64)
print("refined points:", len(out.points), "of", plain.size)
print("uncertainty range:", out.uncertainty.min(), out.uncertainty.max())
for name, m in (("bilinear only", plain), ("refined", out.prediction)):
    print(f"{name:14s} pixel error {np.mean((m >= 0.5) != truth):.4f}")
