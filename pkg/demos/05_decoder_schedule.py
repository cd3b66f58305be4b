"""
The recursive decoder schedule
==============================

Seven refinement blocks, an initial one plus three cycles of length 1, 2
and 3, take a stride-8 prediction to full resolution. The schedule is plain
data: it can be validated, saved as JSON, and driven by any block executor.
"""

from dataclasses import replace

import numpy as np

from mos.hierpr import MlpWeights
from mos.schedule import HierprExecutor, canonical_schedule, run_forward, targets_for, total_loss, validate

s = canonical_schedule()
for b in s.blocks:
    print(f"{b.name}: cycle {b.cycle}, stride {b.prediction_stride} -> {b.output_stride}, group {b.share_group}")
print("violations:", validate(s))

# Breaking one rule is caught.
broken = replace(s, cycles=(s.cycles[0], ("S4_2", "S8_2"), s.cycles[2]))
print("reordered cycle 2:", validate(broken))

# Drive it with the numpy refinement kernel and random weights.
rng = np.random.default_rng(1)
features = rng.normal(size=(3, 64, 64))
weights = {g: MlpWeights.random(3, 8, 8, rng) for g in ("hierpr_s8", "hierpr_s4", "hierpr_s2")}
initial = rng.random((8, 8))
result = run_forward(s, HierprExecutor(features, weights), initial)
for name, p in result.predictions.items():
    print(f"{name}: {p.shape}")
print("mask-encoder input channels:", [x.shape[0] for x in result.encoder_inputs])

# The training loss compares every block to a resized ground truth.
gt = np.zeros((64, 64), bool)
gt[16:48, 20:44] = True
loss = total_loss(result.predictions, targets_for(result.predictions, gt), s.loss)
print(f"total loss {loss.total:.4f} (gradient term {loss.gradient:.4f})")
