"""
Scoring a dataset from the command line
=======================================

``mos eval`` pairs prediction and ground-truth files by name and writes one
row per image plus the unweighted mean. Images whose ground truth is a
single class are skipped with a reason instead of aborting the run.
"""

import tempfile
from pathlib import Path

import numpy as np

from mos import save_mask
from mos.masks import save_scoremap
from mos.cli import main

root = Path(tempfile.mkdtemp(prefix="mos-eval-"))
(root / "pred").mkdir()
(root / "gt").mkdir()

rng = np.random.default_rng(3)
yy, xx = np.mgrid[:240, :320]
for i in range(4):
    gt = (yy - 120) ** 2 + (xx - 160) ** 2 <= (60 + 15 * i) ** 2
    pred = np.clip(gt * 0.8 + 0.1 + rng.normal(0, 0.15, gt.shape), 0, 1)
    save_mask(gt, root / "gt" / f"img{i}.png")
    save_scoremap(pred, root / "pred" / f"img{i}.png")

# one blank ground truth: skipped, not fatal
save_mask(np.zeros((240, 320), bool), root / "gt" / "blank.png")
save_scoremap(np.zeros((240, 320)), root / "pred" / "blank.png")

code = main(["eval", "--pred", str(root / "pred"), "--gt", str(root / "gt"),
             "--csv", str(root / "report.csv"), "--json", str(root / "report.json")])
print("exit code", code)
print((root / "report.csv").read_text())
