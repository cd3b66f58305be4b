"""Evaluation and geometry toolkit for meticulous object segmentation.

Masks are ``bool`` arrays and score maps ``float64`` arrays in ``[0, 1]``,
both indexed ``[row, col]`` from the top-left corner.
"""

from .complexity import c_ipq, calibrate, dataset_complexity
from .masks import binarize, load_mask, load_scoremap, save_image, save_mask
from .metrics import MeticulosityParams, MetricReport, evaluate, iou, mae, mba, mq, region_accuracy, s_measure
from .morphology import bands, dilate, edt, erode

__version__ = "0.1.0"

__all__ = [
    "MeticulosityParams",
    "MetricReport",
    "bands",
    "binarize",
    "c_ipq",
    "calibrate",
    "dataset_complexity",
    "dilate",
    "edt",
    "erode",
    "evaluate",
    "iou",
    "load_mask",
    "load_scoremap",
    "mae",
    "mba",
    "mq",
    "region_accuracy",
    "s_measure",
    "save_image",
    "save_mask",
]
