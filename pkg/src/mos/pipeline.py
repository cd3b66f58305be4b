"""Two-stage segmentation geometry: coarse low-res pass, patch-wise refinement.

The image is squashed to a ``low_res_side`` square for the coarse model, the
coarse scores are resized back to full resolution, and overlapping
``patch_side`` windows are refined independently and averaged by coverage.
Both models are injected callables; this module owns only the geometry.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from PIL import Image

from .hierpr import MlpWeights, hierpr_step
from .masks import as_mask, as_rgb, as_scoremap, binarize, check_same_shape
from .resample import resize_bilinear, resize_nearest

log = logging.getLogger(__name__)

CoarseSource = Callable[[np.ndarray], np.ndarray]
Refiner = Callable[[np.ndarray, np.ndarray], np.ndarray]

GREEN = np.array([0, 255, 0], dtype=np.uint8)


@dataclass(frozen=True)
class PipelineConfig:
    low_res_side: int = 336
    patch_side: int = 224
    patch_stride: int = 112
    binarize_threshold: float = 0.5

    def __post_init__(self):
        if self.low_res_side < 1 or self.patch_side < 1 or self.patch_stride < 1:
            raise ValueError("sizes must be positive")
        if self.patch_stride > self.patch_side:
            raise ValueError("patch_stride must not exceed patch_side")
        if not 0.0 < self.binarize_threshold <= 1.0:
            raise ValueError("binarize_threshold must lie in (0, 1]")


@dataclass(frozen=True)
class PatchGrid:
    windows: tuple[tuple[int, int, int, int], ...]  # (x, y, w, h)
    coverage: np.ndarray


class RefinerError(RuntimeError):
    pass


def resize_score(scores, width: int, height: int) -> np.ndarray:
    """Bilinear (align-corners) resize of a score map to ``width x height``."""
    out = resize_bilinear(as_scoremap(scores), height, width)
    return np.clip(out, 0.0, 1.0, out=out)


def resize_mask(mask, width: int, height: int) -> np.ndarray:
    return resize_nearest(as_mask(mask), height, width)


def _starts(length: int, side: int, stride: int) -> list[int]:
    if length <= side:
        return [0]
    starts = list(range(0, length - side + 1, stride))
    if starts[-1] + side < length:
        starts.append(length - side)
    return starts


def plan_patches(width: int, height: int, cfg: PipelineConfig = PipelineConfig()) -> PatchGrid:
    """Stride-spaced windows, the last row/column pulled inward to stay in frame."""
    if width < 1 or height < 1:
        raise ValueError("frame must be at least 1x1")
    pw, ph = min(cfg.patch_side, width), min(cfg.patch_side, height)
    windows = tuple(
        (x, y, pw, ph)
        for y in _starts(height, cfg.patch_side, cfg.patch_stride)
        for x in _starts(width, cfg.patch_side, cfg.patch_stride)
    )
    coverage = np.zeros((height, width), dtype=np.int32)
    for x, y, w, h in windows:
        coverage[y : y + h, x : x + w] += 1
    return PatchGrid(windows, coverage)


def _resize_rgb(img: np.ndarray, width: int, height: int) -> np.ndarray:
    return np.asarray(Image.fromarray(img).resize((width, height), Image.BILINEAR))


def identity_refiner(patch: np.ndarray, scores: np.ndarray) -> np.ndarray:
    return scores


def hierpr_refiner(weights: MlpWeights, fraction: float = 0.1) -> Refiner:
    """Patch refiner running one same-resolution HierPR block on RGB features.

    Features are the patch's RGB channels scaled to [0, 1], so ``weights``
    must expect three channels.
    """
    if weights.channels != 3:
        raise ValueError(f"RGB refiner needs 3-channel weights, got {weights.channels}")

    def refine(patch, scores):
        feats = np.moveaxis(patch.astype(np.float64) / 255.0, -1, 0)
        return hierpr_step(scores, feats, weights, fraction, upsample=False)

    return refine


def run_pipeline(image, coarse_source: CoarseSource, refiner: Refiner,
                 cfg: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """Full-resolution binary mask for ``image``.

    Overlaps are averaged by coverage count. Where every contribution to a
    pixel is identical the shared value is kept verbatim, so a refiner that
    passes scores through reproduces the coarse map exactly.
    """
    img = as_rgb(image)
    h, w = img.shape[:2]
    small = _resize_rgb(img, cfg.low_res_side, cfg.low_res_side)
    coarse = as_scoremap(coarse_source(small))
    full = resize_score(coarse, w, h)

    grid = plan_patches(w, h, cfg)
    total = np.zeros((h, w))
    lo = np.full((h, w), np.inf)
    hi = np.full((h, w), -np.inf)
    for x, y, pw, ph in grid.windows:
        sl = (slice(y, y + ph), slice(x, x + pw))
        out = np.asarray(refiner(img[sl], full[sl]), dtype=np.float64)
        if out.shape != (ph, pw):
            raise RefinerError(f"patch at x={x}, y={y}: refiner returned {out.shape}, expected {(ph, pw)}")
        if not np.all((out >= 0.0) & (out <= 1.0)):
            raise RefinerError(f"patch at x={x}, y={y}: refiner values outside [0, 1]")
        total[sl] += out
        np.minimum(lo[sl], out, out=lo[sl])
        np.maximum(hi[sl], out, out=hi[sl])
    merged = np.where(lo == hi, lo, total / grid.coverage)
    return binarize(np.clip(merged, 0.0, 1.0), cfg.binarize_threshold)


def composite_green(image, mask) -> np.ndarray:
    """Foreground pixels from ``image`` over a pure green background."""
    img, m = as_rgb(image), as_mask(mask)
    check_same_shape(img, m)
    return np.where(m[..., None], img, GREEN)
