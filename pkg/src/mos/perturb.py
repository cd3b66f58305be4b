"""Seeded mask perturbations used to probe the metrics.

Randomness comes from numpy's PCG64 generator seeded through
``SeedSequence``, so a given ``(mask, parameters, seed)`` always yields the
same output on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masks import as_mask, require_nondegenerate
from .metrics import iou
from .morphology import dilate, disk_kernel, erode

__all__ = [
    "PerturbSpec",
    "apply",
    "boundary_pixels",
    "chunk_removal",
    "dilate_perturb",
    "erode_perturb",
    "iou_target_perturb",
    "match_chunk_to_iou",
    "rng_for",
]


class PerturbError(ValueError):
    pass


def rng_for(seed: int, *spawn_key: int) -> np.random.Generator:
    """PCG64 generator for ``seed``; ``spawn_key`` selects an independent substream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def boundary_pixels(mask) -> np.ndarray:
    """``(row, col)`` of foreground pixels with a 4-neighbour in the background.

    Pixels on the frame edge count only if an in-frame neighbour is
    background. Rows are in row-major order.
    """
    m = as_mask(mask)
    inner = m & ~erode(m, 1)
    return np.argwhere(inner)


def _nonempty(m: np.ndarray) -> np.ndarray:
    if not m.any():
        raise PerturbError("perturbation removed all foreground")
    return m


def erode_perturb(gt, r: int) -> np.ndarray:
    return _nonempty(erode(gt, r))


def dilate_perturb(gt, r: int) -> np.ndarray:
    out = dilate(gt, r)
    if out.all():
        raise PerturbError("perturbation removed all background")
    return out


def _stamp(m: np.ndarray, center, radius: int, value: bool) -> None:
    """Set the disk of ``radius`` around ``center`` to ``value`` in place."""
    k = disk_kernel(radius)
    r0, c0 = int(center[0]) - radius, int(center[1]) - radius
    h, w = m.shape
    top, left = max(r0, 0), max(c0, 0)
    bottom, right = min(r0 + k.shape[0], h), min(c0 + k.shape[1], w)
    if top >= bottom or left >= right:
        return
    sub = k[top - r0 : bottom - r0, left - c0 : right - c0]
    m[top:bottom, left:right][sub] = value


def chunk_removal(gt, chunk_diameter: int, count: int, seed: int) -> np.ndarray:
    """Cut ``count`` disks of ``chunk_diameter`` centred on random boundary pixels."""
    m = as_mask(gt)
    require_nondegenerate(m)
    if count < 0 or chunk_diameter < 1:
        raise ValueError("count must be >= 0 and chunk_diameter >= 1")
    out = m.copy()
    if count == 0:
        return out
    edge = boundary_pixels(m)
    if len(edge) == 0:
        raise PerturbError("mask has no boundary pixels")
    picks = rng_for(seed).choice(len(edge), size=count, replace=count > len(edge))
    radius = chunk_diameter // 2
    for idx in picks:
        _stamp(out, edge[idx], radius, False)
    return _nonempty(out)


def match_chunk_to_iou(gt, target_iou: float, seed: int, count: int = 1, tol: float = 0.01):
    """Binary-search a chunk diameter whose removal lands near ``target_iou``.

    Returns ``(mask, diameter)`` for the diameter with IoU closest to the
    target; raises if nothing comes within ``tol``.
    """
    m = as_mask(gt)
    lo, hi = 1, max(m.shape)
    best = None
    while lo <= hi:
        d = (lo + hi) // 2
        out = chunk_removal(m, d, count, seed)
        score = iou(out, m)
        if best is None or abs(score - target_iou) < abs(best[2] - target_iou):
            best = (out, d, score)
        if score > target_iou:
            lo = d + 1
        else:
            hi = d - 1
    out, d, score = best
    if abs(score - target_iou) > tol:
        raise PerturbError(f"no chunk diameter reaches IoU {target_iou} (closest {score:.4f})")
    return out, d


class _IoUTracker:
    """Incremental intersection/union counts against a fixed ground truth."""

    def __init__(self, gt: np.ndarray, cur: np.ndarray):
        self.gt = gt
        self.inter = int(np.count_nonzero(gt & cur))
        self.union = int(np.count_nonzero(gt | cur))

    def window_counts(self, cur: np.ndarray, win) -> tuple[int, int]:
        g, c = self.gt[win], cur[win]
        return int(np.count_nonzero(g & c)), int(np.count_nonzero(g | c))

    @property
    def value(self) -> float:
        return self.inter / self.union if self.union else 1.0


def iou_target_perturb(gt, iou_range=(0.8, 1.0), seed: int = 0, max_steps: int = 20000) -> np.ndarray:
    """Randomly corrupt ``gt`` until its IoU with ``gt`` falls inside ``iou_range``.

    A target IoU is drawn uniformly from the range. Each step stamps a disk
    of foreground (local dilation) or background (local erosion) at a random
    ground-truth boundary pixel. The stamp radius is sized from the area
    still to be corrupted, so steps shrink near the target; a stamp that
    would drop below the range is undone and the radius halved.
    """
    m = as_mask(gt)
    require_nondegenerate(m)
    lo, hi = map(float, iou_range)
    if not (0.0 < lo <= hi <= 1.0):
        raise ValueError(f"invalid IoU range {iou_range}")
    out = m.copy()
    if lo >= 1.0:
        return out
    rng = rng_for(seed)
    target = rng.uniform(lo, hi)
    edge = boundary_pixels(m)
    n_fg = int(np.count_nonzero(m))
    h, w = m.shape
    track = _IoUTracker(m, out)
    cap = None
    for _ in range(max_steps):
        if lo <= track.value <= target:
            return out
        deficit = (track.value - target) * n_fg
        radius = max(1, int(np.sqrt(max(deficit, 1.0) / np.pi)))
        if cap is not None:
            radius = min(radius, cap)
        cy, cx = edge[rng.integers(len(edge))]
        value = bool(rng.integers(2))
        win = (
            slice(max(cy - radius, 0), min(cy + radius + 1, h)),
            slice(max(cx - radius, 0), min(cx + radius + 1, w)),
        )
        before = track.window_counts(out, win)
        saved = out[win].copy()
        _stamp(out, (cy, cx), radius, value)
        after = track.window_counts(out, win)
        inter = track.inter + after[0] - before[0]
        union = track.union + after[1] - before[1]
        if union == 0 or inter / union < lo or not out.any() or out.all():
            out[win] = saved
            cap = max(1, radius // 2)
            continue
        track.inter, track.union = inter, union
    score = iou(out, m)
    if not lo <= score <= hi:
        raise PerturbError(f"IoU budget exhausted at {score:.4f}, outside [{lo}, {hi}]")
    return out


@dataclass(frozen=True)
class PerturbSpec:
    kind: str
    radius: int = 0
    chunk_diameter: int = 1
    count: int = 1
    iou_range: tuple[float, float] = (0.8, 1.0)
    seed: int = 0

    KINDS = ("erode", "dilate", "chunk-removal", "iou-target")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        lo, hi = self.iou_range
        if not lo <= hi:
            raise ValueError("iou_range must satisfy lo <= hi")


def apply(gt, spec: PerturbSpec) -> np.ndarray:
    if spec.kind == "erode":
        return erode_perturb(gt, spec.radius)
    if spec.kind == "dilate":
        return dilate_perturb(gt, spec.radius)
    if spec.kind == "chunk-removal":
        return chunk_removal(gt, spec.chunk_diameter, spec.count, spec.seed)
    return iou_target_perturb(gt, spec.iou_range, spec.seed)
