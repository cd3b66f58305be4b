"""Segmentation quality metrics: IoU, MAE, S-measure, mBA and MQ.

IoU, mBA and MQ take binary masks. MAE and S-measure take soft score maps.
:func:`evaluate` bundles all five for one image.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .masks import (
    DegenerateMaskError,
    as_mask,
    as_scoremap,
    binarize,
    check_same_shape,
    require_nondegenerate,
)
from .morphology import BandSet, bands

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class MeticulosityParams:
    n_bands: int = 5

    def __post_init__(self):
        if self.n_bands < 2:
            raise ValueError("n_bands must be >= 2")


@dataclass(frozen=True)
class MetricReport:
    mae: float
    sm: float
    iou: float
    mba: float
    mq: float

    FIELDS = ("mae", "sm", "iou", "mba", "mq")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def iou(pred, gt) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    p, g = as_mask(pred), as_mask(gt)
    check_same_shape(p, g)
    union = np.count_nonzero(p | g)
    if union == 0:
        return 1.0
    return np.count_nonzero(p & g) / union


def mae(pred, gt) -> float:
    s, g = as_scoremap(pred), as_mask(gt)
    check_same_shape(s, g)
    return float(np.mean(np.abs(s - g)))


def region_accuracy(pred, gt, region) -> float:
    """Fraction of ``region`` pixels where ``pred`` agrees with ``gt``."""
    p, g, r = as_mask(pred), as_mask(gt), as_mask(region)
    check_same_shape(p, g, r)
    n = np.count_nonzero(r)
    if n == 0:
        raise ValueError("region is empty")
    return np.count_nonzero((p == g) & r) / n


def _band_accuracies(pred: np.ndarray, gt: np.ndarray, bs: BandSet) -> tuple[np.ndarray, float | None]:
    """Accuracy inside each band and outside the widest one.

    The outside accuracy is None when the widest band covers the frame.

    All bands are read off one histogram of the boundary distance field, so
    the cost does not grow with the number of bands.
    """
    r2 = np.array([r * r for r in bs.radii], dtype=np.int64)
    cap = int(r2.max()) + 1
    d = np.minimum(bs.sq_distance, cap).ravel()
    correct = (pred == gt).ravel()
    total = np.cumsum(np.bincount(d, minlength=cap + 1))
    good = np.cumsum(np.bincount(d[correct], minlength=cap + 1))
    n_in = total[r2]
    if np.any(n_in == 0):
        raise DegenerateMaskError("empty boundary band")
    inside = good[r2] / n_in
    n_out = total[-1] - total[cap - 1]
    if n_out == 0:
        return inside, None
    return inside, float((good[-1] - good[cap - 1]) / n_out)


def _combine(inside: np.ndarray, outside: float | None) -> float:
    if outside is None:
        raise DegenerateMaskError("widest boundary band covers the whole frame")
    return 0.5 * outside + 0.5 * float(inside.mean())


def _prepare(pred, gt, n_bands: int):
    p, g = as_mask(pred), as_mask(gt)
    check_same_shape(p, g)
    return p, g, bands(g, n_bands)


def mba(pred, gt, n_bands: int = 5) -> float:
    """Mean boundary accuracy over ``n_bands`` nested bands around ``gt``."""
    p, g, bs = _prepare(pred, gt, n_bands)
    inside, _ = _band_accuracies(p, g, bs)
    return float(inside.mean())


def mq(pred, gt, n_bands: int = 5) -> float:
    """Meticulosity quality: half body accuracy, half mean boundary accuracy.

    Body accuracy is measured outside the widest band.
    """
    p, g, bs = _prepare(pred, gt, n_bands)
    return _combine(*_band_accuracies(p, g, bs))


# -- S-measure (structure measure, alpha = 0.5) -----------------------------


def _object_score(x: np.ndarray) -> float:
    mu = x.mean()
    sigma = x.std(ddof=1) if x.size > 1 else 0.0
    return 2.0 * mu / (mu * mu + 1.0 + sigma + _EPS)


def _s_object(pred: np.ndarray, gt: np.ndarray) -> float:
    fg = _object_score(pred[gt])
    bg = _object_score(1.0 - pred[~gt])
    u = gt.mean()
    return u * fg + (1.0 - u) * bg


def _ssim(pred: np.ndarray, gt: np.ndarray) -> float:
    n = pred.size
    x = pred.mean()
    y = gt.mean()
    dx = pred - x
    dy = gt - y
    sxx = (dx * dx).sum() / (n - 1 + _EPS)
    syy = (dy * dy).sum() / (n - 1 + _EPS)
    sxy = (dx * dy).sum() / (n - 1 + _EPS)
    alpha = 4.0 * x * y * sxy
    beta = (x * x + y * y) * (sxx + syy)
    if alpha != 0:
        return alpha / (beta + _EPS)
    if beta == 0:
        return 1.0
    return 0.0


def _s_region(pred: np.ndarray, gt: np.ndarray) -> float:
    h, w = gt.shape
    rows, cols = np.nonzero(gt)
    # split point: foreground centroid, rounded half-up, as a 1-based count
    cx = int(np.floor(cols.mean() + 0.5)) + 1
    cy = int(np.floor(rows.mean() + 0.5)) + 1
    gf = gt.astype(np.float64)
    area = h * w
    score = 0.0
    for rs, cs in (
        (slice(0, cy), slice(0, cx)),
        (slice(0, cy), slice(cx, w)),
        (slice(cy, h), slice(0, cx)),
        (slice(cy, h), slice(cx, w)),
    ):
        p = pred[rs, cs]
        if p.size == 0:
            continue
        score += p.size / area * _ssim(p, gf[rs, cs])
    return score


def s_measure(pred, gt, alpha: float = 0.5) -> float:
    """Structure measure between a score map and a binary ground truth."""
    s, g = as_scoremap(pred), as_mask(gt)
    check_same_shape(s, g)
    y = g.mean()
    if y == 0:
        return float(1.0 - s.mean())
    if y == 1:
        return float(s.mean())
    q = alpha * _s_object(s, g) + (1.0 - alpha) * _s_region(s, g)
    return float(max(q, 0.0))


def evaluate(pred_scores, gt, params: MeticulosityParams | None = None) -> MetricReport:
    """All table columns for one image.

    MAE and S-measure use the raw scores; IoU, mBA and MQ use the scores
    binarized at 0.5.
    """
    params = params or MeticulosityParams()
    s, g = as_scoremap(pred_scores), as_mask(gt)
    check_same_shape(s, g)
    require_nondegenerate(g)
    p = binarize(s, 0.5)
    bs = bands(g, params.n_bands)
    inside, outside = _band_accuracies(p, g, bs)
    return MetricReport(
        mae=mae(s, g),
        sm=s_measure(s, g),
        iou=iou(p, g),
        mba=float(inside.mean()),
        mq=_combine(inside, outside),
    )
