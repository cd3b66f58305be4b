"""Slow, literal reference implementations used only by the tests.

Nothing here imports the package's numerical code: each function restates
a definition directly (brute-force nearest seed, disk-kernel sweeps,
pixel counting, the published S-measure formulas) so it can serve as an
independent check.
"""

from __future__ import annotations

import math

import numpy as np


def brute_sq_edt(seeds: np.ndarray) -> np.ndarray:
    """Squared distance to the nearest seed by scanning every seed."""
    pts = np.argwhere(seeds)
    h, w = seeds.shape
    yy, xx = np.mgrid[:h, :w]
    grid = np.stack([yy.ravel(), xx.ravel()], axis=1)
    d2 = ((grid[:, None, :] - pts[None, :, :]) ** 2).sum(-1).min(axis=1)
    return d2.reshape(h, w)


def disk_offsets(r: int):
    return [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1) if dy * dy + dx * dx <= r * r]


def _shifted(m: np.ndarray, dy: int, dx: int, fill: bool) -> np.ndarray:
    """``out[y, x] = m[y + dy, x + dx]``, ``fill`` where that falls off the frame."""
    h, w = m.shape
    out = np.full_like(m, fill)
    if abs(dy) >= h or abs(dx) >= w:
        return out
    ys, yd = (slice(dy, h), slice(0, h - dy)) if dy >= 0 else (slice(0, h + dy), slice(-dy, h))
    xs, xd = (slice(dx, w), slice(0, w - dx)) if dx >= 0 else (slice(0, w + dx), slice(-dx, w))
    out[yd, xd] = m[ys, xs]
    return out


def sweep_dilate(m: np.ndarray, r: int) -> np.ndarray:
    out = np.zeros_like(m, dtype=bool)
    for dy, dx in disk_offsets(r):
        out |= _shifted(m, dy, dx, False)
    return out


def sweep_erode(m: np.ndarray, r: int) -> np.ndarray:
    out = np.ones_like(m, dtype=bool)
    for dy, dx in disk_offsets(r):
        out &= _shifted(m, dy, dx, True)
    return out


def literal_radii(w: int, h: int, n: int = 5) -> list[int]:
    ub = max(1.0, (w + h) / 300.0)
    return [math.floor(1 + i * (ub - 1) / (n - 1) + 0.5) for i in range(n)]


def literal_bands(gt: np.ndarray, n: int = 5) -> list[np.ndarray]:
    h, w = gt.shape
    return [sweep_dilate(gt, r) & ~sweep_erode(gt, r) for r in literal_radii(w, h, n)]


def literal_iou(p, g):
    union = int(np.sum(p | g))
    return 1.0 if union == 0 else int(np.sum(p & g)) / union


def literal_mae(s, g):
    return float(np.sum(np.abs(s - g.astype(float)))) / s.size


def _acc(p, g, region):
    return int(np.sum((p == g) & region)) / int(np.sum(region))


def literal_mba(p, g, n=5):
    bs = literal_bands(g, n)
    return sum(_acc(p, g, b) for b in bs) / n


def literal_mq(p, g, n=5):
    bs = literal_bands(g, n)
    return 0.5 * _acc(p, g, ~bs[-1]) + sum(_acc(p, g, b) for b in bs) / (2 * n)


# -- S-measure, restated cell by cell ------------------------------------

EPS = 2.220446049250313e-16


def _mean(vals):
    return sum(vals) / len(vals)


def _std1(vals):
    if len(vals) < 2:
        return 0.0
    m = _mean(vals)
    return math.sqrt(sum((v - m) ** 2 for v in vals) / (len(vals) - 1))


def _object(vals):
    x = _mean(vals)
    return 2.0 * x / (x * x + 1.0 + _std1(vals) + EPS)


def _ssim(pv, gv):
    n = len(pv)
    x, y = _mean(pv), _mean(gv)
    sx = sum((a - x) ** 2 for a in pv) / (n - 1 + EPS)
    sy = sum((b - y) ** 2 for b in gv) / (n - 1 + EPS)
    sxy = sum((a - x) * (b - y) for a, b in zip(pv, gv)) / (n - 1 + EPS)
    alpha = 4 * x * y * sxy
    beta = (x * x + y * y) * (sx + sy)
    if alpha != 0:
        return alpha / (beta + EPS)
    return 1.0 if beta == 0 else 0.0


def literal_s_measure(pred: np.ndarray, gt: np.ndarray) -> float:
    h, w = gt.shape
    P = pred.tolist()
    G = gt.astype(int).tolist()
    total = sum(map(sum, G))
    y = total / (h * w)
    if y == 0:
        return 1.0 - sum(map(sum, P)) / (h * w)
    if y == 1:
        return sum(map(sum, P)) / (h * w)
    fg = [P[i][j] for i in range(h) for j in range(w) if G[i][j]]
    bg = [1.0 - P[i][j] for i in range(h) for j in range(w) if not G[i][j]]
    s_obj = y * _object(fg) + (1 - y) * _object(bg)

    # 1-based centroid, round half up
    X = math.floor(sum((j + 1) * G[i][j] for i in range(h) for j in range(w)) / total + 0.5)
    Y = math.floor(sum((i + 1) * G[i][j] for i in range(h) for j in range(w)) / total + 0.5)
    s_reg = 0.0
    for rows, cols in (
        (range(0, Y), range(0, X)),
        (range(0, Y), range(X, w)),
        (range(Y, h), range(0, X)),
        (range(Y, h), range(X, w)),
    ):
        cells = [(i, j) for i in rows for j in cols]
        if not cells:
            continue
        q = _ssim([P[i][j] for i, j in cells], [float(G[i][j]) for i, j in cells])
        s_reg += len(cells) / (h * w) * q
    return max(0.5 * s_obj + 0.5 * s_reg, 0.0)


# -- geometry fixtures ---------------------------------------------------------


def disk(n: int, r: float, center=None) -> np.ndarray:
    c = (n - 1) / 2 if center is None else center
    yy, xx = np.mgrid[:n, :n]
    return (yy - c) ** 2 + (xx - c) ** 2 <= r * r


def random_pair(rng: np.random.Generator, h: int = 64, w: int = 64):
    """A non-degenerate blobby ground truth and a noisy score map for it."""
    while True:
        n = rng.integers(1, 5)
        gt = np.zeros((h, w), bool)
        yy, xx = np.mgrid[:h, :w]
        for _ in range(n):
            cy, cx = rng.uniform(0, h), rng.uniform(0, w)
            r = rng.uniform(3, min(h, w) / 2.5)
            gt |= (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        gt ^= rng.random((h, w)) < 0.02
        if gt.any() and not gt.all():
            break
    noise = rng.normal(0, 0.25, (h, w))
    scores = np.clip(gt * 0.8 + 0.1 + noise, 0, 1)
    return scores, gt


def star(n: int, area: float, lobes: int = 12, depth: float = 0.3) -> np.ndarray:
    """Corrugated star r = R (1 + depth cos(lobes theta)) with the given area."""
    r0 = math.sqrt(area / (math.pi * (1 + depth**2 / 2)))
    c = (n - 1) / 2
    yy, xx = np.mgrid[:n, :n]
    th = np.arctan2(yy - c, xx - c)
    return np.hypot(yy - c, xx - c) <= r0 * (1 + depth * np.cos(lobes * th))


# -- point refinement --------------------------------------------------------


def sort_oracle(u, k):
    flat = np.asarray(u).ravel()
    order = sorted(range(flat.size), key=lambda i: (flat[i], i))[:k]
    return [divmod(i, u.shape[1]) for i in order]


def bilinear_oracle(f, y, x):
    c, h, w = f.shape
    py, px = y * (h - 1), x * (w - 1)
    y0, x0 = min(int(math.floor(py)), max(h - 2, 0)), min(int(math.floor(px)), max(w - 2, 0))
    y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
    a, b = py - y0, px - x0
    return (
        (1 - a) * (1 - b) * f[:, y0, x0]
        + (1 - a) * b * f[:, y0, x1]
        + a * (1 - b) * f[:, y1, x0]
        + a * b * f[:, y1, x1]
    )


def matrix_oracle(w, feature, coarse):
    relu = lambda v: np.maximum(v, 0)  # noqa: E731
    x = np.concatenate([feature, [coarse]])
    h1 = relu(w.w1 @ x + w.b1)
    h2 = relu(w.w2 @ np.concatenate([h1, [coarse]]) + w.b2)
    z = w.w3 @ np.concatenate([h2, [coarse]]) + w.b3
    return 1 / (1 + np.exp(-z[0]))
