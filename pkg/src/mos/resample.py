"""Align-corners bilinear and nearest-neighbour resizing of 2-D grids."""

from __future__ import annotations

import numpy as np


def _axis(n_in: int, n_out: int):
    """Source index, next index and blend weight for each output position."""
    if n_out == 1 or n_in == 1:
        pos = np.zeros(n_out)
    else:
        pos = np.arange(n_out) * ((n_in - 1) / (n_out - 1))
    i0 = np.minimum(np.floor(pos).astype(np.intp), max(n_in - 2, 0))
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, pos - i0


def resize_bilinear(grid, height: int, width: int) -> np.ndarray:
    """Bilinear resize with corner pixels mapped onto corner pixels.

    Works on ``(H, W)`` or ``(C, H, W)`` arrays; only the last two axes are
    resized. Constant inputs stay exactly constant.
    """
    if height < 1 or width < 1:
        raise ValueError(f"target size must be positive, got {height}x{width}")
    a = np.asarray(grid, dtype=np.float64)
    h, w = a.shape[-2:]
    if (h, w) == (height, width):
        return a.copy()
    r0, r1, fy = _axis(h, height)
    c0, c1, fx = _axis(w, width)
    top = a[..., r0, :]
    rows = top + fy[:, None] * (a[..., r1, :] - top)
    left = rows[..., c0]
    return left + fx * (rows[..., c1] - left)


def resize_nearest(grid, height: int, width: int) -> np.ndarray:
    """Nearest-neighbour resize sampling source pixel centres."""
    if height < 1 or width < 1:
        raise ValueError(f"target size must be positive, got {height}x{width}")
    a = np.asarray(grid)
    h, w = a.shape[-2:]
    rows = ((np.arange(height) + 0.5) * h / height).astype(np.intp)
    cols = ((np.arange(width) + 0.5) * w / width).astype(np.intp)
    return a[..., rows[:, None], cols[None, :]]
