"""Exact Euclidean distance transform and disk morphology.

All morphology runs on *squared* integer distances produced by a separable
exact EDT (Meijster, Roerdink & Hesselink 2000), so thresholding against
``r**2`` is exact and one transform serves every radius. Pixels outside the
frame never act as seeds: a mask touching the frame edge neither grows nor
shrinks there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numba
import numpy as np

from .masks import as_mask, require_nondegenerate

__all__ = [
    "BandSet",
    "band_radii",
    "bands",
    "boundary_sq_distance",
    "dilate",
    "disk_kernel",
    "edt",
    "erode",
    "sq_edt",
]


@numba.njit(cache=True, nogil=True)
def _meijster(seeds):
    rows, cols = seeds.shape
    inf = rows + cols + 1
    g = np.empty((rows, cols), dtype=np.int64)

    # column pass (swept row by row for memory locality): vertical distance
    # to the nearest seed in the same column
    for x in range(cols):
        g[0, x] = 0 if seeds[0, x] else inf
    for y in range(1, rows):
        for x in range(cols):
            g[y, x] = 0 if seeds[y, x] else min(g[y - 1, x] + 1, inf)
    for y in range(rows - 2, -1, -1):
        for x in range(cols):
            if g[y + 1, x] < g[y, x]:
                g[y, x] = g[y + 1, x] + 1

    out = np.empty((rows, cols), dtype=np.int64)
    s = np.empty(cols, dtype=np.int64)
    t = np.empty(cols, dtype=np.int64)
    for y in range(rows):
        gy = g[y]
        q = 0
        s[0] = 0
        t[0] = 0
        for u in range(1, cols):
            while q >= 0:
                d_old = (t[q] - s[q]) ** 2 + gy[s[q]] ** 2
                d_new = (t[q] - u) ** 2 + gy[u] ** 2
                if d_old > d_new:
                    q -= 1
                else:
                    break
            if q < 0:
                q = 0
                s[0] = u
            else:
                i = s[q]
                w = 1 + (u * u - i * i + gy[u] ** 2 - gy[i] ** 2) // (2 * (u - i))
                if w < cols:
                    q += 1
                    s[q] = u
                    t[q] = w
        for u in range(cols - 1, -1, -1):
            out[y, u] = (u - s[q]) ** 2 + gy[s[q]] ** 2
            if u == t[q]:
                q -= 1
    return out


def _unreachable(shape) -> int:
    inf = shape[0] + shape[1] + 1
    return inf * inf


def sq_edt(seeds) -> np.ndarray:
    """Squared distance from each pixel to the nearest seed, as int64.

    Pixels with no seed anywhere in the frame get ``np.iinfo(int64).max``.
    """
    m = np.ascontiguousarray(as_mask(seeds))
    d2 = _meijster(m)
    d2[d2 >= _unreachable(m.shape)] = np.iinfo(np.int64).max
    return d2


def edt(seeds) -> np.ndarray:
    """Euclidean distance to the nearest seed pixel.

    Raises:
        ValueError: if ``seeds`` has no set pixel.
    """
    m = as_mask(seeds)
    if not m.any():
        raise ValueError("distance transform needs at least one seed pixel")
    return np.sqrt(sq_edt(m).astype(np.float64))


def dilate(mask, r: int) -> np.ndarray:
    """Pixels within Euclidean distance ``r`` of the foreground."""
    m = as_mask(mask)
    r = _check_radius(r)
    if r == 0:
        return m.copy()
    return sq_edt(m) <= r * r


def erode(mask, r: int) -> np.ndarray:
    """Pixels farther than ``r`` from every in-frame background pixel."""
    m = as_mask(mask)
    r = _check_radius(r)
    if r == 0:
        return m.copy()
    return sq_edt(~m) > r * r


def disk_kernel(r: int) -> np.ndarray:
    """Boolean ``(2r+1, 2r+1)`` window with ``dx**2 + dy**2 <= r**2``."""
    r = _check_radius(r)
    dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
    return dx * dx + dy * dy <= r * r


def boundary_sq_distance(gt) -> np.ndarray:
    """Squared distance from each pixel to the nearest pixel of the other class.

    Pixel ``p`` lies in the band of radius ``r`` iff this value is ``<= r**2``:
    for a foreground pixel that is "not eroded", for a background pixel it is
    "inside the dilation".
    """
    m = as_mask(gt)
    return np.where(m, sq_edt(~m), sq_edt(m))


def band_radii(width: int, height: int, n_bands: int = 5) -> tuple[int, ...]:
    """Integer band radii, uniform on ``[1, max(1, (w+h)/300)]``, rounded half-up."""
    if n_bands < 2:
        raise ValueError("need at least two bands")
    span = Fraction(max(width + height - 300, 0), 300)
    radii = []
    for i in range(n_bands):
        rho = 1 + span * i / (n_bands - 1)
        radii.append(int(rho + Fraction(1, 2)))  # floor(rho + 1/2)
    return tuple(radii)


@dataclass(frozen=True)
class BandSet:
    """Nested boundary bands of one ground-truth mask.

    ``sq_distance`` is the field from :func:`boundary_sq_distance`; band ``i``
    is ``sq_distance <= radii[i]**2``.
    """

    radii: tuple[int, ...]
    sq_distance: np.ndarray = field(repr=False)

    def band(self, i: int) -> np.ndarray:
        r = self.radii[i]
        return self.sq_distance <= r * r

    @cached_property
    def bands(self) -> tuple[np.ndarray, ...]:
        return tuple(self.band(i) for i in range(len(self.radii)))

    def __len__(self) -> int:
        return len(self.radii)


def bands(gt, n_bands: int = 5) -> BandSet:
    """Boundary bands ``dilate(gt, r) & ~erode(gt, r)`` for the standard radii."""
    m = as_mask(gt)
    require_nondegenerate(m)
    h, w = m.shape
    return BandSet(band_radii(w, h, n_bands), boundary_sq_distance(m))


def _check_radius(r) -> int:
    if int(r) != r or r < 0:
        raise ValueError(f"radius must be a non-negative integer, got {r!r}")
    return int(r)
