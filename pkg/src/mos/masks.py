"""Grid types, image I/O and binarization.

Score maps and binary masks are plain numpy arrays indexed ``[row, col]``
with the origin at the top-left pixel. Score maps are ``float64`` in
``[0, 1]``; binary masks are ``bool``. The helpers here validate and
normalise arrays coming from callers or from disk.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


class MaskFormatError(ValueError):
    """Raised for image files that are not 8-bit single/three channel."""


class DegenerateMaskError(ValueError):
    """Raised when a ground truth lacks foreground or background."""


def as_scoremap(values) -> np.ndarray:
    """Return ``values`` as a validated 2-D float64 score map."""
    s = np.asarray(values, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
        raise ValueError(f"score map must be a non-empty 2-D grid, got shape {s.shape}")
    if not np.all((s >= 0.0) & (s <= 1.0)):
        raise ValueError("score map values must lie in [0, 1]")
    return s


def as_mask(values) -> np.ndarray:
    """Return ``values`` as a validated 2-D boolean mask.

    Accepts bool arrays or numeric arrays holding only 0 and 1.
    """
    m = np.asarray(values)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"mask must be a non-empty 2-D grid, got shape {m.shape}")
    if m.dtype == bool:
        return m
    if not np.all((m == 0) | (m == 1)):
        raise ValueError("mask values must be exactly 0 or 1")
    return m.astype(bool)


def as_rgb(values) -> np.ndarray:
    img = np.asarray(values)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"RGB image must be uint8 HxWx3, got {img.dtype} {img.shape}")
    return img


def check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape[:2] for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def require_nondegenerate(gt: np.ndarray) -> None:
    n_fg = int(np.count_nonzero(gt))
    if n_fg == 0:
        raise DegenerateMaskError("ground truth has no foreground pixels")
    if n_fg == gt.size:
        raise DegenerateMaskError("ground truth has no background pixels")


def _read_gray8(path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            arr = np.array(img)
    except (OSError, SyntaxError) as exc:
        raise MaskFormatError(f"cannot read image {path}: {exc}") from exc
    if mode != "L" or arr.dtype != np.uint8:
        raise MaskFormatError(f"{path}: expected 8-bit single-channel image, got mode {mode!r}")
    return arr


def load_mask(path) -> np.ndarray:
    """Read an 8-bit grayscale PNG/PGM; pixels >= 128 become foreground."""
    return _read_gray8(path) >= 128


def load_scoremap(path) -> np.ndarray:
    """Read an 8-bit grayscale PNG/PGM as scores ``v / 255``."""
    return _read_gray8(path).astype(np.float64) / 255.0


def load_image(path) -> np.ndarray:
    """Read an 8-bit RGB image (grayscale inputs are expanded to RGB)."""
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode not in ("RGB", "L"):
                raise MaskFormatError(f"{path}: expected 8-bit RGB or gray image, got mode {img.mode!r}")
            return np.array(img.convert("RGB"))
    except (OSError, SyntaxError) as exc:
        raise MaskFormatError(f"cannot read image {path}: {exc}") from exc


def _save(arr: np.ndarray, path) -> None:
    path = Path(path)
    fmt = "PPM" if path.suffix.lower() in (".pgm", ".ppm") else "PNG"
    Image.fromarray(arr).save(path, format=fmt)


def save_mask(mask, path) -> None:
    """Write a mask as 8-bit gray (0 / 255). ``.pgm`` paths get binary P5."""
    m = as_mask(mask)
    _save(np.where(m, 255, 0).astype(np.uint8), path)


def save_scoremap(scores, path) -> None:
    s = as_scoremap(scores)
    _save(np.rint(s * 255.0).astype(np.uint8), path)


def save_image(img, path) -> None:
    _save(as_rgb(img), path)


def binarize(scores, threshold: float = 0.5) -> np.ndarray:
    """Foreground where ``score >= threshold``; ties go to foreground."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    return as_scoremap(scores) >= threshold
