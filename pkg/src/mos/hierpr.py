"""Forward pass of a hierarchical point-wise refining (HierPR) block.

A block upsamples a coarse score map, measures per-pixel uncertainty as
``|p - 0.5|``, picks the most uncertain pixels, and re-predicts only those
with a small three-layer perceptron fed by bilinearly sampled features plus
the coarse score. Every other pixel keeps its upsampled value.

Weights and feature tensors are stored as plain text so fixtures can be
diffed and exchanged between tools::

    HIERPR-MLP v1            TENSOR v1
    C h1 h2                  C H W
    <layer 1: W row-major, then b>   <values, row-major>
    <layer 2 ...>
    <layer 3 ...>
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .masks import as_scoremap
from .resample import resize_bilinear

MLP_HEADER = "HIERPR-MLP v1"
TENSOR_HEADER = "TENSOR v1"

PointRefiner = Callable[[np.ndarray, np.ndarray], np.ndarray]


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class MlpWeights:
    """Three affine layers; the coarse score is appended to every layer input.

    Shapes: ``w1 (h1, C+1)``, ``w2 (h2, h1+1)``, ``w3 (1, h2+1)``.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2", "w3", "b3"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        h1, h2 = self.w1.shape[0], self.w2.shape[0]
        expected = {
            "w1": (h1, self.w1.shape[1]),
            "b1": (h1,),
            "w2": (h2, h1 + 1),
            "b2": (h2,),
            "w3": (1, h2 + 1),
            "b3": (1,),
        }
        if self.w1.ndim != 2 or self.w1.shape[1] < 2:
            raise ValueError("w1 must be (h1, C+1) with C >= 1")
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def channels(self) -> int:
        return self.w1.shape[1] - 1

    @property
    def hidden(self) -> tuple[int, int]:
        return self.w1.shape[0], self.w2.shape[0]

    @classmethod
    def zeros(cls, channels: int, h1: int, h2: int) -> "MlpWeights":
        return cls(
            np.zeros((h1, channels + 1)), np.zeros(h1),
            np.zeros((h2, h1 + 1)), np.zeros(h2),
            np.zeros((1, h2 + 1)), np.zeros(1),
        )

    @classmethod
    def random(cls, channels: int, h1: int, h2: int, rng: np.random.Generator, scale: float = 1.0):
        def layer(n_out, n_in):
            bound = scale / math.sqrt(n_in)
            return rng.uniform(-bound, bound, (n_out, n_in)), rng.uniform(-bound, bound, n_out)

        return cls(*layer(h1, channels + 1), *layer(h2, h1 + 1), *layer(1, h2 + 1))

    def layers(self):
        return ((self.w1, self.b1), (self.w2, self.b2), (self.w3, self.b3))


def _affine(w: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    # fixed accumulation order, so a point's result does not depend on the batch
    out = np.broadcast_to(b, (x.shape[0], b.shape[0])).copy()
    for j in range(x.shape[1]):
        out += x[:, j : j + 1] * w[:, j]
    return out


def mlp_forward(w: MlpWeights, feature, coarse):
    """Perceptron output in (0, 1) for one point or a batch of points.

    ``feature`` is ``(C,)`` or ``(N, C)``; ``coarse`` a scalar or ``(N,)``.
    ReLU follows layers 1 and 2, a logistic follows layer 3.
    """
    f = np.asarray(feature, dtype=np.float64)
    single = f.ndim == 1
    f = np.atleast_2d(f)
    c = np.asarray(coarse, dtype=np.float64).reshape(-1, 1)
    if f.shape[1] != w.channels:
        raise ValueError(f"feature has {f.shape[1]} channels, weights expect {w.channels}")
    if c.shape[0] != f.shape[0]:
        raise ValueError("feature and coarse batch sizes differ")
    h = np.maximum(_affine(w.w1, w.b1, np.hstack([f, c])), 0.0)
    h = np.maximum(_affine(w.w2, w.b2, np.hstack([h, c])), 0.0)
    z = _affine(w.w3, w.b3, np.hstack([h, c]))[:, 0]
    out = 1.0 / (1.0 + np.exp(-z))
    return float(out[0]) if single else out


def uncertainty(p) -> np.ndarray:
    """``|p - 0.5|``: 0 is maximally uncertain, 0.5 fully confident."""
    return np.abs(as_scoremap(p) - 0.5)


def n_points(fraction: float, n_pixels: int) -> int:
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    # round away float noise such as 0.1 * 100 = 10.000000000000002
    return max(1, min(n_pixels, math.ceil(round(fraction * n_pixels, 9))))


def select_points(u, fraction: float = 0.1) -> np.ndarray:
    """The ``ceil(fraction * H * W)`` most uncertain pixels as ``(k, 2)`` rows/cols.

    Ordered by uncertainty, then row-major position; ties at the cut-off go
    to the earlier pixel.
    """
    u = np.asarray(u, dtype=np.float64)
    flat = u.ravel()
    k = n_points(fraction, flat.size)
    if k < flat.size:
        kth = np.partition(flat, k - 1)[k - 1]
        below = np.flatnonzero(flat < kth)
        at = np.flatnonzero(flat == kth)[: k - below.size]
        idx = np.concatenate([below, at])
        idx = idx[np.lexsort((idx, flat[idx]))]
    else:
        idx = np.lexsort((np.arange(flat.size), flat))
    return np.column_stack(np.unravel_index(idx, u.shape))


def sample_bilinear(features, at) -> np.ndarray:
    """Bilinear feature lookup at normalised ``(row, col)`` coordinates.

    ``0`` maps to the first pixel centre and ``1`` to the last. ``at`` is
    ``(2,)`` or ``(N, 2)``; returns ``(C,)`` or ``(N, C)``.
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    a = np.asarray(at, dtype=np.float64)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if np.any((a < 0.0) | (a > 1.0)):
        raise ValueError("sample coordinates must lie in [0, 1]")
    _, h, w = f.shape
    y0, fy = _split(a[:, 0], h)
    x0, fx = _split(a[:, 1], w)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    out = (
        ((1 - fy) * (1 - fx))[:, None] * f[:, y0, x0].T
        + ((1 - fy) * fx)[:, None] * f[:, y0, x1].T
        + (fy * (1 - fx))[:, None] * f[:, y1, x0].T
        + (fy * fx)[:, None] * f[:, y1, x1].T
    )
    return out[0] if single else out


def _split(t: np.ndarray, n: int):
    pos = t * (n - 1)
    near = np.rint(pos)
    pos = np.where(np.abs(pos - near) < 1e-9, near, pos)
    i0 = np.minimum(np.floor(pos).astype(np.intp), max(n - 2, 0))
    return i0, pos - i0


def pixel_coords(points: np.ndarray, shape) -> np.ndarray:
    """Normalised ``(row, col)`` of integer pixel positions in a grid of ``shape``."""
    h, w = shape
    rows = points[:, 0] / (h - 1) if h > 1 else np.zeros(len(points))
    cols = points[:, 1] / (w - 1) if w > 1 else np.zeros(len(points))
    return np.column_stack([rows, cols])


@dataclass(frozen=True)
class BlockOutput:
    prediction: np.ndarray
    uncertainty: np.ndarray
    points: np.ndarray
    upsampled: np.ndarray


def hierpr_block(coarse, features, mlp: Union[MlpWeights, PointRefiner], fraction: float = 0.1,
                 upsample: bool = True) -> BlockOutput:
    """Run one block and keep the intermediate maps.

    With ``upsample`` the output grid is twice the coarse grid per side,
    otherwise the same size. ``mlp`` may also be any callable taking
    ``(features (N, C), coarse (N,))`` and returning ``(N,)`` scores.
    """
    c = as_scoremap(coarse)
    h, w = c.shape
    up = resize_bilinear(c, 2 * h, 2 * w) if upsample else c.copy()
    np.clip(up, 0.0, 1.0, out=up)
    unc = np.abs(up - 0.5)
    pts = select_points(unc, fraction)
    feats = sample_bilinear(features, pixel_coords(pts, up.shape))
    vals = up[pts[:, 0], pts[:, 1]]
    if isinstance(mlp, MlpWeights):
        refined = mlp_forward(mlp, feats, vals)
    else:
        refined = np.asarray(mlp(feats, vals), dtype=np.float64)
    out = up.copy()
    out[pts[:, 0], pts[:, 1]] = refined
    return BlockOutput(prediction=out, uncertainty=unc, points=pts, upsampled=up)


def hierpr_step(coarse, features, mlp, fraction: float = 0.1, upsample: bool = True) -> np.ndarray:
    """Refined score map from one HierPR block."""
    return hierpr_block(coarse, features, mlp, fraction, upsample).prediction


# -- text formats ------------------------------------------------------------


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _floats(line: str, n: int, what: str) -> np.ndarray:
    try:
        vals = np.array([float(t) for t in line.split()], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from exc
    if vals.size != n:
        raise FormatError(f"{what}: expected {n} values, got {vals.size}")
    return vals


def save_weights(w: MlpWeights, path) -> None:
    lines = [MLP_HEADER, f"{w.channels} {w.hidden[0]} {w.hidden[1]}"]
    for mat, bias in w.layers():
        lines.append(_fmt(np.concatenate([mat.ravel(), bias])))
    Path(path).write_text("\n".join(lines) + "\n")


def load_weights(path) -> MlpWeights:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != MLP_HEADER:
        raise FormatError(f"{path}: missing {MLP_HEADER!r} header")
    if len(lines) != 5:
        raise FormatError(f"{path}: expected 5 lines, got {len(lines)}")
    try:
        c, h1, h2 = (int(t) for t in lines[1].split())
    except ValueError as exc:
        raise FormatError(f"{path}: bad dimension line {lines[1]!r}") from exc
    parts = []
    for i, (n_out, n_in) in enumerate(((h1, c + 1), (h2, h1 + 1), (1, h2 + 1))):
        vals = _floats(lines[2 + i], n_out * n_in + n_out, f"{path}: layer {i + 1}")
        parts += [vals[: n_out * n_in].reshape(n_out, n_in), vals[n_out * n_in :]]
    return MlpWeights(*parts)


def save_tensor(t, path) -> None:
    a = np.asarray(t, dtype=np.float64)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3:
        raise ValueError("tensor must be (C, H, W)")
    c, h, w = a.shape
    lines = [TENSOR_HEADER, f"{c} {h} {w}"]
    lines += [_fmt(row) for row in a.reshape(c * h, w)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_tensor(path) -> np.ndarray:
    text = Path(path).read_text().split("\n", 2)
    if len(text) < 2 or text[0].strip() != TENSOR_HEADER:
        raise FormatError(f"{path}: missing {TENSOR_HEADER!r} header")
    try:
        c, h, w = (int(t) for t in text[1].split())
    except ValueError as exc:
        raise FormatError(f"{path}: bad dimension line {text[1]!r}") from exc
    body = text[2] if len(text) > 2 else ""
    vals = _floats(body, c * h * w, str(path))
    if not np.all(np.isfinite(vals)):
        raise FormatError(f"{path}: non-finite values")
    return vals.reshape(c, h, w)
