"""Recursive decoder topology, its validation, losses and a forward runner.

The decoder has seven HierPR blocks named ``S{n}_{i}``: ``n`` is the stride
of the deconvolution features the block consumes and ``i`` the cycle it
belongs to (0 for the one-off initial block). Three cycles of length 1, 2
and 3 bring the prediction to strides 4, 2 and 1. After each cycle the
initial stride-4 prediction and all cycle-end predictions so far are
stacked and passed through the shared mask encoder; its output guides the
first block of the next cycle.

Block implementations are injected through an executor object, so the same
schedule can be driven by the numpy HierPR kernel, by an upsample-only
stand-in, or by anything else honouring :class:`BlockExecutor`.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Protocol

import numpy as np

from .hierpr import MlpWeights, hierpr_block
from .masks import as_mask
from .resample import resize_bilinear, resize_nearest

N_BLOCKS = 7
CYCLE_LENGTHS = (1, 2, 3)
CYCLE_END_STRIDES = (4, 2, 1)
BCE_EPS = 1e-7

CANONICAL_LOSS = {
    "S8_0": (1.0, 1.0, 1.0),
    "S8_1": (1.0, 1.0, 1.0),
    "S8_2": (1.0, 1.0, 1.0),
    "S8_3": (1.0, 1.0, 1.0),
    "S4_2": (0.5, 0.25, 0.25),
    "S4_3": (0.5, 0.25, 0.25),
    "S2_3": (0.0, 1.0, 1.0),
}
CANONICAL_GRADIENT_WEIGHT = 5.0


@dataclass(frozen=True)
class BlockSpec:
    """One HierPR block.

    ``input_stride`` is the stride of the deconvolution features feeding the
    block, ``prediction_stride`` that of the prediction it refines, and
    ``output_stride`` that of the prediction it emits.
    """

    name: str
    input_stride: int
    cycle: int
    output_stride: int
    prediction_stride: int
    share_group: str

    @property
    def upsamples(self) -> bool:
        return self.prediction_stride > self.output_stride


@dataclass(frozen=True)
class LossWeights:
    per_block: Mapping[str, tuple[float, float, float]]
    gradient_weight: float = CANONICAL_GRADIENT_WEIGHT
    final_block: str = "S2_3"


@dataclass(frozen=True)
class DecoderSchedule:
    blocks: tuple[BlockSpec, ...]
    init_block: str
    cycles: tuple[tuple[str, ...], ...]
    mask_encoder_inputs: tuple[tuple[str, ...], ...]
    loss: LossWeights = field(default_factory=lambda: LossWeights(dict(CANONICAL_LOSS)))

    def block(self, name: str) -> BlockSpec:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "blocks": [asdict(b) for b in self.blocks],
            "init_block": self.init_block,
            "cycles": [list(c) for c in self.cycles],
            "mask_encoder_inputs": [list(c) for c in self.mask_encoder_inputs],
            "mask_encoder": {"share_group": "global"},
            "share_groups": _groups(self.blocks),
            "loss": {
                "per_block": {k: list(v) for k, v in self.loss.per_block.items()},
                "gradient_weight": self.loss.gradient_weight,
                "final_block": self.loss.final_block,
            },
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_dict(cls, d: Mapping) -> "DecoderSchedule":
        loss = d.get("loss", {})
        return cls(
            blocks=tuple(BlockSpec(**b) for b in d["blocks"]),
            init_block=d["init_block"],
            cycles=tuple(tuple(c) for c in d["cycles"]),
            mask_encoder_inputs=tuple(tuple(c) for c in d["mask_encoder_inputs"]),
            loss=LossWeights(
                per_block={k: tuple(v) for k, v in loss.get("per_block", CANONICAL_LOSS).items()},
                gradient_weight=loss.get("gradient_weight", CANONICAL_GRADIENT_WEIGHT),
                final_block=loss.get("final_block", "S2_3"),
            ),
        )

    @classmethod
    def from_json(cls, path) -> "DecoderSchedule":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _groups(blocks) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for b in blocks:
        out.setdefault(b.share_group, []).append(b.name)
    return out


def _spec(n: int, i: int) -> BlockSpec:
    pred = 4 if (n == 8 and i > 0) else n
    return BlockSpec(f"S{n}_{i}", n, i, n // 2, pred, f"hierpr_s{n}")


def canonical_schedule() -> DecoderSchedule:
    init = _spec(8, 0)
    cycles = (
        (_spec(8, 1),),
        (_spec(8, 2), _spec(4, 2)),
        (_spec(8, 3), _spec(4, 3), _spec(2, 3)),
    )
    ends = [c[-1].name for c in cycles]
    return DecoderSchedule(
        blocks=(init,) + tuple(b for c in cycles for b in c),
        init_block=init.name,
        cycles=tuple(tuple(b.name for b in c) for c in cycles),
        mask_encoder_inputs=tuple(tuple([init.name] + ends[: k + 1]) for k in range(3)),
        loss=LossWeights(dict(CANONICAL_LOSS)),
    )


def validate(s: DecoderSchedule) -> list[str]:
    """All violated topology rules, as readable messages. Empty means valid."""
    v: list[str] = []
    if len(s.blocks) != N_BLOCKS:
        v.append(f"block count ≠ {N_BLOCKS} (got {len(s.blocks)})")
    names = [b.name for b in s.blocks]
    if len(set(names)) != len(names):
        v.append("duplicate block names")
    by_name = {b.name: b for b in s.blocks}

    for b in s.blocks:
        if b.name != f"S{b.input_stride}_{b.cycle}":
            v.append(f"{b.name}: name does not encode (stride {b.input_stride}, cycle {b.cycle})")
        if b.input_stride not in (8, 4, 2):
            v.append(f"{b.name}: input stride {b.input_stride} not in {{8, 4, 2}}")
        if b.output_stride * 2 != b.input_stride:
            v.append(f"{b.name}: output stride {b.output_stride} is not half of input stride {b.input_stride}")
        equal_ok = b.input_stride == 8 and b.cycle > 0
        if b.prediction_stride == b.output_stride:
            if not equal_ok:
                v.append(f"{b.name}: only cycle S8 blocks may keep the prediction stride")
        elif b.prediction_stride != 2 * b.output_stride:
            v.append(f"{b.name}: prediction stride {b.prediction_stride} must be {b.output_stride} or {2 * b.output_stride}")
        elif equal_ok:
            v.append(f"{b.name}: cycle S8 block must refine the stride-4 prediction in place")
        if b.share_group != f"hierpr_s{b.input_stride}":
            v.append(f"{b.name}: share group {b.share_group!r} breaks the by-stride weight sharing")

    init = by_name.get(s.init_block)
    if init is None:
        v.append(f"init block {s.init_block!r} missing")
    elif (init.cycle, init.input_stride, init.output_stride, init.prediction_stride) != (0, 8, 4, 8):
        v.append(f"init block {init.name} must map the stride-8 prediction to stride 4 in cycle 0")

    if len(s.cycles) != len(CYCLE_LENGTHS):
        v.append(f"cycle count ≠ {len(CYCLE_LENGTHS)}")
    for k, cyc in enumerate(s.cycles, start=1):
        if k <= len(CYCLE_LENGTHS) and len(cyc) != CYCLE_LENGTHS[k - 1]:
            v.append(f"cycle {k}: length {len(cyc)} ≠ {CYCLE_LENGTHS[k - 1]}")
        specs = [by_name[n] for n in cyc if n in by_name]
        if len(specs) != len(cyc):
            v.append(f"cycle {k}: unknown block names")
        for b in specs:
            if b.cycle != k:
                v.append(f"cycle {k}: block {b.name} is tagged with cycle {b.cycle}")
        outs = [b.output_stride for b in specs]
        if any(a < b for a, b in zip(outs, outs[1:])):
            v.append(f"cycle {k}: non-decreasing resolution within cycle violated")
        ins = [b.input_stride for b in specs]
        if ins and ins != [8, 4, 2][: len(ins)]:
            v.append(f"cycle {k}: feature strides {ins} must run 8, 4, 2 in order")
        for prev, nxt in zip(specs, specs[1:]):
            if nxt.prediction_stride != prev.output_stride:
                v.append(f"cycle {k}: {nxt.name} does not consume {prev.name}'s output stride")
        if specs and k <= len(CYCLE_END_STRIDES) and specs[-1].output_stride != CYCLE_END_STRIDES[k - 1]:
            v.append(f"cycle {k}: ends at stride {specs[-1].output_stride} ≠ {CYCLE_END_STRIDES[k - 1]}")

    order = [s.init_block] + [n for c in s.cycles for n in c]
    if sorted(order) != sorted(names):
        v.append("blocks are not covered exactly once by init block and cycles")
    elif order != names:
        v.append("block order differs from init-then-cycles execution order")

    ends = [c[-1] for c in s.cycles if c]
    expected_inputs = tuple(tuple([s.init_block] + ends[: k + 1]) for k in range(len(ends)))
    if tuple(tuple(x) for x in s.mask_encoder_inputs) != expected_inputs:
        v.append("mask encoder inputs must be the init prediction followed by each cycle end, in order")
    for k, inp in enumerate(s.mask_encoder_inputs, start=1):
        if len(inp) != k + 1:
            v.append(f"mask encoder input after cycle {k} has {len(inp)} channels ≠ {k + 1}")

    pb = s.loss.per_block
    if set(pb) != set(names):
        v.append("loss table does not cover exactly the schedule's blocks")
    for name, triple in pb.items():
        if len(triple) != 3 or any(w < 0 for w in triple):
            v.append(f"loss weights for {name} must be three non-negative numbers")
        elif name in CANONICAL_LOSS and tuple(map(float, triple)) != CANONICAL_LOSS[name]:
            v.append(f"loss weights for {name} {tuple(triple)} ≠ {CANONICAL_LOSS[name]}")
    if s.loss.gradient_weight != CANONICAL_GRADIENT_WEIGHT:
        v.append(f"gradient loss weight {s.loss.gradient_weight} ≠ {CANONICAL_GRADIENT_WEIGHT}")
    if not ends or s.loss.final_block != ends[-1]:
        v.append("gradient loss must apply to the final cycle's last block")
    return v


# -- losses -------------------------------------------------------------------


def bce(p, g, eps: float = BCE_EPS) -> float:
    p = np.clip(np.asarray(p, dtype=np.float64), eps, 1.0 - eps)
    g = np.asarray(g, dtype=np.float64)
    return float(-np.mean(g * np.log(p) + (1.0 - g) * np.log(1.0 - p)))


def gradient_loss(p, g) -> float:
    """Mean absolute difference of forward-difference gradients (x and y pooled)."""
    p = np.asarray(p, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    dx = np.abs(np.diff(p, axis=1) - np.diff(g, axis=1))
    dy = np.abs(np.diff(p, axis=0) - np.diff(g, axis=0))
    n = dx.size + dy.size
    return float((dx.sum() + dy.sum()) / n) if n else 0.0


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    per_block: dict[str, float]
    gradient: float


def total_loss(preds: Mapping[str, np.ndarray], gts: Mapping[str, np.ndarray],
               weights: LossWeights) -> LossBreakdown:
    """Weighted BCE + L1 + L2 per block, plus the gradient term on the final block."""
    per_block = {}
    for name, p in preds.items():
        if name not in gts:
            raise KeyError(f"no ground truth for block {name}")
        p = np.asarray(p, dtype=np.float64)
        g = np.asarray(gts[name], dtype=np.float64)
        if p.shape != g.shape:
            raise ValueError(f"{name}: prediction {p.shape} vs ground truth {g.shape}")
        wb, w1, w2 = weights.per_block[name]
        err = p - g
        per_block[name] = wb * bce(p, g) + w1 * float(np.mean(np.abs(err))) + w2 * float(np.mean(err * err))
    grad = 0.0
    if weights.gradient_weight and weights.final_block in preds:
        f = weights.final_block
        grad = weights.gradient_weight * gradient_loss(preds[f], gts[f])
    return LossBreakdown(total=sum(per_block.values()) + grad, per_block=per_block, gradient=grad)


def targets_for(preds: Mapping[str, np.ndarray], gt) -> dict[str, np.ndarray]:
    """Nearest-neighbour downsampled copies of ``gt`` matching each prediction."""
    g = as_mask(gt)
    return {n: resize_nearest(g, *np.shape(p)) for n, p in preds.items()}


# -- forward pass -------------------------------------------------------------


class BlockExecutor(Protocol):
    def refine(self, block: BlockSpec, prediction: np.ndarray,
               guidance: Optional[np.ndarray], shape: tuple[int, int]) -> np.ndarray: ...

    def encode_masks(self, stack: np.ndarray) -> np.ndarray: ...


class BlockError(RuntimeError):
    def __init__(self, block: str, exc: BaseException):
        super().__init__(f"block {block}: {exc}")
        self.block = block


@dataclass
class ForwardResult:
    predictions: dict[str, np.ndarray]
    uncertainty: dict[str, np.ndarray]
    encoder_inputs: list[np.ndarray]
    encodings: list[np.ndarray]

    @property
    def final(self) -> np.ndarray:
        return next(reversed(self.predictions.values()))


def _shape_at(base: tuple[int, int], stride: int) -> tuple[int, int]:
    return base[0] * 8 // stride, base[1] * 8 // stride


def run_forward(s: DecoderSchedule, executor: BlockExecutor, initial) -> ForwardResult:
    """Drive every block in schedule order from a stride-8 initial prediction."""
    problems = validate(s)
    if problems:
        raise ValueError("invalid schedule: " + "; ".join(problems))
    x0 = np.asarray(initial, dtype=np.float64)
    base = x0.shape
    preds: dict[str, np.ndarray] = {}
    unc: dict[str, np.ndarray] = {}

    def run(name, pred, guidance):
        blk = s.block(name)
        shape = _shape_at(base, blk.output_stride)
        try:
            out = executor.refine(blk, pred, guidance, shape)
        except Exception as exc:
            raise BlockError(name, exc) from exc
        if isinstance(out, tuple):
            out, u = out
        else:
            u = np.abs(resize_bilinear(pred, *shape) - 0.5)
        out = np.asarray(out, dtype=np.float64)
        if out.shape != shape:
            raise BlockError(name, ValueError(f"output shape {out.shape} ≠ {shape}"))
        preds[name], unc[name] = out, u
        return out

    s4 = _shape_at(base, 4)
    prev = run(s.init_block, x0, None)
    guidance = None
    inputs, encodings = [], []
    for k, cyc in enumerate(s.cycles):
        x = resize_bilinear(prev, *s4)
        for j, name in enumerate(cyc):
            x = run(name, x, guidance if j == 0 else None)
        prev = x
        stack = np.stack([resize_bilinear(preds[n], *s4) for n in s.mask_encoder_inputs[k]])
        inputs.append(stack)
        try:
            guidance = np.asarray(executor.encode_masks(stack), dtype=np.float64)
        except Exception as exc:
            raise BlockError("mask_encoder", exc) from exc
        encodings.append(guidance)
    return ForwardResult(preds, unc, inputs, encodings)


class UpsampleExecutor:
    """Stand-in blocks that only resize; guidance is ignored."""

    def refine(self, block, prediction, guidance, shape):
        return resize_bilinear(prediction, *shape)

    def encode_masks(self, stack):
        return stack.mean(axis=0)


class HierprExecutor:
    """Blocks backed by :func:`mos.hierpr.hierpr_block`.

    ``weights`` maps share-group names to perceptron weights. Guidance from
    the mask encoder and any deconvolution-branch prediction supplied for the
    block's input stride are averaged into the incoming prediction.
    """

    def __init__(self, features, weights: Mapping[str, MlpWeights], fraction: float = 0.1,
                 deconv: Optional[Mapping[int, np.ndarray]] = None):
        self.features = np.asarray(features, dtype=np.float64)
        self.weights = dict(weights)
        self.fraction = fraction
        self.deconv = dict(deconv or {})

    def refine(self, block, prediction, guidance, shape):
        p = np.asarray(prediction, dtype=np.float64)
        if guidance is not None:
            p = 0.5 * (p + resize_bilinear(guidance, *p.shape))
        branch = self.deconv.get(block.prediction_stride)
        if branch is not None and block.input_stride in (4, 2):
            p = 0.5 * (p + resize_bilinear(branch, *p.shape))
        out = hierpr_block(np.clip(p, 0.0, 1.0), self.features, self.weights[block.share_group],
                           self.fraction, upsample=block.upsamples)
        return out.prediction, out.uncertainty

    def encode_masks(self, stack):
        return stack.mean(axis=0)


