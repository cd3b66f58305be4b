"""Every single-field edit of the canonical decoder schedule.

Each mutation changes exactly one thing: one field of one block, the order
of two blocks, one cycle's contents or order, the init block, one
mask-encoder input list, one loss-table entry, or one loss setting.
"""

from __future__ import annotations

from dataclasses import replace

from mos.schedule import DecoderSchedule, LossWeights, canonical_schedule


def _with_block(s: DecoderSchedule, i: int, **change) -> DecoderSchedule:
    blocks = list(s.blocks)
    blocks[i] = replace(blocks[i], **change)
    return replace(s, blocks=tuple(blocks))


def schedule_mutations():
    """Yield ``(label, schedule)`` pairs."""
    s = canonical_schedule()
    for i, b in enumerate(s.blocks):
        for stride in (1, 2, 4, 8, 16):
            if stride != b.input_stride:
                yield f"{b.name}.input_stride={stride}", _with_block(s, i, input_stride=stride)
            if stride != b.output_stride:
                yield f"{b.name}.output_stride={stride}", _with_block(s, i, output_stride=stride)
            if stride != b.prediction_stride:
                yield f"{b.name}.prediction_stride={stride}", _with_block(s, i, prediction_stride=stride)
        for cyc in range(5):
            if cyc != b.cycle:
                yield f"{b.name}.cycle={cyc}", _with_block(s, i, cycle=cyc)
        for other in s.blocks:
            if other.name != b.name:
                yield f"{b.name}.name={other.name}", _with_block(s, i, name=other.name)
        yield f"{b.name}.name=renamed", _with_block(s, i, name=b.name + "x")
        for g in ("hierpr_s8", "hierpr_s4", "hierpr_s2", "global"):
            if g != b.share_group:
                yield f"{b.name}.share_group={g}", _with_block(s, i, share_group=g)

    for i in range(len(s.blocks)):
        for j in range(i + 1, len(s.blocks)):
            blocks = list(s.blocks)
            blocks[i], blocks[j] = blocks[j], blocks[i]
            yield f"swap blocks {i},{j}", replace(s, blocks=tuple(blocks))
    yield "drop last block", replace(s, blocks=s.blocks[:-1])
    yield "duplicate a block", replace(s, blocks=s.blocks + (s.blocks[-1],))

    for k, cyc in enumerate(s.cycles):
        cycles = list(s.cycles)
        if len(cyc) > 1:
            cycles[k] = tuple(reversed(cyc))
            yield f"cycle {k + 1} reversed", replace(s, cycles=tuple(cycles))
        cycles = list(s.cycles)
        cycles[k] = cyc[:-1]
        yield f"cycle {k + 1} truncated", replace(s, cycles=tuple(cycles))
        cycles = list(s.cycles)
        cycles[k] = cyc + ("S8_0",)
        yield f"cycle {k + 1} extended", replace(s, cycles=tuple(cycles))
    yield "cycles dropped", replace(s, cycles=s.cycles[:-1])
    yield "cycles swapped", replace(s, cycles=(s.cycles[1], s.cycles[0], s.cycles[2]))

    for name in [b.name for b in s.blocks if b.name != s.init_block] + ["S16_0"]:
        yield f"init_block={name}", replace(s, init_block=name)

    for k, inp in enumerate(s.mask_encoder_inputs):
        enc = list(s.mask_encoder_inputs)
        enc[k] = inp[:-1]
        yield f"encoder input {k} shortened", replace(s, mask_encoder_inputs=tuple(enc))
        enc = list(s.mask_encoder_inputs)
        enc[k] = tuple(reversed(inp))
        yield f"encoder input {k} reversed", replace(s, mask_encoder_inputs=tuple(enc))
    yield "encoder inputs dropped", replace(s, mask_encoder_inputs=s.mask_encoder_inputs[:-1])

    loss = s.loss
    for name, triple in loss.per_block.items():
        for j in range(3):
            for v in (0.0, 0.25, 0.5, 1.0, 2.0):
                if v == triple[j]:
                    continue
                t = list(triple)
                t[j] = v
                table = dict(loss.per_block)
                table[name] = tuple(t)
                yield f"loss[{name}][{j}]={v}", replace(s, loss=replace(loss, per_block=table))
        table = dict(loss.per_block)
        del table[name]
        yield f"loss[{name}] removed", replace(s, loss=replace(loss, per_block=table))
    yield "gradient_weight=1", replace(s, loss=replace(loss, gradient_weight=1.0))
    yield "gradient_weight=0", replace(s, loss=replace(loss, gradient_weight=0.0))
    yield "final_block=S4_3", replace(s, loss=replace(loss, final_block="S4_3"))
    yield "loss table reset", replace(s, loss=LossWeights({}))
