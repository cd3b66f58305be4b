"""Dataset-level evaluation: pair files by stem, score them, write CSV/JSON."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .masks import MaskFormatError, load_mask, load_scoremap
from .metrics import MeticulosityParams, MetricReport, evaluate

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".pgm")
CSV_COLUMNS = ("stem",) + MetricReport.FIELDS


class PairingError(ValueError):
    pass


@dataclass
class DatasetPairing:
    pairs: list[tuple[Path, Path, str]]
    warnings: list[str] = field(default_factory=list)


@dataclass
class BatchReport:
    rows: dict[str, MetricReport]
    skipped: dict[str, str]
    aggregate: MetricReport | None

    @property
    def evaluated(self) -> int:
        return len(self.rows)


def _by_stem(directory: Path, warnings: list[str]) -> dict[str, Path]:
    found: dict[str, list[Path]] = {}
    for p in sorted(directory.iterdir()):
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
            found.setdefault(p.stem, []).append(p)
    out = {}
    for stem, paths in found.items():
        if len(paths) > 1:
            warnings.append(f"{directory}: ambiguous stem {stem!r} ({', '.join(p.name for p in paths)}); ignored")
        else:
            out[stem] = paths[0]
    return out


def pair_dataset(pred_dir, gt_dir) -> DatasetPairing:
    """Match prediction and ground-truth files by case-sensitive filename stem."""
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    for d in (pred_dir, gt_dir):
        if not d.is_dir():
            raise PairingError(f"not a directory: {d}")
    warnings: list[str] = []
    preds = _by_stem(pred_dir, warnings)
    gts = _by_stem(gt_dir, warnings)
    for stem in sorted(preds.keys() - gts.keys()):
        warnings.append(f"prediction without ground truth: {stem}")
    for stem in sorted(gts.keys() - preds.keys()):
        warnings.append(f"ground truth without prediction: {stem}")
    common = sorted(preds.keys() & gts.keys())
    if not common:
        raise PairingError(f"no common stems between {pred_dir} and {gt_dir}")
    return DatasetPairing([(preds[s], gts[s], s) for s in common], warnings)


def _evaluate_one(pred: Path, gt: Path, params: MeticulosityParams):
    try:
        return evaluate(load_scoremap(pred), load_mask(gt), params), None
    except (MaskFormatError, ValueError, OSError) as exc:
        return None, str(exc)


def mean_report(reports) -> MetricReport | None:
    reports = list(reports)
    if not reports:
        return None
    return MetricReport(**{k: float(np.mean([getattr(r, k) for r in reports])) for k in MetricReport.FIELDS})


def evaluate_batch(pairing: DatasetPairing, params: MeticulosityParams | None = None,
                   workers: int = 1) -> BatchReport:
    """Score every pair; unreadable or degenerate images are skipped with a reason.

    Results are keyed and averaged in stem order, whatever ``workers`` is.
    """
    params = params or MeticulosityParams()
    jobs = [(p, g, params) for p, g, _ in pairing.pairs]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _evaluate_one(*a), jobs))
    else:
        results = [_evaluate_one(*a) for a in jobs]
    rows, skipped = {}, {}
    for (_, _, stem), (rep, err) in sorted(zip(pairing.pairs, results), key=lambda t: t[0][2]):
        if rep is None:
            log.warning("skipping %s: %s", stem, err)
            skipped[stem] = err
        else:
            rows[stem] = rep
    return BatchReport(rows=rows, skipped=skipped, aggregate=mean_report(rows.values()))


def _round6(x: float) -> float:
    return float(f"{x:.6f}")


def write_report(r: BatchReport, csv_path=None, json_path=None) -> None:
    """CSV ``stem,mae,sm,iou,mba,mq`` at 6 decimals; JSON with images, aggregate, skipped."""
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for stem, rep in r.rows.items():
                w.writerow([stem] + [f"{getattr(rep, k):.6f}" for k in MetricReport.FIELDS])
    if json_path is not None:
        doc = {
            "images": {s: {k: _round6(v) for k, v in rep.as_dict().items()} for s, rep in r.rows.items()},
            "aggregate": None if r.aggregate is None else {k: _round6(v) for k, v in r.aggregate.as_dict().items()},
            "skipped": dict(r.skipped),
        }
        Path(json_path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
