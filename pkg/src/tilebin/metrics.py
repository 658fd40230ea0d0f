"""Pixel- and image-level evaluation metrics.

All pooled metrics share the same counting conventions: pixel counts are
summed (micro-pooled) across the evaluated set before any ratio is formed,
and threshold sweeps binarize as ``value >= t`` over distinct-value
candidates so both the exact-match and the all-positive operating points
are reachable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .binarize import connected_components
from .errors import InvalidArgumentError, UndefinedMetricError

F1_MAX_CANDIDATES = 1024
AUPRO_CANDIDATES = 4096


@dataclass(frozen=True)
class SegF1Result:
    """Pooled pixel F1 with its counts; ``undefined`` marks the no-positives,
    no-errors case that is reported as 1.0."""

    value: float
    undefined: bool
    tp: int
    fp: int
    fn: int


def _as_mask_pairs(preds, gts) -> list[tuple[np.ndarray, np.ndarray]]:
    if isinstance(preds, np.ndarray):
        preds = [preds]
    if isinstance(gts, np.ndarray):
        gts = [gts]
    preds = [np.asarray(p, dtype=bool) for p in preds]
    gts = [np.asarray(g, dtype=bool) for g in gts]
    if len(preds) != len(gts):
        raise InvalidArgumentError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    for p, g in zip(preds, gts):
        if p.shape != g.shape:
            raise InvalidArgumentError(f"mask shapes differ: {p.shape} vs {g.shape}")
    return list(zip(preds, gts))


def seg_f1(preds, gts) -> SegF1Result:
    """Pooled pixel-level F1 = 2TP / (2TP + FP + FN) over one or many images."""
    tp = fp = fn = 0
    for p, g in _as_mask_pairs(preds, gts):
        tp += int((p & g).sum())
        fp += int((p & ~g).sum())
        fn += int((~p & g).sum())
    denom = 2 * tp + fp + fn
    if denom == 0:
        return SegF1Result(value=1.0, undefined=True, tp=tp, fp=fp, fn=fn)
    return SegF1Result(value=2.0 * tp / denom, undefined=False, tp=tp, fp=fp, fn=fn)


def _candidate_thresholds(values: np.ndarray, limit: int) -> np.ndarray:
    distinct = np.unique(values)
    if len(distinct) <= limit:
        return distinct
    idx = np.unique(np.round(np.linspace(0, len(distinct) - 1, limit)).astype(int))
    return distinct[idx]


def f1_max(maps: Sequence[np.ndarray], gts: Sequence[np.ndarray]) -> tuple[float, float]:
    """Best pooled pixel F1 over a threshold sweep of the continuous maps.

    Candidates are the distinct map values, subsampled to at most 1024
    quantile-spaced values when there are more. Returns (best F1, threshold).
    """
    if isinstance(maps, np.ndarray):
        maps = [maps]
    if isinstance(gts, np.ndarray):
        gts = [gts]
    if len(maps) == 0 or len(maps) != len(gts):
        raise InvalidArgumentError("maps and ground truths must be aligned and nonempty")
    flat_scores = []
    flat_labels = []
    for m, g in zip(maps, gts):
        m = np.asarray(m, dtype=np.float64)
        g = np.asarray(g, dtype=bool)
        if m.shape != g.shape:
            raise InvalidArgumentError(f"map shape {m.shape} does not match gt {g.shape}")
        flat_scores.append(m.ravel())
        flat_labels.append(g.ravel())
    scores = np.concatenate(flat_scores)
    labels = np.concatenate(flat_labels)

    order = np.argsort(scores, kind="stable")
    scores_asc = scores[order]
    labels_asc = labels[order].astype(np.int64)
    # suffix_tp[i] = positives with score >= scores_asc[i]
    suffix_tp = np.concatenate([np.cumsum(labels_asc[::-1])[::-1], [0]])
    total_pos = int(labels_asc.sum())
    n = len(scores_asc)

    candidates = _candidate_thresholds(scores_asc, F1_MAX_CANDIDATES)
    first_at = np.searchsorted(scores_asc, candidates, side="left")
    tp = suffix_tp[first_at].astype(np.float64)
    n_pred = (n - first_at).astype(np.float64)
    denom = n_pred + total_pos  # = 2TP + FP + FN
    f1 = np.where(denom > 0, 2.0 * tp / np.maximum(denom, 1.0), 1.0)
    best = int(np.argmax(f1))
    return float(f1[best]), float(candidates[best])


def image_score(values: np.ndarray, method: str = "max", top_k: int = 100) -> float:
    """Collapse one anomaly map to an image-level score.

    ``max`` takes the hottest pixel; ``topk_mean`` averages the top_k
    hottest, which is less sensitive to single-pixel outliers.
    """
    values = np.asarray(values, dtype=np.float64)
    if method == "max":
        return float(values.max())
    if method == "topk_mean":
        flat = values.ravel()
        k = min(max(1, top_k), flat.size)
        return float(np.sort(flat)[-k:].mean())
    raise InvalidArgumentError(f"image score method must be max or topk_mean, got {method!r}")


def class_f1(image_scores: Sequence[float], labels: Sequence[bool]) -> tuple[float, float]:
    """Best image-level F1 over a threshold sweep; anomalous is the positive class."""
    scores = np.asarray(image_scores, dtype=np.float64)
    flags = np.asarray(labels, dtype=bool)
    if scores.ndim != 1 or scores.shape != flags.shape:
        raise InvalidArgumentError("scores and labels must be aligned 1-D sequences")
    if not flags.any():
        raise UndefinedMetricError("image-level F1 needs at least one anomalous label")
    best_f1 = -1.0
    best_t = 0.0
    for t in np.unique(scores):
        pred = scores >= t
        tp = int((pred & flags).sum())
        fp = int((pred & ~flags).sum())
        fn = int((~pred & flags).sum())
        denom = 2 * tp + fp + fn
        f1 = 1.0 if denom == 0 else 2.0 * tp / denom
        if f1 > best_f1:
            best_f1, best_t = f1, float(t)
    return best_f1, best_t


def aupro(
    maps: Sequence[np.ndarray],
    gts: Sequence[np.ndarray],
    fpr_limit: float = 0.05,
) -> float:
    """Area under the per-region-overlap curve up to a false-positive-rate cap.

    At each threshold the per-region overlap is averaged over every
    ground-truth connected region (8-connectivity) across all images, and the
    false-positive rate is pooled over all normal pixels. The curve is
    integrated with trapezoids over FPR in [0, fpr_limit] and normalized by
    fpr_limit, so a perfect detector scores 1.
    """
    if isinstance(maps, np.ndarray):
        maps = [maps]
    if isinstance(gts, np.ndarray):
        gts = [gts]
    if len(maps) == 0 or len(maps) != len(gts):
        raise InvalidArgumentError("maps and ground truths must be aligned and nonempty")
    if not 0.0 < fpr_limit <= 1.0:
        raise InvalidArgumentError(f"fpr_limit must be in (0, 1], got {fpr_limit}")

    region_scores: list[np.ndarray] = []
    normal_scores: list[np.ndarray] = []
    for m, g in zip(maps, gts):
        m = np.asarray(m, dtype=np.float64)
        g = np.asarray(g, dtype=bool)
        if m.shape != g.shape:
            raise InvalidArgumentError(f"map shape {m.shape} does not match gt {g.shape}")
        labels_map, count, _ = connected_components(g, connectivity=8)
        for label in range(1, count + 1):
            region_scores.append(np.sort(m[labels_map == label]))
        normal_scores.append(m[~g])
    if not region_scores:
        raise UndefinedMetricError("no ground-truth regions to overlap")
    normal = np.sort(np.concatenate(normal_scores))
    if normal.size == 0:
        raise UndefinedMetricError("no normal pixels to measure the false-positive rate")

    pooled = np.concatenate([np.concatenate(region_scores), normal])
    # descending thresholds; the sentinel below the minimum reaches FPR = 1.
    # The sweep is exact up to AUPRO_CANDIDATES distinct values and
    # quantile-subsampled beyond that to bound the overlap matrix.
    thresholds = _candidate_thresholds(pooled, AUPRO_CANDIDATES)[::-1]
    thresholds = np.append(thresholds, thresholds[-1] - 1.0)

    # strict > binarization: count = n - searchsorted(sorted_asc, t, 'right')
    fpr = (normal.size - np.searchsorted(normal, thresholds, side="right")) / normal.size
    overlaps = np.empty((len(region_scores), len(thresholds)))
    for i, rs in enumerate(region_scores):
        overlaps[i] = (rs.size - np.searchsorted(rs, thresholds, side="right")) / rs.size
    pro = overlaps.mean(axis=0)

    # integrate up to fpr_limit, interpolating the crossing segment
    cut = int(np.searchsorted(fpr, fpr_limit, side="right"))
    if cut >= len(fpr):
        xs, ys = fpr, pro
    else:
        x0, x1 = fpr[cut - 1], fpr[cut]
        y0, y1 = pro[cut - 1], pro[cut]
        y_lim = y0 if x1 == x0 else y0 + (y1 - y0) * (fpr_limit - x0) / (x1 - x0)
        xs = np.append(fpr[:cut], fpr_limit)
        ys = np.append(pro[:cut], y_lim)
    area = float((0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)).sum())
    return area / fpr_limit


# --- report file ------------------------------------------------------------

REPORT_COLUMNS = ("category", "AucPro_0.05", "ClassF1", "SegF1")


def write_metrics_report(path: str | Path, rows: list[dict]) -> None:
    """Write per-category metric rows plus a mean row as CSV.

    Each row maps the metric columns to floats or None (blank cell). The
    mean row averages whatever values are present per column.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def fmt(v):
        return "" if v is None else f"{v:.6f}"

    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        sums = {c: [] for c in REPORT_COLUMNS[1:]}
        for row in rows:
            writer.writerow([row["category"]] + [fmt(row.get(c)) for c in REPORT_COLUMNS[1:]])
            for c in REPORT_COLUMNS[1:]:
                if row.get(c) is not None:
                    sums[c].append(row[c])
        means = [fmt(float(np.mean(sums[c])) if sums[c] else None) for c in REPORT_COLUMNS[1:]]
        writer.writerow(["mean"] + means)
