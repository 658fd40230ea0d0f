"""Evaluation metrics on a toy test set.

SegF1 pools pixel counts over the whole set before forming the ratio;
F1-max sweeps thresholds on the continuous maps and upper-bounds any fixed
binarization; ClassF1 scores image-level detection from per-image max
scores; the per-region overlap area integrates region recall against the
pooled false-positive rate up to FPR 0.05.
"""

import numpy as np

from tilebin import aupro, class_f1, f1_max, seg_f1

rng = np.random.default_rng(3)

maps, gts, preds = [], [], []
for i in range(6):
    gt = np.zeros((24, 24), bool)
    if i >= 2:  # four defective images, two good ones
        y, x = rng.integers(2, 16, 2)
        gt[y : y + 6, x : x + 6] = True
    # two decimals keep the distinct-value count below the sweep's
    # subsampling limit, so the threshold search here is exact
    noise = rng.uniform(0, 0.25, (24, 24)).round(2)
    values = np.where(gt, rng.uniform(0.7, 1.0, (24, 24)).round(2), noise)
    maps.append(values)
    gts.append(gt)
    preds.append(values > 0.5)

seg = seg_f1(preds, gts)
print(f"SegF1   = {seg.value:.4f}  (TP {seg.tp}, FP {seg.fp}, FN {seg.fn})")

best, threshold = f1_max(maps, gts)
print(f"F1-max  = {best:.4f}  at threshold {threshold:.4f} "
      f"(>= SegF1: {best >= seg.value})")

scores = [float(m.max()) for m in maps]
labels = [bool(g.any()) for g in gts]
cls, cls_t = class_f1(scores, labels)
print(f"ClassF1 = {cls:.4f}  at image-score threshold {cls_t:.4f}")

print(f"AUPRO   = {aupro(maps, gts, fpr_limit=0.05):.4f}  (integrated to FPR 0.05)")
