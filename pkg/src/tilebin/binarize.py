"""Binarization of anomaly maps.

Two complementary rules produce masks that are fused with a logical OR:

* ``threshold_mean3std``: per-map statistical threshold, mean + 3 * std.
* ``mebin_threshold``: adaptive rule that quantizes the map to integer
  levels, sweeps every integer threshold, counts connected components at
  least ``min_area`` pixels large, and picks a threshold from the longest
  run of consecutive levels over which that count is stable and nonzero.

Masks are boolean arrays; connected components are labeled 1..count in
first-encounter row-major order with label 0 as background.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .amap import ensure_map
from .errors import InvalidArgumentError

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True)
class ComponentStats:
    """Area and tight bounding box (inclusive pixel coordinates) of one component."""

    label: int
    area: int
    x_min: int
    y_min: int
    x_max: int
    y_max: int


@dataclass(frozen=True)
class MebinConfig:
    levels: int = 256
    min_area: int = 5
    connectivity: int = 8
    pick: str = "upper_end"

    def __post_init__(self):
        if self.levels < 2:
            raise InvalidArgumentError(f"levels must be >= 2, got {self.levels}")
        if self.min_area < 1:
            raise InvalidArgumentError(f"min_area must be >= 1, got {self.min_area}")
        if self.connectivity not in (4, 8):
            raise InvalidArgumentError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.pick not in ("upper_end", "midpoint"):
            raise InvalidArgumentError(f"pick must be upper_end or midpoint, got {self.pick}")


def connected_components(
    mask: np.ndarray, connectivity: int = 8
) -> tuple[np.ndarray, int, list[ComponentStats]]:
    """Label a boolean mask; labels follow first-encounter row-major order."""
    if connectivity not in _STRUCTURES:
        raise InvalidArgumentError(f"connectivity must be 4 or 8, got {connectivity}")
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise InvalidArgumentError(f"mask must be 2-D, got shape {mask.shape}")
    raw, count = ndimage.label(mask, structure=_STRUCTURES[connectivity])
    if count == 0:
        return np.zeros(mask.shape, dtype=np.int32), 0, []

    flat = raw.ravel()
    uniq, first_index = np.unique(flat, return_index=True)
    nonzero = uniq != 0
    uniq, first_index = uniq[nonzero], first_index[nonzero]
    old_in_order = uniq[np.argsort(first_index, kind="stable")]
    lut = np.zeros(count + 1, dtype=np.int32)
    lut[old_in_order] = np.arange(1, count + 1, dtype=np.int32)
    labels = lut[raw]

    areas = np.bincount(flat, minlength=count + 1)
    boxes = ndimage.find_objects(raw)
    stats = []
    for new_label, old in enumerate(old_in_order, start=1):
        sly, slx = boxes[old - 1]
        stats.append(
            ComponentStats(
                label=new_label,
                area=int(areas[old]),
                x_min=int(slx.start),
                y_min=int(sly.start),
                x_max=int(slx.stop - 1),
                y_max=int(sly.stop - 1),
            )
        )
    return labels, int(count), stats


def threshold_mean3std(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Binarize at mean + 3 * population std of this map; strictly greater wins."""
    values = np.asarray(values, dtype=np.float64)
    ensure_map(values)
    threshold = float(values.mean() + 3.0 * values.std())
    return values > threshold, threshold


def _stable_count(mask: np.ndarray, min_area: int, structure: np.ndarray) -> int:
    raw, count = ndimage.label(mask, structure=structure)
    if count == 0:
        return 0
    areas = np.bincount(raw.ravel())[1:]
    return int((areas >= min_area).sum())


def _drop_small(mask: np.ndarray, min_area: int, structure: np.ndarray) -> np.ndarray:
    raw, count = ndimage.label(mask, structure=structure)
    if count == 0:
        return mask
    areas = np.bincount(raw.ravel(), minlength=count + 1)
    small = areas < min_area
    small[0] = True
    return mask & ~small[raw]


def mebin_threshold(
    values: np.ndarray, cfg: MebinConfig = MebinConfig()
) -> tuple[np.ndarray, float | None]:
    """Adaptive binarization via stable connected-component counting.

    The map is affinely normalized and quantized to integers in
    [0, levels - 1]. For each integer threshold tau (binarize as value > tau,
    then drop components smaller than min_area) the component count c(tau) is
    a step function of tau, so it is evaluated once per distinct quantized
    level. The chosen threshold is the upper end (or midpoint) of the longest
    run of consecutive tau with identical c(tau) >= 1; ties go to the run at
    larger tau. Returns an empty mask and None when no threshold produces a
    surviving component.
    """
    values = np.asarray(values, dtype=np.float64)
    ensure_map(values)
    levels = cfg.levels
    structure = _STRUCTURES[cfg.connectivity]
    vmin = float(values.min())
    vmax = float(values.max())
    span = vmax - vmin
    if span <= 0.0:
        return np.zeros(values.shape, dtype=bool), None

    norm = np.floor((values - vmin) * ((levels - 1) / span) + 0.5).astype(np.int64)
    counts = np.zeros(levels, dtype=np.int64)
    prev = 0
    for level in np.unique(norm):
        # mask(tau) = {norm > tau} = {norm >= level} for tau in [prev, level - 1]
        if level > prev:
            counts[prev:level] = _stable_count(norm >= level, cfg.min_area, structure)
        prev = int(level)

    best: tuple[int, int, int] | None = None  # (length, lo, hi)
    i = 0
    while i < levels:
        j = i
        while j + 1 < levels and counts[j + 1] == counts[i]:
            j += 1
        if counts[i] >= 1:
            length = j - i + 1
            # >= so an equally long run at larger tau wins the tie
            if best is None or length >= best[0]:
                best = (length, i, j)
        i = j + 1

    if best is None:
        return np.zeros(values.shape, dtype=bool), None
    _, lo, hi = best
    tau = hi if cfg.pick == "upper_end" else (lo + hi) // 2
    mask = _drop_small(norm > tau, cfg.min_area, structure)
    threshold = vmin + tau * (span / (levels - 1))
    return mask, float(threshold)


def combine_or(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Bitwise OR of two masks of equal dimensions."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"mask shapes differ: {a.shape} vs {b.shape}")
    return a | b


def coarse_mask(
    values: np.ndarray, cfg: MebinConfig = MebinConfig()
) -> tuple[np.ndarray, float, float | None]:
    """OR-fusion of the statistical and adaptive masks for one map."""
    stat_mask, stat_t = threshold_mean3std(values)
    adaptive_mask, adaptive_t = mebin_threshold(values, cfg)
    fused = combine_or(stat_mask, adaptive_mask)
    # fused must contain both inputs by construction; guard the invariant
    if (stat_mask & ~fused).any() or (adaptive_mask & ~fused).any():
        raise AssertionError("OR fusion lost pixels from a branch mask")
    return fused, stat_t, adaptive_t
