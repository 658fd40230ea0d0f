"""Reassemble per-tile anomaly maps into one full-resolution map.

Tile maps are upscaled to the window size, placed at their recorded origins,
and averaged where windows overlap. Padded pixels (window area past the image
edge) never contribute. Accumulation runs in float64 in row-major tile order,
so the merged map is bit-identical across runs and worker counts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .amap import ensure_map, read_amap
from .errors import IncompleteInputError, InvalidArgumentError
from .geometry import TilePlan, TileRect, TileRecord, plan_from_records, tile_key, unpad_region


def _axis_coords(src_dim: int, out_dim: int) -> np.ndarray:
    # Corner-aligned sampling: output corners map onto source corners.
    # A singleton output axis samples the source midpoint.
    if out_dim == 1:
        return np.full(1, (src_dim - 1) / 2.0)
    return np.arange(out_dim, dtype=np.float64) * ((src_dim - 1) / (out_dim - 1))


def resize_bilinear(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resampling of a (H, W) or (H, W, C) array."""
    if out_h < 1 or out_w < 1:
        raise InvalidArgumentError(f"target dimensions must be >= 1, got {out_w}x{out_h}")
    src = np.asarray(src, dtype=np.float64)
    h, w = src.shape[:2]
    if (h, w) == (out_h, out_w):
        return src.copy()
    ys = _axis_coords(h, out_h)
    xs = _axis_coords(w, out_w)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.clip(y0, 0, h - 1)
    x0 = np.clip(x0, 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    if src.ndim == 3:
        fy = fy[..., None]
        fx = fx[..., None]
    top = src[y0[:, None], x0[None, :]] * (1.0 - fx) + src[y0[:, None], x1[None, :]] * fx
    bot = src[y1[:, None], x0[None, :]] * (1.0 - fx) + src[y1[:, None], x1[None, :]] * fx
    return top * (1.0 - fy) + bot * fy


def resize_map_bilinear(values: np.ndarray, target_width: int, target_height: int) -> np.ndarray:
    """Resize an anomaly map; constant maps stay constant, output stays finite."""
    ensure_map(np.asarray(values))
    return resize_bilinear(values, target_height, target_width)


def merge_maps(
    tile_maps: Iterable[tuple[TileRect, np.ndarray]], plan: TilePlan
) -> np.ndarray:
    """Average per-tile maps into one image-resolution map.

    Every tile of the plan must be supplied exactly once. Maps not already at
    window size are resized first. Raises IncompleteInputError listing the
    missing (row, col) pairs when tiles are absent.
    """
    by_pos: dict[tuple[int, int], np.ndarray] = {}
    for rect, values in tile_maps:
        pos = (rect.row_index, rect.col_index)
        if pos in by_pos:
            raise InvalidArgumentError(f"duplicate tile map for {pos}")
        by_pos[pos] = values
    plan_pos = [(t.row_index, t.col_index) for t in plan.tiles]
    missing = [p for p in plan_pos if p not in by_pos]
    if missing:
        raise IncompleteInputError(f"missing tile maps for {missing}", missing)
    unknown = sorted(set(by_pos) - set(plan_pos))
    if unknown:
        raise InvalidArgumentError(f"tile maps not in plan: {unknown}")

    height, width, window = plan.image_height, plan.image_width, plan.window
    acc = np.zeros((height, width), dtype=np.float64)
    weight = np.zeros((height, width), dtype=np.float64)
    for tile in plan.tiles:
        values = np.asarray(by_pos[(tile.row_index, tile.col_index)], dtype=np.float64)
        ensure_map(values)
        if values.shape != (window, window):
            values = resize_bilinear(values, window, window)
        valid_w, valid_h = unpad_region(tile, plan)
        acc[tile.y0 : tile.y0 + valid_h, tile.x0 : tile.x0 + valid_w] += values[:valid_h, :valid_w]
        weight[tile.y0 : tile.y0 + valid_h, tile.x0 : tile.x0 + valid_w] += 1.0
    if not (weight >= 1.0).all():
        raise InvalidArgumentError("plan does not cover every pixel")  # coverage invariant
    return acc / weight


def merged_blob_name(image_id: str) -> str:
    return f"{image_id}__merged.amap"


def merge_from_blobs(
    records: Sequence[TileRecord],
    maps_dir: str | Path,
    overlap_fraction: float,
) -> np.ndarray:
    """Merge one image's tile maps read from `.amap` blobs keyed by the manifest."""
    plan = plan_from_records(list(records), overlap_fraction)
    maps_dir = Path(maps_dir)
    tile_maps = [
        (rec.rect, read_amap(maps_dir / f"{tile_key(rec.image_id, rec.row_index, rec.col_index)}.amap"))
        for rec in records
    ]
    return merge_maps(tile_maps, plan)
