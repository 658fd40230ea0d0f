"""Overlapping-window tile planning, cropping with zero-padding, and the
tile manifest that lets downstream stages reassemble per-tile results."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FormatError, InvalidArgumentError
from .images import ensure_image

DEFAULT_WINDOW = 1024
DEFAULT_OVERLAP = 0.10


@dataclass(frozen=True)
class TileRect:
    """One square window on the stride lattice; may extend past the image."""

    row_index: int
    col_index: int
    x0: int
    y0: int
    size: int


@dataclass(frozen=True)
class TilePlan:
    """Row-major decomposition of one image into overlapping windows."""

    image_width: int
    image_height: int
    window: int
    overlap_fraction: float
    stride: int
    tiles: tuple[TileRect, ...]

    @property
    def grid_shape(self) -> tuple[int, int]:
        rows = max(t.row_index for t in self.tiles) + 1
        cols = max(t.col_index for t in self.tiles) + 1
        return rows, cols

    def tile_at(self, row_index: int, col_index: int) -> TileRect:
        rows, cols = self.grid_shape
        if not (0 <= row_index < rows and 0 <= col_index < cols):
            raise InvalidArgumentError(
                f"no tile at ({row_index}, {col_index}) in a {rows}x{cols} plan"
            )
        return self.tiles[row_index * cols + col_index]


def _axis_origins(dim: int, window: int, stride: int) -> list[int]:
    # Origins stay on the stride lattice; the loop stops once a window
    # reaches or passes the edge, so the final tile may need padding.
    origins = [0]
    while origins[-1] + window < dim:
        origins.append(origins[-1] + stride)
    return origins


def plan_tiles(
    width: int,
    height: int,
    window: int = DEFAULT_WINDOW,
    overlap_fraction: float = DEFAULT_OVERLAP,
) -> TilePlan:
    """Plan the overlapping-window decomposition of a width x height image.

    The stride is floor(window * (1 - overlap_fraction)), so adjacent windows
    overlap by at least the requested fraction. Origins run 0, stride,
    2*stride, ... on each axis until a window covers the remaining extent;
    windows on the far edge may extend past the image and are zero-padded at
    crop time. Tiles are listed row-major.
    """
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"image dimensions must be >= 1, got {width}x{height}")
    if window < 2:
        raise InvalidArgumentError(f"window must be >= 2, got {window}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidArgumentError(
            f"overlap_fraction must be in [0, 1), got {overlap_fraction}"
        )
    # floor() keeps the actual overlap at or above the requested fraction;
    # the max() guard only matters when window*(1-overlap) < 1.
    stride = max(1, math.floor(window * (1.0 - overlap_fraction)))
    xs = _axis_origins(width, window, stride)
    ys = _axis_origins(height, window, stride)
    tiles = tuple(
        TileRect(row_index=r, col_index=c, x0=x, y0=y, size=window)
        for r, y in enumerate(ys)
        for c, x in enumerate(xs)
    )
    return TilePlan(
        image_width=width,
        image_height=height,
        window=window,
        overlap_fraction=overlap_fraction,
        stride=stride,
        tiles=tiles,
    )


def crop_tile(image: np.ndarray, rect: TileRect, window: int | None = None) -> np.ndarray:
    """Crop one window from the image, zero-padding past the right/bottom edges.

    Returns a window x window buffer with the channel count preserved.
    """
    img = ensure_image(image)
    if window is None:
        window = rect.size
    h, w = img.shape[:2]
    if rect.x0 >= w or rect.y0 >= h or rect.x0 + window <= 0 or rect.y0 + window <= 0:
        raise InvalidArgumentError(
            f"tile at ({rect.x0}, {rect.y0}) size {window} lies outside a {w}x{h} image"
        )
    out = np.zeros((window, window) + img.shape[2:], dtype=np.uint8)
    valid_w = min(window, w - rect.x0)
    valid_h = min(window, h - rect.y0)
    out[:valid_h, :valid_w] = img[rect.y0 : rect.y0 + valid_h, rect.x0 : rect.x0 + valid_w]
    return out


def unpad_region(rect: TileRect, plan: TilePlan) -> tuple[int, int]:
    """Width and height of the window portion that lies inside the image."""
    if rect not in plan.tiles:
        raise InvalidArgumentError(f"rect {rect} is not part of the plan")
    valid_w = min(plan.window, plan.image_width - rect.x0)
    valid_h = min(plan.window, plan.image_height - rect.y0)
    return valid_w, valid_h


# --- tile manifest ---------------------------------------------------------

MANIFEST_FIELDS = (
    "image_id",
    "row_index",
    "col_index",
    "x0",
    "y0",
    "window",
    "image_width",
    "image_height",
)


@dataclass(frozen=True)
class TileRecord:
    """One manifest line: where a tile sits inside its source image."""

    image_id: str
    row_index: int
    col_index: int
    x0: int
    y0: int
    window: int
    image_width: int
    image_height: int

    @property
    def rect(self) -> TileRect:
        return TileRect(self.row_index, self.col_index, self.x0, self.y0, self.window)


def tile_key(image_id: str, row_index: int, col_index: int) -> str:
    """Canonical stem used for tile files and map blobs."""
    return f"{image_id}__r{row_index}_c{col_index}"


def manifest_records(image_id: str, plan: TilePlan) -> list[TileRecord]:
    return [
        TileRecord(
            image_id=image_id,
            row_index=t.row_index,
            col_index=t.col_index,
            x0=t.x0,
            y0=t.y0,
            window=plan.window,
            image_width=plan.image_width,
            image_height=plan.image_height,
        )
        for t in plan.tiles
    ]


def write_tile_manifest(path: str | Path, records: Iterable[TileRecord]) -> None:
    """Write one JSON object per line, UTF-8, with exactly the manifest fields."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(asdict(rec), sort_keys=False) + "\n")


def read_tile_manifest(path: str | Path) -> list[TileRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid manifest line: {exc}") from exc
            missing = [f for f in MANIFEST_FIELDS if f not in obj]
            if missing:
                raise FormatError(f"{path}:{lineno}: manifest record missing {missing}")
            extra = [f for f in obj if f not in MANIFEST_FIELDS]
            if extra:
                raise FormatError(f"{path}:{lineno}: unknown manifest fields {extra}")
            records.append(TileRecord(**obj))
    return records


def plan_from_records(records: list[TileRecord], overlap_fraction: float = DEFAULT_OVERLAP) -> TilePlan:
    """Rebuild one image's TilePlan from its manifest records and verify that
    the recorded geometry matches what plan_tiles would generate."""
    if not records:
        raise InvalidArgumentError("no manifest records given")
    ids = {r.image_id for r in records}
    if len(ids) != 1:
        raise InvalidArgumentError(f"records span multiple images: {sorted(ids)}")
    first = records[0]
    plan = plan_tiles(first.image_width, first.image_height, first.window, overlap_fraction)
    expected = {(t.row_index, t.col_index): t for t in plan.tiles}
    got = {(r.row_index, r.col_index): r.rect for r in records}
    if expected != got:
        raise FormatError(
            f"manifest for {first.image_id} does not match the generated plan "
            f"({len(got)} records vs {len(expected)} tiles)"
        )
    return plan
