"""Per-tile anomaly scoring behind one interface.

Three scorer kinds exist:

* ``FileScorer`` reads precomputed ``.amap`` blobs keyed by
  (image_id, row_index, col_index), which is how an external deep model
  plugs into the pipeline.
* ``StatScorer`` is a self-contained robust per-pixel baseline: per grid
  position it stores the pixelwise median and scaled median absolute
  deviation of the training tiles (resized to model resolution) and scores
  a query pixel as |x - mu| / s.
* ``IdentityScorer`` maps a tile to its channel-mean intensity / 255 at
  window resolution; it exists for roundtrip diagnostics and tests.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Protocol

import numpy as np

from .amap import read_amap
from .errors import InvalidArgumentError, NotFoundError
from .geometry import TileRecord, tile_key
from .images import ensure_image, intensity
from .merger import resize_bilinear

DEFAULT_MODEL_RESOLUTION = 518

MAD_TO_SIGMA = 1.4826
SCALE_FLOOR = 1e-6


class Scorer(Protocol):
    def score_tile(self, tile: np.ndarray, identity: TileRecord) -> np.ndarray: ...


def score_tile(scorer: Scorer, tile: np.ndarray, identity: TileRecord) -> np.ndarray:
    """Score one tile; returns a 2-D float map, higher = more anomalous."""
    return scorer.score_tile(tile, identity)


class FileScorer:
    """Serve maps from a directory of ``{image_id}__r{row}_c{col}.amap`` blobs."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def score_tile(self, tile: np.ndarray, identity: TileRecord) -> np.ndarray:
        key = tile_key(identity.image_id, identity.row_index, identity.col_index)
        path = self.directory / f"{key}.amap"
        if not path.is_file():
            raise NotFoundError(f"no map blob for key {key} in {self.directory}")
        return read_amap(path)


class IdentityScorer:
    """Tile channel-mean / 255 at window resolution; a diagnostic passthrough."""

    def score_tile(self, tile: np.ndarray, identity: TileRecord) -> np.ndarray:
        ensure_image(tile)
        return intensity(tile) / 255.0


class StatScorer:
    """Robust per-pixel location/scale model, one entry per grid position."""

    def __init__(
        self,
        state: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]],
        model_resolution: int = DEFAULT_MODEL_RESOLUTION,
    ):
        self.state = state
        self.model_resolution = model_resolution

    def score_tile(self, tile: np.ndarray, identity: TileRecord) -> np.ndarray:
        pos = (identity.row_index, identity.col_index)
        if pos not in self.state:
            raise InvalidArgumentError(f"no training tiles were seen for grid position {pos}")
        mu, scale = self.state[pos]
        x = _to_model_resolution(tile, self.model_resolution)
        dev = np.abs(x - mu) / scale
        return dev.mean(axis=2) if dev.ndim == 3 else dev


def _to_model_resolution(tile: np.ndarray, resolution: int) -> np.ndarray:
    ensure_image(tile)
    return resize_bilinear(tile.astype(np.float64), resolution, resolution)


def fit_stat_scorer(
    training_tiles: Iterable[tuple[np.ndarray, tuple[int, int]]],
    model_resolution: int = DEFAULT_MODEL_RESOLUTION,
) -> StatScorer:
    """Fit the statistical scorer from (tile, grid position) training pairs.

    Per grid position and pixel, the location is the median and the scale is
    the median absolute deviation scaled to sigma units, floored at a small
    epsilon so identical training pixels still yield finite scores.
    """
    groups: dict[tuple[int, int], list[np.ndarray]] = {}
    for tile, pos in training_tiles:
        groups.setdefault(tuple(pos), []).append(_to_model_resolution(tile, model_resolution))
    if not groups:
        raise InvalidArgumentError("empty training set")
    state = {}
    for pos, stack in groups.items():
        data = np.stack(stack, axis=0)
        mu = np.median(data, axis=0)
        mad = np.median(np.abs(data - mu), axis=0)
        scale = np.maximum(mad * MAD_TO_SIGMA, SCALE_FLOOR)
        state[pos] = (mu, scale)
    return StatScorer(state, model_resolution)
