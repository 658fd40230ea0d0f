"""Photometric augmentation: Gaussian noise followed by exposure scaling.

Each augmented sample is computed as round(clamp(x + n) ) then
round(clamp(x * 2**lam)), with clamping to [0, 255] and rounding
half-away-from-zero after every stage. Per-tile randomness is keyed by
(seed, tile index) so batch order and parallel scheduling cannot change
the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError
from .images import ensure_image


@dataclass(frozen=True)
class AugmentParams:
    sigma: float = 15.0
    lambda_low: float = -0.2
    lambda_high: float = 0.2
    apply_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidArgumentError(f"sigma must be >= 0, got {self.sigma}")
        if self.lambda_low > self.lambda_high:
            raise InvalidArgumentError(
                f"lambda_low {self.lambda_low} exceeds lambda_high {self.lambda_high}"
            )
        if not 0.0 <= self.apply_probability <= 1.0:
            raise InvalidArgumentError(
                f"apply_probability must be in [0, 1], got {self.apply_probability}"
            )


@dataclass(frozen=True)
class AugmentRecord:
    """Audit entry for one tile: what was applied and from which stream."""

    index: int
    applied: bool
    lam: float | None
    noise_seed: tuple[int, int]


def _quantize_u8(x: np.ndarray) -> np.ndarray:
    # clamp first, then round half-away-from-zero (values are >= 0 here,
    # so floor(x + 0.5) is exactly that).
    return np.floor(np.clip(x, 0.0, 255.0) + 0.5).astype(np.uint8)


def tile_rng(seed: int, index: int) -> np.random.Generator:
    """Independent per-tile random stream derived from (seed, tile index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def add_gaussian_noise(tile: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add zero-mean Gaussian noise per sample, clamp to [0, 255], requantize."""
    ensure_image(tile)
    if sigma < 0:
        raise InvalidArgumentError(f"sigma must be >= 0, got {sigma}")
    noise = rng.normal(0.0, sigma, size=tile.shape)
    return _quantize_u8(tile.astype(np.float64) + noise)


def adjust_exposure(tile: np.ndarray, lam: float) -> np.ndarray:
    """Scale every sample by 2**lam; positive lam brightens, negative darkens."""
    ensure_image(tile)
    return _quantize_u8(tile.astype(np.float64) * (2.0 ** lam))


def augment_tile(
    tile: np.ndarray, index: int, params: AugmentParams
) -> tuple[np.ndarray, AugmentRecord]:
    """Augment one tile of a batch; the decision and draws depend only on
    (params.seed, index)."""
    rng = tile_rng(params.seed, index)
    apply = rng.random() < params.apply_probability
    if not apply:
        return tile, AugmentRecord(index=index, applied=False, lam=None,
                                   noise_seed=(params.seed, index))
    lam = float(rng.uniform(params.lambda_low, params.lambda_high))
    noised = add_gaussian_noise(tile, params.sigma, rng)
    out = adjust_exposure(noised, lam)
    return out, AugmentRecord(index=index, applied=True, lam=lam,
                              noise_seed=(params.seed, index))


def augment_batch(tiles: Sequence[np.ndarray], params: AugmentParams) -> list[np.ndarray]:
    """Augment a batch, preserving order; fully reproducible from params.seed."""
    return [augment_tile(tile, i, params)[0] for i, tile in enumerate(tiles)]
