"""8-bit image buffers: validation, channel handling, and PNG I/O."""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from .errors import InvalidArgumentError, NotFoundError


def ensure_image(img: np.ndarray) -> np.ndarray:
    """Validate an 8-bit image array (H, W) or (H, W, C) with C in {1, 3}."""
    if not isinstance(img, np.ndarray):
        raise InvalidArgumentError(f"image must be a numpy array, got {type(img).__name__}")
    if img.dtype != np.uint8:
        raise InvalidArgumentError(f"image must be uint8, got {img.dtype}")
    if img.ndim == 2:
        pass
    elif img.ndim == 3:
        if img.shape[2] not in (1, 3):
            raise InvalidArgumentError(f"image must have 1 or 3 channels, got {img.shape[2]}")
    else:
        raise InvalidArgumentError(f"image must be 2-D or 3-D, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise InvalidArgumentError(f"image dimensions must be >= 1, got {img.shape}")
    return img


def image_channels(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


def intensity(img: np.ndarray) -> np.ndarray:
    """Channel-mean intensity as float64, shape (H, W).

    Computed as (c0 + c1 + ... ) / channels with a fixed left-to-right sum so
    the result is bit-reproducible across implementations.
    """
    ensure_image(img)
    if img.ndim == 2:
        return img.astype(np.float64)
    acc = img[:, :, 0].astype(np.float64)
    for c in range(1, img.shape[2]):
        acc = acc + img[:, :, c].astype(np.float64)
    return acc / img.shape[2]


def load_image(path: str | Path) -> np.ndarray:
    """Read an image file as uint8, preserving its channel count."""
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise NotFoundError(f"cannot read image: {path}")
    if img.dtype != np.uint8:
        img = np.clip(img, 0, 255).astype(np.uint8)
    if img.ndim == 3 and img.shape[2] == 4:
        img = img[:, :, :3]
    return ensure_image(img)


def save_image(path: str | Path, img: np.ndarray) -> None:
    ensure_image(img)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), img):
        raise OSError(f"cannot write image: {path}")


def save_mask(path: str | Path, mask: np.ndarray) -> None:
    """Persist a binary mask as single-channel PNG, 0 = normal, 255 = anomalous."""
    if mask.ndim != 2:
        raise InvalidArgumentError(f"mask must be 2-D, got shape {mask.shape}")
    save_image(path, (mask.astype(bool) * np.uint8(255)))


def load_mask(path: str | Path) -> np.ndarray:
    """Read a mask PNG; any nonzero sample counts as anomalous."""
    img = load_image(path)
    if img.ndim == 3:
        img = img.max(axis=2)
    return img > 0
