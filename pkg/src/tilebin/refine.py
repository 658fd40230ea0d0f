"""Box-prompted mask refinement.

Each connected component of the coarse mask becomes a tight bounding-box
prompt. A promptable segmenter (reached over a line-delimited JSON protocol,
see ``SocketSegmenter``) returns up to three confidence-ranked candidate
masks per box; candidates are fused per the category's mode and composed
with OR across boxes. A box whose candidates are missing or unusable falls
back to its source component, so one bad prompt cannot blank the mask.
"""

from __future__ import annotations

import enum
import json
import logging
import socket
import uuid
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FormatError, InvalidArgumentError, RefinementError, TilebinError
from .binarize import connected_components
from .images import ensure_image, load_mask

log = logging.getLogger(__name__)

MAX_MASKS_PER_BOX = 3


class RefineMode(str, enum.Enum):
    OR_OF_THREE = "or_of_three"
    TOP_CONFIDENCE = "top_confidence"
    SKIP = "skip"


def default_refine_mode(category: str) -> RefineMode:
    """Per-product default: fuse aggressively for fabric/walnuts, skip rice."""
    name = category.lower()
    if name in ("fabric", "walnuts"):
        return RefineMode.OR_OF_THREE
    if name == "rice":
        return RefineMode.SKIP
    return RefineMode.TOP_CONFIDENCE


@dataclass(frozen=True)
class BoxPrompt:
    """Tight bounding box of one mask component, inclusive image coordinates."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int
    source_component_label: int


def extract_boxes(mask: np.ndarray) -> list[BoxPrompt]:
    """One box per 8-connected component, ordered by component label."""
    _, _, stats = connected_components(mask, connectivity=8)
    return [
        BoxPrompt(
            x_min=s.x_min,
            y_min=s.y_min,
            x_max=s.x_max,
            y_max=s.y_max,
            source_component_label=s.label,
        )
        for s in stats
    ]


# --- mask payloads ----------------------------------------------------------


def encode_rle(mask: np.ndarray) -> dict:
    """Run-length payload over row-major pixel indices: [start, len, ...]."""
    mask = np.asarray(mask, dtype=bool)
    flat = mask.ravel()
    padded = np.concatenate(([False], flat, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    starts, stops = edges[::2], edges[1::2]
    runs = np.empty(2 * len(starts), dtype=np.int64)
    runs[0::2] = starts
    runs[1::2] = stops - starts
    return {"width": int(mask.shape[1]), "height": int(mask.shape[0]), "runs": runs.tolist()}


def decode_rle(payload: dict) -> np.ndarray:
    try:
        width, height = int(payload["width"]), int(payload["height"])
        runs = payload["runs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad run-length payload: {exc}") from exc
    if width < 1 or height < 1 or len(runs) % 2 != 0:
        raise FormatError("bad run-length payload geometry")
    flat = np.zeros(width * height, dtype=bool)
    for start, length in zip(runs[0::2], runs[1::2]):
        if start < 0 or length < 0 or start + length > flat.size:
            raise FormatError(f"run [{start}, {length}] exceeds {width}x{height}")
        flat[start : start + length] = True
    return flat.reshape(height, width)


def _decode_candidate(entry: dict, shape: tuple[int, int]) -> tuple[np.ndarray, float]:
    confidence = float(entry.get("confidence", -1.0))
    if not 0.0 <= confidence <= 1.0:
        raise FormatError(f"confidence {confidence} outside [0, 1]")
    if "rle" in entry:
        mask = decode_rle(entry["rle"])
    elif "png_path" in entry:
        mask = load_mask(entry["png_path"])
    else:
        raise FormatError("candidate mask carries neither rle nor png_path")
    if mask.shape != shape:
        raise FormatError(f"candidate mask shape {mask.shape} does not match image {shape}")
    return mask, confidence


# --- segmenter handles ------------------------------------------------------


class NullSegmenter:
    """Returns no candidates, so every box falls back to its source component.

    Used when no segmenter endpoint is configured; makes refinement the
    identity for every mode.
    """

    def segment(self, image_path, boxes, image_shape):
        return [[] for _ in boxes]


class SocketSegmenter:
    """Client for the line-delimited JSON segmenter protocol over TCP.

    One request carries all boxes of one image:

        {"request_id": ..., "image_path": ..., "variant": ...,
         "boxes": [{"x_min": ..., "y_min": ..., "x_max": ..., "y_max": ...}]}

    The response echoes request_id and returns per-box candidate masks
    (at most 3, descending confidence), each as an rle payload or png_path.
    """

    def __init__(self, endpoint: str, variant: str = "default",
                 timeout: float = 30.0, retries: int = 2):
        host, sep, port = endpoint.rpartition(":")
        if not sep or not host:
            raise InvalidArgumentError(f"endpoint must be host:port, got {endpoint!r}")
        self.host = host
        self.port = int(port)
        self.variant = variant
        self.timeout = timeout
        self.retries = retries

    def _roundtrip(self, line: str) -> dict:
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                with socket.create_connection((self.host, self.port), timeout=self.timeout) as sock:
                    sock.sendall(line.encode("utf-8") + b"\n")
                    buf = b""
                    while not buf.endswith(b"\n"):
                        chunk = sock.recv(65536)
                        if not chunk:
                            break
                        buf += chunk
                return json.loads(buf.decode("utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                last_error = exc
        raise TilebinError(f"segmenter at {self.host}:{self.port} unreachable: {last_error}")

    def segment(self, image_path, boxes: Sequence[BoxPrompt], image_shape: tuple[int, int]):
        if image_path is None:
            raise InvalidArgumentError("socket segmenter needs the image path")
        request_id = uuid.uuid4().hex
        request = {
            "request_id": request_id,
            "image_path": str(image_path),
            "variant": self.variant,
            "boxes": [
                {"x_min": b.x_min, "y_min": b.y_min, "x_max": b.x_max, "y_max": b.y_max}
                for b in boxes
            ],
        }
        response = self._roundtrip(json.dumps(request))
        if response.get("request_id") != request_id:
            raise TilebinError(
                f"segmenter answered request {response.get('request_id')!r}, expected {request_id!r}"
            )
        if "error" in response:
            raise TilebinError(f"segmenter error: {response['error']}")

        per_box: list[list[tuple[np.ndarray, float]]] = [[] for _ in boxes]
        for result in response.get("results", []):
            idx = result.get("box_index")
            if not isinstance(idx, int) or not 0 <= idx < len(boxes):
                raise FormatError(f"response names unknown box_index {idx!r}")
            try:
                candidates = [
                    _decode_candidate(entry, image_shape)
                    for entry in result.get("masks", [])[:MAX_MASKS_PER_BOX]
                ]
            except (FormatError, OSError) as exc:
                # a bad candidate poisons only its own box; the caller falls
                # back to the source component
                log.warning("box %d: unusable candidates (%s)", idx, exc)
                candidates = []
            candidates.sort(key=lambda mc: -mc[1])
            per_box[idx] = candidates
        return per_box


# --- refinement -------------------------------------------------------------


def refine_mask(
    mask: np.ndarray,
    image: np.ndarray,
    segmenter,
    mode: RefineMode,
    image_path: str | None = None,
) -> np.ndarray:
    """Refine a coarse mask through box prompts; see the module docstring."""
    mask = np.asarray(mask, dtype=bool)
    ensure_image(image)
    if mask.shape != image.shape[:2]:
        raise InvalidArgumentError(
            f"mask shape {mask.shape} does not match image {image.shape[:2]}"
        )
    if mode == RefineMode.SKIP:
        return mask.copy()

    labels, count, _ = connected_components(mask, connectivity=8)
    if count == 0:
        return mask.copy()
    boxes = extract_boxes(mask)

    try:
        per_box = segmenter.segment(image_path, boxes, mask.shape)
    except (TilebinError, OSError) as exc:
        status = {b.source_component_label: f"transport-failed: {exc}" for b in boxes}
        raise RefinementError(str(exc), status) from exc

    out = np.zeros_like(mask)
    for box, candidates in zip(boxes, per_box):
        if not candidates:
            out |= labels == box.source_component_label
            log.debug("box %d: no candidates, kept source component", box.source_component_label)
        elif mode == RefineMode.OR_OF_THREE:
            for candidate, _ in candidates:
                out |= candidate
        else:
            out |= candidates[0][0]
    return out
