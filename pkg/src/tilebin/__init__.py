"""Overlapping-window tiling, anomaly-map merging, adaptive binarization,
box-prompted refinement, and pixel metrics for high-resolution defect
segmentation."""

from .amap import read_amap, write_amap
from .augment import (
    AugmentParams,
    AugmentRecord,
    add_gaussian_noise,
    adjust_exposure,
    augment_batch,
    augment_tile,
)
from .binarize import (
    ComponentStats,
    MebinConfig,
    coarse_mask,
    combine_or,
    connected_components,
    mebin_threshold,
    threshold_mean3std,
)
from .config import CategoryConfig, ScorerSpec, load_config
from .errors import (
    ConfigError,
    FormatError,
    IncompleteInputError,
    InvalidArgumentError,
    NotFoundError,
    PreconditionError,
    RefinementError,
    TilebinError,
    UndefinedMetricError,
)
from .geometry import (
    TilePlan,
    TileRecord,
    TileRect,
    crop_tile,
    manifest_records,
    plan_tiles,
    read_tile_manifest,
    tile_key,
    unpad_region,
    write_tile_manifest,
)
from .merger import merge_from_blobs, merge_maps, merged_blob_name, resize_map_bilinear
from .metrics import SegF1Result, aupro, class_f1, f1_max, seg_f1, write_metrics_report
from .refine import (
    BoxPrompt,
    NullSegmenter,
    RefineMode,
    SocketSegmenter,
    default_refine_mode,
    extract_boxes,
    refine_mask,
)
from .scorers import FileScorer, IdentityScorer, StatScorer, fit_stat_scorer, score_tile

__version__ = "0.1.0"

__all__ = [
    "AugmentParams",
    "AugmentRecord",
    "BoxPrompt",
    "CategoryConfig",
    "ComponentStats",
    "ConfigError",
    "FileScorer",
    "FormatError",
    "IdentityScorer",
    "IncompleteInputError",
    "InvalidArgumentError",
    "MebinConfig",
    "NotFoundError",
    "NullSegmenter",
    "PreconditionError",
    "RefineMode",
    "RefinementError",
    "ScorerSpec",
    "SegF1Result",
    "SocketSegmenter",
    "StatScorer",
    "TilePlan",
    "TileRecord",
    "TileRect",
    "TilebinError",
    "UndefinedMetricError",
    "add_gaussian_noise",
    "adjust_exposure",
    "augment_batch",
    "augment_tile",
    "aupro",
    "class_f1",
    "coarse_mask",
    "combine_or",
    "connected_components",
    "crop_tile",
    "default_refine_mode",
    "extract_boxes",
    "f1_max",
    "fit_stat_scorer",
    "load_config",
    "manifest_records",
    "mebin_threshold",
    "merge_from_blobs",
    "merge_maps",
    "merged_blob_name",
    "plan_tiles",
    "read_amap",
    "read_tile_manifest",
    "refine_mask",
    "resize_map_bilinear",
    "score_tile",
    "seg_f1",
    "threshold_mean3std",
    "tile_key",
    "unpad_region",
    "write_amap",
    "write_metrics_report",
    "write_tile_manifest",
]
