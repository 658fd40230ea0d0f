"""Run configuration: per-category settings parsed from a JSON file.

The file holds optional ``defaults`` plus a ``categories`` mapping of
category name to field overrides. Every field name is checked; unknown
fields are errors so typos in overrides cannot silently fall back to
defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

from .augment import AugmentParams
from .binarize import MebinConfig
from .errors import ConfigError, InvalidArgumentError
from .geometry import DEFAULT_OVERLAP, DEFAULT_WINDOW
from .refine import RefineMode, default_refine_mode
from .scorers import DEFAULT_MODEL_RESOLUTION


@dataclass(frozen=True)
class ScorerSpec:
    kind: str = "stat"
    directory: str | None = None

    def __post_init__(self):
        if self.kind not in ("stat", "file", "identity"):
            raise InvalidArgumentError(f"scorer kind must be stat, file or identity, got {self.kind!r}")
        if self.kind == "file" and not self.directory:
            raise InvalidArgumentError("file scorer needs a directory")


@dataclass(frozen=True)
class CategoryConfig:
    category: str
    window: int = DEFAULT_WINDOW
    overlap_fraction: float = DEFAULT_OVERLAP
    model_resolution: int = DEFAULT_MODEL_RESOLUTION
    augment: AugmentParams = field(default_factory=AugmentParams)
    scorer: ScorerSpec = field(default_factory=ScorerSpec)
    mebin: MebinConfig = field(default_factory=MebinConfig)
    refine_mode: RefineMode | None = None
    segmenter_variant: str = "default"

    def resolved_refine_mode(self) -> RefineMode:
        return self.refine_mode if self.refine_mode is not None else default_refine_mode(self.category)


_NESTED = {
    "augment": AugmentParams,
    "scorer": ScorerSpec,
    "mebin": MebinConfig,
}
_CATEGORY_FIELDS = {f.name for f in dc_fields(CategoryConfig)} - {"category"}


def _build_nested(cls, obj: dict, where: str):
    allowed = {f.name for f in dc_fields(cls)}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}.{sorted(unknown)[0]}: unknown field")
    try:
        return cls(**obj)
    except InvalidArgumentError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _build_category(name: str, merged: dict) -> CategoryConfig:
    where = f"categories.{name}"
    kwargs = {}
    for key, value in merged.items():
        if key not in _CATEGORY_FIELDS:
            raise ConfigError(f"{where}.{key}: unknown field")
        if key in _NESTED:
            if not isinstance(value, dict):
                raise ConfigError(f"{where}.{key}: expected an object")
            kwargs[key] = _build_nested(_NESTED[key], value, f"{where}.{key}")
        elif key == "refine_mode":
            try:
                kwargs[key] = RefineMode(value)
            except ValueError:
                raise ConfigError(
                    f"{where}.refine_mode: {value!r} is not one of "
                    f"{[m.value for m in RefineMode]}"
                ) from None
        else:
            kwargs[key] = value
    try:
        return CategoryConfig(category=name, **kwargs)
    except (InvalidArgumentError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | Path) -> dict[str, CategoryConfig]:
    """Parse the run configuration; returns categories in file order."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(doc) - {"defaults", "categories"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown field")
    defaults = doc.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ConfigError("defaults: expected an object")
    categories = doc.get("categories")
    if not isinstance(categories, dict) or not categories:
        raise ConfigError("categories: expected a nonempty object")

    out = {}
    for name, overrides in categories.items():
        if not isinstance(overrides, dict):
            raise ConfigError(f"categories.{name}: expected an object")
        merged: dict = {}
        for source in (defaults, overrides):
            for key, value in source.items():
                if key in _NESTED and isinstance(value, dict):
                    base = dict(merged.get(key, {}))
                    base.update(value)
                    merged[key] = base
                else:
                    merged[key] = value
        out[name] = _build_category(name, merged)
    return out
