"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class TilebinError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(TilebinError, ValueError):
    """An argument violates a documented precondition."""


class NotFoundError(TilebinError, FileNotFoundError):
    """A required artifact (map blob, tile, stage output) does not exist."""


class FormatError(TilebinError):
    """A file exists but its bytes do not match the expected format."""


class IncompleteInputError(TilebinError):
    """A merge or stage was given fewer inputs than the plan requires.

    ``missing`` lists the absent (row_index, col_index) pairs.
    """

    def __init__(self, message: str, missing: list[tuple[int, int]]):
        super().__init__(message)
        self.missing = missing


class UndefinedMetricError(TilebinError):
    """The metric is mathematically undefined for the given inputs."""


class RefinementError(TilebinError):
    """The segmenter could not be reached; carries per-box status strings."""

    def __init__(self, message: str, box_status: dict[int, str]):
        super().__init__(message)
        self.box_status = box_status


class PreconditionError(TilebinError):
    """A pipeline stage is missing the outputs of an earlier stage."""


class ConfigError(TilebinError):
    """The run configuration could not be parsed or contains unknown fields."""
