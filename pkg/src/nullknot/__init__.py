"""Knotted null electromagnetic fields: construction, diagnostics and exact evolution."""

from .errors import (
    ConfigError,
    NullKnotError,
    NumericError,
    SnapshotFormatError,
)

__all__ = ["ConfigError", "NullKnotError", "NumericError", "SnapshotFormatError", "__version__"]

__version__ = "0.1.0"
