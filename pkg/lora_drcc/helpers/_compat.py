"""Compatibility helpers."""

from __future__ import annotations

import sys

if sys.version_info < (3, 10):
    import importlib_resources
else:
    from importlib import resources as importlib_resources

if sys.version_info < (3, 12):
    from importlib.abc import Traversable
else:
    from importlib.resources.abc import Traversable

__all__ = [
    "Traversable",
    "importlib_resources",
]
