"""General helper functions."""

from __future__ import annotations

import math
import typing as t

import simplejson


def dump_json(obj: t.Any, **kwargs: t.Any) -> str:  # noqa: ANN401
    """Serialize a summary object to JSON.

    Non-finite floats are written as null.

    Args:
        obj: A Python object, usually a dict.
        **kwargs: Optional key word arguments.

    Returns:
        A string of serialized json.
    """
    return simplejson.dumps(
        obj,
        ignore_nan=True,
        separators=(",", ":"),
        **kwargs,
    )


def format_float(value: float, digits: int = 6) -> str:
    """Render a float for CSV output with fixed precision and no sign on zero."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.{digits}f}"
    return text[1:] if text.startswith("-") and float(text) == 0 else text
