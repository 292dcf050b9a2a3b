"""Network-server scheme tests."""

from __future__ import annotations
