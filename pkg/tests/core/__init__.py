"""Simulator core tests."""

from __future__ import annotations
