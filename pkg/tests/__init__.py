"""Simulator tests."""

from __future__ import annotations
