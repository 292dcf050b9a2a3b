"""Allow running the simulator with ``python -m lora_drcc``."""

from __future__ import annotations

from lora_drcc.cli import cli

cli()
