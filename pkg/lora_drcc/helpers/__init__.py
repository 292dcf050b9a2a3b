"""Helper library for the simulator."""
