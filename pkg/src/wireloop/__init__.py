"""Deterministic buzz-wire teleoperation simulator with user-customizable
shared control, a headless experiment harness, and a live gateway."""

__version__ = "0.1.0"
