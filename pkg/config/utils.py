"""Shared config helpers for the engine, writer and CLI modules."""
from typing import Any


def config_float(config: Any, name: str, default: float) -> float:
    """Return numeric config value; use default when missing or not a number (e.g. under Mock)."""
    v = getattr(config, name, default)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    return default


def config_int(config: Any, name: str, default: int) -> int:
    """Return integer config value; use default when missing or not an integer."""
    v = getattr(config, name, default)
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    return default
