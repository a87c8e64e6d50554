"""Config validation: fail-fast at startup on invalid runtime mode and tunables."""
from config.config import RUNTIME_MODES, Config


class ConfigValidationError(Exception):
    """Raised when config validation fails (invalid range or unknown value)."""


def _get(name: str, default: float | None = None) -> float:
    v = getattr(Config, name, default)
    if v is None:
        raise ConfigValidationError(f"Missing config: {name}")
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigValidationError(
            f"Config {name} must be numeric, got {type(v).__name__}"
        )


def validate_config() -> None:
    """Validate critical config values. Raises ConfigValidationError on first failure."""
    mode = Config.RUNTIME_MODE
    if mode not in RUNTIME_MODES:
        raise ConfigValidationError(
            f"TRIGRAPH_MODE must be one of {', '.join(RUNTIME_MODES)}, got {mode!r}"
        )

    # Positive integers
    for key in (
        "DEFAULT_RANKS",
        "DEFAULT_APPROX_RUNS",
        "POLL_EVERY_NODES",
        "WRITE_RETRY_ATTEMPTS",
        "WRITE_QUEUE_MAX_SIZE",
    ):
        v = _get(key, 1)
        if v < 1 or int(v) != v:
            raise ConfigValidationError(f"{key} must be a positive integer, got {v}")

    q = _get("DEFAULT_Q", 0.1)
    if not (0 < q <= 1):
        raise ConfigValidationError(f"DEFAULT_Q must be in (0, 1], got {q}")

    if _get("WRITE_RETRY_DELAY_SEC", 0.2) < 0:
        raise ConfigValidationError("WRITE_RETRY_DELAY_SEC must be >= 0")

    try:
        timeout = Config.DEADLOCK_TIMEOUT_SEC
    except ValueError:
        raise ConfigValidationError("TRIGRAPH_DEADLOCK_TIMEOUT_SEC must be numeric")
    if timeout <= 0:
        raise ConfigValidationError("TRIGRAPH_DEADLOCK_TIMEOUT_SEC must be > 0")
