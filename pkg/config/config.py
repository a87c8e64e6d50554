import os
from pathlib import Path
from dotenv import load_dotenv

# Load variables from .env file when present (config package)
load_dotenv()

RUNTIME_MODES = ("interleaved", "concurrent")


class _ConfigMeta(type):
    """Metaclass: environment-dependent attributes are evaluated on each access."""

    @property
    def RUNTIME_MODE(cls) -> str:
        """Rank harness execution mode: interleaved (default) or concurrent."""
        return os.getenv("TRIGRAPH_MODE", "interleaved").strip().lower()

    @property
    def LOG_DIR(cls) -> str:
        return os.getenv("TRIGRAPH_LOG_DIR", str(cls.BASE_DIR / "logs"))

    @property
    def APP_STATUS_PATH(cls) -> str:
        return os.path.join(cls.LOG_DIR, "trigraph.log")

    @property
    def LOG_LEVEL(cls) -> str:
        return os.getenv("TRIGRAPH_LOG_LEVEL", "INFO").upper()

    @property
    def DEADLOCK_TIMEOUT_SEC(cls) -> float:
        """Longest a concurrent-mode rank blocks on its inbox before the run is declared stalled."""
        return float(os.getenv("TRIGRAPH_DEADLOCK_TIMEOUT_SEC", "30"))

    @property
    def ENRON_PATH(cls) -> str:
        return os.getenv("TRIGRAPH_ENRON_PATH", "")

    @property
    def BERKSTAN_PATH(cls) -> str:
        return os.getenv("TRIGRAPH_BERKSTAN_PATH", "")


class Config(metaclass=_ConfigMeta):
    """Centralized configuration for the triangle counting engine.

    Attributes that depend on environment variables (runtime mode, log paths,
    dataset locations) are computed on each access, so tests and one-off runs
    can switch them without a restart.
    """

    # --- PATHS (static) ---
    BASE_DIR = Path(__file__).resolve().parent.parent

    # --- RUN DEFAULTS (static) ---
    DEFAULT_RANKS = 4
    DEFAULT_ENGINE = "aop"
    DEFAULT_COST_KIND = "DPD"
    DEFAULT_ORDERING = "degree"
    DEFAULT_SEED = 42
    # Sparsification: retention probability and number of seeded runs per approx command.
    DEFAULT_Q = 0.1
    DEFAULT_APPROX_RUNS = 25

    # --- ENGINES (static) ---
    # Surrogate and direct engines drain their inbox after this many core nodes.
    POLL_EVERY_NODES = 1

    # --- OUTPUT (static) ---
    JSON_INDENT = 2
    # Result files are written by a background thread; transient OSErrors are retried.
    WRITE_RETRY_ATTEMPTS = 3
    WRITE_RETRY_DELAY_SEC = 0.2  # Base delay (exponential backoff)
    WRITE_QUEUE_MAX_SIZE = 10000

    @staticmethod
    def get_info() -> str:
        return f"--- Config loaded (runtime mode: {Config.RUNTIME_MODE}) ---"
