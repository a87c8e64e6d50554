"""Result file writer: a background thread drains a bounded queue and retries transient I/O errors."""
import logging
import os
import queue
import threading
import time
from collections.abc import Callable
from pathlib import Path

from config.config import Config
from config.utils import config_float, config_int

logger = logging.getLogger("trigraph")


def _write_with_retry(write_fn: Callable[[], None]) -> bool:
    """Execute write_fn(); retry on OSError with exponential backoff. Returns True if written."""
    attempts = config_int(Config, "WRITE_RETRY_ATTEMPTS", 3)
    delay = config_float(Config, "WRITE_RETRY_DELAY_SEC", 0.2)
    last_err = None
    for attempt in range(attempts):
        try:
            write_fn()
            return True
        except OSError as e:
            last_err = e
            if attempt < attempts - 1:
                logger.warning("Result write failed (attempt %d/%d): %s", attempt + 1, attempts, e)
                time.sleep(delay * (2**attempt))
    logger.error("Result write failed after %s attempts: %s", attempts, last_err)
    return False


def _do_write(path: str, chunks: list[str]) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(chunks)


class _ResultWorker(threading.Thread):
    """Background thread: consume queued writes and apply them in order."""

    def __init__(self) -> None:
        super().__init__(daemon=True, name="result-writer")
        self._q: queue.Queue = queue.Queue(maxsize=config_int(Config, "WRITE_QUEUE_MAX_SIZE", 10000))
        self._stop = threading.Event()
        self.failed: list[str] = []

    def put(self, path: str | Path, chunks: list[str]) -> None:
        # Blocks when full: result files must not lose records.
        self._q.put((str(path), chunks))

    def flush(self) -> bool:
        """Wait until every queued write is done; True if none failed since the last flush."""
        self._q.join()
        ok = not self.failed
        self.failed = []
        return ok

    def stop(self) -> None:
        self._stop.set()

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                path, chunks = self._q.get(timeout=0.5)
            except queue.Empty:
                continue
            try:
                if not _write_with_retry(lambda: _do_write(path, chunks)):
                    self.failed.append(path)
            finally:
                self._q.task_done()


_worker: _ResultWorker | None = None
_lock = threading.Lock()


def get_result_writer() -> _ResultWorker:
    """Singleton writer; start thread on first use."""
    global _worker
    with _lock:
        if _worker is None or not _worker.is_alive():
            _worker = _ResultWorker()
            _worker.start()
        return _worker


def write_text(path: str | Path, text: str) -> None:
    """Queue a whole-file write (replaces any existing file)."""
    get_result_writer().put(path, [text])


def write_lines(path: str | Path, lines: list[str]) -> None:
    """Queue newline-terminated lines as one whole-file write."""
    get_result_writer().put(path, lines)


def flush() -> bool:
    return get_result_writer().flush()
