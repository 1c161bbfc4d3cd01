import logging
import os
from typing import Optional

from dotenv import load_dotenv

from models.models import RunConfig

load_dotenv()

logger = logging.getLogger("app")

DEFAULT_DIM = 512
DEFAULT_DEGREE = 4
DEFAULT_SAMPLES = 256
DEFAULT_TOL = 1e-8
DEFAULT_EPS = 1.0
DEFAULT_HBAR = 2.0
DEFAULT_A = 0.0
DEFAULT_GRID = 256
DEFAULT_DT = 1e-6
DEFAULT_DEPTH = 32
DEFAULT_GAP_TOL = 1e-8

LOG_LEVEL = os.getenv("BO_LAB_LOG_LEVEL", "INFO").upper()


def thread_cap() -> Optional[int]:
    """Worker cap from BO_LAB_THREADS; None when unset or invalid."""
    raw = os.getenv("BO_LAB_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring BO_LAB_THREADS={raw!r}: not an integer")
        return None
    if value < 1:
        logger.warning(f"Ignoring BO_LAB_THREADS={raw!r}: must be positive")
        return None
    return value


def run_config(**overrides) -> RunConfig:
    values = {
        "eps": DEFAULT_EPS,
        "hbar": DEFAULT_HBAR,
        "a": DEFAULT_A,
        "dim": DEFAULT_DIM,
        "degree": DEFAULT_DEGREE,
        "samples": DEFAULT_SAMPLES,
        "tol": DEFAULT_TOL,
        "threads": thread_cap(),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
