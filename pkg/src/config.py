# config.py
"""Unified settings loader.

Priority:
1. Explicit OS env vars            (export MICI_POPULATION=40)
2. .env file in project root       (for local experiment runs)
3. Hardcoded defaults              (the standard experiment settings)

Drop-in:  `from src.config import settings`
"""

from __future__ import annotations

import os
from typing import Callable, TypeVar

from dotenv import load_dotenv

from src.errors import ConfigError

# ───────────────────────
# 1) .env for local runs
# ───────────────────────
load_dotenv()  # silently ignored if file absent

T = TypeVar("T")

_TRUTHY = {"1", "true", "yes", "on"}
_FALSY = {"0", "false", "no", "off", ""}


# ───────────────────────
# 2) helpers
# ───────────────────────
def _get(name: str, default: T, cast: Callable[[str], T]) -> T:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError as e:
        raise ConfigError(f"Bad config: {name}={raw!r} ({e})") from e


def _flag(raw: str) -> bool:
    low = raw.strip().lower()
    if low in _TRUTHY:
        return True
    if low in _FALSY:
        return False
    raise ValueError("expected a boolean")


class Settings:
    """Resolved once at import time; re-create to pick up env changes."""

    def __init__(self):
        # optimizer
        self.population:      int   = _get("MICI_POPULATION", 30, int)
        self.max_iterations:  int   = _get("MICI_MAX_ITER", 5000, int)
        self.fit_threshold:   float = _get("MICI_FIT_THRESH", 1e-4, float)
        self.eta:             float = _get("MICI_ETA", 0.8, float)
        self.stall_iterations: int  = _get("MICI_STALL_ITERS", 50, int)
        self.sampler:         str   = _get("MICI_SAMPLER", "me", str.lower)
        self.workers:         int   = _get("MICI_WORKERS", 1, int)
        self.validate_population: bool = _get("MICI_VALIDATE_POPULATION", False, _flag)
        # objectives
        self.p1:     float = _get("MICI_P1", 10.0, float)
        self.p2:     float = _get("MICI_P2", -10.0, float)
        self.mu:     float = _get("MICI_MU", 1.0, float)
        self.sigma2: float = _get("MICI_SIGMA2", 0.1, float)
        # misc
        self.log_level: str = _get("MICI_LOG_LEVEL", "INFO", str.upper)

        if self.sampler not in ("me", "vi"):
            raise ConfigError(f"Bad config: MICI_SAMPLER={self.sampler!r} (expected me|vi)")


settings = Settings()
