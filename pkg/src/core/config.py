from __future__ import annotations

"""Run configuration: flags over environment over defaults."""

import math
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

from core.errors import ConfigurationError

DEFAULT_PREC = 256
MIN_PREC = 64
DEFAULT_MAX_PREC = 16384
MAX_DIGITS = 60

COMMANDS = (
    "stirling",
    "expand",
    "verify-expansion",
    "verify-first",
    "wv-report",
    "verify-wv",
    "counterexample-gamma",
    "polygon",
    "solve",
)

FORMATS = ("json", "csv")


def env_int(name: str, default: int, env: Mapping[str, str] | None = None) -> int:
    """Read an integer environment variable.

    Args:
        name: Variable name
        default: Value when unset or empty
        env: Mapping to read from (defaults to os.environ)

    Returns:
        The parsed integer
    """
    env = os.environ if env is None else env
    raw = env.get(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}", name=name) from None


def default_digits(prec: int) -> int:
    """Decimal digits that represent a `prec`-bit value, capped for readability."""
    return min(MAX_DIGITS, math.ceil(prec * math.log10(2)))


@dataclass
class RunConfig:
    """Resolved configuration for one CLI run.

    Embedded verbatim in every report so a run can be reproduced from its output.
    """

    command: str
    prec: int = DEFAULT_PREC
    out: str | None = None
    format: str = "json"
    digits: int | None = None  # None -> default_digits(prec)
    workers: int = 1
    gnuplot: str | None = None
    max_prec: int = DEFAULT_MAX_PREC
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigurationError(f"Unknown command {self.command!r}")
        if self.prec < MIN_PREC:
            raise ConfigurationError(f"prec must be >= {MIN_PREC} bits, got {self.prec}")
        if self.max_prec < self.prec:
            raise ConfigurationError(
                f"max_prec ({self.max_prec}) must be >= prec ({self.prec})"
            )
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.digits is None:
            self.digits = default_digits(self.prec)
        elif self.digits < 1:
            raise ConfigurationError(f"digits must be >= 1, got {self.digits}")

    @classmethod
    def from_env(
        cls,
        command: str,
        env: Mapping[str, str] | None = None,
        **overrides: Any,
    ) -> RunConfig:
        """Build a config from environment defaults, then apply explicit overrides.

        None-valued overrides count as "flag not given".
        """
        values: dict[str, Any] = {
            "prec": env_int("DELTAWV_PREC", DEFAULT_PREC, env),
            "max_prec": env_int("DELTAWV_MAX_PREC", DEFAULT_MAX_PREC, env),
            "workers": env_int("DELTAWV_WORKERS", 1, env),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values["max_prec"] < values["prec"]:
            values["max_prec"] = max(values["prec"], DEFAULT_MAX_PREC)
        return cls(command=command, **values)

    def to_dict(self) -> dict[str, Any]:
        # output paths are left out so runs differing only in --out compare equal
        return {
            "command": self.command,
            "prec": self.prec,
            "max_prec": self.max_prec,
            "digits": self.digits,
            "format": self.format,
            "workers": self.workers,
            "params": dict(self.params),
        }
