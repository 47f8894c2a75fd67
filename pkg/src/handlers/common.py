"""Argument parsing helpers shared by the subcommand handlers."""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Any

from core.analysis.grid import geometric_grid
from core.analysis.series import DEFAULT_SERIES_CONFIG, PowerSeries, SeriesConfig, builtin
from core.config import RunConfig
from core.errors import ConfigurationError


def parse_number(text: str) -> int | Fraction:
    """Decimal or p/q text to an exact int (when integral) or Fraction."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"not a rational number: {text!r}") from None
    return int(value) if value.denominator == 1 else value


def parse_eta(text: str) -> int | Fraction | tuple[Fraction, Fraction]:
    """`RE` or `RE,IM`; a zero imaginary part collapses to a real shift."""
    parts = text.split(",")
    if len(parts) > 2:
        raise ConfigurationError(f"eta must be RE or RE,IM, got {text!r}")
    re = parse_number(parts[0])
    im = parse_number(parts[1]) if len(parts) == 2 else 0
    if re == 0 and im == 0:
        raise ConfigurationError("eta must be nonzero")
    if im == 0:
        return re
    return Fraction(re), Fraction(im)


def series(config: RunConfig) -> PowerSeries:
    return builtin(config.params["func"])


def series_config(config: RunConfig) -> SeriesConfig:
    return dataclasses.replace(DEFAULT_SERIES_CONFIG, max_prec=config.max_prec)


def radius_grid(config: RunConfig) -> list[Any]:
    params = config.params
    return geometric_grid(params["rmin"], params["rmax"], params["points"], config.prec)
