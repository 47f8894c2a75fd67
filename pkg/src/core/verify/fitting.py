from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Any

import numpy as np

from core.errors import InsufficientDataError

MIN_FIT_ROWS = 4


def fit_decay_exponent(rows: Sequence[tuple[Any, Any]]) -> tuple[float, float]:
    """Least-squares slope of log abs_err against log r.

    Args:
        rows: (r, abs_err) pairs; rows with abs_err <= 0 are ignored

    Returns:
        (slope, r2)

    Raises:
        InsufficientDataError: fewer than 4 usable rows
    """
    points = [(float(r), float(err)) for r, err in rows if float(err) > 0]
    points = [(r, e) for r, e in points if math.isfinite(e) and r > 0]
    if len(points) < MIN_FIT_ROWS:
        raise InsufficientDataError(
            f"need >= {MIN_FIT_ROWS} rows above the noise floor, got {len(points)}",
            rows=len(points),
        )
    x = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if total == 0 else 1.0 - float(np.sum(residual**2)) / total
    return float(slope), r2
