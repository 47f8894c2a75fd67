from __future__ import annotations

"""Evaluation of Newton (binomial) series f(z) = sum_m b_m C(z, m)."""

from collections.abc import Iterator
from fractions import Fraction
from typing import Any

from mpmath import mp, mpf

from core.analysis.series import (
    DEFAULT_SERIES_CONFIG,
    EvalResult,
    Number,
    SeriesConfig,
    check_prec,
    exact_rational,
    exact_result,
    sum_series,
    to_mp,
)
from core.equations.solver import NewtonSeriesSolution
from core.errors import ConfigurationError, NeedsMoreTermsError, NonConvergenceError


def _term_count(sol: NewtonSeriesSolution, z: Any) -> int | None:
    """Number of terms that make the sum exact, or None when a tail remains."""
    q = exact_rational(z)
    if q is not None and q.denominator == 1 and 0 <= q < len(sol.b):
        return int(q) + 1  # C(z, m) = 0 for m > z
    if sol.finite:
        return len(sol.b)
    return None


def _binomial_terms(b: tuple[Any, ...], z: Number, stop: int) -> Iterator[Number]:
    c: Number = mpf(1)
    for m in range(stop):
        yield to_mp(b[m]) * c
        c = c * (z - m) / (m + 1)


def newton_value(
    sol: NewtonSeriesSolution,
    z: Any,
    prec: int = 256,
    config: SeriesConfig = DEFAULT_SERIES_CONFIG,
) -> EvalResult:
    """sum_m b_m C(z, m) at any real or complex z.

    Raises:
        NeedsMoreTermsError: the stored coefficients end before the tail criterion holds
    """
    check_prec(prec)
    stop = _term_count(sol, z)
    if stop is not None:
        q = exact_rational(z)
        if q is not None and all(isinstance(v, (int, Fraction)) for v in sol.b[:stop]):
            total = Fraction(0)
            c = Fraction(1)
            for m in range(stop):
                total += sol.b[m] * c
                c = c * (q - m) / (m + 1)
            return exact_result(total, prec, stop)
    with mp.workprec(prec + config.guard_bits):
        point = to_mp(z)
    try:
        return sum_series(
            lambda: _binomial_terms(sol.b, point, stop or len(sol.b)),
            prec,
            finite=stop is not None,
            config=config,
        )
    except NonConvergenceError as exc:
        raise NeedsMoreTermsError(
            f"{sol.terms} Newton coefficients do not reach the tail criterion at z={z}",
            z=z,
            terms=sol.terms,
        ) from exc


def eval_newton_series(
    sol: NewtonSeriesSolution,
    z: Any,
    prec: int = 256,
    config: SeriesConfig = DEFAULT_SERIES_CONFIG,
) -> EvalResult:
    """Evaluate a Newton-series solution at real z > 0.

    Args:
        sol: Coefficients b_m
        z: Positive real point
        prec: Target precision in bits

    Returns:
        EvalResult; `exact` is set when b and z are rational and the sum is finite
    """
    q = exact_rational(z)
    if q is None or q <= 0:
        raise ConfigurationError(f"Newton series are evaluated at real z > 0, got {z}")
    return newton_value(sol, z, prec, config)


def newton_majorant(
    sol: NewtonSeriesSolution,
    x: Any,
    prec: int = 256,
    config: SeriesConfig = DEFAULT_SERIES_CONFIG,
) -> EvalResult:
    """sum_m |b_m| C(x+m-1, m), which dominates |f| on |z| <= x and is |f(-x)| for alternating b."""
    check_prec(prec)
    with mp.workprec(prec + config.guard_bits):
        point = to_mp(x)

    def terms() -> Iterator[Number]:
        c = mpf(1)
        for m, bm in enumerate(sol.b):
            yield abs(to_mp(bm)) * c
            c = c * (point + m) / (m + 1)

    try:
        return sum_series(terms, prec, finite=sol.finite, config=config)
    except NonConvergenceError as exc:
        raise NeedsMoreTermsError(
            f"{sol.terms} Newton coefficients do not reach the tail criterion at x={x}",
            x=x,
            terms=sol.terms,
        ) from exc
