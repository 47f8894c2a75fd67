from __future__ import annotations

"""Difference analogue of the Wiman-Valiron estimate, and the 1/Gamma counterexample."""

import functools
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from mpmath import mp, mpf

from core.analysis.series import (
    DEFAULT_SERIES_CONFIG,
    PowerSeries,
    SeriesConfig,
    builtin,
    delta_exact,
    estimated_order,
    evaluate,
    to_mp,
    zero_excluded,
)
from core.analysis.wiman_valiron import central_index
from core.errors import (
    ConfigurationError,
    DivisionAtZeroError,
    NonConvergenceError,
    PrecisionExhaustedError,
)
from core.parallel import map_ordered
from core.types import RowStatus, Verdict

logger = logging.getLogger(__name__)

GAMMA_SERIES_MAX_Z = 16


@dataclass
class WVDifferenceRow:
    r: Any
    status: RowStatus
    nu: int | None = None
    delta_ratio: Any = None  # Delta^k f(r) / f(r)
    wv_prediction: Any = None  # (nu eta / r)^k
    rel_err: Any = None
    bound: Any = None  # nu^(-1/8+eps)
    passed: bool | None = None
    # earlier, non-sharp estimate at the same point
    earlier_err: Any = None
    earlier_bound: Any = None
    earlier_passed: bool | None = None
    reason: str | None = None


@dataclass
class WVDifferenceReport:
    f_name: str
    k: int
    eta: Any
    eps: float
    sigma: float
    rows: list[WVDifferenceRow] = field(default_factory=list)
    verdict: Verdict = Verdict.INCONCLUSIVE
    reason: str | None = None


def _earlier_estimate(
    sigma: float, k: int, eps: float, r: mpf, nu: int, ratio: Any, predicted: Any
) -> tuple[Any, Any]:
    """Error and bound of the pre-sharp estimates; (None, None) when none applies."""
    if 0 < sigma < 1:
        gamma = min(sigma / 8, 1 - sigma)
        return abs(ratio - predicted), r ** (k * sigma - k - gamma + eps)
    if sigma == 0:
        return abs(ratio / predicted - 1), mpf(nu) ** (mpf(-1) / 8 + eps)
    return None, None


def wv_difference_row(
    f: PowerSeries,
    k: int,
    eta: Any,
    eps: float,
    sigma: float,
    prec: int,
    r: Any,
    series_config: SeriesConfig = DEFAULT_SERIES_CONFIG,
) -> WVDifferenceRow:
    if zero_excluded(f, r):
        return WVDifferenceRow(r=r, status=RowStatus.EXCLUDED, reason="near a known zero")
    try:
        nu = central_index(f, r, prec)
        if nu == 0:
            return WVDifferenceRow(r=r, status=RowStatus.EXCLUDED, nu=0, reason="nu = 0")
        delta = delta_exact(f, k, eta, r, prec, series_config)
        base = evaluate(f, r, prec, series_config)
        if abs(base.value) <= base.error_bound:
            raise DivisionAtZeroError(f"|{f.name}(r)| is below its error bound", r=r)
    except DivisionAtZeroError as exc:
        return WVDifferenceRow(r=r, status=RowStatus.EXCLUDED, reason=str(exc))
    except (PrecisionExhaustedError, NonConvergenceError) as exc:
        logger.info("Dropping r=%s: %s", r, exc)
        return WVDifferenceRow(r=r, status=RowStatus.DROPPED, reason=str(exc))
    with mp.workprec(prec + series_config.guard_bits):
        radius = to_mp(r)
        ratio = delta.value / base.value
        predicted = (mpf(nu) * to_mp(eta) / radius) ** k
        rel_err = abs(ratio / predicted - 1)
        bound = mpf(nu) ** (mpf(-1) / 8 + eps)
        earlier_err, earlier_bound = _earlier_estimate(sigma, k, eps, radius, nu, ratio, predicted)
    return WVDifferenceRow(
        r=r,
        status=RowStatus.USED,
        nu=nu,
        delta_ratio=ratio,
        wv_prediction=predicted,
        rel_err=rel_err,
        bound=bound,
        passed=bool(rel_err <= bound),
        earlier_err=earlier_err,
        earlier_bound=earlier_bound,
        earlier_passed=None if earlier_err is None else bool(earlier_err <= earlier_bound),
    )


def verify_wv_difference(
    f: PowerSeries,
    k: int,
    r_grid: Sequence[Any],
    eps: float = 0.05,
    prec: int = 256,
    eta: Any = 1,
    workers: int = 1,
    series_config: SeriesConfig = DEFAULT_SERIES_CONFIG,
) -> WVDifferenceReport:
    """Compare Delta^k f/f with (nu/r)^k along r_grid.

    PASS iff every computed row has |ratio/prediction - 1| <= nu^(-1/8+eps).
    """
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    sigma = estimated_order(f)
    row = functools.partial(
        wv_difference_row, f, k, eta, eps, sigma, prec, series_config=series_config
    )
    report = WVDifferenceReport(f_name=f.name, k=k, eta=eta, eps=eps, sigma=sigma)
    report.rows = map_ordered(row, r_grid, workers)
    used = [row for row in report.rows if row.status is RowStatus.USED]
    dropped = sum(1 for row in report.rows if row.status is RowStatus.DROPPED)
    if report.rows and dropped / len(report.rows) > 0.5:
        report.verdict = Verdict.UNRELIABLE
        report.reason = f"{dropped} of {len(report.rows)} rows dropped"
    elif not used:
        report.verdict = Verdict.INCONCLUSIVE
        report.reason = "no usable rows"
    else:
        failed = [row for row in used if not row.passed]
        report.verdict = Verdict.FAIL if failed else Verdict.PASS
        report.reason = (
            f"{len(failed)} of {len(used)} rows exceed nu^(-1/8+eps)" if failed
            else f"all {len(used)} rows within nu^(-1/8+eps)"
        )
    logger.info("%s k=%d: %s (%s)", f.name, k, report.verdict.value, report.reason)
    return report


@dataclass
class GammaRow:
    z: Any
    method: str  # "series" or "rgamma"
    delta_ratio: Any
    expected: Any  # 1/z - 1
    abs_diff: Any
    error_bound: Any
    match: bool
    identity: str = "1/z-1"
    nu: int | None = None
    wv_prediction: Any = None  # (nu/z) eta, series range only
    band_violation: bool | None = None


def gamma_row(
    z: Any,
    prec: int = 256,
    eps: float = 0.05,
    series_max_z: float = GAMMA_SERIES_MAX_Z,
    series_config: SeriesConfig = DEFAULT_SERIES_CONFIG,
) -> GammaRow:
    """Delta Phi / Phi for Phi = 1/Gamma at one real z > 1, against 1/z - 1."""
    if not float(z) > 1:
        raise ConfigurationError(f"z must be > 1, got {z}")
    if float(z) > series_max_z:
        return _gamma_row_closed_form(z, prec, series_config)
    phi = builtin("recip_gamma")
    delta = delta_exact(phi, 1, 1, z, prec, series_config)
    base = evaluate(phi, z, prec, series_config)
    nu = central_index(phi, z, prec)
    with mp.workprec(prec + series_config.guard_bits):
        point = to_mp(z)
        ratio = delta.value / base.value
        expected = 1 / point - 1
        bound = (delta.error_bound + abs(ratio) * base.error_bound) / (
            abs(base.value) - base.error_bound
        )
        bound += abs(expected) * mp.ldexp(1, -prec)
        diff = abs(ratio - expected)
        prediction = mpf(nu) / point if nu else None
        violation = None
        if prediction is not None:
            violation = bool(abs(ratio / prediction - 1) > mpf(nu) ** (mpf(-1) / 8 + eps))
    return GammaRow(
        z=z,
        method="series",
        delta_ratio=ratio,
        expected=expected,
        abs_diff=diff,
        error_bound=bound,
        match=bool(diff <= bound),
        nu=nu,
        wv_prediction=prediction,
        band_violation=violation,
    )


def _gamma_row_closed_form(z: Any, prec: int, series_config: SeriesConfig) -> GammaRow:
    with mp.workprec(prec + series_config.guard_bits):
        point = to_mp(z)
        here = mp.rgamma(point)
        ratio = (mp.rgamma(point + 1) - here) / here
        expected = 1 / point - 1
        bound = abs(expected) * mp.ldexp(1, 4 - prec)
        diff = abs(ratio - expected)
    return GammaRow(
        z=z,
        method="rgamma",
        delta_ratio=ratio,
        expected=expected,
        abs_diff=diff,
        error_bound=bound,
        match=bool(diff <= bound),
    )


def gamma_counterexample(
    z_list: Sequence[Any],
    prec: int = 256,
    eps: float = 0.05,
    series_max_z: float = GAMMA_SERIES_MAX_Z,
    workers: int = 1,
) -> list[GammaRow]:
    """Check Delta Phi/Phi = 1/z - 1 for Phi = 1/Gamma and show the nu/z band failing.

    Args:
        z_list: Real points > 1
        prec: Precision in bits
        eps: Exponent slack for the band
        series_max_z: Above this z the closed form replaces the series
        workers: Processes for rows

    Returns:
        One GammaRow per z, in input order
    """
    row = functools.partial(gamma_row, prec=prec, eps=eps, series_max_z=series_max_z)
    rows = map_ordered(row, z_list, workers)
    mismatched = [r.z for r in rows if not r.match]
    if mismatched:
        logger.warning("1/z - 1 identity not matched at z=%s", mismatched)
    return rows
