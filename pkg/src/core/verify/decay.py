from __future__ import annotations

"""Error-decay harness for the truncated Stirling expansion of Delta^n f / f."""

import functools
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any

from mpmath import mp, mpf

from core.analysis.series import (
    DEFAULT_SERIES_CONFIG,
    PolynomialRule,
    PowerSeries,
    SeriesConfig,
    delta_exact,
    estimated_order,
    evaluate,
    exact_rational,
    poly_eval_exact,
    to_mp,
    zero_excluded,
)
from core.analysis.stirling import expansion_bounded, expansion_exact
from core.errors import (
    ConfigurationError,
    DivisionAtZeroError,
    InsufficientDataError,
    NonConvergenceError,
    PrecisionExhaustedError,
)
from core.parallel import map_ordered
from core.types import RowStatus, Verdict
from core.verify.fitting import fit_decay_exponent

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayConfig:
    noise_factor: int = 8  # rows need abs_err above noise_factor * combined bounds
    min_rows: int = 4
    unreliable_fraction: float = 0.5  # more dropped rows than this marks the report UNRELIABLE


DEFAULT_DECAY_CONFIG = DecayConfig()


@dataclass
class DecayRow:
    r: Any
    status: RowStatus
    lhs: Any = None  # Delta^n f(r) / f(r)
    rhs: Any = None  # truncated expansion
    abs_err: Any = None
    noise: Any = None
    within_conservative_bound: bool | None = None
    reason: str | None = None


@dataclass
class DecayReport:
    f_name: str
    n: int
    N: int
    eta: Any
    eps: float
    sigma: float
    rows: list[DecayRow] = field(default_factory=list)
    fitted_slope: float | None = None
    r2: float | None = None
    verdict: Verdict = Verdict.INCONCLUSIVE
    reason: str | None = None

    @property
    def claimed_exponent_full(self) -> float:
        """(n+N+1)(sigma-1), the stronger stated rate."""
        return (self.n + self.N + 1) * (self.sigma - 1)

    @property
    def claimed_exponent_conservative(self) -> float:
        """(N+1)(sigma-1), the rate of the first omitted term."""
        return (self.N + 1) * (self.sigma - 1)

    @property
    def dropped(self) -> int:
        return sum(1 for row in self.rows if row.status is RowStatus.DROPPED)

    @property
    def excluded(self) -> int:
        return sum(1 for row in self.rows if row.status is RowStatus.EXCLUDED)

    @property
    def used(self) -> list[DecayRow]:
        return [row for row in self.rows if row.status is RowStatus.USED]

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out.update(
            claimed_exponent_full=self.claimed_exponent_full,
            claimed_exponent_conservative=self.claimed_exponent_conservative,
            dropped=self.dropped,
            excluded=self.excluded,
        )
        return out


def _conservative_bound(eta: Any, N: int, sigma: float, eps: float, r: Any) -> mpf:
    return abs(to_mp(eta)) ** (N + 1) * to_mp(r) ** ((N + 1) * (sigma - 1) + eps)


def _exact_row(f: PowerSeries, n: int, N: int, eta: Fraction, r: Fraction) -> DecayRow:
    base = poly_eval_exact(f.rule.coefficients, r)
    if base == 0:
        raise DivisionAtZeroError(f"{f.name} vanishes at r={r}", r=r)
    lhs = delta_exact(f, n, eta, r).exact / base
    rhs = expansion_exact(f, n, N, eta, r)
    abs_err = abs(lhs - rhs)
    status = RowStatus.USED if abs_err > 0 else RowStatus.BELOW_NOISE
    return DecayRow(r=r, status=status, lhs=lhs, rhs=rhs, abs_err=abs_err, noise=Fraction(0))


def decay_row(
    f: PowerSeries,
    n: int,
    N: int,
    eta: Any,
    eps: float,
    sigma: float,
    prec: int,
    r: Any,
    series_config: SeriesConfig = DEFAULT_SERIES_CONFIG,
    config: DecayConfig = DEFAULT_DECAY_CONFIG,
) -> DecayRow:
    """Compute one grid row; numeric failures become EXCLUDED or DROPPED rows."""
    if zero_excluded(f, r):
        return DecayRow(r=r, status=RowStatus.EXCLUDED, reason="near a known zero")
    try:
        qr, qeta = exact_rational(r), exact_rational(eta)
        if isinstance(f.rule, PolynomialRule) and qr is not None and qeta is not None:
            row = _exact_row(f, n, N, qeta, qr)
        else:
            row = _numeric_row(f, n, N, eta, prec, r, series_config, config)
    except DivisionAtZeroError as exc:
        logger.info("Excluding r=%s: %s", r, exc)
        return DecayRow(r=r, status=RowStatus.EXCLUDED, reason=str(exc))
    except (PrecisionExhaustedError, NonConvergenceError) as exc:
        logger.info("Dropping r=%s: %s", r, exc)
        return DecayRow(r=r, status=RowStatus.DROPPED, reason=str(exc))
    with mp.workprec(prec):
        bound = _conservative_bound(eta, N, sigma, eps, r)
        row.within_conservative_bound = bool(to_mp(row.abs_err) <= bound)
    return row


def _numeric_row(
    f: PowerSeries,
    n: int,
    N: int,
    eta: Any,
    prec: int,
    r: Any,
    series_config: SeriesConfig,
    config: DecayConfig,
) -> DecayRow:
    delta = delta_exact(f, n, eta, r, prec, series_config)
    base = evaluate(f, r, prec, series_config)
    if abs(base.value) <= base.error_bound:
        raise DivisionAtZeroError(f"|{f.name}(r)| is below its error bound", r=r)
    rhs, rhs_err = expansion_bounded(f, n, N, eta, r, prec, series_config)
    with mp.workprec(prec + series_config.guard_bits):
        lhs = delta.value / base.value
        lhs_err = (delta.error_bound + abs(lhs) * base.error_bound) / (
            abs(base.value) - base.error_bound
        )
        abs_err = abs(lhs - rhs)
        noise = config.noise_factor * (lhs_err + rhs_err)
    status = RowStatus.USED if abs_err > noise else RowStatus.BELOW_NOISE
    return DecayRow(r=r, status=status, lhs=lhs, rhs=rhs, abs_err=abs_err, noise=noise)


def judge(report: DecayReport, config: DecayConfig = DEFAULT_DECAY_CONFIG) -> DecayReport:
    """Fit the usable rows and set verdict and reason."""
    rows = report.rows
    if rows and report.dropped / len(rows) > config.unreliable_fraction:
        report.verdict = Verdict.UNRELIABLE
        report.reason = f"{report.dropped} of {len(rows)} rows dropped (precision exhausted)"
        return report
    measured = [row for row in rows if row.status in (RowStatus.USED, RowStatus.BELOW_NOISE)]
    if measured and all(row.abs_err == 0 for row in measured):
        report.verdict = Verdict.PASS if report.sigma < 1 else Verdict.FAIL
        report.reason = "expansion is exact at every radius"
        return report
    try:
        slope, r2 = fit_decay_exponent([(row.r, row.abs_err) for row in report.used])
    except InsufficientDataError as exc:
        report.verdict = Verdict.INCONCLUSIVE
        report.reason = str(exc)
        return report
    report.fitted_slope, report.r2 = slope, r2
    target = report.claimed_exponent_conservative + report.eps
    if report.sigma >= 1:
        report.verdict = Verdict.FAIL
        report.reason = f"order {report.sigma:g} >= 1; slope {slope:.4f} measured only"
    elif slope <= target:
        report.verdict = Verdict.PASS
        report.reason = f"slope {slope:.4f} <= {target:.4f}"
    else:
        report.verdict = Verdict.FAIL
        report.reason = f"slope {slope:.4f} > {target:.4f}"
    logger.info("%s n=%d N=%d: %s (%s)", report.f_name, report.n, report.N,
                report.verdict.value, report.reason)
    return report


def verify_expansion(
    f: PowerSeries,
    n: int,
    N: int,
    eta: Any,
    r_grid: Sequence[Any],
    eps: float = 0.05,
    prec: int = 256,
    workers: int = 1,
    series_config: SeriesConfig = DEFAULT_SERIES_CONFIG,
    config: DecayConfig = DEFAULT_DECAY_CONFIG,
) -> DecayReport:
    """Measure how fast Delta^n f/f minus its truncated expansion decays along r_grid.

    Args:
        f: Series (order below 1 for a PASS)
        n: Difference order (>= 1)
        N: Truncation order (>= n)
        eta: Shift
        r_grid: Radii on the positive axis
        eps: Exponent slack
        prec: Target precision in bits
        workers: Processes for grid rows

    Returns:
        DecayReport with rows in grid order, the fitted slope and a verdict
    """
    if not N >= n >= 1:
        raise ConfigurationError(f"need N >= n >= 1, got n={n}, N={N}")
    sigma = estimated_order(f)
    row = functools.partial(
        decay_row, f, n, N, eta, eps, sigma, prec,
        series_config=series_config, config=config,
    )
    report = DecayReport(f_name=f.name, n=n, N=N, eta=eta, eps=eps, sigma=sigma)
    report.rows = map_ordered(row, r_grid, workers)
    return judge(report, config)


def verify_first_difference(
    f: PowerSeries,
    N: int,
    eta: Any,
    r_grid: Sequence[Any],
    eps: float = 0.05,
    prec: int = 256,
    workers: int = 1,
    series_config: SeriesConfig = DEFAULT_SERIES_CONFIG,
    config: DecayConfig = DEFAULT_DECAY_CONFIG,
) -> DecayReport:
    """verify_expansion with n = 1, where both claimed exponents coincide."""
    return verify_expansion(f, 1, N, eta, r_grid, eps, prec, workers, series_config, config)
