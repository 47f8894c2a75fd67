from __future__ import annotations

"""Growth fits log M(r) = L r^chi and the end-to-end regular-growth check.

The check chains polygon -> binomial recurrence -> minimal Newton-series
solution -> growth fit, then substitutes the solution back into the equation
at a handful of spot points.
"""

import functools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any

import numpy as np
from mpmath import mp, mpf

from core.analysis.grid import geometric_grid
from core.analysis.series import PowerSeries, to_mp
from core.analysis.wiman_valiron import GOLDEN, check_grid, max_modulus
from core.equations.equation import DifferenceEquation, format_rational
from core.equations.newton_series import newton_majorant, newton_value
from core.equations.polygon import NewtonPolygon, newton_polygon
from core.equations.recurrence import Recurrence, binomial_recurrence, peval
from core.equations.solver import (
    DEFAULT_MILLER_CONFIG,
    MillerConfig,
    NewtonSeriesSolution,
    solve_minimal,
)
from core.errors import DataError, MinimalSolutionNotFoundError, NeedsMoreTermsError
from core.parallel import map_ordered
from core.types import Check, GrowthFitMethod, GrowthSampling, Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GrowthConfig:
    chi_tolerance: float = 0.03  # |chi_fit - predicted chi|
    L_spread: float = 0.05  # (max - min) / mean of per-decade L
    residual_tolerance: float = 1e-15  # equation residual / |f| at spot points
    chi_bracket: tuple[float, float] = (0.05, 1.5)
    coarse_steps: int = 58
    golden_iterations: int = 60
    spot_points: tuple[Fraction, ...] = tuple(
        Fraction(2 * k + 1, 2) for k in (10, 20, 30, 40, 50)
    )
    default_grid: tuple[float, float, int] = (1e3, 1e7, 9)


DEFAULT_GROWTH_CONFIG = GrowthConfig()


@dataclass
class GrowthFit:
    chi_fit: float
    L_fit: float
    per_decade_L: list[float]
    decades: list[int]
    residuals: list[float]  # fit residuals of log M
    method: GrowthFitMethod
    sampling: GrowthSampling | None  # None for power series (true M(r))
    radii: list[float]
    log_M: list[float]
    offset: float = 0.0  # a in log M = L r^chi + a + b log r
    log_coefficient: float = 0.0  # b

    @property
    def L_spread(self) -> float:
        if not self.per_decade_L:
            return math.inf
        mean = sum(self.per_decade_L) / len(self.per_decade_L)
        if mean == 0:
            return math.inf
        return (max(self.per_decade_L) - min(self.per_decade_L)) / abs(mean)

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["L_spread"] = self.L_spread
        return out


def _log_sample(source: Any, sampling: GrowthSampling, prec: int, r: Any) -> float:
    if isinstance(source, PowerSeries):
        value = max_modulus(source, r, prec=prec)
    else:
        with mp.workprec(prec):
            x = to_mp(r) + mpf(1) / 2
        if sampling is GrowthSampling.MAJORANT:
            value = newton_majorant(source, x, prec).value
        elif sampling is GrowthSampling.NEGATIVE_AXIS:
            value = abs(newton_value(source, -x, prec).value)
        else:
            value = abs(newton_value(source, x, prec).value)
    if value <= 0:
        raise DataError(f"M({r}) evaluated to {value}", r=r)
    with mp.workprec(prec):
        return float(mp.log(value))


def _decade_means(
    radii: np.ndarray, values: np.ndarray
) -> tuple[list[int], list[float]]:
    decades = np.floor(np.log10(radii) + 1e-9).astype(int)
    keys = sorted(set(decades.tolist()))
    return keys, [float(values[decades == d].mean()) for d in keys]


def _regular_sse(chi: float, x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    A = np.column_stack([x**chi, np.ones_like(x), np.log(x)])
    scale = np.linalg.norm(A, axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, y, rcond=None)
    coef = coef / scale
    resid = y - A @ coef
    return float(resid @ resid), coef


def _fit_regular(
    x: np.ndarray, y: np.ndarray, config: GrowthConfig
) -> tuple[float, np.ndarray]:
    lo, hi = config.chi_bracket
    grid = np.linspace(lo, hi, config.coarse_steps + 1)
    sse = [_regular_sse(c, x, y)[0] for c in grid]
    j = int(np.argmin(sse))
    step = grid[1] - grid[0]
    a_lo, a_hi = max(lo, grid[j] - step), min(hi, grid[j] + step)
    a = a_hi - GOLDEN * (a_hi - a_lo)
    b = a_lo + GOLDEN * (a_hi - a_lo)
    fa, fb = _regular_sse(a, x, y)[0], _regular_sse(b, x, y)[0]
    for _ in range(config.golden_iterations):
        if fa <= fb:
            a_hi, b, fb = b, a, fa
            a = a_hi - GOLDEN * (a_hi - a_lo)
            fa = _regular_sse(a, x, y)[0]
        else:
            a_lo, a, fa = a, b, fb
            b = a_lo + GOLDEN * (a_hi - a_lo)
            fb = _regular_sse(b, x, y)[0]
    chi = a if fa <= fb else b
    return chi, _regular_sse(chi, x, y)[1]


def growth_fit(
    source: PowerSeries | NewtonSeriesSolution,
    r_grid: Sequence[Any],
    method: GrowthFitMethod = GrowthFitMethod.REGULAR,
    sampling: GrowthSampling = GrowthSampling.MAJORANT,
    prec: int = 256,
    workers: int = 1,
    config: GrowthConfig = DEFAULT_GROWTH_CONFIG,
) -> GrowthFit:
    """Fit log M(r) = L r^chi on a grid spanning >= 3 decades.

    Power series are sampled through max_modulus; Newton-series solutions at
    r + 1/2 according to `sampling`.

    Args:
        source: PowerSeries or NewtonSeriesSolution
        r_grid: Radii, >= 5 points over >= 3 decades
        method: REGULAR (log M = L r^chi + a + b log r) or LOGLOG
        sampling: How a Newton series stands in for M(r)
        prec: Precision in bits
        workers: Processes for the samples

    Returns:
        GrowthFit

    Raises:
        DataError: log M fails to increase along the grid
        NeedsMoreTermsError: a Newton series is too short for the largest radius
    """
    check_grid(r_grid)
    radii = sorted(r_grid, key=float)
    sample = functools.partial(_log_sample, source, sampling, prec)
    y = np.array(map_ordered(sample, radii, workers))
    x = np.array([float(r) for r in radii])
    if np.any(np.diff(y) <= 0):
        bad = int(np.argmax(np.diff(y) <= 0))
        raise DataError(
            f"log M is not increasing between r={x[bad]:.6g} and r={x[bad + 1]:.6g}",
            r=x[bad + 1],
        )

    offset = log_coefficient = 0.0
    if method is GrowthFitMethod.LOGLOG:
        if np.any(y <= 0):
            raise DataError("log log M needs log M > 0 on the whole grid")
        chi, _ = np.polyfit(np.log(x), np.log(y), 1)
        chi = float(chi)
        scaled = y / x**chi
        L = float(scaled.mean())
        residuals = (y - L * x**chi).tolist()
    else:
        chi, (L, offset, log_coefficient) = _fit_regular(x, y, config)
        chi, L = float(chi), float(L)
        scaled = (y - offset - log_coefficient * np.log(x)) / x**chi
        residuals = (y - L * x**chi - offset - log_coefficient * np.log(x)).tolist()
    decades, per_decade = _decade_means(x, scaled)
    fit = GrowthFit(
        chi_fit=chi,
        L_fit=L,
        per_decade_L=per_decade,
        decades=decades,
        residuals=residuals,
        method=method,
        sampling=None if isinstance(source, PowerSeries) else sampling,
        radii=x.tolist(),
        log_M=y.tolist(),
        offset=float(offset),
        log_coefficient=float(log_coefficient),
    )
    logger.info("growth fit (%s): chi=%.4f L=%.4f spread=%.3g",
                method.value, fit.chi_fit, fit.L_fit, fit.L_spread)
    return fit


def estimate_terms(chi: float, r_max: float) -> int:
    """Newton coefficients needed for the majorant to converge up to r_max."""
    return math.ceil(1.1 * (2 * r_max) ** chi) + 256


@dataclass
class SpotResidual:
    z: Fraction
    residual: Any  # |sum_k a_k(z) Delta^k f(z)| / |f(z)|
    passed: bool


def equation_residual(
    eq: DifferenceEquation, sol: NewtonSeriesSolution, z: Fraction, prec: int = 256
) -> Any:
    """|sum_k a_k(z) Delta^k f(z)| / |f(z)| with f from its Newton series."""
    values = [newton_value(sol, z + j, prec).value for j in range(eq.order + 1)]
    with mp.workprec(prec + 32):
        total = mpf(0)
        for k, a in enumerate(eq.coeffs):
            if not a:
                continue
            delta = mp.fsum(
                (-1) ** (k - j) * math.comb(k, j) * values[j] for j in range(k + 1)
            )
            total += to_mp(peval(a, z)) * delta
        return abs(total) / abs(values[0])


@dataclass
class RegularGrowthReport:
    equation: str
    polygon: NewtonPolygon
    recurrence: Recurrence | None = None
    terms: int | None = None
    normalization: str | None = None
    stability: float | None = None
    fit: GrowthFit | None = None
    residuals: list[SpotResidual] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    verdict: Verdict = Verdict.INCONCLUSIVE
    reason: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "equation": self.equation,
            "polygon": self.polygon.to_dict(),
            "recurrence": self.recurrence.to_dict() if self.recurrence else None,
            "terms": self.terms,
            "normalization": self.normalization,
            "stability": self.stability,
            "fit": self.fit,
            "residuals": self.residuals,
            "verdict": self.verdict,
            "reason": self.reason,
        }


def _checks(
    polygon: NewtonPolygon,
    fit: GrowthFit,
    residuals: Sequence[SpotResidual],
    config: GrowthConfig,
) -> list[Check]:
    checks = []
    closest = min(polygon.predicted_orders, key=lambda chi: abs(fit.chi_fit - float(chi)))
    if abs(fit.chi_fit - float(closest)) <= config.chi_tolerance:
        checks.append(Check.ok())
    else:
        checks.append(Check.failed(
            f"chi_fit={fit.chi_fit:.4f} is not within {config.chi_tolerance} of "
            f"{format_rational(closest)}"
        ))
    if fit.L_spread <= config.L_spread:
        checks.append(Check.ok())
    else:
        checks.append(Check.failed(f"per-decade L spread {fit.L_spread:.3g} > {config.L_spread}"))
    bad = [format_rational(s.z) for s in residuals if not s.passed]
    if bad:
        checks.append(Check.failed(f"equation residual above tolerance at z={', '.join(bad)}"))
    else:
        checks.append(Check.ok())
    return checks


def verify_regular_growth(
    eq: DifferenceEquation,
    terms: int | None = None,
    r_grid: Sequence[Any] | None = None,
    prec: int = 256,
    sampling: GrowthSampling = GrowthSampling.MAJORANT,
    method: GrowthFitMethod = GrowthFitMethod.REGULAR,
    workers: int = 1,
    config: GrowthConfig = DEFAULT_GROWTH_CONFIG,
    miller: MillerConfig = DEFAULT_MILLER_CONFIG,
) -> RegularGrowthReport:
    """Check that the minimal Newton-series solution has completely regular growth.

    PASS iff chi_fit is within chi_tolerance of a predicted order, the
    per-decade L spread is within L_spread, and every spot residual is below
    residual_tolerance. A solution the solver cannot isolate is INCONCLUSIVE.
    """
    polygon = newton_polygon(eq)
    report = RegularGrowthReport(equation=eq.describe(), polygon=polygon)
    if not polygon.predicted_orders:
        report.verdict = Verdict.NO_PREDICTION
        report.reason = "no order-<1 solution predicted"
        return report

    if r_grid is None:
        rmin, rmax, points = config.default_grid
        r_grid = geometric_grid(rmin, rmax, points, prec)
    r_max = max(float(r) for r in r_grid)
    if terms is None:
        terms = estimate_terms(float(max(polygon.predicted_orders)), r_max)
    report.terms = terms
    report.recurrence = binomial_recurrence(eq)
    logger.info("%s: recurrence %s, %d terms", eq.describe(), report.recurrence.describe(), terms)

    try:
        sol = solve_minimal(report.recurrence, terms, prec=prec, config=miller)
        report.normalization = sol.normalization
        report.stability = sol.stability
        report.fit = growth_fit(sol, r_grid, method, sampling, prec, workers, config)
        for z in config.spot_points:
            residual = equation_residual(eq, sol, z, prec)
            passed = bool(residual <= config.residual_tolerance)
            report.residuals.append(SpotResidual(z=z, residual=residual, passed=passed))
    except (MinimalSolutionNotFoundError, NeedsMoreTermsError) as exc:
        report.verdict = Verdict.INCONCLUSIVE
        report.reason = str(exc)
        logger.info("%s: %s", eq.describe(), report.reason)
        return report

    report.checks = _checks(polygon, report.fit, report.residuals, config)
    failed = [c.reason for c in report.checks if not c.passed]
    report.verdict = Verdict.FAIL if failed else Verdict.PASS
    report.reason = "; ".join(failed) if failed else (
        f"chi_fit={report.fit.chi_fit:.4f}, L spread {report.fit.L_spread:.3g}"
    )
    logger.info("%s: %s (%s)", eq.describe(), report.verdict.value, report.reason)
    return report
