from __future__ import annotations

"""Maximal term, central index, maximum modulus and the pointwise growth bounds."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any

import numpy as np
from mpmath import mp, mpf

from core.analysis.series import (
    DEFAULT_SERIES_CONFIG,
    PolynomialRule,
    PowerSeries,
    SeriesConfig,
    evaluate,
    exact_rational,
    log_derivative_bounded,
    to_mp,
    zero_excluded,
)
from core.errors import (
    ConfigurationError,
    DivisionAtZeroError,
    InsufficientDataError,
    NonConvergenceError,
)
from core.types import RowStatus, SignPattern

logger = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5) - 1) / 2
SHIFT_FRACTIONS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))


@dataclass(frozen=True)
class ScanConfig:
    window_factor: int = 2  # keep scanning window_factor * argmax + window_slack terms
    window_slack: int = 32
    term_budget: int = 1_000_000
    circle_samples: int = 256
    refine_iterations: int = 60  # golden-section steps around the best circle sample


DEFAULT_SCAN_CONFIG = ScanConfig()


@dataclass(frozen=True)
class MaximalTerm:
    mu: mpf
    index: int


@dataclass(frozen=True)
class WVSample:
    r: Any
    mu: mpf
    nu: int
    M: mpf


@dataclass(frozen=True)
class WVProfile:
    """(r, mu, nu, M) along a radius grid, with the central-index order fit."""

    f_name: str
    samples: tuple[WVSample, ...]
    order_fit: float | None = None
    flags: tuple[str, ...] = ()

    @property
    def nu_nondecreasing(self) -> bool:
        nus = [s.nu for s in self.samples]
        return all(a <= b for a, b in zip(nus, nus[1:]))

    @property
    def mu_below_M(self) -> bool:
        # M carries a relative error of order 2^-prec from summation
        return all(s.mu <= s.M * (1 + mp.ldexp(1, -48)) for s in self.samples)

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out.update(nu_nondecreasing=self.nu_nondecreasing, mu_below_M=self.mu_below_M)
        return out


@dataclass
class PointwiseRow:
    """One radius of the log-derivative and shift-ratio bound check."""

    r: Any
    status: RowStatus
    lhs: mpf | None = None  # |f^(k)(r)/f(r)|
    rhs: mpf | None = None  # r^(k(sigma-1)+eps)
    shift_min: mpf | None = None  # min_t |f(r+t eta)/f(r)|
    shift_max: mpf | None = None
    shift_lower: mpf | None = None  # exp(-r^(sigma-1+eps))
    shift_upper: mpf | None = None
    passed: bool | None = None
    reason: str | None = None


@dataclass(frozen=True)
class WVConstantFit:
    """Empirical constants C_k of |f^(k)/f - (nu/r)^k| <= C (nu/r)^k nu^(-1/8+eps)."""

    per_k: dict[int, float]
    ratios: dict[int, list[float]] = field(default_factory=dict)
    cap: float = 10.0

    @property
    def max_constant(self) -> float:
        return max(self.per_k.values()) if self.per_k else 0.0

    @property
    def bounded(self) -> bool:
        return self.max_constant <= self.cap

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out.update(max_constant=self.max_constant, bounded=self.bounded)
        return out


def _check_radius(r: Any) -> None:
    if not float(r) > 0:
        raise ConfigurationError(f"radius must be > 0, got {r}")


def maximal_term(
    f: PowerSeries,
    r: Any,
    prec: int = 256,
    config: ScanConfig = DEFAULT_SCAN_CONFIG,
) -> MaximalTerm:
    """max_n |a_n| r^n and the greatest index attaining it.

    Scans until `window_factor * argmax + window_slack` terms have passed
    without a new maximum.

    Raises:
        NonConvergenceError: no decay within the term budget
    """
    _check_radius(r)
    rule = f.rule
    with mp.workprec(prec):
        if isinstance(rule, PolynomialRule):
            radius = to_mp(r)
            best, best_n = mpf(0), 0
            for n, c in enumerate(rule.coefficients):
                term = abs(to_mp(c)) * radius**n
                if term >= best:
                    best, best_n = term, n
            return MaximalTerm(mu=best, index=best_n)
        if rule.has_ratio and rule.exact(0):
            return _scan_ratio(f, r, config)
        return _scan_coefficients(f, r, prec, config)


def _scan_ratio(f: PowerSeries, r: Any, config: ScanConfig) -> MaximalTerm:
    rule = f.rule
    qr = exact_rational(r)
    radius = None if qr is not None else abs(to_mp(r))
    term = abs(to_mp(rule.exact(0)))
    best, best_n = term, 0
    n = 0
    while n - best_n <= config.window_factor * best_n + config.window_slack:
        if n >= config.term_budget:
            raise NonConvergenceError(f"maximal term of {f.name} not found", r=r, terms=n)
        q = abs(rule.ratio(n))
        if qr is not None:
            step = qr * q
            term = term * step.numerator / step.denominator
        else:
            term = term * radius * q.numerator / q.denominator
        n += 1
        if term >= best:
            best, best_n = term, n
    return MaximalTerm(mu=best, index=best_n)


def _scan_coefficients(f: PowerSeries, r: Any, prec: int, config: ScanConfig) -> MaximalTerm:
    radius = abs(to_mp(r))
    power = mpf(1)
    best, best_n = mpf(-1), 0
    n = 0
    while n - best_n <= config.window_factor * best_n + config.window_slack:
        if n >= config.term_budget:
            raise NonConvergenceError(f"maximal term of {f.name} not found", r=r, terms=n)
        term = abs(f.coeff(n, prec)) * power
        if term >= best:
            best, best_n = term, n
        power *= radius
        n += 1
    return MaximalTerm(mu=best, index=best_n)


def central_index(
    f: PowerSeries, r: Any, prec: int = 256, config: ScanConfig = DEFAULT_SCAN_CONFIG
) -> int:
    """Greatest index n with |a_n| r^n = mu(r)."""
    return maximal_term(f, r, prec, config).index


def max_modulus(
    f: PowerSeries,
    r: Any,
    circle_samples: int = 256,
    prec: int = 256,
    use_symmetry: bool = True,
    config: ScanConfig = DEFAULT_SCAN_CONFIG,
    series_config: SeriesConfig | None = None,
) -> mpf:
    """M(r) = max over |z| = r of |f(z)|.

    Nonnegative coefficients give f(r) directly; alternating ones give |f(-r)|
    unless `use_symmetry` is off. Otherwise `circle_samples` equally spaced
    angles are scanned and the best one refined by golden-section search.
    """
    _check_radius(r)
    if circle_samples < 1:
        raise ConfigurationError(f"circle_samples must be >= 1, got {circle_samples}")
    if f.sign_pattern is SignPattern.NONNEGATIVE:
        return abs(evaluate(f, r, prec, series_config).value)
    if f.sign_pattern is SignPattern.ALTERNATING and use_symmetry:
        q = exact_rational(r)
        point = -q if q is not None else -to_mp(r)
        return abs(evaluate(f, point, prec, series_config).value)

    with mp.workprec(prec):
        radius = abs(to_mp(r))

    def modulus(theta: mpf) -> mpf:
        with mp.workprec(prec):
            z = radius * mp.expjpi(2 * theta)
        return abs(evaluate(f, z, prec, series_config).value)

    with mp.workprec(prec):
        thetas = [mpf(j) / circle_samples for j in range(circle_samples)]
    values = [modulus(t) for t in thetas]
    j = max(range(circle_samples), key=lambda i: values[i])
    best = values[j]
    if circle_samples < 3:
        return best
    with mp.workprec(prec):
        step = mpf(1) / circle_samples
        lo, hi = thetas[j] - step, thetas[j] + step
    a = hi - GOLDEN * (hi - lo)
    b = lo + GOLDEN * (hi - lo)
    fa, fb = modulus(a), modulus(b)
    for _ in range(config.refine_iterations):
        if fa >= fb:
            hi, b, fb = b, a, fa
            a = hi - GOLDEN * (hi - lo)
            fa = modulus(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + GOLDEN * (hi - lo)
            fb = modulus(b)
    return max(best, fa, fb)


def check_grid(r_grid: Sequence[Any]) -> None:
    if len(r_grid) < 5:
        raise ConfigurationError(f"grid needs >= 5 points, got {len(r_grid)}")
    span = math.log10(float(max(r_grid)) / float(min(r_grid)))
    if span < 3 - 1e-9:
        raise ConfigurationError(f"grid must span >= 3 decades, spans {span:.2f}")


def order_from_central_index(
    f: PowerSeries,
    r_grid: Sequence[Any],
    prec: int = 256,
    config: ScanConfig = DEFAULT_SCAN_CONFIG,
) -> float:
    """Least-squares slope of log nu(r) against log r."""
    check_grid(r_grid)
    if f.is_polynomial:
        return 0.0
    nus = [central_index(f, r, prec, config) for r in r_grid]
    return fit_central_index_order(r_grid, nus)


def fit_central_index_order(r_grid: Sequence[Any], nus: Sequence[int]) -> float:
    points = [(float(r), nu) for r, nu in zip(r_grid, nus) if nu > 0]
    if not points:
        return 0.0
    if len(points) < 2:
        raise InsufficientDataError("need two radii with nu > 0 for an order fit")
    x = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def wv_sample(
    f: PowerSeries,
    r: Any,
    circle_samples: int = 256,
    prec: int = 256,
    config: ScanConfig = DEFAULT_SCAN_CONFIG,
) -> WVSample:
    term = maximal_term(f, r, prec, config)
    M = max_modulus(f, r, circle_samples, prec, config=config)
    return WVSample(r=r, mu=term.mu, nu=term.index, M=M)


def profile_from_samples(f_name: str, samples: Sequence[WVSample]) -> WVProfile:
    """Assemble a profile, fitting the order when the grid allows it."""
    samples = tuple(samples)
    flags = []
    nus = [s.nu for s in samples]
    if any(a > b for a, b in zip(nus, nus[1:])):
        flags.append("nu_decreasing")
    profile = WVProfile(f_name=f_name, samples=samples)
    if not profile.mu_below_M:
        flags.append("mu_exceeds_M")
    order_fit = None
    radii = [s.r for s in samples]
    try:
        check_grid(radii)
        order_fit = fit_central_index_order(radii, nus)
    except (ConfigurationError, InsufficientDataError) as exc:
        logger.info("No order fit for %s: %s", f_name, exc)
    if flags:
        logger.warning("Profile of %s violates %s", f_name, ", ".join(flags))
    return WVProfile(f_name=f_name, samples=samples, order_fit=order_fit, flags=tuple(flags))


def wv_profile(
    f: PowerSeries,
    r_grid: Sequence[Any],
    circle_samples: int = 256,
    prec: int = 256,
    config: ScanConfig = DEFAULT_SCAN_CONFIG,
) -> WVProfile:
    """Sample mu, nu and M along r_grid (in grid order)."""
    samples = [wv_sample(f, r, circle_samples, prec, config) for r in r_grid]
    return profile_from_samples(f.name, samples)


def check_pointwise_row(
    f: PowerSeries,
    k: int,
    eps: float,
    r: Any,
    eta: Any = 1,
    prec: int = 256,
    series_config: SeriesConfig | None = None,
) -> PointwiseRow:
    """Check |f^(k)(r)/f(r)| <= r^(k(sigma-1)+eps) and the shift-ratio band at one radius."""
    if f.order_hint is None or f.order_hint >= 1:
        raise ConfigurationError(f"{f.name} needs an order hint below 1")
    if zero_excluded(f, r):
        return PointwiseRow(r=r, status=RowStatus.EXCLUDED, reason="near a known zero")
    series_config = series_config or DEFAULT_SERIES_CONFIG
    sigma = float(f.order_hint)
    try:
        ratio, _ = log_derivative_bounded(f, k, r, prec, series_config)
        base = evaluate(f, r, prec, series_config).value
        with mp.workprec(prec + series_config.guard_bits):
            radius = to_mp(r)
            q = exact_rational(r)
            qeta = exact_rational(eta)
            shifted = []
            for t in SHIFT_FRACTIONS:
                if q is not None and qeta is not None:
                    point = q + t * qeta
                else:
                    point = radius + to_mp(t) * to_mp(eta)
                value = evaluate(f, point, prec, series_config).value
                shifted.append(abs(value / base))
            lhs = abs(ratio)
            rhs = radius ** (k * (sigma - 1) + eps)
            growth = radius ** (sigma - 1 + eps)
            lower, upper = mp.exp(-growth), mp.exp(growth)
    except DivisionAtZeroError as exc:
        return PointwiseRow(r=r, status=RowStatus.EXCLUDED, reason=str(exc))
    shift_min, shift_max = min(shifted), max(shifted)
    passed = lhs <= rhs and lower <= shift_min and shift_max <= upper
    return PointwiseRow(
        r=r,
        status=RowStatus.USED,
        lhs=lhs,
        rhs=rhs,
        shift_min=shift_min,
        shift_max=shift_max,
        shift_lower=lower,
        shift_upper=upper,
        passed=passed,
    )


def check_pointwise_bounds(
    f: PowerSeries,
    k: int,
    eps: float,
    r_grid: Sequence[Any],
    eta: Any = 1,
    prec: int = 256,
) -> list[PointwiseRow]:
    """Pointwise log-derivative and shift-ratio bounds along r_grid.

    Args:
        f: Series with order_hint < 1
        k: Derivative order (>= 1)
        eps: Exponent slack
        r_grid: Radii on the positive axis
        eta: Shift for the ratio band (t in {0, 1/4, 1/2, 3/4, 1})
        prec: Precision in bits

    Returns:
        One row per radius; rows near known zeros are EXCLUDED
    """
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    rows = [check_pointwise_row(f, k, eps, r, eta, prec) for r in r_grid]
    failed = [row.r for row in rows if row.passed is False]
    if failed:
        logger.info("Pointwise bound failed for %s at %d radii", f.name, len(failed))
    return rows


def wv_ratio(f: PowerSeries, k: int, r: Any, eps: float, prec: int = 256) -> float:
    """|f^(k)/f - (nu/r)^k| / ((nu/r)^k nu^(-1/8+eps)) at z = r."""
    nu = central_index(f, r, prec)
    if nu == 0:
        raise InsufficientDataError(f"nu({r}) = 0 for {f.name}", r=r)
    ratio, _ = log_derivative_bounded(f, k, r, prec)
    with mp.workprec(prec):
        predicted = (mpf(nu) / to_mp(r)) ** k
        scale = predicted * mpf(nu) ** (mpf(-1) / 8 + eps)
        return float(abs(ratio - predicted) / scale)


def fit_wv_constant(
    f: PowerSeries,
    ks: Sequence[int],
    r_grid: Sequence[Any],
    eps: float,
    prec: int = 256,
    cap: float = 10.0,
) -> WVConstantFit:
    """Largest observed constant per k in the classical Wiman-Valiron estimate."""
    ratios: dict[int, list[float]] = {}
    for k in ks:
        ratios[k] = [wv_ratio(f, k, r, eps, prec) for r in r_grid if not zero_excluded(f, r)]
    per_k = {k: max(values) for k, values in ratios.items() if values}
    return WVConstantFit(per_k=per_k, ratios=ratios, cap=cap)
