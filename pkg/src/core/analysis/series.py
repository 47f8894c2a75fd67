from __future__ import annotations

"""Entire functions given by Taylor series about 0.

Coefficient rules, the shared summation kernel, derivatives, exact forward
differences and log-derivatives, all at caller-chosen binary precision.
"""

import functools
import json
import logging
import math
import threading
from collections import OrderedDict
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

import numpy as np
from mpmath import mp, mpc, mpf

from core.errors import (
    ConfigurationError,
    DivisionAtZeroError,
    NonConvergenceError,
    PrecisionExhaustedError,
)
from core.types import SignPattern, TrendFlag

logger = logging.getLogger(__name__)

Number = Union[mpf, mpc]

MIN_PREC = 64
MEMO_PRECISIONS = 4  # coefficient memos kept per rule (LRU by precision)
ZERO_EXCLUSION_WIDTH = 0.15  # half-width around a known zero, as a fraction of the local gap


@dataclass(frozen=True)
class SeriesConfig:
    """Summation and precision-control thresholds."""

    guard_bits: int = 32
    tail_factor: int = 2  # tail <= tail_factor * first omitted term
    consecutive_terms: int = 4  # small-and-halving terms required before stopping
    term_budget: int = 1_000_000
    max_escalations: int = 2
    escalation_slack: int = 8
    cancellation_guard: int = 32  # extra bits for binomial differences
    max_prec: int = 16384


DEFAULT_SERIES_CONFIG = SeriesConfig()


# --- numeric helpers -------------------------------------------------------


def check_prec(prec: int) -> None:
    if prec < MIN_PREC:
        raise ConfigurationError(f"precision must be >= {MIN_PREC} bits, got {prec}", prec=prec)


def to_mp(x: Any) -> Number:
    """Convert a Python/mpmath number to an mpmath value at the current precision."""
    if isinstance(x, (mpf, mpc)):
        return x
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, complex):
        return mpc(x.real, x.imag)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return mpc(to_mp(x[0]), to_mp(x[1]))
    return mpf(x)


def exact_rational(x: Any) -> Fraction | None:
    """Exact rational value of a real input, or None for complex / non-finite values."""
    if isinstance(x, bool):
        return None
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x) if math.isfinite(x) else None
    if isinstance(x, complex):
        return Fraction(x.real) if x.imag == 0 and math.isfinite(x.real) else None
    if isinstance(x, mpc):
        return exact_rational(x.real) if x.imag == 0 else None
    if isinstance(x, mpf):
        if not mp.isfinite(x):
            return None
        man, exp = x.man_exp
        return Fraction(man) * Fraction(2) ** exp
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return None
    return None


def falling(n: int, k: int) -> int:
    """n (n-1) ... (n-k+1)."""
    out = 1
    for i in range(k):
        out *= n - i
    return out


def loss_bits(value: Number, scale: mpf) -> float | None:
    """Bits lost to cancellation when terms of size `scale` sum to `value`."""
    if scale == 0 or value == 0:
        return None
    return max(0.0, float(mp.log(scale / abs(value), 2)))


# --- coefficient rules -----------------------------------------------------


class CoefficientRule:
    """Produces Taylor coefficients a_n.

    Subclasses override `exact` (a Fraction when a_n is rational), `ratio`
    (exact a_{n+1}/a_n) or `_extend` (numeric block generation). Coefficients
    are memoized per precision; the memo is lock-guarded and never pickled.
    """

    degree: int | None = None  # set for polynomials
    has_ratio: bool = False

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._memo: OrderedDict[int, list[mpf]] = OrderedDict()

    def __getstate__(self) -> dict:
        state = self.__dict__.copy()
        state.pop("_lock", None)
        state["_memo"] = OrderedDict()
        return state

    def __setstate__(self, state: dict) -> None:
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def exact(self, n: int) -> Fraction | None:
        return None

    def ratio(self, n: int) -> Fraction | None:
        return None

    def coefficient(self, n: int, prec: int) -> mpf:
        with self._lock:
            memo = self._memo.get(prec)
            if memo is None:
                memo = []
                self._memo[prec] = memo
                if len(self._memo) > MEMO_PRECISIONS:
                    self._memo.popitem(last=False)
            else:
                self._memo.move_to_end(prec)
            if n >= len(memo):
                with mp.workprec(prec):
                    memo.extend(self._extend(len(memo), n + 1, prec))
            return memo[n]

    def _extend(self, start: int, stop: int, prec: int) -> list[mpf]:
        out = []
        for n in range(start, stop):
            q = self.exact(n)
            if q is None:
                raise NotImplementedError(f"{type(self).__name__} has no coefficient {n}")
            out.append(to_mp(q))
        return out


class RatioRule(CoefficientRule):
    """Coefficients with a rational first term and rational consecutive ratios."""

    has_ratio = True
    first = Fraction(1)

    def _extend(self, start: int, stop: int, prec: int) -> list[mpf]:
        if start == 0:
            out = [to_mp(self.first)]
            start = 1
        else:
            out = []
        prev = self._memo[prec][start - 1] if start > 0 and not out else out[-1]
        for n in range(start, stop):
            q = self.ratio(n - 1)
            prev = prev * q.numerator / q.denominator
            out.append(prev)
        return out


class BesselSqrtRule(RatioRule):
    """a_n = 1/(n!)^2, i.e. I_0(2 sqrt z)."""

    def exact(self, n: int) -> Fraction:
        return Fraction(1, math.factorial(n) ** 2)

    def ratio(self, n: int) -> Fraction:
        return Fraction(1, (n + 1) ** 2)


class CosSqrtRule(RatioRule):
    """a_n = (-1)^n/(2n)!, i.e. cos(sqrt z)."""

    def exact(self, n: int) -> Fraction:
        return Fraction((-1) ** n, math.factorial(2 * n))

    def ratio(self, n: int) -> Fraction:
        return Fraction(-1, (2 * n + 1) * (2 * n + 2))


class ExpRule(RatioRule):
    def exact(self, n: int) -> Fraction:
        return Fraction(1, math.factorial(n))

    def ratio(self, n: int) -> Fraction:
        return Fraction(1, n + 1)


class PolynomialRule(CoefficientRule):
    """Finitely many exact rational coefficients, ascending degree."""

    def __init__(self, coefficients: Sequence[Fraction]):
        super().__init__()
        coeffs = [Fraction(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients: tuple[Fraction, ...] = tuple(coeffs)
        self.degree = len(coeffs) - 1  # -1 for the zero polynomial

    def exact(self, n: int) -> Fraction:
        return self.coefficients[n] if n < len(self.coefficients) else Fraction(0)

    def ratio(self, n: int) -> Fraction | None:
        a = self.exact(n)
        if a == 0:
            return None
        return self.exact(n + 1) / a


class ReciprocalGammaRule(CoefficientRule):
    """Taylor coefficients of 1/Gamma(z): c_0 = 0, c_1 = 1, c_2 = Euler's gamma, ...

    With 1/Gamma(1+z) = sum h_m z^m, h_0 = 1 and
    (m+1) h_{m+1} = sum_{j<=m} l_j h_{m-j}, l_0 = gamma, l_j = (-1)^j zeta(j+1).
    The sum cancels down to |h_m| ~ 1/m!, so blocks run with log2(count!) extra bits.
    """

    def _extend(self, start: int, stop: int, prec: int) -> list[mpf]:
        count = max(stop, 2 * start, 16)
        return reciprocal_gamma_coefficients(count, prec)[start:]


def reciprocal_gamma_coefficients(count: int, prec: int) -> list[mpf]:
    """First `count` Taylor coefficients of 1/Gamma(z) about 0, rounded to `prec` bits."""
    loss = math.ceil(math.lgamma(count + 1) / math.log(2)) + count.bit_length()
    with mp.workprec(prec + loss + 64):
        ell = [+mp.euler] + [(-1) ** j * mp.zeta(j + 1) for j in range(1, count)]
        h = [mpf(1)]
        for m in range(count - 2):
            h.append(mp.fdot(ell[: m + 1], reversed(h)) / (m + 1))
        coeffs = [mpf(0)] + h[: count - 1]
    with mp.workprec(prec):
        return [+c for c in coeffs]


class DerivativeRule(CoefficientRule):
    """b_n = a_{n+k} (n+k)!/n!."""

    def __init__(self, base: CoefficientRule, k: int):
        super().__init__()
        self.base = base
        self.k = k
        self.has_ratio = base.has_ratio

    def exact(self, n: int) -> Fraction | None:
        a = self.base.exact(n + self.k)
        return None if a is None else a * falling(n + self.k, self.k)

    def ratio(self, n: int) -> Fraction | None:
        q = self.base.ratio(n + self.k)
        return None if q is None else q * Fraction(n + self.k + 1, n + 1)

    def _extend(self, start: int, stop: int, prec: int) -> list[mpf]:
        if self.base.exact(start + self.k) is not None:
            return super()._extend(start, stop, prec)
        return [
            self.base.coefficient(n + self.k, prec) * falling(n + self.k, self.k)
            for n in range(start, stop)
        ]


# --- series ----------------------------------------------------------------


def _cos_sqrt_zero(k: int) -> float:
    return ((k + 0.5) * math.pi) ** 2


@dataclass(frozen=True)
class ZeroSequence:
    """Known positive real zeros in increasing order: location(0), location(1), ..."""

    location: Callable[[int], float]
    count: int | None = None  # None: infinitely many

    def __iter__(self) -> Iterator[float]:
        k = 0
        while self.count is None or k < self.count:
            yield self.location(k)
            k += 1


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """An entire function f(z) = sum a_n z^n with growth metadata."""

    name: str
    rule: CoefficientRule
    order_hint: Fraction | None = None
    sign_pattern: SignPattern = SignPattern.GENERAL
    zeros: ZeroSequence | None = None

    @property
    def nonneg_coeffs(self) -> bool:
        return self.sign_pattern is SignPattern.NONNEGATIVE

    @property
    def known_positive_zeros(self) -> ZeroSequence | None:
        return self.zeros

    @property
    def is_polynomial(self) -> bool:
        return self.rule.degree is not None

    def coeff(self, n: int, prec: int = 256) -> mpf:
        if n < 0:
            raise ConfigurationError(f"coefficient index must be >= 0, got {n}")
        return self.rule.coefficient(n, prec)

    def exact_coeff(self, n: int) -> Fraction | None:
        return self.rule.exact(n)


@dataclass(frozen=True)
class EvalResult:
    """A summed value with its rigorous tail bound and rounding estimate."""

    value: Number
    tail_bound: mpf
    terms_used: int
    rounding_bound: mpf = mpf(0)
    working_prec: int = 0
    exact: Fraction | None = None

    @property
    def error_bound(self) -> mpf:
        return self.tail_bound + self.rounding_bound


@dataclass(frozen=True)
class OrderEstimate:
    order: float  # corrected fit over the upper half of the window
    raw: float  # literal limsup of n log n / -log|a_n|
    trend: TrendFlag


def _sign_pattern(coeffs: Sequence[Fraction]) -> SignPattern:
    if all(c >= 0 for c in coeffs):
        return SignPattern.NONNEGATIVE
    if all((-1) ** n * c >= 0 for n, c in enumerate(coeffs)):
        return SignPattern.ALTERNATING
    return SignPattern.GENERAL


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def polynomial(coefficients: Sequence[Any], name: str | None = None) -> PowerSeries:
    """Finite series from exact rational coefficients, ascending degree."""
    try:
        coeffs = [c if isinstance(c, Fraction) else Fraction(str(c)) for c in coefficients]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"Malformed polynomial coefficient: {exc}") from exc
    rule = PolynomialRule(coeffs)
    if name is None:
        name = "poly:[" + ",".join(_format_rational(c) for c in rule.coefficients) + "]"
    return PowerSeries(
        name=name,
        rule=rule,
        order_hint=Fraction(0),
        sign_pattern=_sign_pattern(rule.coefficients),
    )


def parse_coefficient_list(text: str) -> list[Fraction]:
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    parts = [p.strip().strip("\"'") for p in body.split(",") if p.strip()]
    try:
        return [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"Malformed coefficient list {text!r}") from None


def load_coefficients(path: str | Path) -> list[Fraction]:
    """Read a coefficient file: JSON array of decimal strings, ascending degree."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"Cannot read coefficient file {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise ConfigurationError(f"Coefficient file {path} must hold a JSON array")
    out = []
    for item in raw:
        if not isinstance(item, (str, int)) or isinstance(item, bool):
            raise ConfigurationError(f"Coefficient {item!r} in {path} is not a decimal string")
        try:
            out.append(Fraction(str(item)))
        except (ValueError, ZeroDivisionError):
            raise ConfigurationError(f"Coefficient {item!r} in {path} is malformed") from None
    return out


@functools.cache
def _named_builtin(name: str) -> PowerSeries:
    if name == "bessel_i0_sqrt":
        return PowerSeries(name, BesselSqrtRule(), Fraction(1, 2), SignPattern.NONNEGATIVE)
    if name == "cos_sqrt":
        return PowerSeries(
            name,
            CosSqrtRule(),
            Fraction(1, 2),
            SignPattern.ALTERNATING,
            zeros=ZeroSequence(_cos_sqrt_zero),
        )
    if name == "exp":
        return PowerSeries(name, ExpRule(), Fraction(1), SignPattern.NONNEGATIVE)
    if name == "recip_gamma":
        return PowerSeries(name, ReciprocalGammaRule(), Fraction(1), SignPattern.GENERAL)
    raise ConfigurationError(
        f"Unknown series {name!r}; expected one of {', '.join(BUILTIN_NAMES)} or poly:<coeffs>"
    )


BUILTIN_NAMES = ("bessel_i0_sqrt", "cos_sqrt", "exp", "recip_gamma")


def builtin(name: str) -> PowerSeries:
    """Look up a built-in series by name.

    Args:
        name: One of BUILTIN_NAMES, `poly:[c0,c1,...]` or `poly:@FILE`

    Returns:
        The series (named builtins are shared instances)
    """
    if name.startswith("poly:"):
        source = name[len("poly:"):]
        if source.startswith("@"):
            return polynomial(load_coefficients(source[1:]), name=name)
        return polynomial(parse_coefficient_list(source))
    return _named_builtin(name)


def zero_excluded(f: PowerSeries, r: Any, width: float = ZERO_EXCLUSION_WIDTH) -> bool:
    """True when r lies within width * (local zero gap) of a known positive zero."""
    if f.zeros is None or f.nonneg_coeffs:
        return False
    r = float(r)
    zeros = list(_zeros_near(f.zeros, r))
    for i, x in enumerate(zeros):
        gaps = [abs(x - zeros[j]) for j in (i - 1, i + 1) if 0 <= j < len(zeros)]
        gap = min(gaps) if gaps else x
        if abs(r - x) <= width * gap:
            return True
    return False


def _zeros_near(zeros: ZeroSequence, r: float) -> Iterator[float]:
    # every zero up to the first two beyond r; earlier ones are cheap to skip
    beyond = 0
    for x in zeros:
        yield x
        if x > r:
            beyond += 1
            if beyond >= 2:
                return


# --- summation kernel ------------------------------------------------------


def sum_series(
    make_terms: Callable[[], Iterator[Number]],
    prec: int,
    *,
    finite: bool = False,
    config: SeriesConfig = DEFAULT_SERIES_CONFIG,
) -> EvalResult:
    """Sum a lazily generated series under the geometric-tail criterion.

    Stops once |t_n| < 2^(-prec-8)|partial sum| and |t_n| < |t_{n-1}|/2 have held
    for `consecutive_terms` terms; the tail is bounded by `tail_factor` times the
    first omitted term. When cancellation (log2 of largest term over the sum)
    eats the guard bits the sum is redone at a higher working precision.

    Args:
        make_terms: Called inside the working-precision context; yields terms
        prec: Target precision in bits
        finite: The iterator is the whole series (no tail)
        config: Thresholds

    Returns:
        EvalResult with tail and rounding bounds
    """
    check_prec(prec)
    work = prec + config.guard_bits
    for attempt in range(config.max_escalations + 1):
        with mp.workprec(work):
            result, scale = _accumulate(make_terms(), prec, work, finite, config)
        loss = loss_bits(result.value, scale)
        if loss is None or work - loss >= prec + config.escalation_slack:
            return result
        wanted = prec + config.guard_bits + math.ceil(loss) + config.escalation_slack
        if attempt == config.max_escalations or wanted > config.max_prec or wanted <= work:
            return result
        logger.debug("cancellation of %.1f bits at %d bits; re-summing at %d", loss, work, wanted)
        work = wanted
    return result


def _accumulate(
    terms: Iterator[Number],
    prec: int,
    work: int,
    finite: bool,
    config: SeriesConfig,
) -> tuple[EvalResult, mpf]:
    threshold = mp.ldexp(1, -prec - 8)
    total: Number = mpf(0)
    scale = mpf(0)
    prev = None
    streak = 0
    n = 0
    tail = mpf(0)
    for term in terms:
        if n >= config.term_budget:
            raise NonConvergenceError(
                f"tail criterion not met within {config.term_budget} terms",
                terms=n,
                prec=prec,
            )
        total += term
        size = abs(term)
        if size > scale:
            scale = size
        n += 1
        if finite:
            continue
        if size < threshold * abs(total) and prev is not None and size < prev / 2:
            streak += 1
        else:
            streak = 0
        prev = size
        if streak >= config.consecutive_terms:
            omitted = next(terms, None)
            tail = config.tail_factor * (abs(omitted) if omitted is not None else mpf(0))
            break
    else:
        if not finite:
            raise NonConvergenceError(
                "series ended before the tail criterion held", terms=n, prec=prec
            )
    rounding = (n + 1) * scale * mp.ldexp(1, 1 - work)
    result = EvalResult(
        value=total,
        tail_bound=tail,
        terms_used=n,
        rounding_bound=rounding,
        working_prec=work,
    )
    return result, scale


def _power_terms(rule: CoefficientRule, z: Number) -> Iterator[Number]:
    prec = mp.prec
    first = rule.exact(0)
    if rule.degree is None and rule.has_ratio and first:
        term: Number = to_mp(first)
        n = 0
        while True:
            yield term
            q = rule.ratio(n)
            term = term * z * q.numerator / q.denominator
            n += 1
    power: Number = mpf(1)
    n = 0
    while rule.degree is None or n <= rule.degree:
        yield rule.coefficient(n, prec) * power
        power *= z
        n += 1


def exact_result(value: Fraction, prec: int, terms: int) -> EvalResult:
    work = prec + DEFAULT_SERIES_CONFIG.guard_bits
    with mp.workprec(work):
        approx = to_mp(value)
        rounding = abs(approx) * mp.ldexp(1, 1 - work)
    return EvalResult(
        value=approx,
        tail_bound=mpf(0),
        terms_used=terms,
        rounding_bound=rounding,
        working_prec=work,
        exact=value,
    )


def poly_eval_exact(coefficients: Sequence[Fraction], z: Fraction) -> Fraction:
    """Horner evaluation in exact rationals."""
    out = Fraction(0)
    for c in reversed(coefficients):
        out = out * z + c
    return out


def poly_delta_exact(
    coefficients: Sequence[Fraction], n: int, eta: Fraction, z: Fraction
) -> Fraction:
    """sum_j (-1)^(n-j) C(n,j) p(z + j eta) in exact rationals."""
    return sum(
        ((-1) ** (n - j) * math.comb(n, j) * poly_eval_exact(coefficients, z + j * eta)
         for j in range(n + 1)),
        Fraction(0),
    )


def evaluate(
    f: PowerSeries, z: Any, prec: int = 256, config: SeriesConfig | None = None
) -> EvalResult:
    """Evaluate f at z.

    Polynomials at real rational z are summed exactly (tail 0, `exact` set).

    Args:
        f: The series
        z: Real or complex point
        prec: Target precision in bits (>= 64)
        config: Summation thresholds

    Returns:
        EvalResult
    """
    config = config or DEFAULT_SERIES_CONFIG
    check_prec(prec)
    rule = f.rule
    if isinstance(rule, PolynomialRule):
        q = exact_rational(z)
        if q is not None:
            return exact_result(
                poly_eval_exact(rule.coefficients, q), prec, len(rule.coefficients)
            )
    with mp.workprec(prec + config.guard_bits):
        point = to_mp(z)
    if point == 0 and rule.degree is None:
        return EvalResult(
            value=rule.coefficient(0, prec + config.guard_bits),
            tail_bound=mpf(0),
            terms_used=1,
            working_prec=prec + config.guard_bits,
        )
    return sum_series(
        lambda: _power_terms(rule, point),
        prec,
        finite=rule.degree is not None,
        config=config,
    )


def deriv(f: PowerSeries, k: int) -> PowerSeries:
    """k-th derivative: b_n = a_{n+k} (n+k)!/n!; deriv(f, 0) is f."""
    if k < 0:
        raise ConfigurationError(f"derivative order must be >= 0, got {k}")
    if k == 0:
        return f
    rule = f.rule
    if isinstance(rule, PolynomialRule):
        coeffs = rule.coefficients
        return polynomial([c * falling(n + k, k) for n, c in enumerate(coeffs[k:])])
    if isinstance(rule, DerivativeRule):
        k += rule.k
        rule = rule.base
    base_name = f.name.split("^(")[0]
    return PowerSeries(
        name=f"{base_name}^({k})",
        rule=DerivativeRule(rule, k),
        order_hint=f.order_hint,
        sign_pattern=f.sign_pattern,
    )


def estimated_order(f: PowerSeries) -> float:
    """order_hint when known, else the coefficient-based estimate."""
    if f.order_hint is not None:
        return float(f.order_hint)
    return order_from_coefficients(f, 64).order


def delta_exact(
    f: PowerSeries,
    n: int,
    eta: Any,
    z: Any,
    prec: int = 256,
    config: SeriesConfig | None = None,
) -> EvalResult:
    """n-th forward difference sum_j (-1)^(n-j) C(n,j) f(z + j eta).

    Working precision starts at prec + ceil(n max(0, 1-sigma) log2(2+|z|)) + 32 and
    is raised when the measured cancellation says so.

    Raises:
        PrecisionExhaustedError: accuracy unreachable within config.max_prec
    """
    config = config or DEFAULT_SERIES_CONFIG
    if n < 1:
        raise ConfigurationError(f"difference order must be >= 1, got {n}")
    check_prec(prec)
    if isinstance(f.rule, PolynomialRule):
        qz, qeta = exact_rational(z), exact_rational(eta)
        if qz is not None and qeta is not None:
            value = poly_delta_exact(f.rule.coefficients, n, qeta, qz)
            return exact_result(value, prec, (n + 1) * len(f.rule.coefficients))
    with mp.workprec(prec + config.guard_bits):
        point, shift = to_mp(z), to_mp(eta)
        size = float(abs(point))
    sigma = estimated_order(f)
    work = prec + math.ceil(n * max(0.0, 1.0 - sigma) * math.log2(2.0 + size))
    work += config.cancellation_guard
    for _ in range(config.max_escalations + 2):
        if work > config.max_prec:
            break
        result, scale = _binomial_difference(f, n, shift, point, work, config)
        if result.value == 0:
            return result
        loss = loss_bits(result.value, scale) or 0.0
        accurate = work - loss - math.log2(n + 1)
        if accurate >= prec + config.escalation_slack and abs(result.value) > result.error_bound:
            return result
        wanted = work + math.ceil(prec + config.escalation_slack - accurate)
        wanted += config.cancellation_guard
        logger.debug("delta_exact n=%d lost %.1f bits at %d; retrying at %d", n, loss, work, wanted)
        work = max(wanted, work + config.cancellation_guard)
    raise PrecisionExhaustedError(
        f"Delta^{n} {f.name} at z={mp.nstr(point, 12)} needs more than {config.max_prec} bits",
        n=n,
        prec=prec,
        max_prec=config.max_prec,
    )


def _binomial_difference(
    f: PowerSeries, n: int, eta: Number, z: Number, work: int, config: SeriesConfig
) -> tuple[EvalResult, mpf]:
    total: Number = mpf(0)
    scale = mpf(0)
    err = mpf(0)
    terms = 0
    with mp.workprec(work + config.guard_bits):
        for j in range(n + 1):
            c = (-1) ** (n - j) * math.comb(n, j)
            fj = evaluate(f, z + j * eta, work, config)
            total += c * fj.value
            scale += abs(c) * abs(fj.value)
            err += abs(c) * fj.error_bound
            terms += fj.terms_used
        rounding = (n + 2) * scale * mp.ldexp(1, 1 - work)
    result = EvalResult(
        value=total,
        tail_bound=err,
        terms_used=terms,
        rounding_bound=rounding,
        working_prec=work,
    )
    return result, scale


def log_derivative_bounded(
    f: PowerSeries, k: int, z: Any, prec: int = 256, config: SeriesConfig | None = None
) -> tuple[Number, mpf]:
    """f^(k)(z)/f(z) together with an error bound."""
    config = config or DEFAULT_SERIES_CONFIG
    if k == 0:
        return mpf(1), mpf(0)
    base = evaluate(f, z, prec, config)
    if base.exact is not None:
        if base.exact == 0:
            raise DivisionAtZeroError(f"{f.name} vanishes at z={z}", z=z)
        top = evaluate(deriv(f, k), z, prec, config)
        value = top.exact / base.exact
        return exact_result(value, prec, 0).value, mpf(0)
    if abs(base.value) <= base.error_bound:
        raise DivisionAtZeroError(
            f"|{f.name}(z)| is below its error bound at z={mp.nstr(to_mp(z), 12)}", z=z
        )
    top = evaluate(deriv(f, k), z, prec, config)
    with mp.workprec(prec + config.guard_bits):
        ratio = top.value / base.value
        margin = abs(base.value) - base.error_bound
        bound = (top.error_bound + abs(ratio) * base.error_bound) / margin
        bound += abs(ratio) * mp.ldexp(1, 1 - prec - config.guard_bits)
    return ratio, bound


def log_derivative(
    f: PowerSeries, k: int, z: Any, prec: int = 256, config: SeriesConfig | None = None
) -> Number:
    """f^(k)(z)/f(z).

    Raises:
        DivisionAtZeroError: |f(z)| does not exceed its tail bound
    """
    return log_derivative_bounded(f, k, z, prec, config)[0]


def order_from_coefficients(f: PowerSeries, n_max: int, prec: int = 128) -> OrderEstimate:
    """Estimate the growth order from coefficient decay.

    `raw` is the literal limsup of n log n / -log|a_n| over the upper half of
    n <= n_max; `order` refines it by fitting -log|a_n| against
    {n log n, n, log n, 1} on that half, which removes the slow 1/log n bias.
    """
    if n_max < 16:
        raise ConfigurationError(f"n_max must be >= 16, got {n_max}")
    if f.is_polynomial:
        return OrderEstimate(order=0.0, raw=0.0, trend=TrendFlag.STABLE)
    ns: list[int] = []
    decay: list[float] = []
    with mp.workprec(prec):
        for n in range(2, n_max + 1):
            q = f.exact_coeff(n)
            a = to_mp(q) if q is not None else f.coeff(n, prec)
            if a == 0:
                continue
            value = -float(mp.log(abs(a)))
            if value > 0:
                ns.append(n)
                decay.append(value)
    if not ns:
        return OrderEstimate(order=0.0, raw=0.0, trend=TrendFlag.STABLE)
    n_arr = np.array(ns, dtype=float)
    d_arr = np.array(decay)
    raw_values = n_arr * np.log(n_arr) / d_arr
    upper = n_arr >= n_max / 2
    raw = float(raw_values[upper].max()) if upper.any() else float(raw_values.max())

    order = raw
    if upper.sum() >= 4:
        x = n_arr[upper]
        design = np.column_stack([x * np.log(x), x, np.log(x), np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(design, d_arr[upper], rcond=None)
        if coef[0] > 0:
            order = float(1.0 / coef[0])
    return OrderEstimate(order=order, raw=raw, trend=_trend(raw_values))


def _trend(values: np.ndarray, tolerance: float = 0.01) -> TrendFlag:
    quarter = max(1, len(values) // 4)
    if len(values) < 2 * quarter:
        return TrendFlag.STABLE
    late = float(values[-quarter:].mean())
    early = float(values[-2 * quarter:-quarter].mean())
    change = (late - early) / abs(early) if early else 0.0
    if abs(change) < tolerance:
        return TrendFlag.STABLE
    return TrendFlag.INCREASING if change > 0 else TrendFlag.DECREASING


@dataclass(frozen=True)
class TaylorRemainder:
    remainder: mpf
    bound: mpf
    holds: bool


def taylor_remainder(
    f: PowerSeries,
    n: int,
    z: Any,
    eta: Any,
    prec: int = 256,
    samples: int = 9,
    config: SeriesConfig | None = None,
) -> TaylorRemainder:
    """Compare f(z+eta) - sum_{k<=n} f^(k)(z) eta^k/k! with its integral-form bound.

    The sup of |f^(n+1)| on the segment is estimated on `samples` equally spaced
    points including both ends.
    """
    config = config or DEFAULT_SERIES_CONFIG
    with mp.workprec(prec + config.guard_bits):
        point, shift = to_mp(z), to_mp(eta)
        shifted = evaluate(f, point + shift, prec, config)
        partial: Number = mpf(0)
        slack = shifted.error_bound
        for k in range(n + 1):
            dk = evaluate(deriv(f, k), point, prec, config)
            partial += dk.value * shift**k / math.factorial(k)
            slack += dk.error_bound * abs(shift) ** k / math.factorial(k)
        remainder = abs(shifted.value - partial)
        top = deriv(f, n + 1)
        sup = mpf(0)
        for i in range(samples):
            t = mpf(i) / (samples - 1)
            sup = max(sup, abs(evaluate(top, point + t * shift, prec, config).value))
        bound = sup * abs(shift) ** (n + 1) / math.factorial(n + 1)
    return TaylorRemainder(remainder=remainder, bound=bound, holds=remainder <= bound + slack)
