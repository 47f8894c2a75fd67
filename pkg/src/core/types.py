from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    UNRELIABLE = "UNRELIABLE"  # more than half the rows were dropped
    INCONCLUSIVE = "INCONCLUSIVE"  # numerics could not decide
    NO_PREDICTION = "NO_PREDICTION"  # polygon predicts no order < 1
    COMPLETE = "COMPLETE"  # report-only commands

    @property
    def exit_code(self) -> int:
        return VERDICT_EXIT_CODES[self]


VERDICT_EXIT_CODES = {
    Verdict.PASS: 0,
    Verdict.COMPLETE: 0,
    Verdict.NO_PREDICTION: 0,
    Verdict.FAIL: 1,
    Verdict.UNRELIABLE: 3,
    Verdict.INCONCLUSIVE: 3,
}


class SignPattern(str, Enum):
    NONNEGATIVE = "nonnegative"  # a_n >= 0, M(r) = f(r)
    ALTERNATING = "alternating"  # (-1)^n a_n >= 0, M(r) = |f(-r)|
    GENERAL = "general"


class RowStatus(str, Enum):
    USED = "used"  # row enters the fit
    BELOW_NOISE = "below_noise"  # abs_err under the numeric noise floor
    EXCLUDED = "excluded"  # zero-avoidance policy skipped r
    DROPPED = "dropped"  # precision exhausted


class TrendFlag(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    STABLE = "stable"


class GrowthSampling(str, Enum):
    MAJORANT = "majorant"  # sum |b_m| C(r+1/2+m-1, m)
    NEGATIVE_AXIS = "negative_axis"  # |f(-r-1/2)|
    POSITIVE_AXIS = "positive_axis"  # |f(r+1/2)|


class GrowthFitMethod(str, Enum):
    LOGLOG = "loglog"  # slope of log log M vs log r, then mean L
    REGULAR = "regular"  # log M = L r^chi + a + b log r


@dataclass
class Check:
    """Outcome of one pass/fail check."""

    passed: bool
    reason: str | None = None

    @classmethod
    def ok(cls) -> Check:
        return cls(passed=True)

    @classmethod
    def failed(cls, reason: str) -> Check:
        return cls(passed=False, reason=reason)
