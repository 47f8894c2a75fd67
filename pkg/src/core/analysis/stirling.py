from __future__ import annotations

"""Stirling numbers of the second kind and the truncated Stirling expansion of Delta^n.

Delta^n f(z)/f(z) ~ n! sum_{k=n}^{N} S(k, n) eta^k/k! * f^(k)(z)/f(z).
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from mpmath import mp

from core.analysis.series import (
    DEFAULT_SERIES_CONFIG,
    Number,
    PolynomialRule,
    PowerSeries,
    SeriesConfig,
    deriv,
    exact_rational,
    log_derivative_bounded,
    poly_eval_exact,
    to_mp,
)
from core.errors import ConfigurationError, DivisionAtZeroError


@dataclass(frozen=True)
class StirlingTable:
    """Exact triangle S(n, m), 0 <= m <= n <= n_max."""

    n_max: int
    rows: tuple[tuple[int, ...], ...]

    def entry(self, n: int, m: int) -> int:
        if not 0 <= n <= self.n_max:
            raise ConfigurationError(f"n={n} outside table (n_max={self.n_max})")
        if m < 0 or m > n:
            return 0
        return self.rows[n][m]

    def row_sum(self, n: int) -> int:
        """Bell number B_n."""
        return sum(self.rows[n])

    def triples(self):
        """(n, m, S(n, m)) in row-major order."""
        for n, row in enumerate(self.rows):
            for m, value in enumerate(row):
                yield n, m, value


def build_table(n_max: int) -> StirlingTable:
    """Build the triangle with S(n, m) = m S(n-1, m) + S(n-1, m-1).

    Args:
        n_max: Largest n (>= 1)

    Returns:
        StirlingTable with exact integers
    """
    if n_max < 1:
        raise ConfigurationError(f"n_max must be >= 1, got {n_max}")
    rows: list[tuple[int, ...]] = [(1,)]
    for n in range(1, n_max + 1):
        prev = rows[-1]
        row = [0] * (n + 1)
        for m in range(1, n + 1):
            left = prev[m] if m < len(prev) else 0
            row[m] = m * left + prev[m - 1]
        rows.append(tuple(row))
    return StirlingTable(n_max=n_max, rows=tuple(rows))


def falling_power(x: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= x - i
    return out


def check_generating_identity(table: StirlingTable, n: int, x: int) -> bool:
    """x^n == sum_m S(n, m) x(x-1)...(x-m+1), exactly."""
    if n > table.n_max:
        raise ConfigurationError(f"n={n} exceeds table n_max={table.n_max}")
    return x**n == sum(table.entry(n, m) * falling_power(x, m) for m in range(n + 1))


def check_cross_recurrence(table: StirlingTable, n: int, m: int, r: int) -> bool:
    """C(m,r) S(n,m) == sum_{k=m-r}^{n-r} C(n,k) S(n-k, r) S(k, m-r), exactly."""
    if not n >= m >= r >= 0:
        raise ConfigurationError(f"need n >= m >= r >= 0, got n={n}, m={m}, r={r}")
    if n > table.n_max:
        raise ConfigurationError(f"n={n} exceeds table n_max={table.n_max}")
    lhs = math.comb(m, r) * table.entry(n, m)
    rhs = sum(
        math.comb(n, k) * table.entry(n - k, r) * table.entry(k, m - r)
        for k in range(m - r, n - r + 1)
    )
    return lhs == rhs


@dataclass(frozen=True)
class ExpansionCoefficients:
    """weights(k) = n! S(k, n) eta^k / k! for n <= k <= N.

    `exact_weights` excludes eta^k and stays rational; `weights` folds eta in
    and is rounded once at `prec`.
    """

    n: int
    N: int
    eta: Any
    exact_weights: tuple[Fraction, ...]
    weights: tuple[Number, ...]

    def weight(self, k: int) -> Number:
        return self.weights[k - self.n]


def expansion_coefficients(
    n: int, N: int, eta: Any, prec: int = 256, table: StirlingTable | None = None
) -> ExpansionCoefficients:
    if not N >= n >= 1:
        raise ConfigurationError(f"need N >= n >= 1, got n={n}, N={N}")
    table = table if table is not None and table.n_max >= N else build_table(N)
    fact_n = math.factorial(n)
    exact = tuple(
        Fraction(fact_n * table.entry(k, n), math.factorial(k)) for k in range(n, N + 1)
    )
    qeta = exact_rational(eta)
    with mp.workprec(prec):
        if qeta is not None:
            weights = tuple(to_mp(w * qeta**k) for k, w in zip(range(n, N + 1), exact))
        else:
            shift = to_mp(eta)
            weights = tuple(to_mp(w) * shift**k for k, w in zip(range(n, N + 1), exact))
    return ExpansionCoefficients(n=n, N=N, eta=eta, exact_weights=exact, weights=weights)


def expansion_bounded(
    f: PowerSeries,
    n: int,
    N: int,
    eta: Any,
    z: Any,
    prec: int = 256,
    config: SeriesConfig | None = None,
    table: StirlingTable | None = None,
) -> tuple[Number, Any]:
    """Truncated expansion and an error bound propagated from the log-derivatives."""
    config = config or DEFAULT_SERIES_CONFIG
    coeffs = expansion_coefficients(n, N, eta, prec + config.guard_bits, table)
    with mp.workprec(prec + config.guard_bits):
        total: Number = mp.mpf(0)
        err = mp.mpf(0)
        for k in range(n, N + 1):
            ratio, bound = log_derivative_bounded(f, k, z, prec, config)
            w = coeffs.weight(k)
            total += w * ratio
            err += abs(w) * bound
    return total, err


def expansion(
    f: PowerSeries,
    n: int,
    N: int,
    eta: Any,
    z: Any,
    prec: int = 256,
    config: SeriesConfig | None = None,
) -> Number:
    """n! sum_{k=n}^{N} S(k,n) eta^k/k! * f^(k)(z)/f(z).

    Args:
        f: The series
        n: Difference order (>= 1)
        N: Truncation order (>= n)
        eta: Shift
        z: Point (should respect the zero-avoidance policy)
        prec: Target precision in bits

    Returns:
        The truncated right-hand side
    """
    return expansion_bounded(f, n, N, eta, z, prec, config)[0]


def expansion_exact(f: PowerSeries, n: int, N: int, eta: Fraction, z: Fraction) -> Fraction:
    """Truncated expansion in exact rationals; f must be a polynomial."""
    if not isinstance(f.rule, PolynomialRule):
        raise ConfigurationError(f"{f.name} has no exact rational coefficients")
    if not N >= n >= 1:
        raise ConfigurationError(f"need N >= n >= 1, got n={n}, N={N}")
    base = poly_eval_exact(f.rule.coefficients, z)
    if base == 0:
        raise DivisionAtZeroError(f"{f.name} vanishes at z={z}", z=z)
    table = build_table(N)
    total = Fraction(0)
    for k in range(n, N + 1):
        dk = deriv(f, k)
        weight = Fraction(math.factorial(n) * table.entry(k, n), math.factorial(k)) * eta**k
        total += weight * poly_eval_exact(dk.rule.coefficients, z) / base
    return total
