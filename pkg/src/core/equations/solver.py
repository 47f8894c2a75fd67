from __future__ import annotations

"""Minimal (subdominant) solutions of binomial-basis recurrences.

Order-1 recurrences are solved forward in exact rationals. Higher orders use a
generalized Miller scheme: unit tails far out are run backward, which
amplifies the minimal subspace, and the resulting vectors are reduced to a
pivot-normalized basis of that subspace and combined to satisfy the boundary
relations at small m.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from mpmath import mp, mpf

from core.analysis.series import to_mp
from core.equations.polygon import hull_segments
from core.equations.recurrence import Recurrence, peval
from core.errors import ConfigurationError, MinimalSolutionNotFoundError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MillerConfig:
    margin: int = 64  # extra backward steps above the requested terms
    tolerance: float = 1e-20  # margin M vs 2M agreement, relative to the local envelope
    guard_bits: int = 32
    max_free_index: int = 16  # order-1 search for the first nonzero coefficient


DEFAULT_MILLER_CONFIG = MillerConfig()


@dataclass(frozen=True)
class NewtonSeriesSolution:
    """f(z) = sum_m b_m C(z, m) for m < terms."""

    b: tuple[Any, ...]
    normalization: str
    finite: bool = False  # every coefficient past the stored ones is zero
    stability: float | None = None  # margin M vs 2M discrepancy (Miller only)
    prec: int = 256

    @property
    def terms(self) -> int:
        return len(self.b)

    @classmethod
    def from_coefficients(
        cls, values: Sequence[Any], normalization: str = "given", finite: bool = False
    ) -> NewtonSeriesSolution:
        return cls(b=tuple(values), normalization=normalization, finite=finite)


def solve_minimal(
    rec: Recurrence,
    terms: int,
    start_margin: int | None = None,
    prec: int = 256,
    config: MillerConfig = DEFAULT_MILLER_CONFIG,
) -> NewtonSeriesSolution:
    """Extract the minimal solution b_0..b_{terms-1} of a recurrence.

    Args:
        rec: Recurrence sum_s Q_s(m) b_{m+s} = 0
        terms: Number of coefficients wanted
        start_margin: Backward start above `terms` (default config.margin)
        prec: Precision in bits

    Returns:
        NewtonSeriesSolution normalized by b at its first free index = 1

    Raises:
        MinimalSolutionNotFoundError: no separated minimal subspace, a vanishing
            backward coefficient, or disagreement between margins M and 2M
    """
    if terms < 2:
        raise ConfigurationError(f"terms must be >= 2, got {terms}")
    if rec.order < 1:
        raise MinimalSolutionNotFoundError("recurrence has a single shift; only b = 0 solves it")
    if rec.order == 1:
        return _solve_forward(rec, terms, config)

    margin = start_margin if start_margin is not None else config.margin
    d = minimal_dimension(rec)
    work = prec + config.guard_bits
    first = _miller(rec, terms, margin, d, work)
    second = _miller(rec, terms, 2 * margin, d, work)
    stability = _discrepancy(first, second, rec.order, terms // 2)
    if stability > config.tolerance:
        logger.warning("Miller solution unstable: margins %d/%d differ by %.3g",
                       margin, 2 * margin, stability)
        raise MinimalSolutionNotFoundError(
            f"backward solutions from margins {margin} and {2 * margin} differ by {stability:.3g}",
            stability=stability,
        )
    values, pivot = first
    with mp.workprec(prec):
        b = tuple(+v for v in values)
    return NewtonSeriesSolution(
        b=b, normalization=f"b[{pivot}]=1", stability=stability, prec=prec
    )


def minimal_dimension(rec: Recurrence) -> int:
    """Dimension of the fastest-decaying solution family.

    Solutions balancing shifts i < j decay like m^(-slope) per step, slope being
    the edge slope of the upper hull of (s, deg Q_s); the steepest edge spans
    the minimal family.
    """
    lo = rec.min_shift
    segments = hull_segments([(s - lo, len(p) - 1) for s, p in rec.terms])
    steepest = segments[0]
    if steepest.slope <= 0:
        raise MinimalSolutionNotFoundError(
            "no solution decays faster than the others (steepest slope <= 0)"
        )
    if steepest.span == rec.order:
        raise MinimalSolutionNotFoundError("all solutions share one growth rate")
    return steepest.span


def _solve_forward(rec: Recurrence, terms: int, config: MillerConfig) -> NewtonSeriesSolution:
    lo, hi = rec.min_shift, rec.max_shift
    q_lo, q_hi = rec.poly(lo), rec.poly(hi)
    for start in range(min(config.max_free_index, terms - 1) + 1):
        b = [Fraction(0)] * terms
        b[start] = Fraction(1)
        if _forward_fill(b, start, lo, hi, q_lo, q_hi):
            return NewtonSeriesSolution(
                b=tuple(b), normalization=f"b[{start}]=1", finite=b[-1] == 0
            )
    raise MinimalSolutionNotFoundError(
        f"no order-1 solution starts at an index <= {config.max_free_index}"
    )


def _forward_fill(
    b: list[Fraction], start: int, lo: int, hi: int, q_lo: tuple, q_hi: tuple
) -> bool:
    for m in range(len(b) - hi):
        i_lo, i_hi = m + lo, m + hi
        low = b[i_lo] if i_lo >= 0 else Fraction(0)
        if i_hi <= start:
            high = b[i_hi] if i_hi >= 0 else Fraction(0)
            if peval(q_lo, m) * low + peval(q_hi, m) * high != 0:
                return False
            continue
        lead = peval(q_hi, m)
        rhs = -peval(q_lo, m) * low
        if lead == 0:
            if rhs != 0:
                return False
            b[i_hi] = Fraction(0)  # free; the smallest solution keeps it 0
        else:
            b[i_hi] = rhs / lead
    return True


def _backward_run(rec: Recurrence, top: int, seed: int, work: int) -> list[mpf]:
    lo, order = rec.min_shift, rec.order
    others = [(s, p) for s, p in rec.terms if s != lo]
    q_lo = rec.poly(lo)
    with mp.workprec(work):
        b = [mpf(0)] * (top + 1)
        b[top - order + 1 + seed] = mpf(1)
        for i in range(top - order, max(lo, 0) - 1, -1):
            m = i - lo
            lead = peval(q_lo, m)
            if lead == 0:
                raise MinimalSolutionNotFoundError(
                    f"backward coefficient Q_{lo}(m) vanishes at m={m}", m=m
                )
            acc = mpf(0)
            for s, p in others:
                c = peval(p, m)
                if c:
                    acc += to_mp(c) * b[m + s]
            b[i] = -acc / to_mp(lead)
    return b


def _pivot_basis(vectors: list[list[mpf]], d: int, tol: mpf) -> list[tuple[int, list[mpf]]]:
    """Reduce vectors to d vectors with distinct lowest-index pivots set to 1."""
    scaled = []
    for v in vectors:
        peak = max(abs(x) for x in v)
        if peak:
            scaled.append([x / peak for x in v])
    basis: list[tuple[int, list[mpf]]] = []
    for _ in range(d):
        choice = None
        for col in range(len(scaled[0]) if scaled else 0):
            candidates = [(abs(v[col]), k) for k, v in enumerate(scaled) if abs(v[col]) > tol]
            if candidates:
                choice = (col, max(candidates)[1])
                break
        if choice is None:
            raise MinimalSolutionNotFoundError(
                f"backward runs span fewer than {d} independent minimal solutions"
            )
        col, k = choice
        pivot = scaled.pop(k)
        pivot = [x / pivot[col] for x in pivot]
        scaled = [[x - v[col] * y for x, y in zip(v, pivot)] for v in scaled]
        basis = [(c, [x - u[col] * y for x, y in zip(u, pivot)]) for c, u in basis]
        basis.append((col, pivot))
    return sorted(basis, key=lambda item: item[0])


def _miller(
    rec: Recurrence, terms: int, margin: int, d: int, work: int
) -> tuple[list[mpf], int]:
    top = terms + margin + rec.order
    runs = [_backward_run(rec, top, seed, work)[:terms] for seed in range(rec.order)]
    with mp.workprec(work):
        tol = mp.ldexp(1, -(work // 2))
        basis = _pivot_basis(runs, d, tol)
        constraints = list(range(0, max(0, -rec.min_shift)))
        solution = _satisfy_constraints(rec, basis, constraints, tol)
        peak = max(abs(x) for x in solution)
        pivot = next(i for i, x in enumerate(solution) if abs(x) > tol * peak)
        scale = solution[pivot]
        return [x / scale for x in solution], pivot


def _satisfy_constraints(
    rec: Recurrence, basis: list[tuple[int, list[mpf]]], constraints: list[int], tol: mpf
) -> list[mpf]:
    """Combine basis vectors so the relations at m in `constraints` hold."""
    vectors = [v for _, v in basis]
    rows = [[rec.relation(v, m) for v in vectors] for m in constraints]
    if not rows or all(abs(a) <= tol for row in rows for a in row):
        return vectors[0]
    k = len(rows)
    if k >= len(vectors):
        raise MinimalSolutionNotFoundError(
            f"{k} boundary relations leave no minimal solution in a {len(vectors)}-dim family"
        )
    A = mp.matrix([row[1 : k + 1] for row in rows])
    rhs = mp.matrix([-row[0] for row in rows])
    try:
        coeffs = mp.lu_solve(A, rhs)
    except ZeroDivisionError:
        raise MinimalSolutionNotFoundError("boundary relations are singular") from None
    combo = list(vectors[0])
    for j in range(k):
        combo = [x + coeffs[j] * y for x, y in zip(combo, vectors[j + 1])]
    residual = max(abs(rec.relation(combo, m)) for m in constraints)
    if residual > tol * max(abs(x) for x in combo):
        raise MinimalSolutionNotFoundError("boundary relations not satisfiable")
    return combo


def _discrepancy(
    first: tuple[list[mpf], int], second: tuple[list[mpf], int], order: int, upto: int
) -> float:
    a, pivot_a = first
    b, pivot_b = second
    if pivot_a != pivot_b:
        return float("inf")
    worst = mpf(0)
    for m in range(upto + 1):
        window = a[max(0, m - order) : m + order + 1]
        envelope = max(abs(x) for x in window)
        if envelope:
            worst = max(worst, abs(a[m] - b[m]) / envelope)
    return float(worst)
