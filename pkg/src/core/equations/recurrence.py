from __future__ import annotations

"""Binomial-basis recurrences.

For f(z) = sum_m b_m C(z, m) with C(z, m) = z(z-1)...(z-m+1)/m!, the identities
Delta C(z, m) = C(z, m-1) and z C(z, m) = (m+1) C(z, m+1) + m C(z, m) turn
a_n(z) Delta^n f + ... + a_0(z) f = 0 into sum_s Q_s(m) b_{m+s} = 0 for m >= 0.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from core.equations.equation import DifferenceEquation, Poly, format_rational, poly_text, trim
from core.errors import ConfigurationError

# --- polynomial arithmetic over Fraction (ascending coefficients) ----------


def padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def pscale(p: Poly, c: Fraction) -> Poly:
    return trim([c * a for a in p])


def pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def pshift(p: Poly, c: int) -> Poly:
    """P(x + c)."""
    out: Poly = ()
    for a in reversed(p):
        out = padd(pmul(out, (Fraction(c), Fraction(1))), (a,))
    return out


def peval(p: Poly, x: Any) -> Any:
    out = 0 * x
    for a in reversed(p):
        out = out * x + a
    return out


def pdelta(p: Poly) -> Poly:
    """P(x + 1) - P(x)."""
    return padd(pshift(p, 1), pscale(p, Fraction(-1)))


X: Poly = (Fraction(0), Fraction(1))


# --- operators on binomial coefficients ------------------------------------


@dataclass(frozen=True)
class Operator:
    """sum_s P_s(m) b_{m+s}: the coefficient of C(z, m) after applying an operator to f."""

    terms: tuple[tuple[int, Poly], ...] = ()

    @classmethod
    def from_mapping(cls, terms: Mapping[int, Poly]) -> Operator:
        return cls(tuple(sorted((s, trim(p)) for s, p in terms.items() if trim(p))))

    @classmethod
    def delta_power(cls, k: int) -> Operator:
        """Delta^k f = sum_m b_{m+k} C(z, m)."""
        return cls.from_mapping({k: (Fraction(1),)})

    def as_dict(self) -> dict[int, Poly]:
        return dict(self.terms)

    def __add__(self, other: Operator) -> Operator:
        merged = self.as_dict()
        for s, p in other.terms:
            merged[s] = padd(merged.get(s, ()), p)
        return Operator.from_mapping(merged)

    def scale(self, c: Fraction) -> Operator:
        return Operator.from_mapping({s: pscale(p, c) for s, p in self.terms})

    def multiply_by_z(self) -> Operator:
        """z sum_j c_j C(z, j) has coefficient m c_{m-1} + m c_m at C(z, m)."""
        out: dict[int, Poly] = {}
        for s, p in self.terms:
            out[s - 1] = padd(out.get(s - 1, ()), pmul(X, pshift(p, -1)))
            out[s] = padd(out.get(s, ()), pmul(X, p))
        return Operator.from_mapping(out)

    def multiply_by_poly(self, a: Poly) -> Operator:
        result = Operator()
        current = self
        for i, c in enumerate(a):
            if i:
                current = current.multiply_by_z()
            if c:
                result = result + current.scale(c)
        return result


@dataclass(frozen=True)
class Recurrence(Operator):
    """sum_s Q_s(m) b_{m+s} = 0 for every m >= 0; b with negative index is 0."""

    @property
    def min_shift(self) -> int:
        return self.terms[0][0]

    @property
    def max_shift(self) -> int:
        return self.terms[-1][0]

    @property
    def order(self) -> int:
        return self.max_shift - self.min_shift

    def poly(self, s: int) -> Poly:
        return self.as_dict().get(s, ())

    def relation(self, b: Sequence[Any], m: int) -> Any:
        """Left-hand side at m; indices outside b count as 0."""
        total: Any = 0
        for s, p in self.terms:
            i = m + s
            if 0 <= i < len(b):
                total = total + peval(p, m) * b[i]
        return total

    def describe(self) -> str:
        parts = []
        for s, p in self.terms:
            index = "m" if s == 0 else (f"m+{s}" if s > 0 else f"m-{-s}")
            coeff = poly_text(p, "m")
            if coeff == "1":
                parts.append(f"b[{index}]")
            elif "+" not in coeff:
                parts.append(f"{coeff}*b[{index}]")
            else:
                parts.append(f"({coeff})*b[{index}]")
        return " + ".join(parts) + " = 0"

    def to_dict(self) -> dict[str, Any]:
        return {
            "relation": self.describe(),
            "terms": [
                {"shift": s, "coeffs": [format_rational(c) for c in p]} for s, p in self.terms
            ],
            "order": self.order,
        }


def binomial_recurrence(eq: DifferenceEquation) -> Recurrence:
    """Push each a_k(z) Delta^k through the binomial basis.

    Raises:
        ConfigurationError: eta != 1 (rescale z -> eta z first)
    """
    if not eq.unit_shift:
        raise ConfigurationError("binomial-basis recurrence needs eta = 1")
    total = Operator()
    for k, a in enumerate(eq.coeffs):
        if a:
            total = total + Operator.delta_power(k).multiply_by_poly(a)
    if not total.terms:
        raise ConfigurationError("equation reduces to the zero recurrence")
    return Recurrence(total.terms)


# --- exact checks -----------------------------------------------------------


def binomial_poly(m: int) -> Poly:
    """C(z, m) as a polynomial in z."""
    out: Poly = (Fraction(1),)
    for i in range(m):
        out = pscale(pmul(out, (Fraction(-i), Fraction(1))), Fraction(1, i + 1))
    return out


def check_basis_identities(m_max: int = 50) -> bool:
    """Delta C(z,m) = C(z,m-1) and z C(z,m) = (m+1) C(z,m+1) + m C(z,m), exactly."""
    basis = [binomial_poly(m) for m in range(m_max + 2)]
    if pdelta(basis[0]) != ():
        return False
    for m in range(1, m_max + 1):
        if pdelta(basis[m]) != basis[m - 1]:
            return False
    for m in range(m_max + 1):
        rhs = padd(pscale(basis[m + 1], Fraction(m + 1)), pscale(basis[m], Fraction(m)))
        if pmul(X, basis[m]) != rhs:
            return False
    return True


def apply_equation(eq: DifferenceEquation, p: Poly) -> Poly:
    """sum_k a_k(z) Delta^k p(z) for a polynomial p (unit shift)."""
    total: Poly = ()
    current = p
    for k, a in enumerate(eq.coeffs):
        if k:
            current = pdelta(current)
        total = padd(total, pmul(a, current))
    return total


def newton_coefficients(p: Poly) -> list[Fraction]:
    """c_j with p(z) = sum_j c_j C(z, j): forward differences of p at 0."""
    values = [peval(p, Fraction(x)) for x in range(len(p))]
    out = []
    while values:
        out.append(values[0])
        values = [b - a for a, b in zip(values, values[1:])]
    return out


def check_recurrence(eq: DifferenceEquation, rec: Recurrence, b: Sequence[Fraction]) -> bool:
    """Exact oracle: for f = sum_{m<len(b)} b_m C(z,m), the equation applied to f has
    binomial coefficients sum_s Q_s(m) b_{m+s}."""
    f: Poly = ()
    for m, bm in enumerate(b):
        f = padd(f, pscale(binomial_poly(m), Fraction(bm)))
    image = newton_coefficients(apply_equation(eq, f))
    span = len(b) + abs(rec.min_shift) + rec.order + 1
    for m in range(max(span, len(image))):
        expected = image[m] if m < len(image) else Fraction(0)
        if rec.relation(b, m) != expected:
            return False
    return True
