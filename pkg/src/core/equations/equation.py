from __future__ import annotations

"""Linear difference equations a_n(z) Delta^n f + ... + a_0(z) f = 0 with polynomial a_k."""

import json
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from core.errors import ConfigurationError, EquationParseError, EquationValidationError

Poly = tuple[Fraction, ...]


def trim(coeffs: list[Fraction] | Poly) -> Poly:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def degree(poly: Poly) -> int | None:
    """Degree, or None for the zero polynomial."""
    return len(poly) - 1 if poly else None


@dataclass(frozen=True)
class DifferenceEquation:
    """Coefficients a_0..a_n ascending in k; each a_k ascending in z."""

    coeffs: tuple[Poly, ...]
    eta: Fraction = Fraction(1)
    eta_imag: Fraction = Fraction(0)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def eta_value(self) -> Fraction | complex:
        if self.eta_imag == 0:
            return self.eta
        return complex(float(self.eta), float(self.eta_imag))

    @property
    def unit_shift(self) -> bool:
        return self.eta == 1 and self.eta_imag == 0

    def points(self) -> list[tuple[int, int]]:
        """(k, deg a_k) for every nonzero a_k."""
        return [(k, len(a) - 1) for k, a in enumerate(self.coeffs) if a]

    def to_dict(self) -> dict[str, Any]:
        eta: Any = format_rational(self.eta) if self.eta_imag == 0 else [
            format_rational(self.eta), format_rational(self.eta_imag)
        ]
        return {"eta": eta, "coeffs": [[format_rational(c) for c in a] for a in self.coeffs]}

    def describe(self) -> str:
        parts = []
        for k in range(self.order, -1, -1):
            a = self.coeffs[k]
            if not a:
                continue
            op = "f" if k == 0 else ("Delta f" if k == 1 else f"Delta^{k} f")
            parts.append(f"({poly_text(a)})*{op}")
        return " + ".join(parts) + " = 0"


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def poly_text(poly: Poly, var: str = "z") -> str:
    terms = []
    for i, c in enumerate(poly):
        if c == 0:
            continue
        if i == 0:
            terms.append(format_rational(c))
        else:
            power = var if i == 1 else f"{var}^{i}"
            terms.append(power if c == 1 else f"{format_rational(c)}*{power}")
    return " + ".join(terms) if terms else "0"


def _rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise EquationParseError(f"{where}: expected a rational, got {value!r}")
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise EquationParseError(f"{where}: malformed rational {value!r}") from None


def parse_equation(source: str | bytes | Mapping[str, Any]) -> DifferenceEquation:
    """Parse and validate {"eta": ..., "coeffs": [[...], ...]}.

    eta is a rational or [re, im] and defaults to 1; coefficient entries are
    rational strings or integers, ascending degree.

    Raises:
        EquationParseError: malformed JSON or rationals
        EquationValidationError: zero leading coefficient or a trivial equation
    """
    if isinstance(source, (str, bytes)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise EquationParseError(f"equation is not valid JSON: {exc}") from exc
    else:
        data = source
    if not isinstance(data, Mapping):
        raise EquationParseError("equation must be a JSON object")
    raw_coeffs = data.get("coeffs")
    if not isinstance(raw_coeffs, list) or not raw_coeffs:
        raise EquationParseError("'coeffs' must be a non-empty list of coefficient lists")

    coeffs = []
    for k, poly in enumerate(raw_coeffs):
        if not isinstance(poly, list):
            raise EquationParseError(f"coeffs[{k}] must be a list")
        coeffs.append(trim([_rational(c, f"coeffs[{k}][{i}]") for i, c in enumerate(poly)]))

    eta_raw = data.get("eta", 1)
    if isinstance(eta_raw, list):
        if len(eta_raw) != 2:
            raise EquationParseError("'eta' as a list must be [re, im]")
        eta, eta_imag = _rational(eta_raw[0], "eta[0]"), _rational(eta_raw[1], "eta[1]")
    else:
        eta, eta_imag = _rational(eta_raw, "eta"), Fraction(0)

    if eta == 0 and eta_imag == 0:
        raise EquationValidationError("eta must be nonzero")
    if not coeffs[-1]:
        raise EquationValidationError(
            f"leading coefficient a_{len(coeffs) - 1} is the zero polynomial"
        )
    if sum(1 for a in coeffs if a) < 2:
        raise EquationValidationError("equation needs at least two nonzero coefficients")
    return DifferenceEquation(coeffs=tuple(coeffs), eta=eta, eta_imag=eta_imag)


def load_equation(path: str | Path) -> DifferenceEquation:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"Cannot read equation file {path}: {exc}") from exc
    return parse_equation(text)
