"""Pytest configuration and fixtures for deltawv tests."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest
from mpmath import mp

from core.analysis.series import PowerSeries, builtin
from core.equations.equation import DifferenceEquation, parse_equation

Z_DELTA2 = {"eta": 1, "coeffs": [[1], [], [0, 1]]}  # z Delta^2 f + f = 0
Z_DELTA3 = {"eta": 1, "coeffs": [[1], [], [], [0, 1]]}  # z Delta^3 f + f = 0
DELTA_MINUS_ONE = {"coeffs": [[-1], [1]]}  # Delta f - f = 0, f = 2^z


@pytest.fixture(autouse=True)
def restore_mp_precision():
    """Keep mpmath's global precision from leaking between tests."""
    prec = mp.prec
    yield
    mp.prec = prec


@pytest.fixture
def bessel() -> PowerSeries:
    return builtin("bessel_i0_sqrt")


@pytest.fixture
def cos_sqrt() -> PowerSeries:
    return builtin("cos_sqrt")


@pytest.fixture
def exp_series() -> PowerSeries:
    return builtin("exp")


@pytest.fixture
def z_delta2() -> DifferenceEquation:
    return parse_equation(Z_DELTA2)


@pytest.fixture
def z_delta3() -> DifferenceEquation:
    return parse_equation(Z_DELTA3)


@pytest.fixture
def delta_minus_one() -> DifferenceEquation:
    return parse_equation(DELTA_MINUS_ONE)


@pytest.fixture
def write_equation(tmp_path: Path):
    """Write an equation mapping to a JSON file and return its path."""

    def _write(data: dict[str, Any], name: str = "eq.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return _write
