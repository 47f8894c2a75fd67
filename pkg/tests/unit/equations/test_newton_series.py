"""Tests for Newton-series evaluation."""

from __future__ import annotations

from fractions import Fraction

import pytest
from mpmath import mp

from core.equations.growth import equation_residual
from core.equations.newton_series import eval_newton_series, newton_majorant, newton_value
from core.equations.recurrence import binomial_recurrence
from core.equations.solver import NewtonSeriesSolution, solve_minimal
from core.errors import ConfigurationError, NeedsMoreTermsError

F = Fraction


def _half_power(terms: int) -> NewtonSeriesSolution:
    """(1/2)^z = sum_m (-1/2)^m C(z, m)."""
    return NewtonSeriesSolution.from_coefficients([F(-1, 2) ** m for m in range(terms)])


class TestNewtonValue:
    def test_finite_sum_is_exact(self):
        sol = NewtonSeriesSolution.from_coefficients([F(1), F(2), F(1)], finite=True)
        result = newton_value(sol, F(7, 2))
        assert result.exact == F(99, 8)
        assert result.tail_bound == 0

    def test_integer_point_truncates(self):
        """Test C(5, m) = 0 for m > 5 makes 2^5 an exact partial sum."""
        sol = NewtonSeriesSolution.from_coefficients([F(1)] * 10)
        result = newton_value(sol, 5)
        assert result.exact == 32
        assert result.terms_used == 6

    def test_infinite_sum(self):
        sol = _half_power(400)
        result = newton_value(sol, F(5, 2))
        with mp.workprec(256):
            assert abs(result.value - mp.mpf(2) ** mp.mpf(-2.5)) < mp.mpf(10) ** -60
        assert result.exact is None

    def test_diverging_tail(self):
        """Test C(-3/2, m) grows, so the stored terms never satisfy the tail criterion."""
        sol = NewtonSeriesSolution.from_coefficients([F(1)] * 50)
        with pytest.raises(NeedsMoreTermsError) as exc_info:
            newton_value(sol, F(-3, 2))
        assert exc_info.value.context["terms"] == 50


class TestEvalNewtonSeries:
    @pytest.mark.parametrize("z", [0, -1, complex(1, 1)])
    def test_rejects_non_positive(self, z):
        sol = _half_power(10)
        with pytest.raises(ConfigurationError):
            eval_newton_series(sol, z)

    def test_positive_point(self):
        sol = NewtonSeriesSolution.from_coefficients([F(0), F(1)], finite=True)
        assert eval_newton_series(sol, F(3, 4)).exact == F(3, 4)


class TestMajorant:
    def test_alternating_coefficients_match_negative_axis(self):
        sol = _half_power(400)
        majorant = newton_majorant(sol, 3)
        with mp.workprec(256):
            assert abs(majorant.value - 8) < mp.mpf(10) ** -60
            assert abs(majorant.value - abs(newton_value(sol, -3).value)) < mp.mpf(10) ** -60

    def test_short_solution(self):
        with pytest.raises(NeedsMoreTermsError):
            newton_majorant(_half_power(10), 3)


class TestEquationResidual:
    def test_minimal_solution_solves_equation(self, z_delta2):
        sol = solve_minimal(binomial_recurrence(z_delta2), 120)
        assert equation_residual(z_delta2, sol, F(21, 2)) < 1e-15

    def test_wrong_solution_has_large_residual(self, z_delta2):
        """Test 2^z does not solve z Delta^2 f + f = 0."""
        sol = NewtonSeriesSolution.from_coefficients([F(1)] * 40)
        assert equation_residual(z_delta2, sol, F(3)) > 1
