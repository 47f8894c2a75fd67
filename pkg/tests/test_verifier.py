"""Tests for the expansion-decay harness and the difference Wiman-Valiron check."""

from __future__ import annotations

from fractions import Fraction

import pytest

from core.analysis.grid import geometric_grid
from core.analysis.series import SeriesConfig, polynomial
from core.errors import ConfigurationError, InsufficientDataError
from core.types import RowStatus, Verdict
from core.verify.decay import (
    DecayReport,
    DecayRow,
    decay_row,
    judge,
    verify_expansion,
    verify_first_difference,
)
from core.verify.fitting import fit_decay_exponent
from core.verify.wv_difference import verify_wv_difference, wv_difference_row


@pytest.fixture(scope="module")
def grid():
    return geometric_grid(1e2, 1e6, 9)


def _report(statuses: list[RowStatus], sigma: float = 0.5) -> DecayReport:
    rows = []
    for i, status in enumerate(statuses, start=2):
        err = 10.0 ** (-i) if status is RowStatus.USED else None
        rows.append(DecayRow(r=10.0**i, status=status, abs_err=err))
    return DecayReport(f_name="synthetic", n=1, N=1, eta=1, eps=0.05, sigma=sigma, rows=rows)


class TestFitDecayExponent:
    def test_exact_power_law(self):
        slope, r2 = fit_decay_exponent([(10.0**i, 3 * 10.0 ** (-2 * i)) for i in range(1, 6)])
        assert slope == pytest.approx(-2.0)
        assert r2 == pytest.approx(1.0)

    def test_ignores_zero_errors(self):
        rows = [(10.0**i, 10.0**-i) for i in range(1, 5)] + [(1e6, 0)]
        slope, _ = fit_decay_exponent(rows)
        assert slope == pytest.approx(-1.0)

    def test_needs_four_rows(self):
        with pytest.raises(InsufficientDataError) as exc_info:
            fit_decay_exponent([(10.0, 0.1), (100.0, 0.01), (1000.0, 0.001)])
        assert exc_info.value.context["rows"] == 3


class TestJudge:
    """Tests for verdict assignment from rows."""

    def test_mostly_dropped_is_unreliable(self):
        report = judge(_report([RowStatus.DROPPED] * 3 + [RowStatus.USED]))
        assert report.verdict is Verdict.UNRELIABLE
        assert report.dropped == 3

    def test_too_few_rows_is_inconclusive(self):
        report = judge(_report([RowStatus.USED] * 3 + [RowStatus.EXCLUDED]))
        assert report.verdict is Verdict.INCONCLUSIVE
        assert report.excluded == 1

    def test_slope_against_conservative_target(self):
        report = judge(_report([RowStatus.USED] * 5))
        assert report.fitted_slope == pytest.approx(-1.0)
        assert report.verdict is Verdict.PASS

    def test_order_one_is_never_a_pass(self):
        report = judge(_report([RowStatus.USED] * 5, sigma=1.0))
        assert report.verdict is Verdict.FAIL
        assert "order 1" in report.reason

    def test_claimed_exponents(self):
        report = DecayReport(f_name="f", n=2, N=3, eta=1, eps=0.05, sigma=0.5)
        assert report.claimed_exponent_full == pytest.approx(-3.0)
        assert report.claimed_exponent_conservative == pytest.approx(-2.0)
        data = report.to_dict()
        assert data["claimed_exponent_full"] == pytest.approx(-3.0)
        assert data["dropped"] == 0


class TestDecayRow:
    def test_near_zero_is_excluded(self, cos_sqrt):
        row = decay_row(cos_sqrt, 1, 1, 1, 0.05, 0.5, 256, 2.4674)
        assert row.status is RowStatus.EXCLUDED

    def test_precision_budget_drops_row(self, bessel):
        row = decay_row(
            bessel, 1, 1, 1, 0.05, 0.5, 64, 100, series_config=SeriesConfig(max_prec=64)
        )
        assert row.status is RowStatus.DROPPED
        assert "bits" in row.reason

    def test_polynomial_rows_are_exact(self):
        row = decay_row(polynomial([1, 0, 0, 1]), 1, 1, 1, 0.05, 0.0, 256, 10)
        assert isinstance(row.abs_err, Fraction)
        # Delta f / f - f'/f for f = 1 + z^3 at z = 10
        assert row.abs_err == Fraction(331, 1001) - Fraction(300, 1001)
        assert row.status is RowStatus.USED


class TestVerifyExpansion:
    """End-to-end decay checks on the built-in series."""

    def test_bessel_first_difference(self, bessel, grid):
        report = verify_expansion(bessel, 1, 1, 1, grid)
        assert report.verdict is Verdict.PASS
        assert report.fitted_slope == pytest.approx(-1.0, abs=0.05)
        assert all(row.status is RowStatus.USED for row in report.rows)
        assert all(row.within_conservative_bound for row in report.rows)
        assert [row.r for row in report.rows] == grid

    def test_first_difference_alias(self, bessel, grid):
        a = verify_first_difference(bessel, 1, 1, grid)
        b = verify_expansion(bessel, 1, 1, 1, grid)
        assert a.fitted_slope == b.fitted_slope
        assert a.claimed_exponent_full == a.claimed_exponent_conservative - 0.5

    def test_exp_fails(self, exp_series, grid):
        report = verify_expansion(exp_series, 1, 1, 1, grid[:5])
        assert report.verdict is Verdict.FAIL

    def test_polynomial_exact_truncation(self, grid):
        """Test N = degree makes every row exact and the run a PASS."""
        report = verify_expansion(polynomial([1, 1, 1]), 1, 2, 1, grid)
        assert report.verdict is Verdict.PASS
        assert all(row.abs_err == 0 for row in report.rows)
        assert "exact" in report.reason

    def test_polynomial_decay_rate(self, grid):
        report = verify_expansion(polynomial([1, 0, 0, 1]), 1, 1, 1, grid)
        assert report.verdict is Verdict.PASS
        assert report.fitted_slope == pytest.approx(-2.0, abs=0.05)

    def test_requires_N_ge_n(self, bessel, grid):
        with pytest.raises(ConfigurationError):
            verify_expansion(bessel, 2, 1, 1, grid)

    @pytest.mark.slow
    @pytest.mark.parametrize("N", [2, 3])
    def test_bessel_higher_truncation(self, bessel, grid, N):
        report = verify_expansion(bessel, 1, N, 1, grid, prec=512)
        assert report.verdict is Verdict.PASS, report.reason
        assert report.fitted_slope == pytest.approx((N + 1) * -0.5, abs=0.1)
        assert all(row.status is RowStatus.USED for row in report.rows)
        assert all(row.within_conservative_bound for row in report.rows)

    @pytest.mark.slow
    @pytest.mark.parametrize(("n", "N"), [(2, 2), (2, 4), (3, 3)])
    def test_higher_differences(self, bessel, grid, n, N):
        """Test Delta^n at the 0.1 exponent slack used for higher differences."""
        report = verify_expansion(bessel, n, N, 1, grid, eps=0.1, prec=512)
        assert report.verdict is Verdict.PASS, report.reason
        assert report.fitted_slope <= (N + 1) * -0.5 + 0.1
        data = report.to_dict()
        assert data["claimed_exponent_full"] == pytest.approx((n + N + 1) * -0.5)
        assert data["claimed_exponent_conservative"] == pytest.approx((N + 1) * -0.5)
        assert report.fitted_slope > data["claimed_exponent_full"]

    @pytest.mark.slow
    def test_second_difference_misses_tight_slack(self, bessel, grid):
        """Test the pre-asymptotic slope of Delta^2 with N = 4 sits just above -2.45."""
        report = verify_expansion(bessel, 2, 4, 1, grid, eps=0.05, prec=512)
        assert report.verdict is Verdict.FAIL
        assert report.fitted_slope == pytest.approx(-2.445, abs=0.01)


class TestVerifyWVDifference:
    def test_bessel_within_band(self, bessel):
        report = verify_wv_difference(bessel, 1, geometric_grid(1e3, 1e6, 4))
        assert report.verdict is Verdict.PASS
        first = report.rows[0]
        assert first.nu == 31
        assert first.passed
        assert first.earlier_passed

    def test_row_near_zero(self, cos_sqrt):
        row = wv_difference_row(cos_sqrt, 1, 1, 0.05, 0.5, 256, 2.4674)
        assert row.status is RowStatus.EXCLUDED

    def test_k_must_be_positive(self, bessel, grid):
        with pytest.raises(ConfigurationError):
            verify_wv_difference(bessel, 0, grid)

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_bessel_band_up_to_1e7(self, bessel, k):
        report = verify_wv_difference(bessel, k, geometric_grid(1e3, 1e7, 5))
        assert report.verdict is Verdict.PASS
        assert len(report.rows) == 5
        assert all(row.passed for row in report.rows)
