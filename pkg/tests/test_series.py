"""Tests for power series, the summation kernel, differences and log-derivatives."""

from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from core.analysis import series as series_module
from core.analysis.series import (
    ReciprocalGammaRule,
    SeriesConfig,
    builtin,
    delta_exact,
    deriv,
    evaluate,
    exact_rational,
    log_derivative,
    log_derivative_bounded,
    order_from_coefficients,
    polynomial,
    reciprocal_gamma_coefficients,
    sum_series,
    taylor_remainder,
    zero_excluded,
)
from core.errors import (
    ConfigurationError,
    DivisionAtZeroError,
    NonConvergenceError,
    PrecisionExhaustedError,
)
from core.types import SignPattern, TrendFlag


def _close(a, b, bits: int = 200) -> bool:
    with mp.workprec(bits + 64):
        return abs(a - b) <= abs(b) * mp.ldexp(1, -bits)


class TestBuiltins:
    """Tests for the named series."""

    def test_metadata(self, bessel, cos_sqrt, exp_series):
        assert bessel.order_hint == Fraction(1, 2)
        assert bessel.nonneg_coeffs
        assert cos_sqrt.sign_pattern is SignPattern.ALTERNATING
        assert cos_sqrt.known_positive_zeros is not None
        assert exp_series.order_hint == 1

    def test_shared_instances(self):
        """Test named builtins are cached."""
        assert builtin("exp") is builtin("exp")

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError) as exc_info:
            builtin("sinh")
        assert "bessel_i0_sqrt" in str(exc_info.value)

    def test_exact_coefficients(self, bessel, cos_sqrt):
        assert bessel.exact_coeff(3) == Fraction(1, 36)
        assert cos_sqrt.exact_coeff(2) == Fraction(1, 24)
        assert cos_sqrt.exact_coeff(3) == Fraction(-1, 720)

    def test_recip_gamma_leading_coefficients(self):
        coeffs = reciprocal_gamma_coefficients(8, 128)
        with mp.workprec(128):
            assert coeffs[0] == 0
            assert coeffs[1] == 1
            assert _close(coeffs[2], +mp.euler, 100)

    def test_negative_index(self, bessel):
        with pytest.raises(ConfigurationError):
            bessel.coeff(-1)


class TestReciprocalGamma:
    """Tests for the 1/Gamma series."""

    def test_coefficients_computed_in_doubling_blocks(self, monkeypatch):
        calls = []
        compute = series_module.reciprocal_gamma_coefficients

        def counting(count, prec):
            calls.append(count)
            return compute(count, prec)

        monkeypatch.setattr(series_module, "reciprocal_gamma_coefficients", counting)
        rule = ReciprocalGammaRule()
        coeffs = [rule.coefficient(n, 192) for n in range(200)]
        assert calls == [16, 32, 64, 128, 256]
        assert coeffs[1] == 1
        with mp.workprec(192):
            assert _close(coeffs[2], +mp.euler, 150)

    def test_value_at_ten(self):
        """Test Phi(10) = 1/9! at 256 bits."""
        result = evaluate(builtin("recip_gamma"), 10, prec=256)
        with mp.workprec(320):
            assert _close(result.value, mp.rgamma(10), 240)

    def test_first_difference_ratio(self):
        phi = builtin("recip_gamma")
        delta = delta_exact(phi, 1, 1, 10, prec=256)
        base = evaluate(phi, 10, prec=256)
        with mp.workprec(256):
            assert abs(delta.value / base.value + mpf("0.9")) < mpf(10) ** -60


class TestPolynomials:
    def test_sign_patterns(self):
        assert polynomial([1, 2, 3]).sign_pattern is SignPattern.NONNEGATIVE
        assert polynomial([1, -1, 1]).sign_pattern is SignPattern.ALTERNATING
        assert polynomial([1, 0, -1]).sign_pattern is SignPattern.GENERAL

    def test_trailing_zeros_trimmed(self):
        p = polynomial(["1/2", "3", "0", "0"])
        assert p.rule.degree == 1
        assert p.name == "poly:[1/2,3]"
        assert p.is_polynomial

    def test_inline_and_file_forms(self, tmp_path):
        path = tmp_path / "coeffs.json"
        path.write_text(json.dumps(["1", "-1/3"]))
        from_file = builtin(f"poly:@{path}")
        inline = builtin("poly:[1, -1/3]")
        assert from_file.rule.coefficients == inline.rule.coefficients == (1, Fraction(-1, 3))

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "coeffs.json"
        path.write_text(json.dumps({"a": 1}))
        with pytest.raises(ConfigurationError):
            builtin(f"poly:@{path}")

    def test_exact_evaluation(self):
        """Test rational points give exact values with no tail."""
        result = evaluate(polynomial([1, 2, 3]), Fraction(1, 2))
        assert result.exact == Fraction(11, 4)
        assert result.tail_bound == 0


class TestEvaluate:
    """Tests for evaluate and the summation kernel."""

    def test_bessel(self, bessel):
        result = evaluate(bessel, 1, prec=256)
        with mp.workprec(300):
            assert _close(result.value, mp.besseli(0, 2))

    def test_exp_large_argument(self, exp_series):
        result = evaluate(exp_series, 50, prec=256)
        with mp.workprec(300):
            assert _close(result.value, mp.exp(50))
        assert result.error_bound < result.value * mpf(2) ** -250

    def test_cos_sqrt_cancellation(self, cos_sqrt):
        """Test the alternating sum at r = 10^4 still reaches the target precision."""
        result = evaluate(cos_sqrt, 10_000, prec=256)
        with mp.workprec(600):
            assert _close(result.value, mp.cos(100), 200)
        assert result.working_prec > 256 + 32

    def test_complex_point(self, exp_series):
        result = evaluate(exp_series, complex(0, 1), prec=128)
        with mp.workprec(160):
            assert abs(result.value - mp.expj(1)) < mpf(2) ** -120

    def test_origin(self, bessel):
        assert evaluate(bessel, 0).value == 1

    def test_precision_floor(self, bessel):
        with pytest.raises(ConfigurationError):
            evaluate(bessel, 1, prec=32)

    def test_precisions_agree(self, bessel):
        low = evaluate(bessel, 300, prec=128).value
        high = evaluate(bessel, 300, prec=256).value
        assert _close(low, high, 120)

    def test_kernel_finite_sum(self):
        result = sum_series(lambda: iter([mpf(1), mpf(2), mpf(3)]), 64, finite=True)
        assert result.value == 6
        assert result.terms_used == 3

    def test_kernel_term_budget(self):
        def ones():
            while True:
                yield mpf(1)

        with pytest.raises(NonConvergenceError) as exc_info:
            sum_series(ones, 64, config=SeriesConfig(term_budget=100))
        assert exc_info.value.context["terms"] == 100

    def test_kernel_short_iterator(self):
        with pytest.raises(NonConvergenceError):
            sum_series(lambda: iter([mpf(1)]), 64)


class TestExactRational:
    def test_conversions(self):
        assert exact_rational(3) == 3
        assert exact_rational(0.5) == Fraction(1, 2)
        assert exact_rational(mpf("0.25")) == Fraction(1, 4)
        assert exact_rational(complex(1, 2)) is None
        assert exact_rational(True) is None


class TestDerivatives:
    def test_exp_derivative(self, exp_series):
        result = evaluate(deriv(exp_series, 3), 2, prec=128)
        with mp.workprec(160):
            assert _close(result.value, mp.exp(2), 120)

    def test_polynomial_derivative(self):
        d = deriv(polynomial([5, 0, 1]), 1)
        assert d.rule.coefficients == (0, 2)

    def test_derivatives_compose(self, bessel):
        assert deriv(deriv(bessel, 1), 2).name == "bessel_i0_sqrt^(3)"
        assert deriv(bessel, 0) is bessel

    def test_negative_order(self, bessel):
        with pytest.raises(ConfigurationError):
            deriv(bessel, -1)


class TestDeltaExact:
    """Tests for exact forward differences."""

    def test_polynomial_is_exact(self):
        square = polynomial([0, 0, 1])
        assert delta_exact(square, 2, 1, 7).exact == 2
        assert delta_exact(square, 2, Fraction(1, 2), 7).exact == Fraction(1, 2)
        assert delta_exact(square, 3, 1, 7).exact == 0

    def test_exp_first_difference(self, exp_series):
        result = delta_exact(exp_series, 1, 1, 10, prec=128)
        with mp.workprec(200):
            assert _close(result.value, mp.exp(10) * (mp.e - 1), 120)

    def test_bessel_high_order(self, bessel):
        """Test Delta^3 survives the cancellation between shifted values."""
        result = delta_exact(bessel, 3, 1, 10_000, prec=128)
        with mp.workprec(400):
            expected = sum(
                (-1) ** (3 - j) * mp.binomial(3, j) * mp.besseli(0, 2 * mp.sqrt(10_000 + j))
                for j in range(4)
            )
            assert _close(result.value, expected, 110)

    def test_order_must_be_positive(self, bessel):
        with pytest.raises(ConfigurationError):
            delta_exact(bessel, 0, 1, 1)

    def test_precision_budget(self, bessel):
        with pytest.raises(PrecisionExhaustedError) as exc_info:
            delta_exact(bessel, 1, 1, 100, prec=64, config=SeriesConfig(max_prec=64))
        assert exc_info.value.context["max_prec"] == 64


class TestLogDerivative:
    def test_exp(self, exp_series):
        with mp.workprec(128):
            assert _close(log_derivative(exp_series, 2, 5, prec=128), mpf(1), 120)

    def test_bessel(self, bessel):
        value, bound = log_derivative_bounded(bessel, 1, 100, prec=128)
        with mp.workprec(200):
            expected = mp.besseli(1, 20) / (10 * mp.besseli(0, 20))
            assert _close(value, expected, 110)
        assert bound < abs(value) * mpf(2) ** -100

    def test_zero_order(self, bessel):
        assert log_derivative(bessel, 0, 3) == 1

    def test_exact_zero_raises(self):
        with pytest.raises(DivisionAtZeroError):
            log_derivative(polynomial([-1, 1]), 1, 1)

    def test_polynomial_exact(self):
        value = log_derivative(polynomial([0, 0, 1]), 1, Fraction(1, 2))
        assert value == 4


class TestZeroExclusion:
    def test_near_first_zero(self, cos_sqrt):
        assert zero_excluded(cos_sqrt, 2.4674)

    def test_between_zeros(self, cos_sqrt):
        assert not zero_excluded(cos_sqrt, 10)

    def test_nonnegative_series_never_excluded(self, bessel):
        assert not zero_excluded(bessel, 2.4674)


class TestOrderFromCoefficients:
    """Tests for the coefficient-decay order estimate."""

    @pytest.mark.parametrize(
        ("name", "order"),
        [("bessel_i0_sqrt", 0.5), ("cos_sqrt", 0.5), ("exp", 1.0)],
    )
    def test_known_orders(self, name, order):
        estimate = order_from_coefficients(builtin(name), 200)
        assert estimate.order == pytest.approx(order, abs=0.01)
        assert estimate.raw > 0

    def test_raw_estimate_drifts(self, bessel):
        """Test the literal limsup overshoots and is still falling at the window edge."""
        estimate = order_from_coefficients(bessel, 200)
        assert estimate.trend is TrendFlag.DECREASING
        assert estimate.raw > estimate.order

    def test_polynomial(self):
        assert order_from_coefficients(polynomial([1, 2]), 32).order == 0.0

    def test_window_too_small(self, bessel):
        with pytest.raises(ConfigurationError):
            order_from_coefficients(bessel, 8)


class TestTaylorRemainder:
    def test_bound_holds(self, exp_series):
        result = taylor_remainder(exp_series, 2, 1, Fraction(1, 2), prec=128)
        assert result.holds
        assert result.remainder > 0


def _random_poly(rng: random.Random, degree: int) -> list[Fraction]:
    coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(degree)]
    return coeffs + [Fraction(rng.choice((-1, 1)) * rng.randint(1, 9), rng.randint(1, 6))]


class TestDifferenceInvariants:
    """Tests for linearity, commutation and soundness of the difference operator."""

    def test_linearity(self):
        rng = random.Random(7)
        for _ in range(25):
            f = _random_poly(rng, rng.randint(0, 6))
            g = _random_poly(rng, rng.randint(0, 6))
            alpha = Fraction(rng.choice((-1, 1)) * rng.randint(1, 5), rng.randint(1, 4))
            beta = Fraction(rng.choice((-1, 1)) * rng.randint(1, 5), rng.randint(1, 4))
            width = max(len(f), len(g))
            f += [Fraction(0)] * (width - len(f))
            g += [Fraction(0)] * (width - len(g))
            combo = polynomial([alpha * a + beta * b for a, b in zip(f, g)])
            n = rng.randint(1, 4)
            eta = Fraction(rng.randint(1, 3), rng.randint(1, 2))
            z = Fraction(rng.randint(-30, 30), rng.randint(1, 5))
            lhs = delta_exact(combo, n, eta, z).exact
            rhs = alpha * delta_exact(polynomial(f), n, eta, z).exact
            rhs += beta * delta_exact(polynomial(g), n, eta, z).exact
            assert lhs == rhs

    def test_degree_annihilation(self):
        rng = random.Random(3)
        for degree in range(7):
            p = polynomial(_random_poly(rng, degree))
            for n in range(degree + 1, degree + 3):
                z = rng.randint(-50, 50)
                assert delta_exact(p, n, 1, z).exact == 0

    @pytest.mark.parametrize("name", ["bessel_i0_sqrt", "exp"])
    def test_derivative_commutes_with_difference(self, name):
        """Test Delta^2 f' against a central difference of Delta^2 f."""
        f = builtin(name)
        with mp.workprec(320):
            z, h = mpf(50), mpf(2) ** -80
            plus = delta_exact(f, 2, 1, z + h, prec=256).value
            minus = delta_exact(f, 2, 1, z - h, prec=256).value
            central = (plus - minus) / (2 * h)
            direct = delta_exact(deriv(f, 1), 2, 1, z, prec=256).value
            assert abs(direct - central) < abs(direct) * mpf(2) ** -100

    def test_doubling_precision_stays_within_bounds(self):
        rng = random.Random(11)
        for _ in range(20):
            f = builtin(rng.choice(["bessel_i0_sqrt", "cos_sqrt", "exp"]))
            z = rng.uniform(-200, 200)
            low = evaluate(f, z, prec=128)
            high = evaluate(f, z, prec=256)
            with mp.workprec(320):
                slack = abs(high.value) * mpf(2) ** -120 + high.error_bound
                assert abs(low.value - high.value) <= low.error_bound + slack, (f.name, z)

    @pytest.mark.parametrize("name", ["bessel_i0_sqrt", "exp"])
    def test_taylor_remainder_grid(self, name):
        f = builtin(name)
        for z in (Fraction(1), Fraction(10), Fraction(100)):
            for eta in (Fraction(1, 2), Fraction(1)):
                for n in range(4):
                    assert taylor_remainder(f, n, z, eta, prec=128).holds, (z, eta, n)
