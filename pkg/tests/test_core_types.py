"""Tests for core types, errors and run configuration."""

from __future__ import annotations

import pytest

from core.config import DEFAULT_MAX_PREC, DEFAULT_PREC, RunConfig, default_digits, env_int
from core.errors import (
    ConfigurationError,
    DeltaWVError,
    EquationParseError,
    MinimalSolutionNotFoundError,
    NeedsMoreTermsError,
    NonConvergenceError,
    PrecisionExhaustedError,
)
from core.types import Check, RowStatus, SignPattern, Verdict


class TestVerdictEnum:
    """Tests for Verdict values and exit codes."""

    def test_values(self):
        """Test verdicts serialize as their names."""
        assert Verdict.PASS.value == "PASS"
        assert Verdict.NO_PREDICTION.value == "NO_PREDICTION"

    def test_string_comparison(self):
        """Test Verdict is a str enum."""
        assert Verdict.FAIL == "FAIL"
        assert isinstance(Verdict.COMPLETE, str)

    @pytest.mark.parametrize(
        ("verdict", "code"),
        [
            (Verdict.PASS, 0),
            (Verdict.COMPLETE, 0),
            (Verdict.NO_PREDICTION, 0),
            (Verdict.FAIL, 1),
            (Verdict.UNRELIABLE, 3),
            (Verdict.INCONCLUSIVE, 3),
        ],
    )
    def test_exit_codes(self, verdict, code):
        """Test each verdict maps to its process exit code."""
        assert verdict.exit_code == code


class TestSmallTypes:
    def test_row_status_values(self):
        assert RowStatus.USED.value == "used"
        assert RowStatus("dropped") is RowStatus.DROPPED

    def test_sign_pattern_values(self):
        assert SignPattern("alternating") is SignPattern.ALTERNATING

    def test_check_constructors(self):
        """Test Check.ok and Check.failed."""
        assert Check.ok().passed
        failed = Check.failed("spread too wide")
        assert not failed.passed
        assert failed.reason == "spread too wide"


class TestErrors:
    """Tests for the error hierarchy."""

    def test_exit_codes(self):
        assert DeltaWVError("x").exit_code == 3
        assert ConfigurationError("x").exit_code == 2
        assert EquationParseError("x").exit_code == 2
        assert PrecisionExhaustedError("x").exit_code == 3

    def test_context_is_kept(self):
        """Test keyword context travels with the error."""
        exc = PrecisionExhaustedError("too many bits", n=3, max_prec=512)
        assert exc.context == {"n": 3, "max_prec": 512}
        assert str(exc) == "too many bits"

    def test_needs_more_terms_is_non_convergence(self):
        assert issubclass(NeedsMoreTermsError, NonConvergenceError)
        with pytest.raises(DeltaWVError):
            raise MinimalSolutionNotFoundError("unstable")


class TestEnvInt:
    def test_default_when_unset(self):
        assert env_int("DELTAWV_PREC", 256, env={}) == 256

    def test_blank_counts_as_unset(self):
        assert env_int("DELTAWV_PREC", 256, env={"DELTAWV_PREC": "  "}) == 256

    def test_parses_value(self):
        assert env_int("DELTAWV_PREC", 256, env={"DELTAWV_PREC": "512"}) == 512

    def test_rejects_garbage(self):
        with pytest.raises(ConfigurationError) as exc_info:
            env_int("DELTAWV_PREC", 256, env={"DELTAWV_PREC": "lots"})
        assert "DELTAWV_PREC" in str(exc_info.value)


class TestRunConfig:
    """Tests for RunConfig resolution and validation."""

    def test_defaults(self):
        config = RunConfig(command="stirling")
        assert config.prec == DEFAULT_PREC
        assert config.max_prec == DEFAULT_MAX_PREC
        assert config.digits == default_digits(DEFAULT_PREC)
        assert config.format == "json"

    def test_default_digits_capped(self):
        assert default_digits(64) == 20
        assert default_digits(10_000) == 60

    def test_unknown_command(self):
        with pytest.raises(ConfigurationError):
            RunConfig(command="trade")

    def test_precision_floor(self):
        with pytest.raises(ConfigurationError) as exc_info:
            RunConfig(command="expand", prec=32)
        assert "64" in str(exc_info.value)

    def test_max_prec_below_prec(self):
        with pytest.raises(ConfigurationError):
            RunConfig(command="expand", prec=512, max_prec=256)

    def test_bad_format_and_workers(self):
        with pytest.raises(ConfigurationError):
            RunConfig(command="expand", format="xml")
        with pytest.raises(ConfigurationError):
            RunConfig(command="expand", workers=0)

    def test_flags_override_environment(self):
        """Test flag > environment > default."""
        env = {"DELTAWV_PREC": "128", "DELTAWV_WORKERS": "4"}
        config = RunConfig.from_env("expand", env=env, prec=512, workers=None)
        assert config.prec == 512
        assert config.workers == 4

    def test_environment_over_default(self):
        config = RunConfig.from_env("polygon", env={"DELTAWV_PREC": "128"})
        assert config.prec == 128
        assert config.digits == default_digits(128)

    def test_max_prec_raised_with_prec(self):
        """Test a large --prec lifts the default precision budget."""
        config = RunConfig.from_env("expand", env={}, prec=20_000)
        assert config.max_prec == 20_000

    def test_to_dict_leaves_out_paths(self):
        """Test output paths do not enter the embedded config."""
        a = RunConfig(command="stirling", out="a.json", params={"nmax": 8})
        b = RunConfig(command="stirling", out="b.json", gnuplot="b.dat", params={"nmax": 8})
        assert a.to_dict() == b.to_dict()
        assert "out" not in a.to_dict()
        assert a.to_dict()["params"] == {"nmax": 8}
