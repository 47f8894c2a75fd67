"""Tests for report rendering and atomic output."""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
from mpmath import mpf

from core.config import RunConfig
from core.reports.writer import (
    compare_reports,
    emit,
    render_csv,
    render_gnuplot,
    to_jsonable,
    write_atomic,
    write_sidecar,
)
from core.types import Verdict


class TestToJsonable:
    def test_numbers_become_strings(self):
        assert to_jsonable(Fraction(1, 3), 10) == "1/3"
        assert to_jsonable(Fraction(4), 10) == "4"
        assert to_jsonable(mpf("0.5"), 10) == "0.5"
        assert to_jsonable(0.1, 10) == "0.10000000000000001"
        assert to_jsonable(complex(1, 2), 10) == ["1", "2"]
        assert to_jsonable(float("inf"), 10) == "inf"

    def test_integers_and_enums(self):
        assert to_jsonable(7, 10) == 7
        assert to_jsonable(True, 10) is True
        assert to_jsonable(Verdict.PASS, 10) == "PASS"
        assert to_jsonable(np.int64(3), 10) == 3

    def test_digits_limit_mpf(self):
        assert to_jsonable(mpf(1) / 3, 5) == "0.33333"

    def test_nested(self):
        data = {"rows": [{"q": Fraction(1, 2), "ok": None}], 1: (2, 3)}
        assert to_jsonable(data, 10) == {"rows": [{"q": "1/2", "ok": None}], "1": [2, 3]}


class TestRenderCsv:
    def test_columns_in_first_seen_order(self):
        text = render_csv([{"a": 1, "b": Fraction(1, 2)}, {"c": [1, 2], "a": 2}], 10)
        assert text.splitlines() == ["a,b,c", "1,1/2,", '2,,"[1, 2]"']

    def test_config_header(self):
        text = render_csv([{"a": 1}], 10, header='config {"prec": 256}')
        assert text.splitlines()[0] == '# config {"prec": 256}'


class TestRenderGnuplot:
    def test_filters_and_sorts(self):
        points = [(1000, 10), (10, 100), (10, 1000), (100, None), (10000, 0)]
        assert render_gnuplot(points) == "1 2\n3 1\n"

    def test_empty(self):
        assert render_gnuplot([]) == ""


class TestAtomicOutput:
    def test_write_atomic_creates_parents(self, tmp_path):
        target = tmp_path / "nested" / "report.json"
        write_atomic(target, "{}\n")
        assert target.read_text() == "{}\n"
        assert [p.name for p in target.parent.iterdir()] == ["report.json"]

    def test_sidecar(self, tmp_path):
        out = tmp_path / "report.json"
        sidecar = write_sidecar(out, ["stirling", "--out", str(out)])
        meta = json.loads(sidecar.read_text())
        assert sidecar.name == "report.json.meta.json"
        assert meta["argv"] == ["stirling", "--out", str(out)]
        assert "created_at" in meta


class TestEmit:
    """Tests for emit()."""

    def test_json_to_stdout(self, capsys):
        config = RunConfig(command="stirling", params={"nmax": 2})
        emit(config, {"verdict": Verdict.COMPLETE})
        report = json.loads(capsys.readouterr().out)
        assert report["command"] == "stirling"
        assert report["config"]["params"] == {"nmax": 2}
        assert report["digits"] == config.digits
        assert report["verdict"] == "COMPLETE"

    def test_file_output_is_reproducible(self, tmp_path):
        """Test two runs differing only in --out give identical files."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        payload = {"value": mpf(2) / 3}
        for out in (first, second):
            emit(RunConfig(command="stirling", out=str(out)), payload, argv=["stirling"])
        assert compare_reports(first, second)
        assert (tmp_path / "a.json.meta.json").exists()
        assert "out" not in json.loads(first.read_text())["config"]

    def test_csv_uses_rows(self, tmp_path):
        out = tmp_path / "rows.csv"
        config = RunConfig(command="stirling", format="csv", out=str(out))
        emit(config, {"rows": [{"n": 1}]}, rows=[{"n": 0}, {"n": 1}])
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# config {")
        assert lines[1:] == ["n", "0", "1"]

    def test_gnuplot_file(self, tmp_path):
        plot = tmp_path / "decay.dat"
        config = RunConfig(command="verify-first", out=str(tmp_path / "r.json"), gnuplot=str(plot))
        emit(config, {}, gnuplot=[(10, 100)])
        assert plot.read_text() == "1 2\n"


class TestCompareReports:
    def test_different_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        a.write_text("x\n")
        b.write_text("y\n")
        assert not compare_reports(a, b)
