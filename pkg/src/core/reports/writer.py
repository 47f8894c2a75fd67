from __future__ import annotations

"""Report serialization: JSON, CSV and gnuplot data, written atomically.

Numbers from arbitrary-precision values become decimal strings with a fixed
digit count, so identical runs give byte-identical reports. Timestamps go to
a `<out>.meta.json` sidecar, never into the report.
"""

import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import fields, is_dataclass
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import mpmath
from mpmath import mpc, mpf

from core.config import RunConfig
from core.equations.equation import format_rational

logger = logging.getLogger(__name__)

FLOAT_DIGITS = 17


def package_version() -> str:
    try:
        return version("deltawv")
    except PackageNotFoundError:
        return "0+unknown"


def to_jsonable(value: Any, digits: int) -> Any:
    """Convert report objects to JSON-ready values; every non-integer number becomes a string."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, mpf):
        return mpmath.nstr(value, digits)
    if isinstance(value, mpc):
        return [mpmath.nstr(value.real, digits), mpmath.nstr(value.imag, digits)]
    if isinstance(value, float):
        return format(value, f".{FLOAT_DIGITS}g") if math.isfinite(value) else str(value)
    if isinstance(value, complex):
        return [to_jsonable(value.real, digits), to_jsonable(value.imag, digits)]
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict(), digits)
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name), digits) for f in fields(value)}
    if isinstance(value, Mapping):
        return {str(to_jsonable(k, digits)): to_jsonable(v, digits) for k, v in value.items()}
    if isinstance(value, Iterable):
        return [to_jsonable(v, digits) for v in value]
    if hasattr(value, "__index__"):
        return int(value)
    # numpy floats and anything else float-like
    return to_jsonable(float(value), digits)


def render_json(report: Mapping[str, Any], digits: int) -> str:
    return json.dumps(to_jsonable(report, digits), indent=2) + "\n"


def render_csv(rows: Sequence[Mapping[str, Any]], digits: int, header: str | None = None) -> str:
    """CSV with one column per key (first-seen order); nested values are JSON-encoded."""
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buffer = io.StringIO()
    if header:
        buffer.write(f"# {header}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for key in columns:
            cell = to_jsonable(row.get(key), digits)
            if cell is None:
                cell = ""
            elif isinstance(cell, (list, dict)):
                cell = json.dumps(cell)
            cells.append(cell)
        writer.writerow(cells)
    return buffer.getvalue()


def render_gnuplot(points: Iterable[tuple[Any, Any]]) -> str:
    """`log10 r  log10 err` lines: finite rows only, strictly increasing in r."""
    lines = []
    last = -math.inf
    for r, err in sorted(((float(r), float(e)) for r, e in points if e is not None),
                         key=lambda p: p[0]):
        if not (math.isfinite(r) and math.isfinite(err)) or r <= 0 or err <= 0:
            continue
        if r <= last:
            continue
        last = r
        lines.append(f"{math.log10(r):.{FLOAT_DIGITS}g} {math.log10(err):.{FLOAT_DIGITS}g}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory and os.replace."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_sidecar(out: str | Path, argv: Sequence[str]) -> Path:
    sidecar = Path(f"{out}.meta.json")
    meta = {
        "created_at": datetime.now(timezone.utc).isoformat(),
        "argv": list(argv),
        "version": package_version(),
    }
    write_atomic(sidecar, json.dumps(meta, indent=2) + "\n")
    return sidecar


def emit(
    config: RunConfig,
    payload: Mapping[str, Any],
    rows: Sequence[Mapping[str, Any]] | None = None,
    gnuplot: Iterable[tuple[Any, Any]] | None = None,
    argv: Sequence[str] = (),
) -> str:
    """Render a command's output in config.format and deliver it.

    Args:
        config: Resolved run configuration, embedded in the output
        payload: Command results (JSON body)
        rows: Table for CSV output; defaults to payload["rows"]
        gnuplot: (r, err) pairs for the --gnuplot file
        argv: Command line, recorded in the sidecar only

    Returns:
        The rendered report text
    """
    digits = config.digits
    if config.format == "csv":
        table = rows if rows is not None else payload.get("rows", [])
        header = json.dumps(to_jsonable(config.to_dict(), digits), sort_keys=True)
        text = render_csv(table, digits, header=f"config {header}")
    else:
        report = {"command": config.command, "config": config.to_dict(), "digits": digits}
        report.update(payload)
        text = render_json(report, digits)

    if config.out:
        write_atomic(config.out, text)
        write_sidecar(config.out, argv)
        logger.info("Wrote %s", config.out)
    else:
        sys.stdout.write(text)
    if config.gnuplot and gnuplot is not None:
        write_atomic(config.gnuplot, render_gnuplot(gnuplot))
        logger.info("Wrote gnuplot data %s", config.gnuplot)
    return text


def compare_reports(first: str | Path, second: str | Path) -> bool:
    """Byte-for-byte comparison of two report files (sidecars are not read)."""
    return Path(first).read_bytes() == Path(second).read_bytes()
