"""Decay verification of the truncated Stirling expansion."""

from collections.abc import Sequence

from core.config import RunConfig
from core.reports.writer import emit
from core.types import RowStatus
from core.verify.decay import DecayReport, verify_expansion
from handlers.common import radius_grid, series, series_config


def emit_decay_report(config: RunConfig, report: DecayReport, argv: Sequence[str]) -> int:
    points = [(row.r, row.abs_err) for row in report.rows if row.status is RowStatus.USED]
    rows = [
        {"r": row.r, "status": row.status, "lhs": row.lhs, "rhs": row.rhs,
         "abs_err": row.abs_err, "noise": row.noise,
         "within_conservative_bound": row.within_conservative_bound}
        for row in report.rows
    ]
    emit(config, {"report": report}, rows=rows, gnuplot=points, argv=argv)
    return report.verdict.exit_code


def handle_verify_expansion(config: RunConfig, argv: Sequence[str] = ()) -> int:
    params = config.params
    report = verify_expansion(
        series(config),
        params["n"],
        params["N"],
        params["eta"],
        radius_grid(config),
        eps=params["eps"],
        prec=config.prec,
        workers=config.workers,
        series_config=series_config(config),
    )
    return emit_decay_report(config, report, argv)

