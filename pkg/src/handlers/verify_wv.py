"""Difference analogue of the Wiman-Valiron estimate along a grid."""

from collections.abc import Sequence

from core.config import RunConfig
from core.reports.writer import emit
from core.types import RowStatus
from core.verify.wv_difference import verify_wv_difference
from handlers.common import radius_grid, series, series_config


def handle_verify_wv(config: RunConfig, argv: Sequence[str] = ()) -> int:
    params = config.params
    report = verify_wv_difference(
        series(config),
        params["k"],
        radius_grid(config),
        eps=params["eps"],
        prec=config.prec,
        eta=params["eta"],
        workers=config.workers,
        series_config=series_config(config),
    )
    rows = [
        {"r": row.r, "status": row.status, "nu": row.nu, "delta_ratio": row.delta_ratio,
         "wv_prediction": row.wv_prediction, "rel_err": row.rel_err, "bound": row.bound,
         "passed": row.passed}
        for row in report.rows
    ]
    points = [(row.r, row.rel_err) for row in report.rows if row.status is RowStatus.USED]
    emit(config, {"report": report}, rows=rows, gnuplot=points, argv=argv)
    return report.verdict.exit_code
