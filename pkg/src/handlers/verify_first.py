"""Decay verification of the first-difference expansion."""

from collections.abc import Sequence

from core.config import RunConfig
from core.verify.decay import verify_first_difference
from handlers.common import radius_grid, series, series_config
from handlers.verify_expansion import emit_decay_report


def handle_verify_first(config: RunConfig, argv: Sequence[str] = ()) -> int:
    params = config.params
    report = verify_first_difference(
        series(config),
        params["N"],
        params["eta"],
        radius_grid(config),
        eps=params["eps"],
        prec=config.prec,
        workers=config.workers,
        series_config=series_config(config),
    )
    return emit_decay_report(config, report, argv)
