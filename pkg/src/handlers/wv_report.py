"""Wiman-Valiron profile: maximal term, central index and maximum modulus along a grid."""

import logging
from collections.abc import Sequence

from core.analysis.wiman_valiron import check_pointwise_bounds, fit_wv_constant, wv_profile
from core.config import RunConfig
from core.reports.writer import emit
from core.types import RowStatus, Verdict
from handlers.common import radius_grid, series

logger = logging.getLogger(__name__)


def handle_wv_report(config: RunConfig, argv: Sequence[str] = ()) -> int:
    """Emit the WVProfile; with --k also the pointwise bounds and empirical constants for 1..k.

    Returns FAIL's exit code when a computed pointwise row breaks its bound.
    """
    params = config.params
    f = series(config)
    grid = radius_grid(config)
    profile = wv_profile(f, grid, params["circle_samples"], config.prec)
    payload: dict = {"profile": profile}
    rows = [{"r": s.r, "mu": s.mu, "nu": s.nu, "M": s.M} for s in profile.samples]
    verdict = Verdict.COMPLETE

    k_max = params.get("k")
    if k_max:
        ks = list(range(1, k_max + 1))
        pointwise = {
            k: check_pointwise_bounds(f, k, params["eps"], grid, prec=config.prec) for k in ks
        }
        payload["pointwise"] = pointwise
        payload["constants"] = fit_wv_constant(f, ks, grid, params["eps"], config.prec)
        failed = [
            (k, row.r) for k, table in pointwise.items() for row in table
            if row.status is RowStatus.USED and not row.passed
        ]
        verdict = Verdict.FAIL if failed else Verdict.PASS
        if failed:
            logger.info("%s: %d pointwise rows out of bounds", f.name, len(failed))
    payload["verdict"] = verdict
    emit(config, payload, rows=rows, argv=argv)
    return verdict.exit_code
