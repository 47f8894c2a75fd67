"""Truncated Stirling expansion next to the exact difference quotient."""

import logging
from collections.abc import Sequence

from mpmath import mp

from core.analysis.series import delta_exact, evaluate
from core.analysis.stirling import build_table, expansion_bounded
from core.config import RunConfig
from core.errors import DivisionAtZeroError
from core.reports.writer import emit
from core.types import Verdict
from handlers.common import series, series_config

logger = logging.getLogger(__name__)


def handle_expand(config: RunConfig, argv: Sequence[str] = ()) -> int:
    """For each z: the truncated expansion, Delta^n f/f, and their difference."""
    params = config.params
    f = series(config)
    n, N, eta = params["n"], params["N"], params["eta"]
    settings = series_config(config)
    table = build_table(N)
    rows = []
    for z in params["z"]:
        value, err = expansion_bounded(f, n, N, eta, z, config.prec, settings, table)
        delta = delta_exact(f, n, eta, z, config.prec, settings)
        base = evaluate(f, z, config.prec, settings)
        if abs(base.value) <= base.error_bound:
            raise DivisionAtZeroError(f"{f.name} vanishes to working accuracy at z={z}", z=z)
        with mp.workprec(config.prec + settings.guard_bits):
            ratio = delta.value / base.value
            rows.append({
                "z": z,
                "expansion": value,
                "expansion_error": err,
                "delta_over_f": ratio,
                "difference": abs(ratio - value),
            })
    logger.info("Expanded %s at %d points", f.name, len(rows))
    payload = {"f_name": f.name, "n": n, "N": N, "eta": eta, "rows": rows,
               "verdict": Verdict.COMPLETE}
    emit(config, payload, rows=rows, argv=argv)
    return Verdict.COMPLETE.exit_code
