"""Delta Phi / Phi = 1/z - 1 for Phi = 1/Gamma, against the nu/z prediction."""

from collections.abc import Sequence

from core.config import RunConfig
from core.reports.writer import emit
from core.types import Verdict
from core.verify.wv_difference import gamma_counterexample


def handle_counterexample_gamma(config: RunConfig, argv: Sequence[str] = ()) -> int:
    """PASS when the identity holds within its error bound at every z."""
    params = config.params
    rows = gamma_counterexample(
        params["z"],
        prec=config.prec,
        eps=params["eps"],
        series_max_z=params["series_max_z"],
        workers=config.workers,
    )
    verdict = Verdict.PASS if all(row.match for row in rows) else Verdict.FAIL
    emit(config, {"rows": rows, "verdict": verdict}, argv=argv)
    return verdict.exit_code
