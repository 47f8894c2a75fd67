"""Stirling triangle dump."""

from collections.abc import Sequence

from core.analysis.stirling import build_table
from core.config import RunConfig
from core.reports.writer import emit
from core.types import Verdict


def handle_stirling(config: RunConfig, argv: Sequence[str] = ()) -> int:
    """Emit S(n, m) for 0 <= m <= n <= nmax as rows (n, m, value)."""
    table = build_table(config.params["nmax"])
    rows = [{"n": n, "m": m, "value": value} for n, m, value in table.triples()]
    payload = {
        "n_max": table.n_max,
        "bell": [table.row_sum(n) for n in range(table.n_max + 1)],
        "rows": rows,
        "verdict": Verdict.COMPLETE,
    }
    emit(config, payload, rows=rows, argv=argv)
    return Verdict.COMPLETE.exit_code
