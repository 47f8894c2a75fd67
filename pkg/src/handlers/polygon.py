"""Newton-Puiseux polygon of an equation file."""

from collections.abc import Sequence

from core.config import RunConfig
from core.equations.equation import load_equation
from core.equations.polygon import newton_polygon
from core.reports.writer import emit
from core.types import Verdict


def handle_polygon(config: RunConfig, argv: Sequence[str] = ()) -> int:
    eq = load_equation(config.params["eq"])
    polygon = newton_polygon(eq)
    verdict = Verdict.COMPLETE if polygon.predicted_orders else Verdict.NO_PREDICTION
    payload = {"equation": eq.describe(), **polygon.to_dict(), "verdict": verdict}
    rows = [segment.to_dict() for segment in polygon.segments]
    emit(config, payload, rows=rows, argv=argv)
    return verdict.exit_code
