"""Minimal Newton-series solution of an equation file, optionally with the growth check."""

import logging
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from core.config import RunConfig
from core.equations.equation import DifferenceEquation, load_equation
from core.equations.growth import (
    DEFAULT_GROWTH_CONFIG,
    equation_residual,
    estimate_terms,
    verify_regular_growth,
)
from core.equations.polygon import newton_polygon
from core.equations.recurrence import binomial_recurrence
from core.equations.solver import NewtonSeriesSolution, solve_minimal
from core.errors import NeedsMoreTermsError
from core.reports.writer import emit
from core.types import GrowthFitMethod, GrowthSampling, Verdict
from handlers.common import radius_grid

logger = logging.getLogger(__name__)

FALLBACK_TERMS = 256  # no predicted order to size the solution from


def _spot(
    eq: DifferenceEquation, sol: NewtonSeriesSolution, z: Fraction, prec: int
) -> dict[str, Any]:
    try:
        return {"z": z, "residual": equation_residual(eq, sol, z, prec)}
    except NeedsMoreTermsError as exc:
        return {"z": z, "residual": None, "reason": str(exc)}


def handle_solve(config: RunConfig, argv: Sequence[str] = ()) -> int:
    """Without --fit: recurrence, leading coefficients and spot residuals.

    With --fit: the full regular-growth check (polygon, solver, growth fit, residuals).
    """
    params = config.params
    eq = load_equation(params["eq"])
    grid = radius_grid(config)

    if params["fit"]:
        report = verify_regular_growth(
            eq,
            terms=params.get("terms"),
            r_grid=grid,
            prec=config.prec,
            sampling=GrowthSampling(params["sampling"]),
            method=GrowthFitMethod(params["method"]),
            workers=config.workers,
        )
        rows = [{"z": s.z, "residual": s.residual, "passed": s.passed} for s in report.residuals]
        emit(config, {"report": report}, rows=rows, argv=argv)
        return report.verdict.exit_code

    polygon = newton_polygon(eq)
    terms = params.get("terms")
    if terms is None and polygon.predicted_orders:
        chi = max(polygon.predicted_orders)
        terms = estimate_terms(float(chi), max(float(r) for r in grid))
    elif terms is None:
        terms = FALLBACK_TERMS
    rec = binomial_recurrence(eq)
    sol = solve_minimal(rec, terms, prec=config.prec)
    residuals = [_spot(eq, sol, z, config.prec) for z in DEFAULT_GROWTH_CONFIG.spot_points]
    shown = sol.b[: params["show"]]
    logger.info("Solved %s with %d terms (%s)", eq.describe(), sol.terms, sol.normalization)
    payload = {
        "equation": eq.describe(),
        "polygon": polygon,
        "recurrence": rec,
        "terms": sol.terms,
        "normalization": sol.normalization,
        "stability": sol.stability,
        "coefficients": list(shown),
        "residuals": residuals,
        "verdict": Verdict.COMPLETE,
    }
    rows = [{"m": m, "b": b} for m, b in enumerate(shown)]
    emit(config, payload, rows=rows, argv=argv)
    return Verdict.COMPLETE.exit_code
