from __future__ import annotations

from mpmath import mp, mpf

from core.errors import ConfigurationError


def geometric_grid(rmin: float, rmax: float, points: int, prec: int = 256) -> list[mpf]:
    """`points` radii spaced geometrically from rmin to rmax, endpoints included.

    Radii within 2^-(prec/2) relative distance of an integer are snapped to it,
    so decade points like 1e4 stay exact.
    """
    if not 0 < rmin < rmax:
        raise ConfigurationError(f"need 0 < rmin < rmax, got rmin={rmin}, rmax={rmax}")
    if points < 2:
        raise ConfigurationError(f"points must be >= 2, got {points}")
    grid = []
    with mp.workprec(prec):
        lo, hi = mpf(rmin), mpf(rmax)
        ratio = hi / lo
        for i in range(points):
            r = lo * ratio ** (mpf(i) / (points - 1))
            nearest = mp.nint(r)
            if abs(r - nearest) <= r * mp.ldexp(1, -(prec // 2)):
                r = nearest
            grid.append(r)
    return grid
