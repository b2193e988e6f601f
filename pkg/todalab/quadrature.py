"""
Composite Gauss-Legendre quadrature shared by the spectral and modulation apps.

Square-root endpoint behaviour is absorbed by cosine substitutions, so every
integrand the lab meets becomes smooth in the quadrature variable and panel
doubling converges geometrically. Results are bit-reproducible: no adaptive
black box, fixed node tables, deterministic doubling.
"""
import logging
from functools import lru_cache
from typing import Any, Callable, Tuple

import numpy as np
from scipy.special import roots_legendre

from .exceptions import QuadratureError

logger = logging.getLogger(__name__)

DEFAULTS = {
    'TOL_RES': 1e-9,
    'EDGE_EPSILON': 0.05,
    'COMPARE_EPSILON': 0.3,
    'DT': 0.01,
    'PAD_BASE': 50.0,
    'PAD_SQRT': 10.0,
    'QUAD_RTOL': 1e-10,
    'QUAD_RTOL_FINE': 1e-11,
    'QUAD_MAX_PANELS': 1024,
    'QUAD_ORDER': 16,
    'FRONT_THRESHOLD': 1e-3,
    'MAX_SITES': 10**7,
    'SLOPE_WINDOW': (-1.4, -0.6),
    'SIGN_ZERO_TOL': 1e-9,
    'OUTPUT_DIR': 'runs',
}


def lab_setting(key: str) -> Any:
    """Read a value from settings.LAB_CONFIG, falling back to the built-in default."""
    try:
        from django.conf import settings
        return settings.LAB_CONFIG.get(key, DEFAULTS[key])
    except Exception:
        # settings not configured (library use outside manage.py)
        return DEFAULTS[key]


@lru_cache(maxsize=16)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _composite(f: Callable, lo: float, hi: float, panels: int, order: int):
    x, w = gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    values = np.asarray(f(nodes))
    return np.sum(weights * values), np.sum(np.abs(weights * values))


def integrate_panels(f: Callable, lo: float, hi: float, rtol: float = None,
                     order: int = None, min_panels: int = 4) -> complex:
    """
    Integrate a vectorised f over the real interval [lo, hi].

    Panels double from min_panels until the change between two levels is
    below rtol times the integral of |f|. Exceeding QUAD_MAX_PANELS raises
    QuadratureError with the tolerance that was reached.
    """
    rtol = rtol if rtol is not None else lab_setting('QUAD_RTOL')
    order = order or lab_setting('QUAD_ORDER')
    max_panels = lab_setting('QUAD_MAX_PANELS')

    panels = min_panels
    previous, _ = _composite(f, lo, hi, panels, order)
    while True:
        panels *= 2
        current, scale = _composite(f, lo, hi, panels, order)
        change = abs(current - previous)
        if change <= rtol * max(scale, np.finfo(float).tiny):
            return current
        if panels >= max_panels:
            achieved = change / max(scale, np.finfo(float).tiny)
            logger.error(f"Quadrature stalled at {panels} panels, relative change {achieved:.3e}")
            raise QuadratureError("quadrature did not converge", achieved, panels)
        previous = current


def endpoint_nodes(theta, lo: float, hi: float):
    """
    (s, s - lo, hi - s) for s = m + h cos(theta).

    The distances come from 2h cos^2(theta/2) and 2h sin^2(theta/2), so they
    keep full relative accuracy next to either end.
    """
    half = 0.5 * (hi - lo)
    d_lo = 2.0 * half * np.cos(0.5 * theta)**2
    d_hi = 2.0 * half * np.sin(0.5 * theta)**2
    s = np.where(theta > 0.5 * np.pi, lo + d_lo, hi - d_hi)
    return s, d_lo, d_hi


def integrate_endpoint_sqrt(f: Callable, lo: float, hi: float, rtol: float = None,
                            min_panels: int = 4, with_distances: bool = False) -> complex:
    """
    Integral of f over [lo, hi] with s = m + h*cos(theta) clustering at both ends.

    With with_distances the integrand is called as f(s, s - lo, hi - s), the
    distances taken from endpoint_nodes instead of by subtraction.
    """
    half = 0.5 * (hi - lo)

    def integrand(theta):
        s, d_lo, d_hi = endpoint_nodes(theta, lo, hi)
        values = f(s, d_lo, d_hi) if with_distances else f(s)
        return values * half * np.sin(theta)

    return integrate_panels(integrand, 0.0, np.pi, rtol=rtol, min_panels=min_panels)


def integrate_segment(f: Callable, z0: complex, z1: complex, rtol: float = None,
                      min_panels: int = 4) -> complex:
    """Integral of f(z) dz along the straight segment z0 -> z1, clustered at both ends."""
    delta = complex(z1) - complex(z0)
    if delta == 0:
        return 0j

    def integrand(theta):
        u = 0.5 * (1.0 - np.cos(theta))
        return f(z0 + delta * u) * delta * 0.5 * np.sin(theta)

    return integrate_panels(integrand, 0.0, np.pi, rtol=rtol, min_panels=min_panels)


def integrate_polyline(f: Callable, points, rtol: float = None) -> complex:
    """Sum of segment integrals along consecutive points."""
    total = 0j
    for start, end in zip(points[:-1], points[1:]):
        total += integrate_segment(f, start, end, rtol=rtol)
    return total
