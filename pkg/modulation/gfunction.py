"""
The xi-dependent g-function of the modulation region.

For a ray xi the moving edge y(xi) in (q1, q) is fixed by the Whitham moment
condition; g(z) = 1/2 * int_1^z P(s) Q(s) ds / s is then evaluated along the
polyline 1 -> +-i -> z. Cuts lie on [y, q] and [1/q, 1/y]; side '+' is the
boundary value from below (z - i0), side '-' from above.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import BranchError, RegionError
from todalab.quadrature import integrate_endpoint_sqrt, integrate_polyline, lab_setting

logger = logging.getLogger(__name__)

SIDES = (None, '+', '-')


@dataclass(frozen=True)
class WhithamEdge:
    xi: float
    y: float
    lambda_y: float
    params: BackgroundParams

    @property
    def branch_points(self) -> Tuple[float, float, float, float]:
        """Real branch points in increasing order: 1/q < 1/y < y < q."""
        return 1.0 / self.params.q, 1.0 / self.y, self.y, self.params.q


@dataclass(frozen=True)
class GData:
    edge: WhithamEdge
    B: float


def _check_side(side):
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")


def cut_mask(z, edge: WhithamEdge):
    """True where z lies on the open inner cut (y, q) or outer cut (1/q, 1/y)."""
    z = np.asarray(z, dtype=complex)
    s = z.real
    real = z.imag == 0
    q, y = edge.params.q, edge.y
    inner = real & (s > y) & (s < q)
    outer = real & (s > 1.0 / q) & (s < 1.0 / y)
    return inner, outer


def q_factor(z, edge: WhithamEdge, side: Optional[str] = None):
    """
    Q(z) = sqrt((z - y)(z - 1/y) / ((z - q)(z - 1/q))).

    Positive on the real axis off the cuts, Q(0) = 1, Q(1/z) = Q(z). On the
    inner cut Q(s - i0) = +i|Q|, on the outer cut Q(s - i0) = -i|Q|.
    """
    _check_side(side)
    z = np.asarray(z, dtype=complex)
    q, y = edge.params.q, edge.y
    with np.errstate(divide='ignore', invalid='ignore'):
        value = np.sqrt((z - y) / (z - q)) * np.sqrt((z - 1.0 / y) / (z - 1.0 / q))
    inner, outer = cut_mask(z, edge)
    if np.any(inner | outer):
        if side is None:
            raise BranchError("Q evaluated on a cut without a side tag")
        s = z.real
        modulus = np.sqrt(np.abs((s - y) * (s - 1.0 / y) / ((s - q) * (s - 1.0 / q))))
        below = np.where(inner, 1j, -1j) * modulus
        value = np.where(inner | outer, below if side == '+' else -below, value)
    return value[()] if value.ndim == 0 else value


def branch_moduli(s, edge: WhithamEdge, lo: float = None, d_lo=None, hi: float = None, d_hi=None):
    """
    |s - p| for the branch points p = 1/q, 1/y, y, q.

    An interval end that is itself a branch point takes the distance handed
    in by the quadrature instead of a difference of nearby numbers.
    """
    moduli = []
    for point in edge.branch_points:
        if d_lo is not None and point == lo:
            moduli.append(d_lo)
        elif d_hi is not None and point == hi:
            moduli.append(d_hi)
        else:
            moduli.append(np.abs(s - point))
    return tuple(moduli)


def q_modulus(s, edge: WhithamEdge, **ends):
    """|Q(s)| on the real axis from branch_moduli."""
    inv_q, inv_y, y, q = branch_moduli(s, edge, **ends)
    return np.sqrt(y * inv_y / (q * inv_q))


def p_factor(s, edge: WhithamEdge):
    params = edge.params
    return s + 1.0 / s + 2 * edge.xi + edge.lambda_y - (params.b - 2 * params.a)


def _moment_parts(y: float, params: BackgroundParams, rtol: float):
    """Pieces of M(y) = M0 + 2 xi M1 on the gap segment [-1, y]."""
    provisional = WhithamEdge(xi=0.0, y=y, lambda_y=0.5 * (y + 1.0 / y), params=params)
    shift = provisional.lambda_y - (params.b - 2 * params.a)

    def q_over_s(s, d_lo, d_hi):
        return q_modulus(s, provisional, hi=y, d_hi=d_hi) / s

    m0 = integrate_endpoint_sqrt(lambda s, *d: (s + 1.0 / s + shift) * q_over_s(s, *d), -1.0, y,
                                 rtol=rtol, with_distances=True)
    m1 = integrate_endpoint_sqrt(q_over_s, -1.0, y, rtol=rtol, with_distances=True)
    return float(m0), float(m1)


def whitham_moment(y: float, xi: float, params: BackgroundParams, rtol: float = None) -> float:
    """M(y) = int_{-1}^{y} P(s) Q(s) ds / s for the edge candidate y."""
    rtol = rtol if rtol is not None else lab_setting('QUAD_RTOL_FINE')
    m0, m1 = _moment_parts(y, params, rtol)
    return m0 + 2 * xi * m1


def xi_for_edge(y: float, params: BackgroundParams) -> float:
    """The ray on which y is the Whitham edge (M is affine in xi)."""
    m0, m1 = _moment_parts(y, params, lab_setting('QUAD_RTOL_FINE'))
    return -m0 / (2 * m1)


def admissible_window(params: BackgroundParams, epsilon: float) -> Tuple[float, float]:
    return critical_rays(params).modulation_window(epsilon)


@lru_cache(maxsize=256)
def solve_whitham_edge(xi: float, params: BackgroundParams, epsilon: float = None) -> WhithamEdge:
    """Bracketed root of M(y) = 0 on (q1, q) for the ray xi."""
    epsilon = epsilon if epsilon is not None else lab_setting('EDGE_EPSILON')
    lo, hi = admissible_window(params, epsilon)
    if not lo <= xi <= hi:
        raise RegionError(f"xi = {xi} is outside the modulation window", (lo, hi))

    q1, q = params.q1, params.q
    nodes = 64
    k = np.arange(nodes)
    cheb = np.cos(np.pi * (k + 0.5) / nodes)[::-1]
    grid = 0.5 * (q1 + q) + 0.5 * (q - q1) * cheb
    values = np.array([whitham_moment(y, xi, params) for y in grid])
    changes = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    if len(changes) != 1:
        raise BranchError("Whitham moment does not have a unique sign change", {
            'xi': xi, 'sign_changes': len(changes),
        })
    i = changes[0]
    y = brentq(lambda s: whitham_moment(s, xi, params), grid[i], grid[i + 1],
               xtol=1e-15, rtol=4 * np.finfo(float).eps)
    residual = whitham_moment(y, xi, params)
    if abs(residual) > 1e-10:
        raise BranchError("Whitham edge residual too large", {'xi': xi, 'residual': residual})
    edge = WhithamEdge(xi=float(xi), y=float(y), lambda_y=float(0.5 * (y + 1.0 / y)), params=params)
    logger.info(f"Whitham edge at xi={xi:.6f}: y={edge.y:.12f}, lambda_y={edge.lambda_y:.12f}")
    return edge


def band_period_B(edge: WhithamEdge, rtol: float = None) -> float:
    """B = 1/2 int_y^q P(s)|Q(s)| ds / s, the half jump of Im g across the gap (without the log part)."""
    rtol = rtol if rtol is not None else lab_setting('QUAD_RTOL_FINE')

    y, q = edge.y, edge.params.q

    def integrand(s, d_lo, d_hi):
        return 0.5 * p_factor(s, edge) * q_modulus(s, edge, lo=y, d_lo=d_lo, hi=q, d_hi=d_hi) / s

    value = float(integrate_endpoint_sqrt(integrand, y, q, rtol=rtol, with_distances=True))
    if value <= 0:
        raise BranchError("band period B must be positive", {'B': value, 'xi': edge.xi})
    return value


@lru_cache(maxsize=256)
def g_data(edge: WhithamEdge) -> GData:
    return GData(edge=edge, B=band_period_B(edge))


def _anchor(z: complex, side: Optional[str]) -> complex:
    if z.imag > 0 or (z.imag == 0 and side == '-'):
        return 1j
    if z.imag < 0 or (z.imag == 0 and side == '+'):
        return -1j
    if z.real > 0:
        return 1j
    raise BranchError("points on the negative real axis need a side tag", {'z': z})


def _g_integrand(edge: WhithamEdge):
    def integrand(s):
        return 0.5 * p_factor(s, edge) * q_factor(s, edge) / s
    return integrand


def g_eval(z, gdata: GData, side: Optional[str] = None, rtol: float = None):
    """
    g(z) = 1/2 int_1^z P Q ds/s along 1 -> anchor -> z.

    The anchor is +i in the upper half-plane or for side '-', -i otherwise.
    g carries xi*log z, so g(q -+ i0) = -+ i*pi*xi and the jump across the
    gap is g(s + i0) - g(s - i0) = 2i(B + pi*xi).
    """
    _check_side(side)
    edge = gdata.edge
    integrand = _g_integrand(edge)
    points = np.atleast_1d(np.asarray(z, dtype=complex))
    values = np.empty(points.shape, dtype=complex)
    for i, point in enumerate(points):
        if point == 0:
            raise ValueError("g has a pole at z = 0")
        anchor = _anchor(point, side)
        values[i] = integrate_polyline(integrand, [1.0, anchor, point], rtol=rtol)
    return values[0] if np.ndim(z) == 0 else values


def phase_minus_g(z, gdata: GData, rtol: float = None) -> complex:
    """Phi(z) - g(z) integrated from its bounded derivative along 1 -> anchor -> z."""
    edge = gdata.edge
    g_prime = _g_integrand(edge)

    def integrand(s):
        return 0.5 * (1.0 + 1.0 / s**2) + edge.xi / s - g_prime(s)

    z = complex(z)
    return integrate_polyline(integrand, [1.0, _anchor(z, None), z], rtol=rtol)


def k_constant(gdata: GData, radii=(1e-2, 1e-3)) -> complex:
    """Richardson limit of Phi - g at z -> 0 along the positive imaginary axis."""
    h_big, h_small = radii
    f_big = phase_minus_g(1j * h_big, gdata)
    f_small = phase_minus_g(1j * h_small, gdata)
    ratio = h_big / h_small
    return (ratio * f_small - f_big) / (ratio - 1)


@dataclass
class SignatureReport:
    frame: pd.DataFrame
    nodal_points: Tuple[float, float]
    real_axis: pd.DataFrame


def signature_report(gdata: GData, radial: int = 12, angular: int = 12, log_radius: float = 2.5,
                     zero_tol: float = None) -> SignatureReport:
    """
    Sign of Re g on a polar grid symmetric under z -> 1/z, plus real-axis samples.

    Radii exp(L(j + 1/2)/J), j in [-J, J); angles pi(k + 1/2)/K, k in [-K, K).
    """
    zero_tol = zero_tol if zero_tol is not None else lab_setting('SIGN_ZERO_TOL')
    j = np.arange(-radial, radial)
    k = np.arange(-angular, angular)
    radii = np.exp(log_radius * (j + 0.5) / radial)
    angles = np.pi * (k + 0.5) / angular
    grid = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    re_g = np.real(g_eval(grid, gdata))
    signs = np.where(np.abs(re_g) < zero_tol, 0, np.sign(re_g)).astype(int)
    frame = pd.DataFrame({'re_z': grid.real, 'im_z': grid.imag, 'sign_re_g': signs})

    edge = gdata.edge
    inv_q, inv_y, y, q = edge.branch_points
    samples = {
        'right_of_q': 0.5 * q,
        'gap_right': 0.5 * (y - 1.0),
        'gap_left': 0.5 * (inv_y - 1.0),
        'left_of_inv_q': 2.0 * inv_q,
    }
    rows = []
    for name, s in samples.items():
        value = np.real(g_eval(s, gdata, side='-'))
        rows.append({'region': name, 're_z': s, 're_g': value,
                     'sign_re_g': 0 if abs(value) < zero_tol else int(np.sign(value))})
    return SignatureReport(frame=frame, nodal_points=(y, inv_y), real_axis=pd.DataFrame(rows))
