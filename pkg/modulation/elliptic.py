"""
Elliptic data of the xi-dependent genus-one surface.

The surface is w^2 = R(z)^2 = (z - q)(z - y)(z - 1/y)(z - 1/q) with cuts on
[y, q] and [1/q, 1/y]. omega = dz / (Gamma R) is normalised on the gap
cycle, tau is its period around the inner cut, and Omega is the normalised
third-kind differential with residues +1 at z = 0 and -1 at z = infinity.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from spectral.spectral_map import BackgroundParams, z_of_lambda
from todalab.exceptions import BranchError, RegionError
from todalab.quadrature import (
    integrate_endpoint_sqrt, integrate_panels, integrate_polyline, lab_setting,
)
from .gfunction import WhithamEdge, band_period_B, branch_moduli, q_factor, xi_for_edge

logger = logging.getLogger(__name__)

ABEL_RELATION_TOL = 1e-8


def calR(z, edge: WhithamEdge, side: Optional[str] = None):
    """R(z) = (z - q)(z - 1/q) Q(z); R(0) = 1, R(1/z) = R(z)/z^2, R(s - i0) = -i|R| on the inner cut."""
    z = np.asarray(z, dtype=complex)
    q = edge.params.q
    value = (z - q) * (z - 1.0 / q) * q_factor(z, edge, side)
    return value[()] if np.ndim(value) == 0 else value


def r_modulus(s, edge: WhithamEdge, **ends):
    """|R(s)| on the real axis; R = -|R| on the gap and R(s - i0) = -i|R| on the inner cut."""
    return np.sqrt(np.prod(branch_moduli(s, edge, **ends), axis=0))


def modulus_integral(weight, edge: WhithamEdge, lo: float, hi: float, rtol: float) -> float:
    """int_lo^hi weight(s) ds / |R(s)| for [lo, hi] inside the gap or the inner cut."""
    def integrand(s, d_lo, d_hi):
        return weight(s) / r_modulus(s, edge, lo=lo, d_lo=d_lo, hi=hi, d_hi=d_hi)
    return float(integrate_endpoint_sqrt(integrand, lo, hi, rtol=rtol, with_distances=True))


def _band_integral(weight, edge: WhithamEdge, rtol: float) -> float:
    """int_y^q weight(s) ds / |R(s)| over the inner cut."""
    return modulus_integral(weight, edge, edge.y, edge.params.q, rtol)


def surface_periods(edge: WhithamEdge, rtol: float = None):
    """(Gamma, tau): Gamma = 2 int_y^{1/y} dz/R > 0, tau = 2 int_y^q dz/(Gamma R_+) with Im tau > 0."""
    rtol = rtol if rtol is not None else lab_setting('QUAD_RTOL_FINE')
    inv_q, inv_y, y, q = edge.branch_points

    gamma = 2.0 * modulus_integral(np.ones_like, edge, inv_y, y, rtol)
    if not gamma > 0:
        raise BranchError("gap period Gamma must be positive", {'Gamma': gamma})

    # 1/R(s - i0) = i/|R| on the inner cut
    tau = complex(0.0, 2.0 * _band_integral(np.ones_like, edge, rtol) / gamma)
    if not tau.imag > 0:
        raise BranchError("Im tau must be positive", {'tau': tau})
    return gamma, tau


@dataclass(frozen=True)
class ThetaParams:
    tau: complex
    k_max: int

    @classmethod
    def for_modulus(cls, tau: complex) -> 'ThetaParams':
        tau = complex(tau)
        if not tau.imag > 0:
            raise ValueError(f"theta needs Im tau > 0, got {tau}")
        k_max = int(np.ceil(np.sqrt(16 * np.log(10) / (np.pi * tau.imag)))) + 2
        return cls(tau=tau, k_max=k_max)

    @property
    def tail_bound(self) -> float:
        return float(np.exp(-np.pi * self.tau.imag * self.k_max**2))


def theta(v, tau, params: Optional[ThetaParams] = None):
    """theta(v | tau) = sum_k exp(pi i k^2 tau + 2 pi i k v), truncated at |k| <= k_max."""
    params = params or ThetaParams.for_modulus(tau)
    v = np.asarray(v, dtype=complex)
    k = np.arange(-params.k_max, params.k_max + 1)
    phases = np.pi * 1j * k**2 * params.tau + 2j * np.pi * k * v[..., None]
    value = np.exp(phases).sum(axis=-1)
    return value[()] if value.ndim == 0 else value


def lattice_reduce(v, tau):
    """Representative of v modulo Z + tau Z with Re in [0, 1) and Im in [-Im tau/2, Im tau/2)."""
    v = np.asarray(v, dtype=complex)
    tau = complex(tau)
    shift = np.floor(v.imag / tau.imag + 0.5)
    v = v - shift * tau
    v = v - np.floor(v.real)
    return v[()] if v.ndim == 0 else v


def lattice_distance(u, v, tau) -> float:
    """Distance between u and v on the torus C / (Z + tau Z)."""
    diff = complex(lattice_reduce(complex(u) - complex(v), tau))
    candidates = [diff + m + k * complex(tau) for m in (-1, 0) for k in (-1, 0, 1)]
    return float(min(abs(c) for c in candidates))


def third_kind_data(edge: WhithamEdge, gamma: float, rtol: float = None):
    """
    (lambda_h, Lambda) of Omega = (s + 1/s - 2 lambda_h) ds / R(s).

    lambda_h makes the gap period vanish; Lambda = 2 int_y^q Omega(s - i0)
    is purely imaginary.
    """
    rtol = rtol if rtol is not None else lab_setting('QUAD_RTOL_FINE')
    inv_q, inv_y, y, q = edge.branch_points

    lambda_h = (modulus_integral(lambda s: s + 1.0 / s, edge, inv_y, y, rtol)
                / (2.0 * modulus_integral(np.ones_like, edge, inv_y, y, rtol)))
    band = _band_integral(lambda s: s + 1.0 / s - 2 * lambda_h, edge, rtol)
    return lambda_h, complex(0.0, 2.0 * band)


@dataclass(frozen=True)
class SurfaceData:
    edge: WhithamEdge
    Gamma: float
    tau: complex
    lambda_h: float
    Lambda: complex
    U: complex
    B: float
    A_infinity: float
    A_zero: float

    @property
    def theta_modulus(self) -> complex:
        """Modulus 2 tau used by every theta quotient of the model problem."""
        return 2 * self.tau

    @property
    def xi(self) -> float:
        return self.edge.xi


@dataclass(frozen=True)
class AbelValue:
    raw: complex
    reduced: complex


def _abel_integrand(edge: WhithamEdge, gamma: float):
    def integrand(s):
        return 1.0 / (gamma * calR(s, edge))
    return integrand


def _abel_anchor(z: complex, side: Optional[str], edge: WhithamEdge) -> complex:
    if z.imag > 0:
        return 1j
    if z.imag < 0:
        return -1j
    inv_q, _, _, q = edge.branch_points
    if inv_q < z.real < q:
        if side == '-':
            return 1j
        if side == '+':
            return -1j
        raise BranchError("Abel map on a cut or the gap needs a side tag", {'z': z})
    return 1j


def _abel_raw(z: complex, edge: WhithamEdge, gamma: float, side: Optional[str], rtol: float) -> complex:
    q = edge.params.q
    if z == q:
        return 0j
    anchor = _abel_anchor(z, side, edge)
    return integrate_polyline(_abel_integrand(edge, gamma), [q, anchor, z], rtol=rtol)


def abel_map(z, surface: SurfaceData, side: Optional[str] = None, rtol: float = None) -> AbelValue:
    """
    A(z) = int_q^z omega along q -> +-i -> z.

    The anchor is +i above the real axis or for side '-', -i below or for
    side '+'. A(1/q) = 1/2, A(1) = 1/4, A(-1 - i0) = 1/4 - tau/2 and across
    the gap A(s - i0) - A(s + i0) = -tau.
    """
    z = complex(z)
    if np.isinf(z.real) or np.isinf(z.imag):
        raw = complex(surface.A_infinity)
    else:
        raw = _abel_raw(z, surface.edge, surface.Gamma, side, rtol)
    return AbelValue(raw=raw, reduced=complex(lattice_reduce(raw, surface.tau)))


def _abel_endpoints(edge: WhithamEdge, gamma: float, rtol: float):
    integrand = _abel_integrand(edge, gamma)
    to_i = integrate_polyline(integrand, [edge.params.q, 1j], rtol=rtol)
    a_zero = to_i + integrate_polyline(integrand, [1j, 0.0], rtol=rtol)
    # int_i^infinity omega = int_0^{-i} omega by z -> 1/z
    a_infinity = to_i + integrate_polyline(integrand, [0.0, -1j], rtol=rtol)
    return a_zero, a_infinity


@lru_cache(maxsize=256)
def build_surface(edge: WhithamEdge) -> SurfaceData:
    rtol = lab_setting('QUAD_RTOL_FINE')
    gamma, tau = surface_periods(edge, rtol)
    lambda_h, big_lambda = third_kind_data(edge, gamma, rtol)
    b_value = band_period_B(edge, rtol)
    u_value = -2j * b_value - edge.xi * big_lambda
    if abs(u_value.real) > 1e-10 * abs(u_value):
        raise BranchError("U is not purely imaginary", {'U': u_value})

    a_zero, a_infinity = _abel_endpoints(edge, gamma, rtol)
    mismatch = {
        'symmetry': abs(a_zero + a_infinity - 0.5),
        'third_kind': abs(a_infinity - a_zero + big_lambda / (4j * np.pi)),
        'imaginary': abs(a_infinity.imag) + abs(a_zero.imag),
    }
    if max(mismatch.values()) > ABEL_RELATION_TOL:
        raise BranchError("Abel map endpoint relations violated", mismatch)

    surface = SurfaceData(
        edge=edge,
        Gamma=gamma,
        tau=tau,
        lambda_h=lambda_h,
        Lambda=big_lambda,
        U=complex(0.0, u_value.imag),
        B=b_value,
        A_infinity=float(a_infinity.real),
        A_zero=float(a_zero.real),
    )
    logger.info(f"Surface at xi={edge.xi:.6f}: Gamma={gamma:.10f}, tau={tau:.10f}, "
                f"Lambda={surface.Lambda:.10f}, B={b_value:.10f}")
    return surface


def frequency_ratio(surface: SurfaceData, rtol: float = None) -> float:
    """|int Omega over the upper unit semicircle| / |int Omega over one rim of the inner cut|."""
    rtol = rtol if rtol is not None else lab_setting('QUAD_RTOL_FINE')
    edge = surface.edge

    def on_arc(phi):
        s = np.exp(1j * phi)
        return (s + 1.0 / s - 2 * surface.lambda_h) / calR(s, edge) * 1j * s

    right = integrate_panels(on_arc, 0.0, np.pi, rtol=rtol)
    return float(abs(right) / abs(0.5 * surface.Lambda))


@dataclass(frozen=True)
class PeriodTwoRay:
    xi: float
    edge: WhithamEdge


def period_two_ray(params: BackgroundParams) -> PeriodTwoRay:
    """
    The ray on which both bands have length 2, lambda_y = b - 2a + 2.

    The reflection lambda -> b - 2a + 1 - lambda then swaps the bands and the
    modulated wave is 2-periodic in n. Needs a > 1/2.
    """
    if not params.a > 0.5:
        raise RegionError(f"equal band lengths need a > 1/2, got a = {params.a}")
    lambda_y = params.b - 2 * params.a + 2
    y = float(np.real(z_of_lambda(lambda_y)))
    xi = float(xi_for_edge(y, params))
    edge = WhithamEdge(xi=xi, y=y, lambda_y=lambda_y, params=params)
    if not params.q1 < y < params.q:
        raise BranchError("equal-band edge left the left band", {'y': y})
    logger.info(f"Period-two ray for a={params.a}, b={params.b}: xi={xi:.10f}")
    return PeriodTwoRay(xi=xi, edge=edge)
