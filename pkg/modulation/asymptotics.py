"""
Leading-order modulated elliptic wave in the region xi'_cr < xi < xi_cr.

The pipeline per lattice point is: Whitham edge -> surface -> phase shift
Delta -> theta phase x(n, t) -> Dirichlet eigenvalue lambda(n, t) -> trace
formulas for b(n, t) and a(n, t)^2 + a(n - 1, t)^2.
"""
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from spectral.scattering import ScatteringSummary
from spectral.spectral_map import BackgroundParams, z_of_lambda
from todalab.exceptions import BranchError, DataError, RegionError
from todalab.quadrature import lab_setting
from .elliptic import SurfaceData, abel_map, build_surface, calR, lattice_distance, modulus_integral, theta
from .gfunction import WhithamEdge, q_factor, solve_whitham_edge

logger = logging.getLogger(__name__)

ROUTE_TOL = 1e-10
IDENTITY_TOL = 1e-8
EDGE_TOL = 1e-13


@dataclass(frozen=True)
class PhaseShift:
    Delta: float
    ell: int


@dataclass(frozen=True)
class ThetaPhase:
    x: float
    x_lambda_u: float
    n: int
    t: float


@dataclass(frozen=True)
class ModulatedWave:
    lambda_nt: float
    b_hat: float
    a_hat_sq_sum: float
    n: Optional[int] = None
    t: Optional[float] = None
    xi: Optional[float] = None
    mu: Optional[float] = None


@dataclass(frozen=True)
class DirichletPoint:
    mu: float
    lambda_nt: float


@dataclass(frozen=True)
class SFactor:
    """S(z) = R(z)/z with S(1/z) = S(z) off the cuts and S(s + i0) = -S(s - i0) on them."""
    edge: WhithamEdge

    def __call__(self, z, side: Optional[str] = None):
        z = np.asarray(z, dtype=complex)
        value = calR(z, self.edge, side) / z
        return value[()] if np.ndim(value) == 0 else value


def _v_modulus_sq(s, params: BackgroundParams, ell: int):
    """|V(s)|^2 with V = ((z - 1/q)/(z - q))^(ell/4)."""
    ratio = np.abs((s - 1.0 / params.q) / (s - params.q))
    return ratio**(0.5 * ell)


def _edge_exponent(summary: ScatteringSummary) -> float:
    """Power of (q - s) in |chi(s)| as s -> q: +1/2 generic, -1/2 resonant."""
    params = summary.data.params
    width = params.q - params.q1
    h_far, h_near = 1e-6 * width, 1e-8 * width
    far = abs(complex(summary.chi(params.q - h_far)))
    near = abs(complex(summary.chi(params.q - h_near)))
    return float(np.log(far / near) / np.log(h_far / h_near))


def phase_shift_delta(edge: WhithamEdge, summary: ScatteringSummary, rtol: float = None) -> PhaseShift:
    """
    Delta = -i int_q^y log(Pi^-2 |chi V_+^2|) / S_+(s) ds/s / int_y^-1 ds/(s S(s)) + pi ell/2.

    ds/(s S) = ds/R, so both integrals run against 1/R: R(s - i0) = -i|R| on
    the lower rim of the inner cut and R = -|R| on the gap, which leaves
    Delta = -int_y^q L/|R| / int_-1^y 1/|R| + pi ell/2 with L the log density.
    """
    rtol = rtol if rtol is not None else lab_setting('QUAD_RTOL_FINE')
    params = edge.params
    ell = -1 if summary.resonance.at_q else 1

    exponent = _edge_exponent(summary)
    if np.sign(exponent) != ell:
        logger.warning(f"chi behaves like (q - s)^{exponent:.2f} at q but the resonance flag "
                       f"selects ell = {ell}")

    def log_density(s):
        chi = np.abs(summary.chi(s))
        if np.any(~np.isfinite(chi)) or np.any(chi == 0):
            raise DataError("spectral density vanished or overflowed inside the band", {'xi': edge.xi})
        blaschke = np.real(summary.blaschke(s))
        return np.log(chi * _v_modulus_sq(s, params, ell) / blaschke**2)

    numerator = modulus_integral(log_density, edge, edge.y, params.q, rtol)
    denominator = modulus_integral(np.ones_like, edge, -1.0, edge.y, rtol)
    delta = -numerator / denominator + 0.5 * np.pi * ell
    if not np.isfinite(delta):
        raise DataError("phase shift is not finite", {'xi': edge.xi})
    logger.info(f"Phase shift at xi={edge.xi:.6f}: Delta={delta:.12f} (ell={ell})")
    return PhaseShift(Delta=float(delta), ell=ell)


def _lambda_u_route(n: int, t: float, surface: SurfaceData, delta: PhaseShift) -> complex:
    return (-n * surface.Lambda / (4j * np.pi) - t * surface.U / (4j * np.pi)
            - delta.Delta / (4 * np.pi))


def theta_phase(n: int, t: float, surface: SurfaceData, delta: PhaseShift) -> ThetaPhase:
    """x = tB/(2 pi) - Delta/(4 pi), cross-checked against -n Lambda/(4 pi i) - t U/(4 pi i) - Delta/(4 pi)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if abs(n / t - surface.xi) > 1e-12 * max(1.0, abs(surface.xi)):
        raise RegionError(f"surface was built for xi = {surface.xi}, not n/t = {n / t}")
    x_b = t * surface.B / (2 * np.pi) - delta.Delta / (4 * np.pi)
    x_lu = _lambda_u_route(n, t, surface, delta)
    if abs(x_b - x_lu.real) > ROUTE_TOL * max(1.0, abs(x_b)) or abs(x_lu.imag) > ROUTE_TOL * max(1.0, abs(x_b)):
        raise BranchError("theta phase routes disagree", {'n': n, 't': t, 'x_B': x_b, 'x_LU': x_lu})
    return ThetaPhase(x=float(x_b), x_lambda_u=float(x_lu.real), n=int(n), t=float(t))


def fixed_ray_phase(n: int, t: float, surface: SurfaceData, delta: PhaseShift) -> float:
    """Lambda, U route of x with the surface frozen at its own ray (n/t may differ)."""
    return float(_lambda_u_route(n, t, surface, delta).real)


def gap_coordinate(s: float, surface: SurfaceData) -> float:
    """
    u(s) = 2 Re A(s - i0) - 1/2 = -1/2 + 2 int_s^y dv / (Gamma |R(v)|), from -1/2 at y to 1/2 at 1/y.

    The integral starts at the nearer gap edge, so the far square-root
    singularity never sits next to the integration interval.
    """
    edge = surface.edge
    inv_y, y = 1.0 / edge.y, edge.y
    if not inv_y <= s <= y:
        raise RegionError(f"s = {s} is outside the gap [{inv_y}, {y}]")
    rtol = lab_setting('QUAD_RTOL_FINE')
    if s == y:
        return -0.5
    if s == inv_y:
        return 0.5
    if y - s <= s - inv_y:
        return float(-0.5 + 2 * modulus_integral(np.ones_like, edge, s, y, rtol) / surface.Gamma)
    return float(0.5 - 2 * modulus_integral(np.ones_like, edge, inv_y, s, rtol) / surface.Gamma)


def dirichlet_target(x: float) -> float:
    """The value u* in [-1/2, 1/2) with u* + 2x = 1/2 mod 1."""
    return float(np.mod(1.0 - 2 * x, 1.0) - 0.5)


def dirichlet_eigenvalue(x: float, surface: SurfaceData) -> DirichletPoint:
    """
    The zero mu in [1/y, y] of theta(2 A_+(s) - 1/2 + 2x | 2 tau) along the gap.

    On the gap 2 A_+(s) - 1/2 = u(s) - tau, and theta(w - tau | 2 tau) vanishes
    exactly at w = 1/2 mod 1, so mu solves u(mu) = u* for the monotone gap
    coordinate u.
    """
    if isinstance(x, ThetaPhase):
        x = x.x
    edge = surface.edge
    lo, hi = 1.0 / edge.y, edge.y
    target = dirichlet_target(x)
    if target + 0.5 < EDGE_TOL:
        mu = hi
    elif 0.5 - target < EDGE_TOL:
        mu = lo
    else:
        mu = brentq(lambda s: gap_coordinate(s, surface) - target, lo, hi, xtol=1e-15,
                    rtol=4 * np.finfo(float).eps)
    lam = 0.5 * (mu + 1.0 / mu)
    lam = float(np.clip(lam, edge.lambda_y, -1.0))
    return DirichletPoint(mu=float(mu), lambda_nt=lam)


def abel_inversion_check(point: DirichletPoint, x: float, surface: SurfaceData) -> float:
    """Distance of A(mu - i0) from tau/2 - x on the torus C / (Z/2 + tau Z)."""
    value = abel_map(point.mu, surface, side='+').raw
    target = surface.tau / 2 - x
    return 0.5 * lattice_distance(2 * value, 2 * target, 2 * surface.tau)


def trace_formulas(lambda_nt: float, edge: WhithamEdge, params: Optional[BackgroundParams] = None) -> ModulatedWave:
    params = params or edge.params
    lower = params.b - 2 * params.a
    trace = lower + edge.lambda_y - 2 * lambda_nt
    b_hat = 0.5 * trace
    a_sq_sum = 0.25 * (2 + lower**2 + edge.lambda_y**2 - 2 * lambda_nt**2 - 0.5 * trace**2)
    return ModulatedWave(lambda_nt=float(lambda_nt), b_hat=float(b_hat), a_hat_sq_sum=float(a_sq_sum))


def h_squared(z, edge: WhithamEdge, side: Optional[str] = None):
    """H(z)^2 = ((z - y)(z - 1/y) / ((z - q)(z - 1/q)))^(1/2), H(0) = 1."""
    return q_factor(z, edge, side)


def y_factor(z, mu: float, edge: WhithamEdge):
    z = np.asarray(z, dtype=complex)
    y = edge.y
    value = (z - mu) * (z - 1.0 / mu) / ((z - y) * (z - 1.0 / y))
    return value[()] if value.ndim == 0 else value


def _theta_pair(abel: complex, x: float, surface: SurfaceData) -> Tuple[complex, complex]:
    """(delta(z), delta(1/z)) from A(z), using A(1/z) = 1/2 - A(z) and evenness of theta."""
    modulus = surface.theta_modulus
    base = theta(2 * abel - 0.5, modulus)
    forward = theta(2 * abel - 0.5 + 2 * x, modulus) / base
    backward = theta(2 * abel - 0.5 - 2 * x, modulus) / base
    return complex(forward), complex(backward)


def _delta_at(abel: complex, x: float, surface: SurfaceData) -> complex:
    modulus = surface.theta_modulus
    return complex(theta(2 * abel - 0.5 + 2 * x, modulus) / theta(2 * abel - 0.5, modulus))


def _theta_normalisation(x: float, surface: SurfaceData) -> complex:
    """delta(0) delta(inf) from the two Abel endpoints, not from the z -> 1/z symmetry."""
    return _delta_at(surface.A_zero, x, surface) * _delta_at(surface.A_infinity, x, surface)


def model_product_Y(z, lambda_nt: float, edge: WhithamEdge, surface: Optional[SurfaceData] = None,
                    x: Optional[float] = None, side: Optional[str] = None) -> complex:
    """
    m1 m2 = H^2(z) (z - mu)(z - 1/mu) / ((z - y)(z - 1/y)).

    With a surface and theta phase x the theta form
    H^2(z) delta(z) delta(1/z) / (delta(0) delta(inf)) is evaluated too and
    must agree.
    """
    z = complex(z)
    mu = float(np.real(z_of_lambda(lambda_nt)))
    rational = complex(h_squared(z, edge, side) * y_factor(z, mu, edge))
    if surface is not None and x is not None:
        forward, backward = _theta_pair(abel_map(z, surface, side=side).raw, x, surface)
        theta_form = complex(h_squared(z, edge, side)) * forward * backward / _theta_normalisation(x, surface)
        if abs(theta_form - rational) > IDENTITY_TOL * max(1.0, abs(rational)):
            raise BranchError("theta and rational forms of m1 m2 disagree", {
                'z': z, 'theta': theta_form, 'rational': rational,
            })
    return rational


@dataclass(frozen=True)
class ModelVector:
    m1: complex
    m2: complex


def model_vector(z, x: float, surface: SurfaceData, side: Optional[str] = None) -> ModelVector:
    """m_mod(z) = (delta(z), delta(1/z)) H(z) / sqrt(delta(0) delta(inf)), normalised by m1(0) m2(0) = 1."""
    edge = surface.edge
    norm = np.sqrt(_theta_normalisation(x, surface))
    d_zero, d_infinity = _theta_pair(surface.A_zero, x, surface)
    at_zero = complex(h_squared(0.0, edge)) * d_zero * d_infinity / norm**2
    if abs(at_zero - 1) > IDENTITY_TOL:
        raise BranchError("model vector normalisation violated", {'x': x, 'm1 m2 at 0': at_zero})
    z = complex(z)
    if z == 0:
        return ModelVector(m1=complex(d_zero / norm), m2=complex(d_infinity / norm))
    h = complex(np.sqrt(h_squared(z, edge, side)))
    forward, backward = _theta_pair(abel_map(z, surface, side=side).raw, x, surface)
    return ModelVector(m1=forward * h / norm, m2=backward * h / norm)


@lru_cache(maxsize=256)
def _delta_for(edge: WhithamEdge, summary: ScatteringSummary) -> PhaseShift:
    return phase_shift_delta(edge, summary)


def modulated_wave(n: int, t: float, summary: ScatteringSummary, epsilon: float = None) -> ModulatedWave:
    """Full per-site pipeline at xi = n/t."""
    params = summary.data.params
    edge = solve_whitham_edge(n / t, params, epsilon)
    surface = build_surface(edge)
    delta = _delta_for(edge, summary)
    phase = theta_phase(n, t, surface, delta)
    point = dirichlet_eigenvalue(phase.x, surface)
    wave = trace_formulas(point.lambda_nt, edge, params)
    return replace(wave, n=n, t=t, xi=n / t, mu=point.mu)
