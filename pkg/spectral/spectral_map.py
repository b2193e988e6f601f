"""
Background geometry of the steplike problem.

Joukowsky maps between the spectral variable lambda and the uniformising
variables z (right background, band [-1, 1]) and zeta (left background,
band [b - 2a, b + 2a]), the right and left phase functions, and the four
critical rays that split the (n, t) half-plane.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from todalab.exceptions import BranchError, RegionError
from todalab.quadrature import integrate_endpoint_sqrt

logger = logging.getLogger(__name__)

# distance from a band edge below which the edge itself is returned
EDGE_SNAP = 1e-14


def _as_complex_array(value):
    arr = np.asarray(value, dtype=complex)
    if np.any(np.isnan(arr)):
        raise ValueError("NaN spectral parameter")
    # a real input sits on the upper rim of the cut
    return np.where(arr.imag == 0, arr.real + 0j, arr)


def _finish(arr, like):
    return arr[()] if np.ndim(like) == 0 else arr


def z_of_lambda(lam):
    """
    Root of (z + 1/z)/2 = lam inside the closed unit disk.

    On [-1, 1] both roots lie on the circle; the one with Im z <= 0 is
    returned, which is the boundary value for lam + i0.
    """
    lam_arr = _as_complex_array(lam)
    lam_arr = np.where(np.abs(lam_arr - 1) <= EDGE_SNAP, 1 + 0j, lam_arr)
    lam_arr = np.where(np.abs(lam_arr + 1) <= EDGE_SNAP, -1 + 0j, lam_arr)
    root = np.sqrt(lam_arr - 1) * np.sqrt(lam_arr + 1)
    plus = lam_arr + root
    minus = lam_arr - root
    # the small root is the reciprocal of the large one (no cancellation)
    large = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = 1.0 / large
    on_circle = np.isclose(np.abs(plus), np.abs(minus), rtol=0, atol=1e-13)
    z = np.where(on_circle, np.where(minus.imag <= plus.imag, minus, plus), z)
    return _finish(z, lam)


def lambda_of_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("z = 0 corresponds to lambda = infinity")
    return _finish(0.5 * (z + 1.0 / z), z)


@dataclass(frozen=True)
class BackgroundParams:
    """Left background (a, b) together with the z-images q, q1 of the left band edges."""
    a: float
    b: float
    q: float
    q1: float

    @classmethod
    def from_ab(cls, a: float, b: float) -> 'BackgroundParams':
        a = float(a)
        b = float(b)
        if not a > 0:
            raise RegionError(f"left background a must be positive, got {a}")
        if not b + 2 * a < -1:
            raise RegionError(f"shock condition b + 2a < -1 violated (b + 2a = {b + 2 * a})")
        q = float(np.real(z_of_lambda(b - 2 * a)))
        q1 = float(np.real(z_of_lambda(b + 2 * a)))
        return cls(a=a, b=b, q=q, q1=q1)

    @property
    def left_band(self) -> Tuple[float, float]:
        return self.b - 2 * self.a, self.b + 2 * self.a


@dataclass(frozen=True)
class CriticalRays:
    xi_cr: float
    xi_cr_prime: float
    xi_cr1_prime: float
    xi_cr1: float

    def __post_init__(self):
        if not self.xi_cr1 < self.xi_cr1_prime < self.xi_cr_prime < self.xi_cr:
            raise BranchError("critical rays out of order", {
                'xi_cr1': self.xi_cr1, 'xi_cr1_prime': self.xi_cr1_prime,
                'xi_cr_prime': self.xi_cr_prime, 'xi_cr': self.xi_cr,
            })

    def modulation_window(self, epsilon: float) -> Tuple[float, float]:
        """Closed ray interval [xi'_cr + eps, xi_cr - eps] of the elliptic wave region."""
        return self.xi_cr_prime + epsilon, self.xi_cr - epsilon

    def as_rows(self):
        return [
            ('xi_cr', self.xi_cr),
            ('xi_cr_prime', self.xi_cr_prime),
            ('xi_cr1_prime', self.xi_cr1_prime),
            ('xi_cr1', self.xi_cr1),
        ]


def zeta_of_lambda(lam, params: BackgroundParams):
    """Left-background Joukowsky variable: b + a(zeta + 1/zeta) = lam, |zeta| <= 1."""
    mu = _as_complex_array((np.asarray(lam, dtype=complex) - params.b) / (2 * params.a))
    return _finish(np.asarray(z_of_lambda(mu)), lam)


def phase_right(z, xi: float):
    """(z - 1/z)/2 + xi log z, principal logarithm."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("phase_right is singular at z = 0")
    return _finish(0.5 * (z - 1.0 / z) + xi * np.log(z), z)


def phase_left(z, xi: float, params: BackgroundParams):
    """a(1/zeta - zeta) - xi log zeta with zeta = zeta(lambda(z)), principal logarithm."""
    zeta = np.asarray(zeta_of_lambda(lambda_of_z(z), params))
    if np.any(zeta == 0):
        raise ValueError("phase_left is singular at zeta = 0")
    value = params.a * (1.0 / zeta - zeta) - xi * np.log(zeta)
    return _finish(value, z)


def _band_gap_ratio(params: BackgroundParams, weight, q_func) -> float:
    lo = params.b + 2 * params.a
    hi = -1.0

    def numerator(lam):
        return weight(lam) * q_func(lam)

    top = integrate_endpoint_sqrt(numerator, lo, hi)
    bottom = integrate_endpoint_sqrt(q_func, lo, hi)
    return float(np.real(top / bottom))


@lru_cache(maxsize=64)
def critical_rays(params: BackgroundParams) -> CriticalRays:
    a, b = params.a, params.b
    edge = abs(b - 2 * a)
    root = np.sqrt(edge**2 - 1)
    xi_cr = root / np.log(edge + root)

    zeta_one = float(np.real(zeta_of_lambda(1.0, params)))
    xi_cr1 = a * (1.0 / zeta_one - zeta_one) / np.log(zeta_one)

    def right_density(lam):
        ratio = (lam - b - 2 * a) / ((lam - b + 2 * a) * (lam**2 - 1))
        return np.sqrt(np.clip(ratio, 0.0, None))

    def left_density(lam):
        ratio = (lam + 1) / (((lam - b)**2 - 4 * a**2) * (lam - 1))
        return np.sqrt(np.clip(ratio, 0.0, None))

    xi_cr_prime = -2 * a - _band_gap_ratio(params, lambda lam: lam, right_density)
    xi_cr1_prime = b + 1 - _band_gap_ratio(params, lambda lam: lam, left_density)

    rays = CriticalRays(
        xi_cr=float(xi_cr),
        xi_cr_prime=float(xi_cr_prime),
        xi_cr1_prime=float(xi_cr1_prime),
        xi_cr1=float(xi_cr1),
    )
    logger.info(f"Critical rays for a={a}, b={b}: {rays}")
    return rays
