"""
Scattering data of steplike initial data at t = 0.

The default data set is the exact pure step (a, b) | (1/2, 0), for which the
Wronskian has the closed form a*zeta - 1/(2z). A finite perturbation window
is handled by building the Jost solutions with the three-term recurrence.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from todalab.exceptions import BranchError, DataError
from todalab.quadrature import lab_setting
from .spectral_map import BackgroundParams, lambda_of_z, zeta_of_lambda

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepData:
    """Initial coefficients: backgrounds outside a finite window of sites."""
    params: BackgroundParams
    n_values: Tuple[int, ...] = ()
    a_values: Tuple[float, ...] = ()
    b_values: Tuple[float, ...] = ()

    def __post_init__(self):
        if not len(self.n_values) == len(self.a_values) == len(self.b_values):
            raise DataError("window columns n, a, b have different lengths")
        if any(value <= 0 for value in self.a_values):
            raise DataError("window contains a non-positive a(n)")

    @classmethod
    def pure_step(cls, params: BackgroundParams) -> 'StepData':
        return cls(params=params)

    @classmethod
    def with_window(cls, params: BackgroundParams, n_values: Sequence[int],
                    a_values: Sequence[float], b_values: Sequence[float]) -> 'StepData':
        return cls(
            params=params,
            n_values=tuple(int(n) for n in n_values),
            a_values=tuple(float(a) for a in a_values),
            b_values=tuple(float(b) for b in b_values),
        )

    @property
    def is_pure_step(self) -> bool:
        return not self.n_values

    @property
    def radius(self) -> int:
        return max((abs(n) for n in self.n_values), default=0)

    @cached_property
    def _window(self) -> Dict[int, Tuple[float, float]]:
        return {n: (a, b) for n, a, b in zip(self.n_values, self.a_values, self.b_values)}

    def coefficients(self, lo: int, hi: int) -> Tuple[np.ndarray, np.ndarray]:
        """Arrays a(n), b(n) for n = lo..hi inclusive."""
        sites = np.arange(lo, hi + 1)
        a = np.where(sites >= 0, 0.5, self.params.a).astype(float)
        b = np.where(sites >= 0, 0.0, self.params.b).astype(float)
        for n, (a_n, b_n) in self._window.items():
            if lo <= n <= hi:
                a[n - lo] = a_n
                b[n - lo] = b_n
        return a, b


def load_window(path, params: BackgroundParams) -> StepData:
    """Read a perturbation window from a CSV file with columns n, a, b."""
    frame = pd.read_csv(path)
    missing = {'n', 'a', 'b'} - set(frame.columns)
    if missing:
        raise DataError(f"window file {path} lacks columns {sorted(missing)}")
    logger.info(f"Loaded {len(frame)} window sites from {path}")
    return StepData.with_window(params, frame['n'], frame['a'], frame['b'])


def _jost_wronskian(z, zeta, data: StepData, site: int):
    z = np.asarray(z, dtype=complex).ravel()
    zeta = np.asarray(zeta, dtype=complex).ravel()
    lam = 0.5 * (z + 1.0 / z)
    radius = data.radius
    lo = min(-radius - 2, site - 1)
    hi = max(radius + 2, site)
    a, b = data.coefficients(lo - 1, hi + 1)
    offset = lo - 1

    count = hi - lo + 3
    right = np.zeros((count, z.size), dtype=complex)
    left = np.zeros((count, z.size), dtype=complex)

    # psi = z^n beyond the window, recursed backwards
    for n in (hi + 1, hi):
        right[n - offset] = z**n
    for m in range(hi, lo - 1, -1):
        i = m - offset
        right[i - 1] = ((lam - b[i]) * right[i] - a[i] * right[i + 1]) / a[i - 1]

    # psi_l = zeta^(-n) before the window, recursed forwards
    for n in (lo - 1, lo):
        left[n - offset] = zeta**(-n)
    for m in range(lo, hi + 1):
        i = m - offset
        left[i + 1] = ((lam - b[i]) * left[i] - a[i - 1] * left[i - 1]) / a[i]

    i = site - offset
    return a[i - 1] * (left[i - 1] * right[i] - left[i] * right[i - 1])


def wronskian(z, data: StepData, site: int = 0, zeta=None, method: str = 'auto'):
    """
    W(z) = a(n-1)(psi_l(n-1) psi(n) - psi_l(n) psi(n-1)) at t = 0.

    `zeta` overrides the left Joukowsky value (used for band boundary values
    and for the second-sheet Wronskian). `method='recurrence'` forces the
    Jost recurrence even for the pure step.
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr == 0):
        raise ValueError("the Wronskian is not defined at z = 0")
    if zeta is None:
        zeta = zeta_of_lambda(lambda_of_z(z_arr), data.params)
    zeta = np.asarray(zeta, dtype=complex)
    if data.is_pure_step and method == 'auto':
        value = data.params.a * zeta - 0.5 / z_arr
    else:
        value = _jost_wronskian(z_arr, zeta, data, site).reshape(np.broadcast(z_arr, zeta).shape)
    return value[()] if value.ndim == 0 else value


def wronskian_bar(z, data: StepData, site: int = 0, zeta=None, method: str = 'auto'):
    """Wronskian with zeta replaced by 1/zeta (second-sheet value)."""
    if zeta is None:
        zeta = zeta_of_lambda(lambda_of_z(z), data.params)
    return wronskian(z, data, site=site, zeta=1.0 / np.asarray(zeta, dtype=complex), method=method)


def band_zeta(z, params: BackgroundParams):
    """
    Boundary value zeta(z - i0) = mu - i sqrt(1 - mu^2) for real z in (q1, q).

    1 + mu and 1 - mu are formed from the distances to q and q1 so the
    square root keeps full relative accuracy at the band edges.
    """
    z = np.asarray(z, dtype=float)
    a = params.a
    one_plus = (z - params.q) * (1.0 - 1.0 / (z * params.q)) / (4 * a)
    one_minus = -(z - params.q1) * (1.0 - 1.0 / (z * params.q1)) / (4 * a)
    mu = (0.5 * (z + 1.0 / z) - params.b) / (2 * a)
    root = np.sqrt(np.clip(one_plus * one_minus, 0.0, None))
    return mu - 1j * root, mu + 1j * root


def _check_band(z, params: BackgroundParams):
    z = np.asarray(z, dtype=float)
    if np.any((z <= params.q1) | (z >= params.q)):
        raise ValueError(f"chi is evaluated on the open band ({params.q1}, {params.q}) only")
    return z


def chi_on_band(z, data: StepData):
    """chi(z) = -a(zeta - 1/zeta)(z - 1/z) / (2 W Wbar) at z - i0; purely imaginary."""
    z = _check_band(z, data.params)
    zeta, zeta_inv = band_zeta(z, data.params)
    w = wronskian(z, data, zeta=zeta)
    w_bar = wronskian(z, data, zeta=zeta_inv)
    value = -data.params.a * (zeta - zeta_inv) * (z - 1.0 / z) / (2 * w * w_bar)
    return value[()] if np.ndim(value) == 0 else value


def chi_from_transmission(z, data: StepData):
    """Same density through the transmission coefficient T = (z - 1/z)/(2W)."""
    z = _check_band(z, data.params)
    zeta, zeta_inv = band_zeta(z, data.params)
    transmission = (z - 1.0 / z) / (2 * wronskian(z, data, zeta=zeta))
    value = -2 * data.params.a * (zeta - zeta_inv) / (z - 1.0 / z) * np.abs(transmission)**2
    return value[()] if np.ndim(value) == 0 else value


def _real_gap_segments(params: BackgroundParams):
    return [(-1.0, params.q1), (params.q, 0.0), (0.0, 1.0)]


def find_eigenvalues(data: StepData, points: int = 1000):
    """Zeros of the real Wronskian on (-1, q1), (q, 0) and (0, 1)."""
    eigenvalues = []

    def real_w(s):
        return float(np.real(wronskian(s, data)))

    for lo, hi in _real_gap_segments(data.params):
        grid = np.linspace(lo, hi, points + 2)[1:-1]
        values = np.asarray(wronskian(grid, data))
        if np.max(np.abs(values.imag)) > 1e-10 * max(np.max(np.abs(values.real)), 1.0):
            raise BranchError("Wronskian is not real on a real gap segment", {'segment': (lo, hi)})
        signs = np.sign(values.real)
        for k in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
            root = brentq(real_w, grid[k], grid[k + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)
            eigenvalues.append(float(root))
    eigenvalues.sort()
    if eigenvalues:
        logger.info(f"Found {len(eigenvalues)} eigenvalue(s): {eigenvalues}")
    return eigenvalues


def blaschke(z, eigenvalues, params: BackgroundParams):
    """Product of |z_j|(z - 1/z_j)/(z - z_j) over the eigenvalues z_j in (q, 0)."""
    z = np.asarray(z, dtype=complex)
    value = np.ones_like(z)
    for z_j in eigenvalues:
        if params.q < z_j < 0:
            value = value * abs(z_j) * (z - 1.0 / z_j) / (z - z_j)
    return value[()] if value.ndim == 0 else value


@dataclass(frozen=True)
class ResonanceStatus:
    flags: Dict[str, bool]
    moduli: Dict[str, float]

    @property
    def at_q(self) -> bool:
        return self.flags['q']


def edge_points(params: BackgroundParams) -> Dict[str, Tuple[float, complex]]:
    """The four band edges in z with their exact zeta values."""
    return {
        'minus_one': (-1.0, complex(zeta_of_lambda(-1.0, params))),
        'one': (1.0, complex(zeta_of_lambda(1.0, params))),
        'q': (params.q, -1 + 0j),
        'q1': (params.q1, 1 + 0j),
    }


def resonance_status(data: StepData, tol_res: Optional[float] = None) -> ResonanceStatus:
    tol_res = tol_res if tol_res is not None else lab_setting('TOL_RES')
    flags = {}
    moduli = {}
    for name, (z, zeta) in edge_points(data.params).items():
        modulus = float(abs(wronskian(z, data, zeta=zeta)))
        moduli[name] = modulus
        flags[name] = modulus < tol_res
    return ResonanceStatus(flags=flags, moduli=moduli)


@dataclass(frozen=True)
class ScatteringSummary:
    """Everything the phase shift needs from the initial data."""
    data: StepData
    eigenvalues: Tuple[float, ...]
    resonance: ResonanceStatus = field(compare=False)

    def W(self, z):
        return wronskian(z, self.data)

    def chi(self, z):
        return chi_on_band(z, self.data)

    def blaschke(self, z):
        return blaschke(z, self.eigenvalues, self.data.params)


def scattering_summary(data: StepData, tol_res: Optional[float] = None) -> ScatteringSummary:
    status = resonance_status(data, tol_res)
    eigenvalues = tuple(find_eigenvalues(data))
    for name, flag in status.flags.items():
        if flag:
            logger.warning(f"Edge {name} is resonant (|W| = {status.moduli[name]:.3e})")
    return ScatteringSummary(data=data, eigenvalues=eigenvalues, resonance=status)
