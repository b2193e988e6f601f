"""
Direct integration of the Toda lattice

    a'(n) = a(n) (b(n+1) - b(n)),    b'(n) = 2 (a(n)^2 - a(n-1)^2)

on a finite window of sites whose two outermost cells are frozen at the
background values.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.integrate._ivp import dop853_coefficients as dop853

from spectral.scattering import StepData
from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import DataError, InstabilityError
from todalab.quadrature import lab_setting

logger = logging.getLogger(__name__)

# 12-stage eighth-order Dormand-Prince tableau, used at a fixed step
STAGE_MATRIX = dop853.A[:dop853.N_STAGES, :dop853.N_STAGES]
STAGE_WEIGHTS = dop853.B


@dataclass
class LatticeState:
    a: np.ndarray
    b: np.ndarray
    n_min: int
    t: float
    params: BackgroundParams

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.a) - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def site(self, n: int) -> int:
        """Array index of lattice site n."""
        if not self.n_min <= n <= self.n_max:
            raise IndexError(f"site {n} outside [{self.n_min}, {self.n_max}]")
        return n - self.n_min

    def copy(self) -> 'LatticeState':
        return LatticeState(a=self.a.copy(), b=self.b.copy(), n_min=self.n_min, t=self.t,
                            params=self.params)


def default_pad(t_final: float) -> float:
    return lab_setting('PAD_BASE') + lab_setting('PAD_SQRT') * math.sqrt(t_final)


def domain_bounds(params: BackgroundParams, t_final: float, pad: Optional[float] = None) -> Tuple[int, int]:
    """Sites [n_min, n_max] reaching pad beyond both outer fronts at t_final."""
    pad = default_pad(t_final) if pad is None else pad
    rays = critical_rays(params)
    n_min = int(math.floor(rays.xi_cr1 * t_final - pad))
    n_max = int(math.ceil(rays.xi_cr * t_final + pad))
    return min(n_min, -2), max(n_max, 1)


def init_steplike(params: BackgroundParams, t_final: float, pad: Optional[float] = None,
                  max_sites: Optional[int] = None, data: Optional[StepData] = None) -> LatticeState:
    """Step data (a, b) for n < 0 and (1/2, 0) for n >= 0, plus an optional perturbation window."""
    max_sites = max_sites or lab_setting('MAX_SITES')
    data = data or StepData.pure_step(params)
    n_min, n_max = domain_bounds(params, t_final, pad)
    if data.radius:
        n_min = min(n_min, -data.radius - 2)
        n_max = max(n_max, data.radius + 2)
    size = n_max - n_min + 1
    if size > max_sites:
        raise DataError(f"lattice of {size} sites exceeds the limit of {max_sites}",
                        {'n_min': n_min, 'n_max': n_max})
    a, b = data.coefficients(n_min, n_max)
    logger.info(f"Initialised {size} sites on [{n_min}, {n_max}] for t_final={t_final}")
    return LatticeState(a=a, b=b, n_min=n_min, t=0.0, params=params)


class TodaIntegrator:
    """Fixed-step explicit Runge-Kutta with preallocated stage buffers; counts evolve calls."""

    def __init__(self, dt: Optional[float] = None):
        self.dt = dt if dt is not None else lab_setting('DT')
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        self.evolve_calls = 0
        self._buffers = None

    def _prepare(self, size: int):
        if self._buffers is None or self._buffers[0].shape[1] != size:
            stages = len(STAGE_WEIGHTS)
            self._buffers = (np.empty((stages, size)), np.empty((stages, size)),
                             np.empty(size), np.empty(size))
        return self._buffers

    @staticmethod
    def _rhs(a, b, da, db, direction: float):
        da[0] = da[-1] = 0.0
        db[0] = db[-1] = 0.0
        da[1:-1] = direction * a[1:-1] * (b[2:] - b[1:-1])
        db[1:-1] = (2.0 * direction) * (a[1:-1]**2 - a[:-2]**2)

    def _step(self, state: LatticeState, dt: float, direction: float):
        k_a, k_b, a_stage, b_stage = self._prepare(len(state.a))
        self._rhs(state.a, state.b, k_a[0], k_b[0], direction)
        for stage in range(1, len(STAGE_WEIGHTS)):
            coeffs = dt * STAGE_MATRIX[stage, :stage]
            a_stage[:] = state.a + coeffs @ k_a[:stage]
            b_stage[:] = state.b + coeffs @ k_b[:stage]
            self._rhs(a_stage, b_stage, k_a[stage], k_b[stage], direction)
        state.a += dt * (STAGE_WEIGHTS @ k_a)
        state.b += dt * (STAGE_WEIGHTS @ k_b)

    def _check(self, state: LatticeState, dt: float):
        bad = ~(np.isfinite(state.a) & (state.a > 0))
        if np.any(bad):
            n = int(state.n_min + np.argmax(bad))
            logger.error(f"Lattice instability at n={n}, t={state.t:.6g}, dt={dt}")
            raise InstabilityError(n, state.t, dt)

    def _run(self, state: LatticeState, t_target: float, direction: float) -> LatticeState:
        start = state.t
        span = direction * (t_target - start)
        if span < 0:
            raise ValueError(f"cannot move from t={start} to t={t_target} in this direction")
        full_steps = int(math.floor(span / self.dt + 1e-9))
        with np.errstate(over='ignore', invalid='ignore'):
            for k in range(1, full_steps + 1):
                self._step(state, self.dt, direction)
                state.t = start + direction * k * self.dt
                self._check(state, self.dt)
            remainder = span - full_steps * self.dt
            if remainder > 1e-12 * max(1.0, span):
                self._step(state, remainder, direction)
                self._check(state, remainder)
        state.t = t_target
        return state

    def evolve_to(self, state: LatticeState, t_target: float) -> LatticeState:
        """Advance state in place to t_target; the last step is shortened to land on it."""
        self.evolve_calls += 1
        logger.info(f"Evolving {len(state.a)} sites from t={state.t} to t={t_target} with dt={self.dt}")
        return self._run(state, t_target, 1.0)

    def rewind_to(self, state: LatticeState, t_target: float) -> LatticeState:
        """Integrate the negated right-hand side back to an earlier time."""
        return self._run(state, t_target, -1.0)


def evolve_to(state: LatticeState, t_target: float, dt: Optional[float] = None) -> LatticeState:
    return TodaIntegrator(dt).evolve_to(state, t_target)


def rewind_to(state: LatticeState, t_target: float, dt: Optional[float] = None) -> LatticeState:
    return TodaIntegrator(dt).rewind_to(state, t_target)


def front_detect(state: LatticeState, threshold: Optional[float] = None) -> int:
    """Largest site with |b(n)| above threshold (n_min - 1 if none)."""
    threshold = threshold if threshold is not None else lab_setting('FRONT_THRESHOLD')
    above = np.nonzero(np.abs(state.b) > threshold)[0]
    if len(above) == 0:
        return state.n_min - 1
    return int(state.n_min + above[-1])


def snapshot_frame(state: LatticeState) -> pd.DataFrame:
    return pd.DataFrame({'n': state.sites, 'a': state.a, 'b': state.b})


def window_sum(state: LatticeState, half_width: int) -> float:
    """Sum of b(n) over |n| <= half_width."""
    lo, hi = state.site(-half_width), state.site(half_width)
    return float(np.sum(state.b[lo:hi + 1]))
