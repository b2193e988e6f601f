"""
Simulation against asymptotics on a (xi, t) grid in the elliptic wave region.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from lattice.simulator import TodaIntegrator, init_steplike
from modulation.asymptotics import (
    dirichlet_eigenvalue, fixed_ray_phase, modulated_wave, phase_shift_delta, trace_formulas,
)
from modulation.elliptic import build_surface, period_two_ray
from modulation.gfunction import solve_whitham_edge
from spectral.scattering import StepData, scattering_summary
from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import DataError, LabError
from todalab.quadrature import lab_setting
from .config import CompareConfig

logger = logging.getLogger(__name__)

ROW_COLUMNS = ['xi', 't', 'n', 'b_sim', 'b_hat', 'err_b', 'a2sum_sim', 'a2sum_hat', 'err_a']
SUMMARY_COLUMNS = ['t', 'max_err_b', 'max_err_a']


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residual: float
    passes: bool


@dataclass
class ErrorReport:
    config: CompareConfig
    rows: pd.DataFrame
    summary: pd.DataFrame
    fit_b: Optional[DecayFit] = None
    fit_a: Optional[DecayFit] = None
    constants: List[tuple] = field(default_factory=list)

    @classmethod
    def empty(cls, config: CompareConfig) -> 'ErrorReport':
        return cls(config=config, rows=pd.DataFrame(columns=ROW_COLUMNS),
                   summary=pd.DataFrame(columns=SUMMARY_COLUMNS))

    def pointwise_decay(self) -> bool:
        """err_b at the last time is below err_b at the first time for every ray."""
        if self.rows.empty:
            return False
        by_ray = self.rows.pivot_table(index='xi', columns='t', values='err_b')
        times = sorted(by_ray.columns)
        return bool((by_ray[times[-1]] < by_ray[times[0]]).all())

    @property
    def passes(self) -> bool:
        fits = (self.fit_b, self.fit_a)
        return all(fit is not None and fit.passes for fit in fits) and self.pointwise_decay()


def fit_decay(t_values: Sequence[float], errors: Sequence[float], window=None) -> DecayFit:
    """Least squares line through (log t, log error)."""
    window = window or lab_setting('SLOPE_WINDOW')
    t_values = np.asarray(t_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(t_values) < 3:
        raise DataError(f"need at least 3 points to fit a decay rate, got {len(t_values)}")
    if np.any(errors <= 0) or np.any(t_values <= 0) or not np.all(np.isfinite(errors)):
        raise DataError("decay fit needs positive finite errors and times")

    X = np.log(t_values).reshape(-1, 1)
    y = np.log(errors)
    model = LinearRegression()
    model.fit(X, y)
    slope = float(model.coef_[0])
    residual = float(1.0 - r2_score(y, model.predict(X)))
    lo, hi = window
    return DecayFit(slope=slope, intercept=float(model.intercept_), residual=residual,
                    passes=bool(lo <= slope <= hi))


def lattice_site(xi: float, t: float, window) -> int:
    """round(xi t), moved one site inward when the ratio would leave the window."""
    lo, hi = window
    n = int(round(xi * t))
    if n / t < lo:
        n += 1
    elif n / t > hi:
        n -= 1
    return n


def ray_constants(xi: float, params: BackgroundParams, summary, epsilon: float) -> List[tuple]:
    edge = solve_whitham_edge(xi, params, epsilon)
    surface = build_surface(edge)
    delta = phase_shift_delta(edge, summary)
    label = f"ray[{xi:.17g}]"
    return [
        (f"{label}.y", edge.y),
        (f"{label}.lambda_y", edge.lambda_y),
        (f"{label}.B", surface.B),
        (f"{label}.Delta", delta.Delta),
        (f"{label}.Gamma", surface.Gamma),
        (f"{label}.tau", surface.tau.imag),
        (f"{label}.Lambda", surface.Lambda.imag),
        (f"{label}.U", surface.U.imag),
    ]


def run_compare(config: CompareConfig) -> ErrorReport:
    """One lattice run shared by every ray; errors recorded at each t of the config."""
    params = config.params
    summary = scattering_summary(config.step_data)
    window = config.window

    constants = [('q', params.q), ('q1', params.q1)] + critical_rays(params).as_rows()
    for xi in config.xi_grid:
        constants.extend(ray_constants(xi, params, summary, config.epsilon))

    integrator = TodaIntegrator(config.dt)
    state = init_steplike(params, config.t_list[-1], data=config.data)
    rows = []
    for t in config.t_list:
        integrator.evolve_to(state, t)
        for xi in config.xi_grid:
            n = lattice_site(xi, t, window)
            wave = modulated_wave(n, t, summary, config.epsilon)
            index = state.site(n)
            b_sim = float(state.b[index])
            a2sum_sim = float(state.a[index]**2 + state.a[index - 1]**2)
            rows.append({
                'xi': xi, 't': t, 'n': n,
                'b_sim': b_sim, 'b_hat': wave.b_hat, 'err_b': abs(b_sim - wave.b_hat),
                'a2sum_sim': a2sum_sim, 'a2sum_hat': wave.a_hat_sq_sum,
                'err_a': abs(a2sum_sim - wave.a_hat_sq_sum),
            })
        logger.info(f"Compared {len(config.xi_grid)} rays at t={t}")

    if integrator.evolve_calls != len(config.t_list):
        raise LabError("lattice was evolved more than once per time", {
            'evolve_calls': integrator.evolve_calls, 'times': len(config.t_list),
        })

    frame = pd.DataFrame(rows, columns=ROW_COLUMNS)
    per_t = frame.groupby('t', sort=True).agg(max_err_b=('err_b', 'max'), max_err_a=('err_a', 'max'))
    per_t = per_t.reset_index()[SUMMARY_COLUMNS]

    report = ErrorReport(config=config, rows=frame, summary=per_t, constants=constants)
    if len(per_t) >= 3:
        report.fit_b = fit_decay(per_t['t'], per_t['max_err_b'])
        report.fit_a = fit_decay(per_t['t'], per_t['max_err_a'])
        logger.info(f"Decay slopes: b {report.fit_b.slope:.4f}, a^2 sum {report.fit_a.slope:.4f}")
    else:
        logger.warning("Fewer than 3 times in the config, decay rate not fitted")
    return report


def period_two_check(params: BackgroundParams, t: float, n0: Optional[int] = None, count: int = 10,
                     data: Optional[StepData] = None) -> float:
    """max |b_hat(n + 2) - b_hat(n)| over count consecutive sites on the equal-band ray."""
    ray = period_two_ray(params)
    surface = build_surface(ray.edge)
    delta = phase_shift_delta(ray.edge, scattering_summary(data or StepData.pure_step(params)))
    n0 = int(round(ray.xi * t)) if n0 is None else n0

    values: Dict[int, float] = {}
    for n in range(n0, n0 + count + 2):
        point = dirichlet_eigenvalue(fixed_ray_phase(n, t, surface, delta), surface)
        values[n] = trace_formulas(point.lambda_nt, ray.edge).b_hat
    worst = max(abs(values[n + 2] - values[n]) for n in range(n0, n0 + count))
    logger.info(f"Period-two check at xi={ray.xi:.6g}, t={t}: {worst:.3e}")
    return float(worst)
