"""
Comparison run configuration.

Config files are plain ``key = value`` text with ``#`` comments:

    a = 1.0
    b = -4.0
    epsilon = 0.3            # margin inside (xi'_cr, xi_cr)
    t_list = 100, 200, 400, 800
    xi_points = 9            # evenly spaced grid, ignored when xi_grid is given
    xi_grid = 0.1, 0.8, 1.5
    dt = 0.01
    out_dir = runs
    window = perturbation.csv
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from spectral.scattering import StepData, load_window
from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import ConfigError, LabError
from todalab.quadrature import lab_setting

logger = logging.getLogger(__name__)

DEFAULT_T_LIST = (100.0, 200.0, 400.0, 800.0)
DEFAULT_XI_POINTS = 9

KNOWN_KEYS = ('a', 'b', 'epsilon', 't_list', 'xi_grid', 'xi_points', 'dt', 'out_dir', 'window')

HELP_TEXT = (
    "Config keys (key = value, # comments): a, b (required); "
    "epsilon (default 0.3); t_list (default 100,200,400,800); "
    "xi_points (default 9) or xi_grid (comma list); dt (default 0.01); "
    "out_dir (default runs); window (optional CSV with columns n, a, b)."
)


@dataclass(frozen=True)
class CompareConfig:
    params: BackgroundParams
    epsilon: float
    t_list: Tuple[float, ...]
    xi_grid: Tuple[float, ...]
    dt: float
    out_dir: Path
    data: Optional[StepData] = field(default=None, compare=False)

    def __post_init__(self):
        lo, hi = self.window
        outside = [xi for xi in self.xi_grid if not lo <= xi <= hi]
        if outside:
            raise ConfigError(f"xi values {outside} lie outside the window [{lo:.6g}, {hi:.6g}]")
        if not self.xi_grid:
            raise ConfigError("xi grid is empty")
        if not self.t_list or any(t <= 0 for t in self.t_list):
            raise ConfigError("t_list must hold positive times")
        if any(later <= earlier for earlier, later in zip(self.t_list, self.t_list[1:])):
            raise ConfigError("t_list must be strictly increasing")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")

    @property
    def window(self) -> Tuple[float, float]:
        return critical_rays(self.params).modulation_window(self.epsilon)

    @property
    def step_data(self) -> StepData:
        return self.data or StepData.pure_step(self.params)

    def as_rows(self):
        return [
            ('a', self.params.a),
            ('b', self.params.b),
            ('epsilon', self.epsilon),
            ('t_list', ','.join(f"{t:g}" for t in self.t_list)),
            ('xi_grid', ','.join(f"{xi:.17g}" for xi in self.xi_grid)),
            ('dt', self.dt),
            ('window', 'none' if self.data is None or self.data.is_pure_step else len(self.data.n_values)),
        ]


def even_grid(params: BackgroundParams, epsilon: float, points: int) -> Tuple[float, ...]:
    lo, hi = critical_rays(params).modulation_window(epsilon)
    return tuple(float(xi) for xi in np.linspace(lo, hi, points))


def default_config(a: float = 1.0, b: float = -4.0, out_dir=None) -> CompareConfig:
    params = BackgroundParams.from_ab(a, b)
    epsilon = lab_setting('COMPARE_EPSILON')
    return CompareConfig(
        params=params,
        epsilon=epsilon,
        t_list=DEFAULT_T_LIST,
        xi_grid=even_grid(params, epsilon, DEFAULT_XI_POINTS),
        dt=lab_setting('DT'),
        out_dir=Path(out_dir or lab_setting('OUTPUT_DIR')),
    )


def _float_list(value: str, key: str, line: int) -> Tuple[float, ...]:
    try:
        return tuple(float(item) for item in value.split(',') if item.strip())
    except ValueError:
        raise ConfigError(f"{key} must be a comma separated list of numbers", line)


def _read_pairs(path):
    pairs = {}
    lines = {}
    for number, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.split('#', 1)[0].strip()
        if not text:
            continue
        if '=' not in text:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", number)
        key, value = (part.strip() for part in text.split('=', 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", number)
        if not value:
            raise ConfigError(f"missing value for {key!r}", number)
        if key in pairs:
            logger.warning(f"Duplicate config key {key!r} on line {number}, keeping the last value")
        pairs[key] = value
        lines[key] = number
    return pairs, lines


def parse_config(path) -> CompareConfig:
    """Read a CompareConfig; a and b are required, everything else has a default."""
    pairs, lines = _read_pairs(path)

    def number(key, default=None, cast=float):
        if key not in pairs:
            if default is None:
                raise ConfigError(f"required key {key!r} is missing")
            return default
        try:
            return cast(pairs[key])
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {pairs[key]!r}", lines[key])

    try:
        params = BackgroundParams.from_ab(number('a'), number('b'))
    except LabError as e:
        raise ConfigError(str(e), lines.get('b'))

    epsilon = number('epsilon', lab_setting('COMPARE_EPSILON'))
    if 'xi_grid' in pairs:
        xi_grid = _float_list(pairs['xi_grid'], 'xi_grid', lines['xi_grid'])
    else:
        xi_grid = even_grid(params, epsilon, number('xi_points', DEFAULT_XI_POINTS, int))
    t_list = _float_list(pairs['t_list'], 't_list', lines['t_list']) if 't_list' in pairs else DEFAULT_T_LIST

    data = None
    if 'window' in pairs:
        window_path = Path(pairs['window'])
        if not window_path.is_absolute():
            window_path = Path(path).parent / window_path
        data = load_window(window_path, params)

    config = CompareConfig(
        params=params,
        epsilon=epsilon,
        t_list=t_list,
        xi_grid=xi_grid,
        dt=number('dt', lab_setting('DT')),
        out_dir=Path(pairs.get('out_dir', lab_setting('OUTPUT_DIR'))),
        data=data,
    )
    logger.info(f"Parsed config {path}: {len(config.xi_grid)} rays, t={list(config.t_list)}")
    return config
