# Report files for a comparison run
import matplotlib
matplotlib.use('Agg')  # Use non-interactive backend
import matplotlib.pyplot as plt
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from todalab.exceptions import LabError
from .compare import ErrorReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
OUTPUT_FILES = ('compare.csv', 'summary.csv', 'decay.svg', 'manifest.txt')


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def manifest_lines(report: ErrorReport):
    lines = [f"{key}={_format(value)}" for key, value in report.config.as_rows()]
    lines += [f"{key}={_format(value)}" for key, value in report.constants]
    for name, fit in (('b', report.fit_b), ('a2sum', report.fit_a)):
        if fit is None:
            continue
        lines += [
            f"slope_{name}={_format(fit.slope)}",
            f"intercept_{name}={_format(fit.intercept)}",
            f"residual_{name}={_format(fit.residual)}",
            f"passes_{name}={fit.passes}",
        ]
    if not report.rows.empty:
        lines.append(f"pointwise_decay={report.pointwise_decay()}")
    return lines


def _decay_chart(report: ErrorReport, path: Path):
    plt.rcParams['svg.hashsalt'] = 'todalab'
    fig, ax = plt.subplots(figsize=(6, 4.5))
    summary = report.summary
    if not summary.empty:
        t = summary['t'].to_numpy(dtype=float)
        ax.loglog(t, summary['max_err_b'], marker='o', label='max |b - b_hat|')
        ax.loglog(t, summary['max_err_a'], marker='s', color='orange', label='max |a2sum - a2sum_hat|')
        ax.loglog(t, summary['max_err_b'].iloc[0] * t[0] / t, linestyle='--', color='gray', label='1/t')
        ax.legend()
    ax.set_title('Error decay in the elliptic wave region')
    ax.set_xlabel('t')
    ax.set_ylabel('max error over rays')
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)


def write_outputs(report: ErrorReport, out_dir=None) -> Path:
    """compare.csv, summary.csv, decay.svg and manifest.txt under out_dir."""
    out_dir = Path(out_dir or report.config.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        report.rows.to_csv(out_dir / 'compare.csv', index=False, float_format=FLOAT_FORMAT)
        report.summary.to_csv(out_dir / 'summary.csv', index=False, float_format=FLOAT_FORMAT)
        _decay_chart(report, out_dir / 'decay.svg')
        (out_dir / 'manifest.txt').write_text('\n'.join(manifest_lines(report)) + '\n')
    except OSError as e:
        logger.error(f"Could not write report to {out_dir}: {e}")
        raise LabError("output directory is not writable", {'dir': str(out_dir)}) from e
    logger.info(f"Wrote {len(report.rows)} comparison rows to {out_dir}")
    return out_dir


def read_rows(out_dir) -> pd.DataFrame:
    return pd.read_csv(Path(out_dir) / 'compare.csv', float_precision='round_trip')


def read_manifest(out_dir) -> dict:
    text = (Path(out_dir) / 'manifest.txt').read_text()
    return dict(line.split('=', 1) for line in text.splitlines() if line)
