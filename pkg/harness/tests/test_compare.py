import math
import tempfile
from dataclasses import replace
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd
from django.test import SimpleTestCase, tag

from harness.compare import ErrorReport, fit_decay, lattice_site, period_two_check, run_compare
from harness.config import default_config
from harness.reports import read_manifest, read_rows, write_outputs
from lattice.simulator import TodaIntegrator, init_steplike
from modulation.asymptotics import modulated_wave
from spectral.scattering import StepData, scattering_summary
from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import DataError, LabError

SHOCK = BackgroundParams.from_ab(1.0, -4.0)
TIMES = np.array([100.0, 200.0, 400.0, 800.0])


class FitDecayTests(SimpleTestCase):

    def test_inverse_time(self):
        fit = fit_decay(TIMES, 0.7 / TIMES)
        self.assertLess(abs(fit.slope + 1), 1e-12)
        self.assertAlmostEqual(fit.intercept, math.log(0.7), places=12)
        self.assertLess(fit.residual, 1e-12)
        self.assertTrue(fit.passes)

    def test_inverse_square(self):
        fit = fit_decay(TIMES, 3.0 / TIMES**2)
        self.assertAlmostEqual(fit.slope, -2.0, places=12)
        self.assertFalse(fit.passes)

    def test_constant_errors_fail(self):
        fit = fit_decay(TIMES, np.full(4, 0.02))
        self.assertAlmostEqual(fit.slope, 0.0, places=12)
        self.assertFalse(fit.passes)

    def test_needs_three_points(self):
        with self.assertRaises(DataError):
            fit_decay(TIMES[:2], 1 / TIMES[:2])

    def test_rejects_zero_error(self):
        with self.assertRaises(DataError):
            fit_decay(TIMES, [0.1, 0.0, 0.01, 0.001])


class LatticeSiteTests(SimpleTestCase):

    def test_rounds_to_nearest_site(self):
        self.assertEqual(lattice_site(0.8, 800.0, (-0.4, 2.0)), 640)
        self.assertEqual(lattice_site(0.8013, 100.0, (-0.4, 2.0)), 80)

    def test_stays_inside_window(self):
        lo, hi = -0.456, 2.087
        self.assertGreaterEqual(lattice_site(lo, 100.0, (lo, hi)) / 100.0, lo)
        self.assertLessEqual(lattice_site(hi, 100.0, (lo, hi)) / 100.0, hi)


def synthetic_report(out_dir):
    config = default_config(out_dir=out_dir)
    rng = np.random.default_rng(3)
    rows = []
    for t in TIMES:
        for xi in config.xi_grid:
            b_sim, b_hat, a_sim, a_hat = rng.normal(size=4)
            rows.append({
                'xi': xi, 't': t, 'n': int(round(xi * t)),
                'b_sim': b_sim, 'b_hat': b_hat, 'err_b': abs(b_sim - b_hat) / t,
                'a2sum_sim': a_sim, 'a2sum_hat': a_hat, 'err_a': abs(a_sim - a_hat) / t,
            })
    frame = pd.DataFrame(rows)
    summary = frame.groupby('t').agg(max_err_b=('err_b', 'max'), max_err_a=('err_a', 'max')).reset_index()
    report = ErrorReport(config=config, rows=frame, summary=summary,
                         constants=critical_rays(config.params).as_rows())
    report.fit_b = fit_decay(summary['t'], summary['max_err_b'])
    report.fit_a = fit_decay(summary['t'], summary['max_err_a'])
    return report


class ReportTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_empty_report_writes_headers_only(self):
        report = ErrorReport.empty(default_config(out_dir=self.out))
        write_outputs(report)
        self.assertEqual((self.out / 'compare.csv').read_text().strip(),
                         'xi,t,n,b_sim,b_hat,err_b,a2sum_sim,a2sum_hat,err_a')
        self.assertEqual((self.out / 'summary.csv').read_text().strip(), 't,max_err_b,max_err_a')
        self.assertTrue((self.out / 'decay.svg').exists())

    def test_csv_round_trip_is_exact(self):
        report = synthetic_report(self.out)
        write_outputs(report)
        rows = read_rows(self.out)
        for column in ('xi', 't', 'b_sim', 'b_hat', 'err_b', 'a2sum_sim', 'a2sum_hat', 'err_a'):
            self.assertTrue(np.array_equal(rows[column].to_numpy(), report.rows[column].to_numpy()), column)

    def test_manifest_has_critical_rays(self):
        report = synthetic_report(self.out)
        write_outputs(report)
        manifest = read_manifest(self.out)
        self.assertEqual(float(manifest['xi_cr']), critical_rays(SHOCK).xi_cr)
        self.assertEqual(manifest['a'], '1')
        self.assertIn('slope_b', manifest)

    def test_outputs_are_deterministic(self):
        report = synthetic_report(self.out)
        first = write_outputs(report, self.out / 'one')
        second = write_outputs(report, self.out / 'two')
        for name in ('compare.csv', 'summary.csv', 'decay.svg', 'manifest.txt'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

    def test_unwritable_directory(self):
        blocker = self.out / 'file'
        blocker.write_text('')
        with self.assertRaises(LabError):
            write_outputs(synthetic_report(self.out), blocker / 'inside')


class RunCompareTests(SimpleTestCase):

    def small_config(self, out_dir):
        return replace(default_config(out_dir=out_dir), t_list=(5.0, 10.0, 20.0), xi_grid=(0.3, 1.2))

    def test_rows_for_every_ray_and_time(self):
        with tempfile.TemporaryDirectory() as tmp:
            report = run_compare(self.small_config(tmp))
        self.assertEqual(len(report.rows), 6)
        self.assertEqual(list(report.summary['t']), [5.0, 10.0, 20.0])
        self.assertTrue(np.all(np.isfinite(report.rows[['err_b', 'err_a']].to_numpy())))
        self.assertIsNotNone(report.fit_b)
        self.assertTrue(any(key == 'xi_cr' for key, _ in report.constants))

    def test_one_evolve_per_time(self):
        original = TodaIntegrator.evolve_to

        def doubled(integrator, state, t_target):
            original(integrator, state, t_target)
            integrator.evolve_calls += 1
            return state

        with tempfile.TemporaryDirectory() as tmp, mock.patch.object(TodaIntegrator, 'evolve_to', doubled):
            with self.assertRaises(LabError):
                run_compare(self.small_config(tmp))

    def test_period_two_ray(self):
        self.assertLess(period_two_check(SHOCK, 400.0), 1e-6)


@tag('slow')
class DefaultConfigAcceptanceTests(SimpleTestCase):
    """Full run of the default config (a=1, b=-4, t up to 800)."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.report = run_compare(default_config(out_dir=cls.tmp.name))

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def test_decay_rate(self):
        self.assertTrue(-1.4 <= self.report.fit_b.slope <= -0.6, self.report.fit_b)
        self.assertTrue(-1.4 <= self.report.fit_a.slope <= -0.6, self.report.fit_a)

    def test_errors_decay_on_every_ray(self):
        self.assertTrue(self.report.pointwise_decay())
        self.assertTrue(self.report.passes)


@tag('slow')
class ModelTracksLatticeTests(SimpleTestCase):
    """Lattice against the modulated wave on an interior ray at t = 800."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.t = 800.0
        cls.state = TodaIntegrator(0.01).evolve_to(init_steplike(SHOCK, cls.t), cls.t)
        cls.summary = scattering_summary(StepData.pure_step(SHOCK))

    def test_errors_within_inverse_square_root_of_time(self):
        bound = 3.0 / math.sqrt(self.t)
        for n in range(636, 645):
            wave = modulated_wave(n, self.t, self.summary)
            index = self.state.site(n)
            a2sum = self.state.a[index]**2 + self.state.a[index - 1]**2
            self.assertLess(abs(self.state.b[index] - wave.b_hat), bound, n)
            self.assertLess(abs(a2sum - wave.a_hat_sq_sum), bound, n)
