import numpy as np
from django.test import SimpleTestCase, tag

from lattice.simulator import (
    LatticeState, TodaIntegrator, domain_bounds, evolve_to, front_detect, init_steplike,
    rewind_to, snapshot_frame, window_sum,
)
from spectral.scattering import StepData
from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import DataError, InstabilityError

SHOCK = BackgroundParams.from_ab(1.0, -4.0)


def short_run(t_final=10.0):
    return init_steplike(SHOCK, t_final)


class DomainTests(SimpleTestCase):

    def test_reference_domain_covers_both_fronts(self):
        n_min, n_max = domain_bounds(SHOCK, 799.0)
        self.assertLessEqual(n_min, -2470)
        self.assertGreaterEqual(n_max, 1990)

    def test_site_limit(self):
        with self.assertRaises(DataError):
            init_steplike(SHOCK, 800.0, max_sites=1000)

    def test_window_widens_domain(self):
        data = StepData.with_window(SHOCK, [400], [0.6], [0.1])
        state = init_steplike(SHOCK, 1.0, data=data)
        self.assertGreaterEqual(state.n_max, 402)
        self.assertEqual(state.b[state.site(400)], 0.1)


class InitialStateTests(SimpleTestCase):

    def test_step_profile_is_exact(self):
        state = short_run()
        sites = state.sites
        self.assertEqual(state.t, 0.0)
        self.assertTrue(np.all(state.a[sites < 0] == SHOCK.a))
        self.assertTrue(np.all(state.b[sites < 0] == SHOCK.b))
        self.assertTrue(np.all(state.a[sites >= 0] == 0.5))
        self.assertTrue(np.all(state.b[sites >= 0] == 0.0))

    def test_site_indexing(self):
        state = short_run()
        self.assertEqual(state.site(state.n_min), 0)
        self.assertEqual(state.site(state.n_max), len(state.a) - 1)
        with self.assertRaises(IndexError):
            state.site(state.n_max + 1)

    def test_front_at_time_zero(self):
        self.assertEqual(front_detect(short_run()), -1)

    def test_snapshot_columns(self):
        frame = snapshot_frame(short_run())
        self.assertEqual(list(frame.columns), ['n', 'a', 'b'])
        self.assertEqual(frame['n'].iloc[0], domain_bounds(SHOCK, 10.0)[0])


class IntegratorTests(SimpleTestCase):

    def test_constant_background_is_stationary(self):
        a = np.full(41, 0.5)
        b = np.zeros(41)
        state = LatticeState(a=a, b=b, n_min=-20, t=0.0, params=SHOCK)
        evolve_to(state, 3.0)
        self.assertLess(np.max(np.abs(state.a - 0.5)), 1e-15)
        self.assertLess(np.max(np.abs(state.b)), 1e-15)

    def test_boundary_cells_frozen(self):
        state = evolve_to(short_run(), 10.0)
        self.assertEqual(state.a[0], SHOCK.a)
        self.assertEqual(state.b[0], SHOCK.b)
        self.assertEqual(state.a[-1], 0.5)
        self.assertEqual(state.b[-1], 0.0)

    def test_partial_last_step_lands_on_target(self):
        state = evolve_to(short_run(), 0.037)
        self.assertEqual(state.t, 0.037)

    def test_step_halving_at_default_dt(self):
        results = {}
        for dt in (0.04, 0.02, 0.01, 0.005):
            results[dt] = evolve_to(short_run(), 10.0, dt=dt)
        diff = {dt: np.max(np.abs(results[dt].b - results[dt / 2].b)) for dt in (0.04, 0.02, 0.01)}
        self.assertLess(diff[0.01], 1e-8)
        # eighth order: the ratio is near 2**8
        self.assertGreater(diff[0.04] / diff[0.02], 64.0)

    def test_time_reversal(self):
        initial = short_run()
        state = evolve_to(initial.copy(), 10.0, dt=0.005)
        rewind_to(state, 0.0, dt=0.005)
        self.assertEqual(state.t, 0.0)
        self.assertLess(np.max(np.abs(state.a - initial.a)), 1e-7)
        self.assertLess(np.max(np.abs(state.b - initial.b)), 1e-7)

    def test_windowed_sum_drift(self):
        state = short_run()
        evolve_to(state, 2.0)
        first = window_sum(state, 90)
        evolve_to(state, 10.0)
        second = window_sum(state, 90)
        self.assertAlmostEqual((second - first) / 8.0, 2 * (0.25 - SHOCK.a**2), places=9)

    def test_evolve_calls_counted(self):
        integrator = TodaIntegrator(0.01)
        state = short_run()
        for t in (1.0, 2.0, 3.0):
            integrator.evolve_to(state, t)
        self.assertEqual(integrator.evolve_calls, 3)
        integrator.rewind_to(state, 0.0)
        self.assertEqual(integrator.evolve_calls, 3)

    def test_backwards_evolve_rejected(self):
        state = evolve_to(short_run(), 1.0)
        with self.assertRaises(ValueError):
            evolve_to(state, 0.5)

    def test_unstable_step_raises(self):
        with self.assertRaises(InstabilityError):
            evolve_to(short_run(), 200.0, dt=2.0)

    def test_non_positive_dt_rejected(self):
        with self.assertRaises(ValueError):
            TodaIntegrator(0.0)


class FrontTests(SimpleTestCase):

    def test_front_speed_matches_leading_ray(self):
        t = 200.0
        state = evolve_to(init_steplike(SHOCK, t), t)
        speed = front_detect(state) / t
        xi_cr = critical_rays(SHOCK).xi_cr
        self.assertLess(abs(speed - xi_cr) / xi_cr, 0.05)

    def test_front_moves_back_with_larger_threshold(self):
        state = evolve_to(short_run(), 10.0)
        fronts = [front_detect(state, threshold) for threshold in (1e-6, 1e-3, 1e-1)]
        self.assertTrue(fronts[0] >= fronts[1] >= fronts[2])

    @tag('slow')
    def test_front_speed_at_reference_time(self):
        t = 799.0
        state = evolve_to(init_steplike(SHOCK, t), t)
        xi_cr = critical_rays(SHOCK).xi_cr
        self.assertLess(abs(front_detect(state) / t - xi_cr) / xi_cr, 0.03)
