import cmath
import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from modulation.elliptic import (
    ThetaParams, abel_map, build_surface, calR, frequency_ratio, lattice_distance,
    lattice_reduce, period_two_ray, surface_periods, theta,
)
from modulation.gfunction import solve_whitham_edge
from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import BranchError, RegionError
from todalab.quadrature import integrate_endpoint_sqrt, integrate_panels

SHOCK = BackgroundParams.from_ab(1.0, -4.0)
XI = 0.8


def shock_surface(xi=XI):
    return build_surface(solve_whitham_edge(xi, SHOCK))


class PeriodTests(SimpleTestCase):

    def test_periods_have_the_right_signs(self):
        gamma, tau = surface_periods(solve_whitham_edge(XI, SHOCK))
        self.assertGreater(gamma, 0.0)
        self.assertEqual(tau.real, 0.0)
        self.assertGreater(tau.imag, 0.0)

    def test_surface_is_cached_and_consistent(self):
        surface = shock_surface()
        self.assertIs(surface, shock_surface())
        self.assertEqual(surface.theta_modulus, 2 * surface.tau)
        self.assertEqual(surface.xi, XI)

    def test_third_kind_quantities(self):
        surface = shock_surface()
        edge = surface.edge
        self.assertEqual(surface.Lambda.real, 0.0)
        self.assertLess(surface.Lambda.imag, 0.0)
        self.assertEqual(surface.U.real, 0.0)
        self.assertTrue(edge.lambda_y < surface.lambda_h < -1.0)
        self.assertLess(abs(surface.U - (-2j * surface.B - XI * surface.Lambda)), 1e-12 * abs(surface.U))

    def test_calR_boundary_values(self):
        edge = solve_whitham_edge(XI, SHOCK)
        s = 0.5 * (edge.y + SHOCK.q)
        below = complex(calR(s, edge, side='+'))
        self.assertEqual(below.real, 0.0)
        self.assertLess(below.imag, 0.0)
        self.assertAlmostEqual(complex(calR(0.0, edge)), 1.0, places=14)
        z = 0.3 - 0.7j
        self.assertLess(abs(calR(1 / z, edge) - calR(z, edge) / z**2), 1e-12)


class AbelMapTests(SimpleTestCase):

    def setUp(self):
        self.surface = shock_surface()
        self.tau = self.surface.tau

    def test_normalisation_points(self):
        self.assertLess(abs(abel_map(SHOCK.q, self.surface).raw), 1e-15)
        self.assertLess(abs(abel_map(1 / SHOCK.q, self.surface).raw - 0.5), 1e-9)
        self.assertLess(abs(abel_map(1.0, self.surface).raw - 0.25), 1e-9)

    def test_value_at_minus_one(self):
        below = abel_map(-1.0, self.surface, side='+').raw
        above = abel_map(-1.0, self.surface, side='-').raw
        self.assertLess(abs(below - (0.25 - self.tau / 2)), 1e-9)
        self.assertLess(abs(above - (0.25 + self.tau / 2)), 1e-9)

    def test_jump_across_gap(self):
        edge = self.surface.edge
        for s in (0.5 * (edge.y - 1.0), -2.0):
            jump = abel_map(s, self.surface, side='+').raw - abel_map(s, self.surface, side='-').raw
            self.assertLess(abs(jump + self.tau), 1e-9)

    def test_inversion_and_conjugation(self):
        for z in (0.3 + 0.2j, -0.6 + 1.1j, 4.0 + 0.5j):
            value = abel_map(z, self.surface).raw
            self.assertLess(abs(abel_map(1 / z, self.surface).raw - (0.5 - value)), 1e-9)
            self.assertLess(abs(abel_map(z.conjugate(), self.surface).raw - value.conjugate()), 1e-9)

    def test_zero_and_infinity(self):
        surface = self.surface
        self.assertLess(abs(surface.A_zero + surface.A_infinity - 0.5), 1e-9)
        self.assertLess(abs(surface.A_infinity - surface.A_zero + surface.Lambda / (4j * math.pi)), 1e-9)
        self.assertLess(abs(abel_map(0.0, surface).raw - surface.A_zero), 1e-12)
        self.assertEqual(abel_map(complex('inf'), surface).raw, surface.A_infinity)

    def test_gap_requires_side(self):
        with self.assertRaises(BranchError):
            abel_map(-1.0, self.surface)

    def test_reduced_value_in_fundamental_domain(self):
        value = abel_map(-1.0, self.surface, side='+')
        self.assertTrue(0 <= value.reduced.real < 1)
        self.assertTrue(-self.tau.imag / 2 <= value.reduced.imag < self.tau.imag / 2)
        self.assertLess(lattice_distance(value.reduced, value.raw, self.tau), 1e-12)


class ThetaTests(SimpleTestCase):
    tau = 0.83j

    def test_truncation_tail(self):
        params = ThetaParams.for_modulus(self.tau)
        self.assertLess(params.tail_bound, 1e-16)

    def test_non_positive_modulus_rejected(self):
        with self.assertRaises(ValueError):
            theta(0.1, -0.5j)
        with self.assertRaises(ValueError):
            ThetaParams.for_modulus(0.3)

    def test_quasi_periodicity(self):
        v = 0.37 + 0.11j
        shifted = theta(v + self.tau, self.tau)
        expected = cmath.exp(-2j * math.pi * v - 1j * math.pi * self.tau) * theta(v, self.tau)
        self.assertLess(abs(shifted - expected) / abs(expected), 1e-12)
        self.assertLess(abs(theta(v + 1, self.tau) - theta(v, self.tau)), 1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-1.0, 1.0), st.floats(-0.3, 0.3), st.floats(0.2, 2.0))
    def test_duplication_identity(self, re_v, im_v, im_tau):
        v = complex(re_v, im_v)
        tau = 1j * im_tau
        lhs = theta(v, tau) * theta(v - 0.5, tau)
        rhs = theta(2 * v - 0.5, 2 * tau) * theta(0.5, 2 * tau)
        self.assertLess(abs(lhs - rhs), 1e-12 * max(1.0, abs(rhs)))

    def test_even_with_zero_at_half_period(self):
        v = 0.21 - 0.05j
        self.assertLess(abs(theta(v, self.tau) - theta(-v, self.tau)), 1e-13)
        self.assertLess(abs(theta(0.5 + self.tau / 2, self.tau)), 1e-13)

    def test_lattice_reduce_is_idempotent(self):
        values = np.array([3.7 + 2.9j, -1.2 - 0.4j, 0.5 + 0.0j])
        once = lattice_reduce(values, self.tau)
        self.assertLess(np.max(np.abs(lattice_reduce(once, self.tau) - once)), 1e-15)
        self.assertTrue(np.all((0 <= once.real) & (once.real < 1)))


class PeriodTwoRayTests(SimpleTestCase):

    def setUp(self):
        self.ray = period_two_ray(SHOCK)

    def test_equal_band_lengths(self):
        self.assertAlmostEqual(self.ray.edge.lambda_y, -4.0, places=12)
        self.assertAlmostEqual(self.ray.edge.y, -4.0 + math.sqrt(15), places=12)

    def test_whitham_solve_recovers_the_edge(self):
        edge = solve_whitham_edge(self.ray.xi, SHOCK)
        self.assertLess(abs(edge.y - self.ray.edge.y), 1e-9)

    def test_band_symmetry(self):
        surface = build_surface(self.ray.edge)
        self.assertLess(abs(frequency_ratio(surface) - 1.0), 1e-8)
        self.assertLess(abs(surface.lambda_h + 2.5), 1e-9)
        self.assertLess(abs(surface.A_infinity - surface.A_zero - 0.25), 1e-8)

    def test_needs_wide_left_band(self):
        with self.assertRaises(RegionError):
            period_two_ray(BackgroundParams.from_ab(0.4, -3.0))


class DegenerationTests(SimpleTestCase):
    """As xi -> xi_cr the inner band [y, q] shrinks to a point."""

    def test_modulus_shrinks_toward_leading_ray(self):
        xi_cr = critical_rays(SHOCK).xi_cr
        moduli, gaps = [], []
        for offset in (1e-1, 3e-2, 1e-2):
            edge = solve_whitham_edge(xi_cr - offset, SHOCK, epsilon=5e-3)
            gamma, tau = surface_periods(edge)
            moduli.append(tau.imag)
            gaps.append(gamma)
        self.assertTrue(moduli[0] > moduli[1] > moduli[2] > 0, moduli)
        self.assertTrue(gaps[0] < gaps[1] < gaps[2], gaps)

    def test_band_integral_tends_to_pi_over_edge_factor(self):
        xi_cr = critical_rays(SHOCK).xi_cr
        edge = solve_whitham_edge(xi_cr - 1e-2, SHOCK, epsilon=5e-3)
        gamma, tau = surface_periods(edge)
        q = SHOCK.q
        limit = math.pi / math.sqrt((q - 1 / edge.y) * (q - 1 / q))
        self.assertLess(abs(0.5 * gamma * tau.imag - limit) / limit, 0.05)


class CutRelationTests(SimpleTestCase):

    def setUp(self):
        self.surface = shock_surface()
        self.edge = self.surface.edge
        self.tau = self.surface.tau

    def test_opposite_values_on_inner_cut(self):
        for s in np.linspace(self.edge.y, SHOCK.q, 6)[1:-1]:
            total = abel_map(s, self.surface, side='+').raw + abel_map(s, self.surface, side='-').raw
            self.assertLess(lattice_distance(total, 0.0, self.tau), 1e-8, s)

    def test_values_add_to_one_on_outer_cut(self):
        for s in np.linspace(1 / SHOCK.q, 1 / self.edge.y, 6)[1:-1]:
            total = abel_map(s, self.surface, side='+').raw + abel_map(s, self.surface, side='-').raw
            self.assertLess(abs(total - 1.0), 1e-8, s)

    def test_value_at_moving_edge(self):
        for side in ('+', '-'):
            value = abel_map(self.edge.y, self.surface, side=side).raw
            self.assertLess(lattice_distance(value, self.tau / 2, self.tau), 1e-8, side)

    def test_inversion_at_twenty_points(self):
        rng = np.random.default_rng(29)
        points = rng.uniform(-2.0, 2.0, 20) + 1j * rng.uniform(0.1, 2.0, 20) * rng.choice([-1, 1], 20)
        for z in points:
            value = abel_map(z, self.surface).raw
            mirrored = abel_map(1 / z, self.surface).raw
            self.assertLess(lattice_distance(mirrored, 0.5 - value, self.tau), 1e-8, z)


class ThirdKindTests(SimpleTestCase):

    def setUp(self):
        self.surface = shock_surface()
        self.edge = self.surface.edge

    def omega(self, s):
        return (s + 1 / s - 2 * self.surface.lambda_h) / calR(s, self.edge)

    def test_gap_period_vanishes(self):
        inv_q, inv_y, y, q = self.edge.branch_points
        period = integrate_endpoint_sqrt(lambda s: np.real(self.omega(s)), inv_y, y, rtol=1e-10)
        scale = integrate_endpoint_sqrt(lambda s: np.abs(self.omega(s)), inv_y, y, rtol=1e-10)
        self.assertLess(abs(period) / scale, 1e-8)

    def test_residue_at_zero(self):
        radius = 0.01

        def on_circle(phi):
            z = radius * np.exp(1j * phi)
            return self.omega(z) * 1j * z

        loop = integrate_panels(on_circle, 0.0, 2 * math.pi, rtol=1e-12)
        self.assertLess(abs(loop - 2j * math.pi), 1e-9)


class FrequencyRatioTests(SimpleTestCase):

    def test_positive_and_continuous_on_window(self):
        lo, hi = critical_rays(SHOCK).modulation_window(0.3)
        for xi in np.linspace(lo, hi, 20):
            ratio = frequency_ratio(shock_surface(float(xi)))
            nearby = frequency_ratio(shock_surface(float(xi) + 1e-6))
            self.assertGreater(ratio, 0.0, xi)
            self.assertLess(abs(nearby - ratio), 1e-4, xi)
