# tests/test_multiphase.py

import unittest

import numpy as np

from models.errors import DomainError, IncommensurabilityError, OrderingError
from tools import multiphase

ONE_PHASE = (-1.0, 0.0, 2.0)
TWO_PHASE = (-6.0, -4.5, -3.5, -3.0, -1.0)


class TestPhaseParams(unittest.TestCase):

    def test_indexing(self):
        p = multiphase.phase_params(TWO_PHASE, None, 1.0)
        self.assertEqual(p.n, 2)
        self.assertEqual((p.up(0), p.down(1), p.up(1), p.down(2), p.up(2)), (-1.0, -3.0, -3.5, -4.5, -6.0))
        self.assertEqual((p.band(1), p.band(2)), (2.0, 1.0))
        self.assertEqual((p.gap(1), p.gap(2)), (0.5, 1.5))
        self.assertEqual(p.center, -3.0)
        self.assertEqual(multiphase.phase_velocities(p), [-2.0, -4.0])

    def test_profile_round_trip(self):
        p = multiphase.phase_params(TWO_PHASE, [0.3, 1.1], 1.0)
        f = p.to_profile()
        self.assertEqual(f.minima, (-1.0, -3.5, -6.0))
        self.assertEqual(f.maxima, (-3.0, -4.5))
        q = type(p).from_profile(f, 1.0, [0.3, 1.1])
        self.assertEqual(q, p)

    def test_rejects_bad_parameters(self):
        with self.assertRaises(OrderingError):
            multiphase.phase_params([0.0, -1.0, 2.0], None, 1.0)
        with self.assertRaises(OrderingError):
            multiphase.phase_params(ONE_PHASE, None, 0.0)
        with self.assertRaises(OrderingError):
            multiphase.phase_params(ONE_PHASE, [0.0, 1.0], 1.0)


class TestOnePhase(unittest.TestCase):

    def test_crest_and_trough(self):
        self.assertAlmostEqual(multiphase.one_phase(ONE_PHASE, 0.0, 1.0, 0.0), 3 + 2 * np.sqrt(3))
        self.assertAlmostEqual(multiphase.one_phase(ONE_PHASE, 0.0, 1.0, np.pi / 2), 3 - 2 * np.sqrt(3))

    def test_matches_general_formula(self):
        p = multiphase.phase_params(ONE_PHASE, [0.4], 1.0)
        x = np.linspace(0, 2 * np.pi, 17)
        for t in (0.0, 0.3):
            np.testing.assert_allclose(
                multiphase.multi_phase(p, x, t), multiphase.one_phase(ONE_PHASE, 0.4, 1.0, x, t), atol=1e-12
            )

    def test_fourier_modes(self):
        p = multiphase.phase_params(ONE_PHASE, [0.0], 1.0)
        V = multiphase.fourier(multiphase.sample_grid(p, 256))
        self.assertAlmostEqual(V.a, 1.0)
        self.assertAlmostEqual(V.mode(1), 0.0)
        self.assertAlmostEqual(V.mode(2), 2 / np.sqrt(3))
        expected = multiphase.one_phase_fourier(ONE_PHASE, 0.0, 1.0, V.K)
        np.testing.assert_allclose(V.modes, expected.modes, atol=1e-12)

    def test_zero_phase_is_constant(self):
        p = multiphase.phase_params([1.5], None, 1.0)
        self.assertEqual(multiphase.multi_phase(p, 0.3), 1.5)
        np.testing.assert_array_equal(multiphase.multi_phase(p, np.zeros(3)), [1.5, 1.5, 1.5])


class TestEquation(unittest.TestCase):

    def test_one_phase_residual(self):
        p = multiphase.phase_params(ONE_PHASE, [0.0], 1.0)
        self.assertLess(multiphase.bo_residual(p), 1e-6)

    def test_two_phase_residual(self):
        p = multiphase.phase_params(TWO_PHASE, [0.2, 0.7], 1.0)
        self.assertLess(multiphase.bo_residual(p), 1e-6)

    def test_shifted_constant_fails(self):
        p = multiphase.phase_params(TWO_PHASE, [0.2, 0.7], 1.0)
        self.assertGreater(multiphase.bo_residual(p, offset=1.0), 1e-2)


class TestPeriodicity(unittest.TestCase):

    def test_multipliers(self):
        p = multiphase.phase_params(TWO_PHASE, None, 1.0)
        self.assertEqual(multiphase.periodicity_check(p), [1, 2])
        p = multiphase.phase_params(TWO_PHASE, None, 0.5)
        self.assertEqual(multiphase.periodicity_check(p), [2, 4])

    def test_incommensurable(self):
        p = multiphase.phase_params(TWO_PHASE, None, 0.3)
        with self.assertRaises(IncommensurabilityError) as ctx:
            multiphase.periodicity_check(p)
        self.assertEqual(ctx.exception.index, 2)

    def test_quasi_period(self):
        p = multiphase.phase_params(TWO_PHASE, [0.2, 0.7], 1.0)
        for i in (1, 2):
            self.assertLess(multiphase.quasi_period_check(p, i), 1e-9)


class TestAction(unittest.TestCase):

    def test_one_phase_action(self):
        p = multiphase.phase_params(ONE_PHASE, [0.0], 1.0)
        self.assertAlmostEqual(multiphase.gfz_action(p, 1, samples=64), 2 * np.pi, places=6)

    def test_two_phase_cycles(self):
        p = multiphase.phase_params(TWO_PHASE, [0.2, 0.7], 1.0)
        self.assertAlmostEqual(multiphase.gfz_action(p, 1, samples=128), np.pi, delta=1e-3)
        self.assertAlmostEqual(multiphase.gfz_action(p, 2, samples=128), 3 * np.pi, delta=1e-3)

    def test_single_phase_loops_accumulate_gaps(self):
        p = multiphase.phase_params(TWO_PHASE, [0.2, 0.7], 1.0)
        self.assertAlmostEqual(multiphase.phase_loop_action(p, 1, samples=128), 4 * np.pi, delta=1e-3)
        self.assertAlmostEqual(multiphase.phase_loop_action(p, 2, samples=128), 3 * np.pi, delta=1e-3)

    def test_translation_loop_is_momentum(self):
        p = multiphase.phase_params(TWO_PHASE, [0.2, 0.7], 1.0)
        N = list(reversed(multiphase.periodicity_check(p)))
        total = sum(N[i - 1] * multiphase.phase_loop_action(p, i, samples=128) for i in (1, 2))
        modes = multiphase.fourier(multiphase.sample_grid(p, 256)).modes
        self.assertAlmostEqual(total, 2 * np.pi * float(np.sum(np.abs(modes) ** 2)), delta=1e-5)
        self.assertAlmostEqual(total, 11 * np.pi, delta=1e-3)

    def test_action_converges_in_samples(self):
        p = multiphase.phase_params(TWO_PHASE, [0.2, 0.7], 1.0)
        coarse = multiphase.gfz_action(p, 1, samples=128)
        fine = multiphase.gfz_action(p, 1, samples=256)
        self.assertLess(abs(fine - coarse), 1e-6)

    def test_bad_index(self):
        p = multiphase.phase_params(ONE_PHASE, [0.0], 1.0)
        with self.assertRaises(DomainError):
            multiphase.gfz_action(p, 2)
        with self.assertRaises(DomainError):
            multiphase.phase_loop_action(p, 0)


if __name__ == "__main__":
    unittest.main()
