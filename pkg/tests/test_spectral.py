# tests/test_spectral.py

import unittest

import numpy as np

from unittest.mock import patch

from models.errors import DomainError, EvaluationError, InterlacingError
from models.models import FourierField, LaxTruncation, SpectralLadder
from tools import multiphase, profiles, spectral


def one_phase_field(K: int = 63) -> FourierField:
    return multiphase.one_phase_fourier((-1.0, 0.0, 2.0), 0.0, 1.0, K)


def two_phase_field() -> FourierField:
    p = multiphase.phase_params((-6.0, -4.5, -3.5, -3.0, -1.0), [0.2, 0.7], 1.0)
    return multiphase.fourier(multiphase.sample_grid(p, 256))


class TestLaxMatrix(unittest.TestCase):

    def test_constant_field(self):
        L = spectral.lax_matrix(FourierField(a=1.0), 1.0, 8)
        np.testing.assert_allclose(L.matrix, np.diag(1.0 - np.arange(8)))
        sl = spectral.ladder(L)
        np.testing.assert_allclose(sl.up, [1, 0, -1, -2, -3, -4, -5, -6], atol=1e-12)
        self.assertAlmostEqual(sl.weights[0], 1.0)
        self.assertAlmostEqual(sl.min_step, 1.0)
        self.assertAlmostEqual(spectral.ladder(L, strict=True).min_step, 1.0)

    def test_spacing_is_at_least_eps(self):
        sl = spectral.ladder(spectral.lax_matrix(two_phase_field(), 1.0, 128), strict=True)
        self.assertGreaterEqual(sl.min_step, 1.0 - 1e-8)

    def test_strict_spacing_violation(self):
        L = LaxTruncation(dim=3, eps=1.0, matrix=np.diag([0.0, -0.5, -2.0]).astype(complex))
        with self.assertLogs("spectral", level="WARNING"):
            sl = spectral.ladder(L)
        self.assertAlmostEqual(sl.min_step, 0.5)
        with self.assertRaises(InterlacingError) as ctx:
            spectral.ladder(L, strict=True)
        self.assertEqual(ctx.exception.index, 1)
        self.assertAlmostEqual(ctx.exception.gap, -0.5)

    def test_hermitian(self):
        L = spectral.lax_matrix(two_phase_field(), 1.0, 64).matrix
        np.testing.assert_allclose(L, L.conj().T)

    def test_too_small(self):
        with self.assertRaises(DomainError):
            spectral.lax_matrix(FourierField(a=0.0), 1.0, 1)

    def test_shift_structure(self):
        self.assertLess(spectral.shift_check(two_phase_field(), 1.0, 48), 1e-10)


class TestDispersiveProfile(unittest.TestCase):

    def test_one_phase_ladder(self):
        sl = spectral.ladder(spectral.lax_matrix(one_phase_field(), 1.0, 128))
        np.testing.assert_allclose(sl.up[:5], [2.0, 1.0, -1.0, -2.0, -3.0], atol=1e-8)
        self.assertEqual(spectral.gap_indices(sl, depth=16), [2])
        f = spectral.dispersive_profile(sl, 1.0, depth=16)
        np.testing.assert_allclose(f.minima, [2.0, -1.0], atol=1e-8)
        np.testing.assert_allclose(f.maxima, [0.0], atol=1e-8)

    def test_one_phase_ladder_at_512(self):
        sl = spectral.ladder(spectral.lax_matrix(one_phase_field(K=255), 1.0, 512))
        np.testing.assert_allclose(sl.up[:5], [2.0, 1.0, -1.0, -2.0, -3.0], atol=1e-6)
        f = spectral.dispersive_profile(sl, 1.0)
        np.testing.assert_allclose(f.minima, [2.0, -1.0], atol=1e-5)
        np.testing.assert_allclose(f.maxima, [0.0], atol=1e-5)

    def test_two_phase_profile(self):
        sl = spectral.ladder(spectral.lax_matrix(two_phase_field(), 1.0, 128))
        f = spectral.dispersive_profile(sl, 1.0, depth=16)
        np.testing.assert_allclose(f.minima, [-1.0, -3.5, -6.0], atol=1e-5)
        np.testing.assert_allclose(f.maxima, [-3.0, -4.5], atol=1e-5)

    def test_truncation_stability(self):
        coarse = spectral.ladder(spectral.lax_matrix(two_phase_field(), 1.0, 128))
        fine = spectral.ladder(spectral.lax_matrix(two_phase_field(), 1.0, 256))
        np.testing.assert_allclose(coarse.up[:16], fine.up[:16], atol=1e-8)

    def test_two_phase_ladder(self):
        sl = spectral.ladder(spectral.lax_matrix(two_phase_field(), 1.0, 128))
        np.testing.assert_allclose(sl.up[:5], [-1.0, -2.0, -3.5, -6.0, -7.0], atol=1e-8)
        self.assertEqual(spectral.gap_indices(sl, depth=16), [2, 3])
        report = spectral.spectral_report(sl, depth=16, count=4)
        self.assertEqual(len(report["eigenvalues"]), 4)
        self.assertAlmostEqual(report["profile"]["center"], -3.0, places=7)
        self.assertEqual([g["h"] for g in report["gaps"]], [2, 3])

    def test_constant_field_is_a_cone(self):
        sl = spectral.ladder(spectral.lax_matrix(FourierField(a=0.5), 1.0, 16))
        f = spectral.dispersive_profile(sl, 1.0, depth=4)
        self.assertEqual(f.n, 0)
        self.assertAlmostEqual(f.center, 0.5)

    def test_depth_too_large(self):
        sl = spectral.ladder(spectral.lax_matrix(FourierField(a=0.0), 1.0, 8))
        with self.assertRaises(DomainError):
            spectral.dispersive_profile(sl, 1.0, depth=4)

    def test_negative_gap(self):
        sl = SpectralLadder(up=np.array([0.0, -0.5, -3.0, -4.0, -5.0, -6.0]), weights=np.ones(6) / 6, eps=1.0)
        with self.assertRaises(InterlacingError) as ctx:
            spectral.dispersive_profile(sl, 1.0, depth=2)
        self.assertEqual(ctx.exception.index, 1)


class TestHierarchy(unittest.TestCase):

    def test_cosine_field(self):
        f = FourierField(a=0.5, modes=[0.0, 0.3])
        self.assertAlmostEqual(spectral.hierarchy(f, 1.0, 0), 1.0)
        self.assertAlmostEqual(spectral.hierarchy(f, 1.0, 1), 0.5)
        self.assertAlmostEqual(spectral.hierarchy(f, 1.0, 2), 0.25 + 0.09)
        self.assertAlmostEqual(spectral.hierarchy(f, 1.0, 3), 0.125 + 0.09 * (1.5 - 2.0))

    def test_one_phase_moments(self):
        f = one_phase_field()
        T = [spectral.hierarchy(f, 1.0, l) for l in range(4)]
        np.testing.assert_allclose(T, [1.0, 1.0, 3.0, 5.0], atol=1e-8)

    def test_two_phase_moments_match_profile(self):
        f = two_phase_field()
        sl = spectral.ladder(spectral.lax_matrix(f, 1.0, 128))
        T = profiles.moments(spectral.dispersive_profile(sl, 1.0, depth=16), 4)
        for l in range(5):
            self.assertAlmostEqual(spectral.hierarchy(f, 1.0, l), T[l], delta=1e-6 * max(1.0, abs(T[l])))

    def test_negative_index(self):
        with self.assertRaises(DomainError):
            spectral.hierarchy(FourierField(a=0.0), 1.0, -1)


class TestResolvent(unittest.TestCase):

    def test_three_ways_agree(self):
        f = one_phase_field()
        L = spectral.lax_matrix(f, 1.0, 128)
        expected = 10.0 / (8.0 * 11.0)
        value, phi = spectral.resolvent_element(f, 1.0, 10.0, 128)
        self.assertAlmostEqual(value, expected, places=10)
        det, _ = spectral.perturbation_determinant(L, 10.0)
        self.assertAlmostEqual(det / 10.0, expected, places=10)
        self.assertAlmostEqual(spectral.markov_krein(spectral.ladder(L), 10.0), expected, places=10)
        self.assertEqual(phi.shape, (128,))

    def test_determinant_agreement(self):
        f = one_phase_field()
        self.assertLess(spectral.determinant_deviation(f, 1.0, 10.0, 128), 1e-10)
        value, _ = spectral.resolvent_element(f, 1.0, 10.0, 128, strict=True)
        self.assertAlmostEqual(value, 10.0 / 88.0, places=10)

    def test_determinant_disagreement(self):
        f = one_phase_field()
        L = spectral.lax_matrix(f, 1.0, 128)
        det, phi = spectral.perturbation_determinant(L, 10.0)
        with patch("tools.spectral.perturbation_determinant", return_value=(2 * det, phi)):
            with self.assertLogs("spectral", level="WARNING"):
                spectral.resolvent_element(f, 1.0, 10.0, 128)
            with self.assertRaises(EvaluationError) as ctx:
                spectral.resolvent_element(f, 1.0, 10.0, 128, strict=True)
            self.assertAlmostEqual(spectral.determinant_deviation(f, 1.0, 10.0, 128), 10.0 / 88.0, places=8)
        self.assertEqual(ctx.exception.location, 10.0)

    def test_off_axis(self):
        f = one_phase_field()
        u = 1.0 + 2.0j
        value, _ = spectral.resolvent_element(f, 1.0, u, 128)
        self.assertAlmostEqual(value, u / ((u - 2.0) * (u + 1.0)), places=10)


class TestPoissonCommutativity(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(7)
        self.field = FourierField(a=rng.normal(), modes=0.3 * (rng.normal(size=3) + 1j * rng.normal(size=3)))

    def test_trivial_bracket(self):
        self.assertEqual(spectral.poisson_check(1, 2, self.field, 1.0), 0.0)

    def test_hierarchy_in_involution(self):
        self.assertLess(spectral.poisson_check(2, 3, self.field, 1.0), 1e-9)
        self.assertLess(spectral.poisson_check(3, 4, self.field, 0.7), 1e-9)


if __name__ == "__main__":
    unittest.main()
