import numpy as np
from django.test import SimpleTestCase

from bellforge import sufficient_condition as sc
from bellforge.builder import drop_extremes
from bellforge.catalog import catalog_inequality, chsh
from bellforge.exceptions import DimensionMismatch
from bellforge.quantum_engine import SettingSet, basis_state, bell_value, ghz_state, random_state


def _random_settings(n, rng):
    pairs = []
    for _ in range(n):
        first, second = rng.normal(size=3), rng.normal(size=3)
        pairs.append((first / np.linalg.norm(first), second / np.linalg.norm(second)))
    return SettingSet(pairs)


class IndexSetTests(SimpleTestCase):
    def test_three_party_indices(self):
        idxset = sc.condition_indices(catalog_inequality('INEQ3'))
        self.assertEqual(set(idxset.render()), {'111', '130', '013', '301', '333'})
        self.assertEqual(len(idxset), 5)

    def test_ground_and_ghz_states_saturate(self):
        idxset = sc.condition_indices(catalog_inequality('INEQ5B'))
        self.assertAlmostEqual(sc.condition_value(basis_state('00000'), idxset), 1.0)
        self.assertAlmostEqual(sc.condition_value(ghz_state(5), idxset), 1.0)

    def test_dropped_extremes_vanish_on_ground_state(self):
        idxset = sc.condition_indices(drop_extremes(catalog_inequality('INEQ5B')))
        self.assertAlmostEqual(sc.condition_value(basis_state('00000'), idxset), 0.0)

    def test_dimension_checked(self):
        with self.assertRaises(DimensionMismatch):
            sc.condition_value(ghz_state(3), sc.condition_indices(catalog_inequality('INEQ5B')))


class BoundTests(SimpleTestCase):
    def test_matched_frame_bounds_the_wrapped_value(self):
        rng = np.random.default_rng(17)
        for label in ('INEQ3', 'INEQ5A', 'INEQ5B'):
            ineq = catalog_inequality(label)
            idxset = sc.condition_indices(ineq)
            for _ in range(5):
                state = random_state(ineq.n, rng)
                settings = _random_settings(ineq.n, rng)
                frame = sc.frame_for_settings(settings)
                trig = np.linalg.norm(sc.trig_vector(ineq, sc.settings_angles(settings)))
                bound = trig * np.sqrt(sc.condition_value(state, idxset, frame))
                self.assertLessEqual(bell_value(ineq, state, settings), bound + 1e-9)

    def test_frame_rotations_are_proper(self):
        settings = _random_settings(3, np.random.default_rng(4))
        for rotation in sc.frame_for_settings(settings).rotations:
            np.testing.assert_allclose(rotation @ rotation.T, np.eye(3), atol=1e-12)
            self.assertAlmostEqual(np.linalg.det(rotation), 1.0)

    def test_settings_angles(self):
        settings = SettingSet.from_xz_angles([(0.3, -0.3), (0.0, 0.0)])
        np.testing.assert_allclose(sc.settings_angles(settings), [0.3, 0.0], atol=1e-12)

    def test_trig_norm_of_complete_inequalities(self):
        rng = np.random.default_rng(8)
        for label in ('INEQ3', 'INEQ5A', 'INEQ5B'):
            ineq = catalog_inequality(label)
            self.assertAlmostEqual(np.linalg.norm(sc.trig_vector(ineq, rng.uniform(0, np.pi / 2, ineq.n))), 1.0)
            self.assertAlmostEqual(sc.trig_norm_grid_max(ineq, grid_points=5), 1.0)
        self.assertAlmostEqual(sc.trig_norm_grid_max(chsh(), grid_points=5), 2.0)

    def test_trig_vector_length_checked(self):
        with self.assertRaises(DimensionMismatch):
            sc.trig_vector(catalog_inequality('INEQ3'), [0.1, 0.2])


class SweepTests(SimpleTestCase):
    def test_sweep_brackets_identity_frame(self):
        state = random_state(3, np.random.default_rng(9))
        idxset = sc.condition_indices(catalog_inequality('INEQ3'))
        result = sc.condition_sweep(state, idxset, frames=20, rng_seed=2, threads=1)
        self.assertEqual(result.frames, 20)
        self.assertLessEqual(result.min_value, result.identity_value)
        self.assertLessEqual(result.identity_value, result.max_value)
        self.assertAlmostEqual(result.identity_value, sc.condition_value(state, idxset))

    def test_sweep_is_thread_independent(self):
        state = random_state(3, np.random.default_rng(10))
        idxset = sc.condition_indices(catalog_inequality('INEQ3'))
        single = sc.condition_sweep(state, idxset, frames=12, rng_seed=4, threads=1)
        pooled = sc.condition_sweep(state, idxset, frames=12, rng_seed=4, threads=3)
        self.assertEqual(single.max_value, pooled.max_value)
        self.assertEqual(single.min_value, pooled.min_value)
