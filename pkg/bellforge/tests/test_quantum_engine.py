import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy.spatial.transform import Rotation

from bellforge import quantum_engine as qe
from bellforge.catalog import catalog_inequality, chsh
from bellforge.exceptions import DimensionMismatch, InvalidSettings, InvalidState
from bellforge.optimizer import settings_from_angles


def _random_settings(n, rng):
    pairs = []
    for _ in range(n):
        first, second = rng.normal(size=3), rng.normal(size=3)
        pairs.append((first / np.linalg.norm(first), second / np.linalg.norm(second)))
    return qe.SettingSet(pairs)


class StateTests(SimpleTestCase):
    def test_psi2_amplitudes(self):
        amplitudes = qe.psi2_amplitudes()
        self.assertEqual(len(amplitudes), 32)
        self.assertAlmostEqual(amplitudes[0].real, 0.462854)
        self.assertAlmostEqual(amplitudes[int('01101', 2)].real, -0.220891)
        self.assertAlmostEqual(amplitudes[int('10110', 2)].real, 0.220891)
        self.assertAlmostEqual(np.linalg.norm(qe.psi2_state().amplitudes), 1.0)

    def test_unnormalized_state_rejected(self):
        with self.assertRaises(InvalidState):
            qe.PureState([1, 1])
        with self.assertRaises(DimensionMismatch):
            qe.PureState([1, 0, 0])

    def test_mixture_validation(self):
        with self.assertRaises(InvalidState):
            qe.MixedState([(0.4, qe.basis_state('0')), (0.4, qe.basis_state('1'))])
        with self.assertRaises(DimensionMismatch):
            qe.MixedState([(0.5, qe.basis_state('0')), (0.5, qe.basis_state('00'))])

    def test_settings_validation(self):
        with self.assertRaises(InvalidSettings):
            qe.SettingSet([((1, 0, 0), (1, 1, 0))])
        with self.assertRaises(InvalidSettings):
            qe.SettingSet([((1, 0, 0),)])


class CorrelationTensorTests(SimpleTestCase):
    def test_ghz_entries(self):
        ghz = qe.ghz_state(3)
        self.assertAlmostEqual(qe.correlation_tensor(ghz, (1, 1, 1)), 1.0)
        self.assertAlmostEqual(qe.correlation_tensor(ghz, (3, 3, 3)), 0.0)
        self.assertAlmostEqual(qe.correlation_tensor(ghz, (3, 3, 0)), 1.0)
        self.assertAlmostEqual(qe.correlation_tensor(ghz, (0, 0, 0)), 1.0)

    def test_ground_state_entries(self):
        entries = qe.correlation_entries(qe.basis_state('00000'), [(3, 3, 3, 3, 3), (1, 1, 1, 1, 1)])
        self.assertAlmostEqual(entries[(3, 3, 3, 3, 3)], 1.0)
        self.assertAlmostEqual(entries[(1, 1, 1, 1, 1)], 0.0)

    def test_bad_index(self):
        with self.assertRaises(DimensionMismatch):
            qe.correlation_tensor(qe.ghz_state(3), (1, 1))

    def test_not_map_flips_odd_entries(self):
        state = qe.random_state(3, np.random.default_rng(3))
        flipped = qe.not_map(state)
        for index in [(1, 0, 0), (2, 3, 0), (1, 2, 3), (0, 3, 3), (2, 2, 2)]:
            weight = sum(1 for k in index if k)
            self.assertAlmostEqual(
                qe.correlation_tensor(flipped, index), (-1) ** weight * qe.correlation_tensor(state, index)
            )

    def test_not_mixture_cancels_full_entries(self):
        state = qe.random_state(5, np.random.default_rng(5))
        mixture = qe.not_mixture(state)
        self.assertAlmostEqual(qe.correlation_tensor(mixture, (1, 2, 3, 1, 2)), 0.0)
        self.assertAlmostEqual(qe.correlation_tensor(mixture, (3, 3, 3, 3, 3)), 0.0)
        for index in [(1, 2, 0, 3, 1), (0, 3, 3, 3, 3)]:
            self.assertAlmostEqual(qe.correlation_tensor(mixture, index), qe.correlation_tensor(state, index))


class BellOperatorTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)
        self.ineq = catalog_inequality('INEQ3')
        self.settings = _random_settings(3, self.rng)

    def test_term_by_term_apply_matches_dense_kron(self):
        operator = qe.BellOperator(self.ineq, self.settings)
        vector = self.rng.normal(size=8) + 1j * self.rng.normal(size=8)
        signs = [1, -1, 1, 1, -1]
        assert_allclose(
            qe.bell_operator_apply(self.ineq, self.settings, signs, vector),
            operator.dense(signs) @ vector,
            atol=1e-12,
        )

    def test_sparse_matches_dense(self):
        operator = qe.BellOperator(self.ineq, self.settings)
        signs = [1, 1, -1, 1, -1]
        assert_allclose(operator.sparse(signs).toarray(), operator.dense(signs), atol=1e-12)

    def test_linearity(self):
        signs = [1] * len(self.ineq)
        u = self.rng.normal(size=8) + 1j * self.rng.normal(size=8)
        v = self.rng.normal(size=8) + 1j * self.rng.normal(size=8)
        apply = lambda x: qe.bell_operator_apply(self.ineq, self.settings, signs, x)  # noqa: E731
        assert_allclose(apply(2 * u - 3j * v), 2 * apply(u) - 3j * apply(v), atol=1e-12)

    def test_sign_count_checked(self):
        with self.assertRaises(DimensionMismatch):
            qe.bell_operator_apply(self.ineq, self.settings, [1, 1], np.zeros(8))

    def test_local_unitaries_leave_value_unchanged(self):
        state = qe.random_state(3, self.rng)
        rotations = list(Rotation.random(3, 7).as_matrix())
        unitaries = [qe.qubit_unitary(rotation) for rotation in rotations]
        self.assertAlmostEqual(
            qe.bell_value(self.ineq, qe.apply_local_unitaries(state, unitaries), self.settings.rotated(rotations)),
            qe.bell_value(self.ineq, state, self.settings),
        )

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            qe.bell_value(self.ineq, qe.ghz_state(4), self.settings)

    def test_party_environments_reproduce_expectations(self):
        state = qe.random_state(3, self.rng)
        expected = qe.term_expectations(self.ineq, state, self.settings)
        for party in range(3):
            environments, symbols = qe.party_environments(self.ineq, state, self.settings, party)
            first, second = self.settings.directions[party]
            stack = qe.local_slot_stack(first, second, symbols)
            values = np.einsum('tab,tab->t', stack, environments).real
            assert_allclose(values, expected, atol=1e-12)


class MaxEigenvalueTests(SimpleTestCase):
    def test_chsh_at_quarter_pi(self):
        result = qe.max_eigenvalue(chsh(), settings_from_angles([np.pi / 4] * 2))
        self.assertAlmostEqual(result.value, 2 * np.sqrt(2), places=8)

    def test_value_is_wrapped_value_of_returned_state(self):
        settings = settings_from_angles([0.6] * 3)
        ineq = catalog_inequality('INEQ3')
        result = qe.max_eigenvalue(ineq, settings)
        self.assertAlmostEqual(result.value, qe.bell_value(ineq, result.state, settings), places=10)
        self.assertGreaterEqual(result.value, result.eigenvalue - 1e-9)

    def test_five_party_symmetric_violation(self):
        result = qe.max_eigenvalue(catalog_inequality('INEQ5B'), settings_from_angles([np.pi / 4] * 5))
        self.assertAlmostEqual(result.value, 1.97435, delta=1e-3)

    def test_five_party_violation_does_not_depend_on_seed(self):
        ineq = catalog_inequality('INEQ5B')
        settings = settings_from_angles([np.pi / 4] * 5)
        for seed in range(6):
            with self.subTest(seed=seed):
                result = qe.max_eigenvalue(ineq, settings, rng_seed=seed)
                self.assertAlmostEqual(result.value, 1.97435, delta=1e-3)

    def test_orbit_constant_starts_alone_reach_the_optimum(self):
        result = qe.max_eigenvalue(catalog_inequality('INEQ5B'), settings_from_angles([np.pi / 4] * 5),
                                   sign_starts=0)
        self.assertAlmostEqual(result.value, 1.97435, delta=1e-3)

    def test_orbit_labels(self):
        labels, orbits = qe.orbit_labels(catalog_inequality('INEQ5B'))
        self.assertEqual(orbits, 5)
        self.assertEqual(sorted(np.bincount(labels).tolist()), [1, 1, 5, 5, 5])

    def test_warm_signs_length_checked(self):
        ineq = catalog_inequality('INEQ5B')
        with self.assertRaises(DimensionMismatch):
            qe.max_eigenvalue(ineq, settings_from_angles([np.pi / 4] * 5), warm_signs=[1.0, -1.0])

    def test_power_and_lanczos_agree_with_dense(self):
        ineq = catalog_inequality('INEQ5B')
        operator = qe.BellOperator(ineq, _random_settings(5, np.random.default_rng(2)))
        signs = np.ones(len(ineq))
        dense, _ = qe.top_eigenpair(operator, signs, method='dense')
        power, _ = qe.top_eigenpair(operator, signs, method='power', tolerance=1e-12)
        lanczos, _ = qe.top_eigenpair(operator, signs, method='lanczos')
        self.assertAlmostEqual(power, dense, places=5)
        self.assertAlmostEqual(lanczos, dense, places=8)
