from fractions import Fraction

from django.test import SimpleTestCase

from bellforge import lhv_certifier
from bellforge.builder import GeneratorConfig, drop_extremes, generate_cp_set
from bellforge.catalog import catalog_inequality, chsh
from bellforge.exceptions import LengthMismatch, NTooLarge
from bellforge.term_algebra import Assignment, SignPattern, evaluate_term, wrapped_value


class CertifyTests(SimpleTestCase):
    def test_chsh_bound(self):
        report = lhv_certifier.certify_bound(chsh())
        self.assertEqual(report.max_abs, 2)
        self.assertEqual(report.assignments, 16)
        self.assertTrue(report.holds)
        self.assertEqual(wrapped_value(chsh(), report.witnesses['max_abs']), 2)

    def test_signed_chsh_bound(self):
        report = lhv_certifier.certify_bound(chsh(), wrapped=False)
        self.assertEqual(report.signed_max, 2)
        self.assertEqual(report.signed_min, -2)

    def test_reduced_inequalities_hold(self):
        for label in ('INEQ3', 'MODUL33', 'INEQ5A', 'INEQ5B', 'INEQ5B-SISTER'):
            with self.subTest(label=label):
                self.assertEqual(lhv_certifier.certify_bound(catalog_inequality(label)).max_abs, 1)

    def test_dropped_extremes_hold(self):
        report = lhv_certifier.certify_bound(drop_extremes(catalog_inequality('INEQ5A')))
        self.assertEqual(report.max_abs, 1)

    def test_exceeded_bound(self):
        ineq = chsh().replace(bound=Fraction(1))
        self.assertFalse(lhv_certifier.certify_bound(ineq).holds)

    def test_signs_length_checked(self):
        with self.assertRaises(LengthMismatch):
            lhv_certifier.certify_bound(chsh(), wrapped=False, signs=(1, 1))

    def test_n_ceiling(self):
        with self.assertRaises(NTooLarge):
            lhv_certifier.certify_bound(catalog_inequality('INEQ5A'), max_n=4)

    def test_thread_count_does_not_change_result(self):
        ineq = generate_cp_set(GeneratorConfig(n=9, k=3, rng_seed=1))
        single = lhv_certifier.certify_bound(ineq, threads=1)
        pooled = lhv_certifier.certify_bound(ineq, threads=4)
        self.assertEqual(single, pooled)
        self.assertEqual(single.max_abs, 1)


class MirrorTests(SimpleTestCase):
    def test_chsh_mirror(self):
        report = lhv_certifier.mirror_check(chsh())
        self.assertTrue(report)
        self.assertEqual((report.plus_count, report.minus_count), (8, 8))

    def test_three_party_mirror(self):
        report = lhv_certifier.mirror_check(catalog_inequality('INEQ3'))
        self.assertTrue(report.is_mirror)
        self.assertEqual((report.plus_count, report.minus_count), (32, 32))

    def test_dropped_extremes_is_not_mirror(self):
        self.assertFalse(lhv_certifier.mirror_check(drop_extremes(catalog_inequality('INEQ5A'))))


class VertexTensorTests(SimpleTestCase):
    def test_contraction_matches_direct_evaluation(self):
        patterns = [SignPattern.parse(text) for text in ('++', '+-', '-+', '--', '+0', '0-')]
        for code in range(16):
            assignment = Assignment.from_index(code, 2)
            tensor = lhv_certifier.vertex_tensor(assignment)
            for pattern in patterns:
                self.assertEqual(
                    lhv_certifier.contract_vertex_tensor(tensor, pattern), evaluate_term(pattern, assignment)
                )

    def test_entry_indices(self):
        tensor = lhv_certifier.vertex_tensor(Assignment(((1, -1), (-1, 1))))
        self.assertEqual(tensor.entry(1, 1), -1)
        self.assertEqual(tensor.entry(2, 3), -1)
        self.assertEqual(tensor.entry(3, 3), 1)
