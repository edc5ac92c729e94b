from fractions import Fraction

from django.test import SimpleTestCase

from bellforge import catalog
from bellforge.builder import orbit_generators
from bellforge.term_algebra import SignPattern, mass


class CatalogTests(SimpleTestCase):
    def test_labels(self):
        labels = [entry.label for entry in catalog.catalog_entries()]
        self.assertEqual(labels, [
            'CHSH', 'INEQ3', 'MODUL33', 'INEQ5A', 'INEQ5B', 'INEQ5B-SISTER', 'N7', 'N9-first', 'N9-second',
        ])
        self.assertEqual(len(catalog.known_inequalities()), len(labels))

    def test_lookup_is_case_insensitive(self):
        self.assertEqual(catalog.get_entry('ineq5b').label, 'INEQ5B')
        with self.assertRaises(KeyError):
            catalog.get_entry('INEQ4')

    def test_chsh(self):
        ineq = catalog.chsh()
        self.assertEqual(ineq.bound, 2)
        self.assertTrue(all(term.coefficient == 2 for term in ineq.terms))

    def test_modul33(self):
        ineq = catalog.catalog_inequality('MODUL33')
        self.assertEqual(len(ineq), 3)
        self.assertTrue(all(term.weight == Fraction(1, 4) for term in ineq.terms))

    def test_ineq5b_generators(self):
        generators = {str(p) for p, size in orbit_generators(catalog.catalog_inequality('INEQ5B')) if size == 5}
        expected = set()
        for text in ('+++-0', '-++-0', '-+--0'):
            pattern = SignPattern.parse(text)
            expected.add(str(min((pattern.rotate(s) for s in range(5)), key=lambda p: p.sort_key())))
        self.assertEqual(generators, expected)

    def test_seven_party_entry_is_defective(self):
        report = mass(catalog.catalog_inequality('N7'))
        self.assertEqual(report.mass, 114)
        self.assertEqual(report.status, 'defective')
        self.assertEqual(catalog.get_entry('N7').reported_ratio, 1.84331)

    def test_nine_party_rows_keep_repeats(self):
        entry = catalog.get_entry('N9-first')
        self.assertTrue(entry.duplicates)
        self.assertEqual(len(entry.inequality()), len(entry.rows) - len(entry.duplicates))
        self.assertIn(SignPattern.parse('+' * 9), catalog.get_entry('N9-second').duplicates)
