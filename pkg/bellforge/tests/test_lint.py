from fractions import Fraction

from django.test import SimpleTestCase

from bellforge import lint
from bellforge.catalog import catalog_inequality, get_entry
from bellforge.term_algebra import SignPattern


def _rows(*texts, weight=Fraction(1, 4)):
    return [(SignPattern.parse(text), weight) for text in texts]


class LintCatalogTests(SimpleTestCase):
    def test_complete_inequality(self):
        report = lint.lint_inequality(catalog_inequality('INEQ5A'))
        self.assertEqual(report.mass, 32)
        self.assertEqual(report.status, 'complete')
        self.assertTrue(report.disjoint)
        self.assertTrue(report.mirror)
        self.assertTrue(report.ok)

    def test_seven_party_entry(self):
        report = lint.lint_entry(get_entry('N7'), check_mirror=False)
        self.assertEqual(report.mass, 114)
        self.assertEqual(report.status, 'defective')
        self.assertEqual(len(report.missing), 14)
        self.assertIsNone(report.mirror)
        self.assertFalse(report.ok)

    def test_nine_party_duplicates(self):
        report = lint.lint_entry(get_entry('N9-first'), check_mirror=False)
        self.assertTrue(report.duplicates)
        self.assertFalse(report.disjoint)
        self.assertEqual(report.rows, report.terms + len(report.duplicates))
        self.assertFalse(report.ok)

    def test_report_dict(self):
        document = lint.lint_entry(get_entry('N7'), check_mirror=False).to_dict()
        self.assertEqual(document['expected_mass'], 128)
        self.assertEqual(len(document['missing']), 14)
        self.assertFalse(document['ok'])


class LintRowsTests(SimpleTestCase):
    def test_overlap(self):
        report = lint.lint_rows(2, _rows('+0', '++', '--', '-+'), label='overlap')
        self.assertEqual(len(report.overlaps), 1)
        self.assertFalse(report.disjoint)
        self.assertIsNone(report.mirror)

    def test_open_orbit(self):
        rows = _rows('+++', '---', weight=Fraction(1, 8)) + _rows('+-0')
        report = lint.lint_rows(3, rows)
        self.assertEqual([str(p) for p in report.open_orbits], ['+-0'])
        self.assertEqual(report.mass, 4)
        self.assertEqual(report.status, 'defective')

    def test_extremes_dropped(self):
        report = lint.lint_rows(3, _rows('+-0', '0+-', '-0+'))
        self.assertEqual(report.status, 'extremes-dropped')
        self.assertFalse(report.ok)
        self.assertFalse(report.mirror)
