import json
import os
import tempfile
from fractions import Fraction
from io import StringIO
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from bellforge import serialization
from bellforge.reproduce import ReproReport
from bellforge.catalog import catalog_inequality


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out)
        return out.getvalue()


class CatalogCommandTests(CommandTestCase):
    def test_list(self):
        output = self.call('catalog', '--list')
        self.assertIn('INEQ5B', output)
        self.assertIn('defective', output)

    def test_show(self):
        document = json.loads(self.call('catalog', '--show', 'MODUL33'))
        self.assertEqual(len(document['terms']), 3)

    def test_unknown_label(self):
        with self.assertRaises(CommandError) as caught:
            self.call('catalog', '--show', 'NOPE')
        self.assertEqual(caught.exception.returncode, 2)


class CertifyCommandTests(CommandTestCase):
    def test_bound_holds(self):
        output = self.call('certify', '--catalog', 'INEQ3', '--threads', '1')
        self.assertIn('Bound 1/1 holds', output)
        self.assertIn('Assignments:  64', output)

    def test_bound_exceeded(self):
        path = self.path('loose.json')
        serialization.write_json(path, serialization.inequality_to_dict(catalog_inequality('CHSH').replace(bound=Fraction(1))))
        with self.assertRaises(CommandError) as caught:
            self.call('certify', '--ineq', path)
        self.assertEqual(caught.exception.returncode, 1)

    def test_unparseable_input(self):
        path = self.path('broken.json')
        with open(path, 'w') as handle:
            handle.write('not json')
        with self.assertRaises(CommandError) as caught:
            self.call('certify', '--ineq', path)
        self.assertEqual(caught.exception.returncode, 3)

    def test_report_file(self):
        out = self.path('report.json')
        self.call('certify', '--catalog', 'CHSH', '--out', out)
        with open(out) as handle:
            document = json.load(handle)
        self.assertEqual(document['max_abs'], '2/1')
        self.assertTrue(document['is_mirror'])

    def test_signed_form_by_default(self):
        output = self.call('certify', '--catalog', 'INEQ5B', '--threads', '1')
        self.assertIn('Form:         signed', output)

    def test_wrapped_form(self):
        output = self.call('certify', '--catalog', 'INEQ5B', '--wrapped', '--threads', '1')
        self.assertIn('Form:         wrapped', output)
        self.assertIn('Max |value|:  1/1', output)

    def test_mirror_counts(self):
        out = self.path('mirror.json')
        self.call('certify', '--catalog', 'INEQ3', '--mirror', '--out', out)
        with open(out) as handle:
            mirror = json.load(handle)['mirror']
        self.assertEqual((mirror['plus_count'], mirror['minus_count']), (32, 32))

    def test_mirror_fails_without_extremes(self):
        with self.assertRaises(CommandError) as caught:
            self.call('certify', '--catalog', 'INEQ5B-SISTER', '--wrapped', '--mirror')
        self.assertEqual(caught.exception.returncode, 1)

    def test_overlapping_file_is_rejected(self):
        path = self.path('overlap.json')
        serialization.write_json(path, {'n': 2, 'terms': [
            {'pattern': '+0', 'weight_num': 1, 'weight_den': 2},
            {'pattern': '++', 'weight_num': 1, 'weight_den': 4},
        ]})
        with self.assertRaises(CommandError) as caught:
            self.call('certify', '--ineq', path)
        self.assertEqual(caught.exception.returncode, 3)


class LintCommandTests(CommandTestCase):
    def test_defective_listing(self):
        with self.assertRaises(CommandError) as caught:
            self.call('lint', '--catalog', 'N7', '--no-mirror')
        self.assertEqual(caught.exception.returncode, 1)

    def test_complete_listing(self):
        output = self.call('lint', '--catalog', 'INEQ5A')
        self.assertIn('Mass:        32 / 32 (complete)', output)
        self.assertIn('INEQ5A is complete and disjoint', output)


class BuildCommandTests(CommandTestCase):
    def test_seed_to_file(self):
        out = self.path('seed.json')
        output = self.call('build', 'seed', '--n', '3', '--out', out)
        self.assertIn('Built WWWZB-N3 with 8 terms', output)
        self.assertEqual(len(serialization.load_inequality(out)), 8)

    def test_generate_to_stdout(self):
        document = json.loads(self.call('build', 'generate', '--n', '5', '--k', '1', '--seed', '42'))
        self.assertEqual(document['label'], 'CP-N5-k1-seed42')

    def test_generate_is_the_default_mode(self):
        out = self.path('ineq.json')
        self.call('build', '--n', '5', '--k', '1', '--seed', '42', '--drop-extremes', '--out', out)
        ineq = serialization.load_inequality(out)
        self.assertEqual(ineq.label, 'CP-N5-k1-seed42-no-extremes')
        self.assertEqual(len(ineq), 15)

    def test_missing_mode(self):
        with self.assertRaises(CommandError) as caught:
            self.call('build')
        self.assertEqual(caught.exception.returncode, 2)

    def test_cyclic_reduce(self):
        seed = self.path('seed.json')
        self.call('build', 'seed', '--n', '3', '--out', seed)
        document = json.loads(self.call('build', 'reduce', '--ineq', seed, '--pattern', '+-0', '--cyclic'))
        self.assertEqual(len(document['terms']), 5)

    def test_drop_extremes_without_extremes(self):
        with self.assertRaises(CommandError) as caught:
            self.call('build', 'drop-extremes', '--catalog', 'MODUL33')
        self.assertEqual(caught.exception.returncode, 2)


class TensorCommandTests(CommandTestCase):
    def test_psi2_entry(self):
        output = self.call('tensor', '--psi2', '--index', '00000', '--index', '33333')
        self.assertIn('T_00000 = +1.0000000000', output)
        self.assertIn('T_33333 =', output)

    def test_bad_index(self):
        with self.assertRaises(CommandError) as caught:
            self.call('tensor', '--psi2', '--index', '0004')
        self.assertEqual(caught.exception.returncode, 2)


class ConditionCommandTests(CommandTestCase):
    def test_ground_state(self):
        state = self.path('ground.json')
        serialization.write_json(state, {'n': 5, 'amplitudes': [[1, 0]] + [[0, 0]] * 31})
        output = self.call('condition', '--catalog', 'INEQ5B', '--state', state)
        self.assertIn('Computational frame: 1.0000000000', output)
        self.assertIn('Condition holds', output)


class ViolateCommandTests(CommandTestCase):
    def test_symmetric_chsh(self):
        report = self.path('violation.json')
        output = self.call('violate', '--catalog', 'CHSH', '--symmetric', '--grid', '11', '--report', report)
        self.assertIn('Violation ratio 1.414214', output)
        with open(report) as handle:
            self.assertEqual(json.load(handle)['mode'], 'symmetric')

    def test_symmetric_with_state_is_rejected(self):
        with self.assertRaises(CommandError) as caught:
            self.call('violate', '--catalog', 'INEQ5B', '--psi2', '--symmetric')
        self.assertEqual(caught.exception.returncode, 2)


class ReproduceCommandTests(CommandTestCase):
    def test_threads_and_seed_are_passed_through(self):
        report = ReproReport(scope='fast', seed=7)
        with mock.patch('bellforge.management.commands.reproduce.run_reproduction', return_value=report) as run:
            output = self.call('reproduce', '--seed', '7', '--threads', '2')
        run.assert_called_once_with(scope='fast', seed=7, threads=2)
        self.assertIn('All 0 checks passed (fast scope)', output)
