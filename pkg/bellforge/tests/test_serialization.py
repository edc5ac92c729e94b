import json
import os
import tempfile
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from bellforge import serialization
from bellforge.catalog import catalog_inequality
from bellforge.exceptions import OverlapError, ParseError
from bellforge.quantum_engine import SettingSet, psi2_state
from bellforge.term_algebra import SignPattern


class InequalityDocumentTests(SimpleTestCase):
    def test_document_shape(self):
        document = serialization.inequality_to_dict(catalog_inequality('INEQ3'))
        self.assertEqual(document['n'], 3)
        self.assertEqual((document['bound_num'], document['bound_den']), (1, 1))
        self.assertIn({'pattern': '+-0', 'weight_num': 1, 'weight_den': 4}, document['terms'])

    def test_dumps_is_stable(self):
        ineq = catalog_inequality('INEQ5B')
        text = serialization.dumps_inequality(ineq)
        self.assertEqual(text, serialization.dumps_inequality(serialization.inequality_from_dict(json.loads(text))))

    def test_rows_keep_repeats(self):
        document = {'n': 2, 'terms': [
            {'pattern': '++', 'weight_num': 1, 'weight_den': 4},
            {'pattern': '++', 'weight_num': 1, 'weight_den': 4},
        ]}
        n, rows, bound, label = serialization.rows_from_dict(document)
        self.assertEqual(len(rows), 2)
        self.assertEqual(bound, 1)
        with self.assertRaises(ParseError):
            serialization.inequality_from_dict(document)

    def test_overlapping_terms_are_rejected(self):
        document = {'n': 2, 'terms': [
            {'pattern': '+0', 'weight_num': 1, 'weight_den': 2},
            {'pattern': '++', 'weight_num': 1, 'weight_den': 4},
        ]}
        with self.assertRaises(OverlapError) as caught:
            serialization.inequality_from_dict(document)
        self.assertEqual(len(caught.exception.overlaps), 1)
        self.assertEqual(len(serialization.rows_from_dict(document)[1]), 2)

    def test_bad_documents(self):
        cases = [
            [],
            {'terms': []},
            {'n': 2, 'terms': [{'pattern': '+x', 'weight_num': 1}]},
            {'n': 2, 'terms': [{'pattern': '+++', 'weight_num': 1}]},
            {'n': 2, 'terms': [{'pattern': '++', 'weight_num': 'one'}]},
            {'n': 2, 'terms': [{'pattern': '++', 'weight_num': 1, 'weight_den': 0}]},
        ]
        for document in cases:
            with self.subTest(document=document):
                with self.assertRaises(ParseError):
                    serialization.inequality_from_dict(document)

    def test_render_fraction(self):
        self.assertEqual(serialization.render_fraction(Fraction(3, 8)), '3/8')
        self.assertEqual(serialization.render_fraction(2), '2/1')


class FileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_invalid_json_file(self):
        path = os.path.join(self.tmp.name, 'broken.json')
        with open(path, 'w') as handle:
            handle.write('{"n": 3,')
        with self.assertRaises(ParseError):
            serialization.load_inequality(path)

    def test_missing_file(self):
        with self.assertRaises(ParseError):
            serialization.load_inequality(os.path.join(self.tmp.name, 'absent.json'))

    def test_write_and_load_rows(self):
        path = os.path.join(self.tmp.name, 'nested', 'ineq.json')
        serialization.write_json(path, serialization.inequality_to_dict(catalog_inequality('MODUL33')))
        n, rows, bound, label = serialization.load_rows(path)
        self.assertEqual((n, label), (3, 'MODUL33'))
        self.assertEqual(len(rows), 3)
        self.assertIn(SignPattern.parse('+-0'), [pattern for pattern, _ in rows])


class StateAndSettingsTests(SimpleTestCase):
    def test_state_document(self):
        state = psi2_state()
        restored = serialization.state_from_dict(serialization.state_to_dict(state))
        np.testing.assert_allclose(restored.amplitudes, state.amplitudes, atol=1e-15)

    def test_state_length_checked(self):
        with self.assertRaises(ParseError):
            serialization.state_from_dict({'n': 2, 'amplitudes': [[1, 0]]})
        with self.assertRaises(ParseError):
            serialization.state_from_dict({'n': 1, 'amplitudes': [[0, 0], [0, 0]]})

    def test_settings_from_angles(self):
        settings = serialization.settings_from_dict({'parties': [{'phi1': 0.0, 'phi2': np.pi / 2}]})
        np.testing.assert_allclose(settings.directions[0][0], [0, 0, 1], atol=1e-12)
        np.testing.assert_allclose(settings.directions[0][1], [1, 0, 0], atol=1e-12)

    def test_settings_from_vectors(self):
        original = SettingSet([((0, 0, 1), (1, 0, 0)), ((0, 1, 0), (0, 0, -1))])
        restored = serialization.settings_from_dict(serialization.settings_to_dict(original))
        for (a, b), (c, d) in zip(original.directions, restored.directions):
            np.testing.assert_allclose(a, c)
            np.testing.assert_allclose(b, d)

    def test_bad_settings(self):
        for document in ({}, {'parties': [{'phi1': 0.1}]}, {'parties': [{'vec1': [1, 1, 0], 'vec2': [1, 0, 0]}]}):
            with self.subTest(document=document):
                with self.assertRaises(ParseError):
                    serialization.settings_from_dict(document)
