"""
JSON documents for inequalities, states, settings and reports.
"""
import json
import logging
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exceptions import BellForgeError, ParseError
from .quantum_engine import PureState, SettingSet
from .term_algebra import BellInequality, BellTerm, SignPattern, require_disjoint

logger = logging.getLogger(__name__)

QUBIT_ORDER = 'party-1-most-significant'


def render_fraction(value):
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _require(document, key, context):
    if key not in document:
        raise ParseError(f"missing key in {context}", field=key)
    return document[key]


def _int_field(document, key, context, default=None):
    raw = document.get(key, default) if default is not None else _require(document, key, context)
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ParseError(f"expected an integer in {context}", field=key)
    return raw


def inequality_to_dict(ineq):
    return {
        'n': ineq.n,
        'bound_num': ineq.bound.numerator,
        'bound_den': ineq.bound.denominator,
        'terms': [
            {
                'pattern': str(term.pattern),
                'weight_num': term.weight.numerator,
                'weight_den': term.weight.denominator,
            }
            for term in ineq.terms
        ],
        'label': ineq.label,
    }


def rows_from_dict(document):
    """
    Parse an inequality document into (n, rows, bound, label) without
    rejecting repeated patterns, so lint can report them.
    """
    if not isinstance(document, dict):
        raise ParseError("inequality document must be a JSON object")
    n = _int_field(document, 'n', 'inequality')
    bound = Fraction(
        _int_field(document, 'bound_num', 'inequality', default=1),
        _int_field(document, 'bound_den', 'inequality', default=1),
    )
    raw_terms = _require(document, 'terms', 'inequality')
    if not isinstance(raw_terms, list):
        raise ParseError("terms must be a list", field='terms')
    rows = []
    for position, raw in enumerate(raw_terms):
        context = f"terms[{position}]"
        if not isinstance(raw, dict):
            raise ParseError("term must be an object", field=context)
        try:
            pattern = SignPattern.parse(str(_require(raw, 'pattern', context)))
            weight = Fraction(
                _int_field(raw, 'weight_num', context),
                _int_field(raw, 'weight_den', context, default=1),
            )
        except ParseError:
            raise
        except (BellForgeError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), field=context) from exc
        if pattern.n != n:
            raise ParseError(f"pattern {pattern} has {pattern.n} parties, expected {n}", field=context)
        rows.append((pattern, weight))
    return n, rows, bound, str(document.get('label', ''))


def inequality_from_dict(document):
    """Parse an inequality document; raises OverlapError when two terms cover a common string."""
    n, rows, bound, label = rows_from_dict(document)
    try:
        ineq = BellInequality(n=n, terms=tuple(BellTerm(p, w) for p, w in rows), bound=bound, label=label)
    except BellForgeError as exc:
        raise ParseError(str(exc), field='terms') from exc
    return require_disjoint(ineq)


def read_json(path):
    try:
        with open(path, encoding='utf-8') as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def write_json(path, document):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2, sort_keys=False)
        handle.write('\n')
    logger.info(f"Wrote {path}")


def dumps_inequality(ineq):
    """Byte-stable serialization."""
    return json.dumps(inequality_to_dict(ineq), indent=2)


def load_inequality(path):
    return inequality_from_dict(read_json(path))


def load_rows(path):
    return rows_from_dict(read_json(path))


def state_to_dict(state):
    return {
        'n': state.n,
        'qubit_order': QUBIT_ORDER,
        'amplitudes': [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def state_from_dict(document):
    if not isinstance(document, dict):
        raise ParseError("state document must be a JSON object")
    n = _int_field(document, 'n', 'state')
    raw = _require(document, 'amplitudes', 'state')
    if not isinstance(raw, list) or len(raw) != 2 ** n:
        raise ParseError(f"expected {2 ** n} amplitudes", field='amplitudes')
    try:
        amplitudes = np.array([complex(re, im) for re, im in raw], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ParseError("amplitudes must be [re, im] pairs", field='amplitudes') from exc
    try:
        return PureState(amplitudes, normalize=True)
    except BellForgeError as exc:
        raise ParseError(str(exc), field='amplitudes') from exc


def load_state(path):
    return state_from_dict(read_json(path))


def settings_to_dict(settings):
    return {
        'parties': [
            {'vec1': [float(x) for x in first], 'vec2': [float(x) for x in second]}
            for first, second in settings.directions
        ]
    }


def settings_from_dict(document):
    parties = _require(document, 'parties', 'settings') if isinstance(document, dict) else None
    if not isinstance(parties, list):
        raise ParseError("settings need a list of parties", field='parties')
    directions = []
    for position, party in enumerate(parties):
        context = f"parties[{position}]"
        try:
            if 'vec1' in party:
                directions.append((np.asarray(party['vec1'], float), np.asarray(party['vec2'], float)))
            else:
                directions.append((SettingSet.xz_direction(float(party['phi1'])),
                                   SettingSet.xz_direction(float(party['phi2']))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("party needs phi1/phi2 or vec1/vec2", field=context) from exc
    try:
        return SettingSet(tuple(directions))
    except BellForgeError as exc:
        raise ParseError(str(exc), field='parties') from exc


def load_settings(path):
    return settings_from_dict(read_json(path))
