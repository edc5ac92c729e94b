"""
Catalog of known inequalities, transcribed row by row.

Rows are kept exactly as listed, repeated rows included, so that lint can
audit them. `CatalogEntry.inequality()` gives the deduplicated form.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

from .term_algebra import BellInequality, BellTerm, SignPattern, cyclic_orbit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatalogEntry:
    label: str
    n: int
    rows: tuple
    bound: Fraction = Fraction(1)
    description: str = ''
    # violation ratio reported for the symmetric-angle scan, if any
    reported_ratio: float = None

    @property
    def duplicates(self):
        seen = set()
        repeated = []
        for pattern, _ in self.rows:
            if pattern in seen:
                repeated.append(pattern)
            seen.add(pattern)
        return tuple(repeated)

    def inequality(self):
        terms = {}
        for pattern, weight in self.rows:
            terms.setdefault(pattern, BellTerm(pattern, weight))
        if self.duplicates:
            logger.debug(f"{self.label}: dropped {len(self.duplicates)} repeated row(s)")
        return BellInequality(n=self.n, terms=tuple(terms.values()), bound=self.bound, label=self.label)


def _single(text, multiplier, n):
    return [(SignPattern.parse(text), Fraction(multiplier, 2 ** n))]


def _orbit(text, multiplier, n):
    orbit = cyclic_orbit(SignPattern.parse(text))
    return [(pattern, Fraction(multiplier, 2 ** n)) for pattern in sorted(orbit)]


def _entry(label, n, parts, description, bound=1, reported_ratio=None):
    rows = []
    for kind, text, multiplier in parts:
        rows.extend((_orbit if kind == 'cp' else _single)(text, multiplier, n))
    return CatalogEntry(
        label=label,
        n=n,
        rows=tuple(rows),
        bound=Fraction(bound),
        description=description,
        reported_ratio=reported_ratio,
    )


_PERIOD_THREE_ROWS = [
    ('one', '++-++-++-', 1),
    ('one', '+-++-++-+', 1),
    ('one', '-++-++-++', 1),
    ('one', '--+--+--+', 1),
    ('one', '++-++-++-', 1),
    ('one', '++-++-++-', 1),
]

_NINE_FIRST_ORBITS = [
    '+++++++-0', '-++++++-0', '-+++++-+0', '-++++-++0',
    '-+++++--0', '-++++-+-0', '-++++--+0', '-++++---0',
    '-+++-++-0', '-+++-+-+0', '-+++--+-0', '-+++-+--0',
    '-+++--++0', '-+++----0', '-+++---+0', '-++-++--0',
    '-++-+-+-0', '-++-+---0', '-++--++-0', '-++-----0',
    '-++---+-0', '-++-+--+0', '--++--+-0', '-+-+--+-0',
    '-+-+----0', '--+--+-+0', '----+--+0', '---+----0',
]

_NINE_SECOND_ORBITS = [
    '+++++-000', '-++++-000', '-+++--000', '-++---000',
    '-++0-+-00', '-++-+-000', '--+-0-0-0',
]


def _build_catalog():
    return [
        _entry('CHSH', 2, [
            ('one', '++', 2), ('one', '+-', 2), ('one', '-+', 2), ('one', '--', 2),
        ], 'two-party seed scaled to the CHSH body, bound 2', bound=2),
        _entry('INEQ3', 3, [
            ('one', '+++', 1), ('one', '+-0', 2), ('one', '0+-', 2), ('one', '-0+', 2), ('one', '---', 1),
        ], 'three-party reduced identity with two extreme terms'),
        _entry('MODUL33', 3, [
            ('one', '+-0', 2), ('one', '0+-', 2), ('one', '-0+', 2),
        ], 'three-party inequality with two-particle correlations only'),
        _entry('INEQ5A', 5, [
            ('one', '+++++', 1), ('cp', '+++-0', 2), ('cp', '+-+-0', 2), ('cp', '---+0', 2), ('one', '-----', 1),
        ], 'five-party pairing reduction of the seed'),
        _entry('INEQ5B', 5, [
            ('one', '+++++', 1), ('cp', '+++-0', 2), ('cp', '-++-0', 2), ('cp', '-+--0', 2), ('one', '-----', 1),
        ], 'five-party permutation invariant inequality used for the violation search'),
        _entry('INEQ5B-SISTER', 5, [
            ('cp', '+++-0', 2), ('cp', '-++-0', 2), ('cp', '-+--0', 2),
        ], 'INEQ5B without its two full-order terms'),
        _entry('N7', 7, [
            ('one', '+++++++', 1),
            ('cp', '+++++-0', 2), ('cp', '++-++-0', 2), ('cp', '+-+-++0', 2), ('cp', '-+--+-0', 2),
            ('cp', '--+-++0', 2), ('cp', '+++---0', 2), ('cp', '+-+---0', 2), ('cp', '-----+0', 2),
            ('one', '-------', 1),
        ], 'seven-party inequality as printed; one orbit short of a complete cover',
            reported_ratio=1.84331),
        _entry('N9-first', 9, (
            [('one', '+' * 9, 1)]
            + [('cp', text, 2) for text in _NINE_FIRST_ORBITS]
            + _PERIOD_THREE_ROWS
            + [('one', '-' * 9, 1)]
        ), 'nine-party inequality with single-ZERO orbits; repeated period-3 rows as printed',
            reported_ratio=2.18414),
        _entry('N9-second', 9, (
            [('one', '+' * 9, 1)]
            + [('cp', text, 8) for text in _NINE_SECOND_ORBITS]
            + _PERIOD_THREE_ROWS
            + [('one', '+' * 9, 1)]
        ), 'nine-party inequality with three-ZERO orbits; repeated rows and a repeated extreme as printed',
            reported_ratio=1.79497),
    ]


_CATALOG = None


def catalog_entries():
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return list(_CATALOG)


def known_inequalities():
    """Every catalog inequality, deduplicated and labeled."""
    return [entry.inequality() for entry in catalog_entries()]


def get_entry(label):
    for entry in catalog_entries():
        if entry.label.lower() == label.lower():
            return entry
    raise KeyError(f"no catalog entry named {label!r}")


def catalog_inequality(label):
    return get_entry(label).inequality()


def chsh():
    return catalog_inequality('CHSH')
