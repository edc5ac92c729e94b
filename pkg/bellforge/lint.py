"""
Structural audit of an inequality as listed, repeated rows included.
"""
import logging
from dataclasses import dataclass, field

from django.conf import settings

from .exceptions import BellForgeError
from .lhv_certifier import mirror_check
from .term_algebra import (
    BellInequality,
    BellTerm,
    SignPattern,
    coverage_status,
    cyclic_orbit,
    find_overlaps,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LintReport:
    label: str
    n: int
    rows: int
    terms: int
    mass: int
    status: str
    disjoint: bool
    duplicates: tuple = ()
    overlaps: tuple = ()
    open_orbits: tuple = ()
    missing: tuple = ()
    mirror: bool = None
    notes: tuple = field(default_factory=tuple)

    @property
    def expected_mass(self):
        return 2 ** self.n

    @property
    def ok(self):
        """Complete and disjoint as listed."""
        return self.status == 'complete' and self.disjoint

    def to_dict(self):
        return {
            'label': self.label,
            'n': self.n,
            'rows': self.rows,
            'terms': self.terms,
            'mass': self.mass,
            'expected_mass': self.expected_mass,
            'status': self.status,
            'disjoint': self.disjoint,
            'duplicates': [str(p) for p in self.duplicates],
            'overlaps': [[str(a), str(b), len(codes)] for a, b, codes in self.overlaps],
            'open_orbits': [str(p) for p in self.open_orbits],
            'missing': [str(p) for p in self.missing],
            'mirror': self.mirror,
            'notes': list(self.notes),
            'ok': self.ok,
        }


def lint_rows(n, rows, label='', bound=1, check_mirror=True):
    """
    Audit `rows` of (pattern, weight). Mass counts each distinct pattern
    once; repeated rows are reported and make the listing non-disjoint.
    """
    seen = {}
    duplicates = []
    for pattern, weight in rows:
        if pattern in seen:
            duplicates.append(pattern)
        else:
            seen[pattern] = weight
    patterns = list(seen)

    overlaps, owner = find_overlaps(patterns)
    mass = sum(2 ** p.zeros for p in patterns)
    present = set(patterns)
    open_orbits = sorted({p for p in patterns if not cyclic_orbit(p) <= present})
    missing = tuple(SignPattern.from_bits(bits, n) for bits in range(2 ** n) if bits not in owner)
    disjoint = not overlaps and not duplicates

    notes = []
    mirror = None
    if check_mirror and not overlaps and n <= settings.BELLFORGE_MAX_CERTIFY_N:
        try:
            ineq = BellInequality(n=n, terms=tuple(BellTerm(p, w) for p, w in seen.items()), bound=bound, label=label)
            mirror = mirror_check(ineq).is_mirror
        except BellForgeError as exc:
            notes.append(f"mirror check skipped: {exc}")

    report = LintReport(
        label=label,
        n=n,
        rows=len(rows),
        terms=len(patterns),
        mass=mass,
        status=coverage_status(n, mass),
        disjoint=disjoint,
        duplicates=tuple(duplicates),
        overlaps=tuple(overlaps),
        open_orbits=tuple(open_orbits),
        missing=missing,
        mirror=mirror,
        notes=tuple(notes),
    )
    logger.info(
        f"Lint {label or 'inequality'}: mass {mass}/{2 ** n} ({report.status}),"
        f" {len(duplicates)} repeated row(s), {len(overlaps)} overlap(s)"
    )
    return report


def lint_entry(entry, check_mirror=True):
    return lint_rows(entry.n, entry.rows, entry.label, entry.bound, check_mirror)


def lint_inequality(ineq, check_mirror=True):
    return lint_rows(ineq.n, [(t.pattern, t.weight) for t in ineq.terms], ineq.label, ineq.bound, check_mirror)
