"""
Sign patterns, Bell terms and inequalities.

A sign pattern picks, for every party, the sum bracket (A_1 + A_2), the
difference bracket (A_1 - A_2) or no bracket at all. Full (ZERO-free)
patterns are encoded as N-bit integers where bit j is set when party j
carries a MINUS bracket.
"""
import enum
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .exceptions import (
    DuplicatePattern,
    InvalidPattern,
    LengthMismatch,
    OverlapError,
)

logger = logging.getLogger(__name__)


class Symbol(enum.Enum):
    PLUS = '+'
    MINUS = '-'
    ZERO = '0'

    @property
    def rank(self):
        return _SYMBOL_RANK[self]


_SYMBOL_RANK = {Symbol.PLUS: 0, Symbol.MINUS: 1, Symbol.ZERO: 2}
_SYMBOL_ALIASES = {'+': Symbol.PLUS, '-': Symbol.MINUS, '−': Symbol.MINUS, '0': Symbol.ZERO}


@dataclass(frozen=True)
class SignPattern:
    """
    Ordered sequence of N symbols over {PLUS, MINUS, ZERO}.
    """
    symbols: tuple

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if len(symbols) < 2:
            raise InvalidPattern(f"pattern needs at least 2 parties, got {len(symbols)}")
        for symbol in symbols:
            if not isinstance(symbol, Symbol):
                raise InvalidPattern(f"not a sign symbol: {symbol!r}")
        if all(symbol is Symbol.ZERO for symbol in symbols):
            raise InvalidPattern("the all-ZERO pattern is not a Bell term")
        object.__setattr__(self, 'symbols', symbols)

    @classmethod
    def parse(cls, text):
        try:
            return cls(tuple(_SYMBOL_ALIASES[char] for char in text.strip()))
        except KeyError as exc:
            raise InvalidPattern(f"bad symbol {exc.args[0]!r} in pattern {text!r}") from None

    @classmethod
    def from_bits(cls, bits, n):
        return cls(tuple(Symbol.MINUS if bits >> j & 1 else Symbol.PLUS for j in range(n)))

    @property
    def n(self):
        return len(self.symbols)

    @property
    def zeros(self):
        return sum(1 for symbol in self.symbols if symbol is Symbol.ZERO)

    @property
    def order(self):
        """Number of parties entering the correlation function."""
        return self.n - self.zeros

    @property
    def is_full(self):
        return self.zeros == 0

    def zero_positions(self):
        return tuple(j for j, symbol in enumerate(self.symbols) if symbol is Symbol.ZERO)

    def sort_key(self):
        return tuple(symbol.rank for symbol in self.symbols)

    def to_bits(self):
        if not self.is_full:
            raise InvalidPattern(f"{self} has ZERO symbols and no single bit encoding")
        return sum(1 << j for j, symbol in enumerate(self.symbols) if symbol is Symbol.MINUS)

    def rotate(self, shift=1):
        shift %= self.n
        return SignPattern(self.symbols[-shift:] + self.symbols[:-shift]) if shift else self

    def __str__(self):
        return ''.join(symbol.value for symbol in self.symbols)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()


@dataclass(frozen=True)
class BellTerm:
    pattern: SignPattern
    weight: Fraction

    def __post_init__(self):
        weight = Fraction(self.weight)
        if weight <= 0:
            raise InvalidPattern(f"term {self.pattern} has non-positive weight {weight}")
        object.__setattr__(self, 'weight', weight)

    @property
    def coefficient(self):
        """
        Prefactor of the product of half-brackets, w * 2^(N - zeros).

        Every term produced by the builder has coefficient 1.
        """
        return self.weight * 2 ** self.pattern.order


@dataclass(frozen=True)
class BellInequality:
    """
    Weighted set of sign patterns, read as sum_t w_t |<prod brackets>| <= bound.
    """
    n: int
    terms: tuple
    bound: Fraction = Fraction(1)
    label: str = ''
    _index: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        terms = tuple(sorted(self.terms, key=lambda term: term.pattern.sort_key()))
        if not terms:
            raise InvalidPattern("an inequality needs at least one term")
        index = {}
        for term in terms:
            if term.pattern.n != self.n:
                raise LengthMismatch(f"term {term.pattern} has {term.pattern.n} parties, expected {self.n}")
            if term.pattern in index:
                raise DuplicatePattern(f"pattern {term.pattern} listed twice in {self.label or 'inequality'}")
            index[term.pattern] = term
        bound = Fraction(self.bound)
        if bound <= 0:
            raise InvalidPattern(f"bound must be positive, got {bound}")
        object.__setattr__(self, 'terms', terms)
        object.__setattr__(self, 'bound', bound)
        object.__setattr__(self, '_index', index)

    @classmethod
    def from_patterns(cls, n, weighted_patterns, bound=1, label=''):
        terms = [
            BellTerm(SignPattern.parse(p) if isinstance(p, str) else p, Fraction(w))
            for p, w in weighted_patterns
        ]
        return cls(n=n, terms=tuple(terms), bound=Fraction(bound), label=label)

    @property
    def patterns(self):
        return tuple(term.pattern for term in self.terms)

    def term_for(self, pattern):
        return self._index.get(pattern)

    def __contains__(self, pattern):
        return pattern in self._index

    def __len__(self):
        return len(self.terms)

    def replace(self, terms=None, bound=None, label=None):
        return BellInequality(
            n=self.n,
            terms=tuple(self.terms if terms is None else terms),
            bound=self.bound if bound is None else bound,
            label=self.label if label is None else label,
        )

    def algebraic_ceiling(self):
        """Largest value any state and settings could reach."""
        return sum((term.coefficient for term in self.terms), Fraction(0))

    def max_order(self):
        return max(term.pattern.order for term in self.terms)


@dataclass(frozen=True)
class Assignment:
    """
    Local predetermined outcomes: values[j] = (A_1^j, A_2^j), each +1 or -1.
    """
    values: tuple

    def __post_init__(self):
        values = tuple((int(a1), int(a2)) for a1, a2 in self.values)
        for pair in values:
            for entry in pair:
                if entry not in (1, -1):
                    raise InvalidPattern(f"assignment entries must be +1 or -1, got {entry}")
        object.__setattr__(self, 'values', values)

    @property
    def n(self):
        return len(self.values)

    @classmethod
    def from_index(cls, code, n):
        """Decode a 2N-bit integer; bit 2j+m-1 set means A_m^j = -1."""
        return cls(tuple(
            (-1 if code >> (2 * j) & 1 else 1, -1 if code >> (2 * j + 1) & 1 else 1)
            for j in range(n)
        ))

    def to_index(self):
        code = 0
        for j, (a1, a2) in enumerate(self.values):
            code |= (a1 < 0) << (2 * j) | (a2 < 0) << (2 * j + 1)
        return code

    def active_string(self):
        """The only full sign string whose bracket product is non-zero here."""
        return sum(1 << j for j, (a1, a2) in enumerate(self.values) if a1 != a2)


@dataclass(frozen=True)
class MassReport:
    n: int
    mass: int
    disjoint: bool
    status: str

    @property
    def complete(self):
        return self.status == 'complete'


def _covered_bits(pattern):
    base = 0
    free = []
    for j, symbol in enumerate(pattern.symbols):
        if symbol is Symbol.MINUS:
            base |= 1 << j
        elif symbol is Symbol.ZERO:
            free.append(j)
    for choice in itertools.product((0, 1), repeat=len(free)):
        bits = base
        for j, bit in zip(free, choice):
            bits |= bit << j
        yield bits


def covered_bits(pattern):
    """Covered full strings of `pattern` as integer bit codes."""
    return frozenset(_covered_bits(pattern))


def covered_strings(pattern):
    """All full sign strings obtained by substituting each ZERO with + and -."""
    return frozenset(SignPattern.from_bits(bits, pattern.n) for bits in _covered_bits(pattern))


def coverage_status(n, mass):
    if mass == 2 ** n:
        return 'complete'
    if mass == 2 ** n - 2:
        return 'extremes-dropped'
    return 'defective'


def find_overlaps(patterns):
    """Pairs of patterns sharing at least one covered string, with the shared codes."""
    owner = {}
    overlaps = []
    for pattern in patterns:
        clashes = {}
        for bits in _covered_bits(pattern):
            if bits in owner:
                clashes.setdefault(owner[bits], []).append(bits)
            else:
                owner[bits] = pattern
        for other, codes in clashes.items():
            overlaps.append((other, pattern, tuple(sorted(codes))))
    return overlaps, owner


def require_disjoint(ineq):
    """Return `ineq` unchanged, or raise OverlapError when two terms cover a common string."""
    overlaps, _ = find_overlaps(ineq.patterns)
    if overlaps:
        first, second, codes = overlaps[0]
        raise OverlapError(
            f"{first} and {second} both cover {SignPattern.from_bits(codes[0], ineq.n)}"
            f" ({len(overlaps)} overlapping pair(s))",
            overlaps=overlaps,
        )
    return ineq


def mass(ineq):
    """
    Count the full sign strings covered by the terms of `ineq`.

    Raises OverlapError when two terms cover a common string.
    """
    require_disjoint(ineq)
    total = sum(2 ** term.pattern.zeros for term in ineq.terms)
    report = MassReport(n=ineq.n, mass=total, disjoint=True, status=coverage_status(ineq.n, total))
    logger.debug(f"mass of {ineq.label or 'inequality'}: {total} ({report.status})")
    return report


def cyclic_orbit(pattern):
    return frozenset(pattern.rotate(shift) for shift in range(pattern.n))


def is_rotation_closed(patterns):
    present = set(patterns)
    return all(pattern.rotate() in present for pattern in present)


def evaluate_term(pattern, assignment):
    """
    Product of per-party sums (PLUS) and differences (MINUS); ZERO slots give 1.
    """
    if pattern.n != assignment.n:
        raise LengthMismatch(f"pattern has {pattern.n} parties, assignment has {assignment.n}")
    value = 1
    for symbol, (a1, a2) in zip(pattern.symbols, assignment.values):
        if symbol is Symbol.PLUS:
            value *= a1 + a2
        elif symbol is Symbol.MINUS:
            value *= a1 - a2
        if value == 0:
            return 0
    return value


def wrapped_value(ineq, assignment):
    return sum((term.weight * abs(evaluate_term(term.pattern, assignment)) for term in ineq.terms), Fraction(0))


def signed_value(ineq, assignment, signs=None):
    signs = signs or (1,) * len(ineq)
    return sum(
        (sign * term.weight * evaluate_term(term.pattern, assignment) for sign, term in zip(signs, ineq.terms)),
        Fraction(0),
    )
