"""
Construction of Bell inequalities: the full seed identity, pairing
reductions, the random cyclic-orbit generator and extreme-term removal.

Party indices are 0-based throughout.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from django.conf import settings

from .exceptions import (
    BlockIncomplete,
    BudgetExhausted,
    ExtremesAbsent,
    InvalidPattern,
    NTooLarge,
    WeightMismatch,
)
from .term_algebra import (
    BellInequality,
    BellTerm,
    SignPattern,
    Symbol,
    covered_bits,
    cyclic_orbit,
)

logger = logging.getLogger(__name__)


def _extremes(n):
    return SignPattern((Symbol.PLUS,) * n), SignPattern((Symbol.MINUS,) * n)


def builder_weight(pattern):
    return Fraction(2 ** pattern.zeros, 2 ** pattern.n)


@dataclass(frozen=True)
class ReductionStep:
    merged_patterns: tuple
    result_pattern: SignPattern

    def __post_init__(self):
        union = set()
        for pattern in self.merged_patterns:
            union |= covered_bits(pattern)
        if union != covered_bits(self.result_pattern):
            raise BlockIncomplete(
                f"block {[str(p) for p in self.merged_patterns]} does not cover {self.result_pattern}"
            )

    @classmethod
    def for_result(cls, result, positions):
        """The 2^k block that collapses into `result` by zeroing `positions`."""
        positions = tuple(sorted(positions))
        for j in positions:
            if result.symbols[j] is not Symbol.ZERO:
                raise InvalidPattern(f"{result} has no ZERO at party {j}")
        merged = []
        for choice in itertools.product((Symbol.PLUS, Symbol.MINUS), repeat=len(positions)):
            symbols = list(result.symbols)
            for j, symbol in zip(positions, choice):
                symbols[j] = symbol
            merged.append(SignPattern(tuple(symbols)))
        return cls(merged_patterns=tuple(merged), result_pattern=result)


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    k: int = 1
    rng_seed: int = 0
    max_draws: int = None
    fill_residual: bool = True
    max_restarts: int = 64

    def __post_init__(self):
        if self.n < 2:
            raise InvalidPattern(f"need at least 2 parties, got {self.n}")
        if not 1 <= self.k < self.n:
            raise InvalidPattern(f"k must satisfy 1 <= k < N, got k={self.k}, N={self.n}")
        if self.max_draws is None:
            object.__setattr__(self, 'max_draws', settings.BELLFORGE_MAX_DRAWS)
        if self.max_draws <= 0:
            raise InvalidPattern(f"max_draws must be positive, got {self.max_draws}")
        if self.max_restarts <= 0:
            raise InvalidPattern(f"max_restarts must be positive, got {self.max_restarts}")


def wwwzb_seed(n, max_n=None):
    """All 2^N full patterns, each with weight 1/2^N and bound 1."""
    max_n = settings.BELLFORGE_MAX_SEED_N if max_n is None else max_n
    if n < 2:
        raise InvalidPattern(f"need at least 2 parties, got {n}")
    if n > max_n:
        raise NTooLarge(f"seed enumeration is capped at N={max_n}, got N={n}")
    weight = Fraction(1, 2 ** n)
    terms = tuple(BellTerm(SignPattern.from_bits(bits, n), weight) for bits in range(2 ** n))
    logger.debug(f"Built {n}-party seed with {len(terms)} terms")
    return BellInequality(n=n, terms=terms, bound=Fraction(1), label=f"WWWZB-N{n}")


def pair_reduce(ineq, block, positions):
    """
    Replace the 2^k terms of `block` by one term with ZERO at `positions`
    and 2^k times the common weight.
    """
    positions = frozenset(positions)
    block = tuple(block)
    if not positions:
        raise BlockIncomplete("no positions to eliminate")
    if any(not 0 <= j < ineq.n for j in positions):
        raise BlockIncomplete(f"positions {sorted(positions)} out of range for N={ineq.n}")
    missing = [str(p) for p in block if p not in ineq]
    if missing:
        raise BlockIncomplete(f"block patterns not in inequality: {missing}")
    if len(set(block)) != 2 ** len(positions):
        raise BlockIncomplete(f"block has {len(set(block))} patterns, need {2 ** len(positions)}")

    template = list(block[0].symbols)
    for j in positions:
        template[j] = Symbol.ZERO
    try:
        result = SignPattern(tuple(template))
    except InvalidPattern as exc:
        raise BlockIncomplete(str(exc)) from exc
    expected = ReductionStep.for_result(result, positions)
    if set(expected.merged_patterns) != set(block):
        raise BlockIncomplete(
            f"block does not hold every sign combination at parties {sorted(positions)} around {result}"
        )

    weights = {ineq.term_for(p).weight for p in block}
    if len(weights) != 1:
        raise WeightMismatch(f"block weights differ: {sorted(weights)}")
    weight = weights.pop() * 2 ** len(positions)

    kept = [term for term in ineq.terms if term.pattern not in expected.merged_patterns]
    if result in ineq:
        raise BlockIncomplete(f"{result} is already a term")
    kept.append(BellTerm(result, weight))
    return ineq.replace(terms=kept)


def cyclic_pair_reduce(ineq, result, positions):
    """
    Apply pair_reduce to `result` and each of its distinct cyclic rotations.
    """
    positions = frozenset(positions)
    seen = set()
    for shift in range(ineq.n):
        rotated = result.rotate(shift)
        if rotated in seen:
            continue
        seen.add(rotated)
        moved = {(j + shift) % ineq.n for j in positions}
        step = ReductionStep.for_result(rotated, moved)
        ineq = pair_reduce(ineq, step.merged_patterns, moved)
    return ineq


def _orbit_codes(orbit):
    codes = set()
    size = 0
    for pattern in orbit:
        bits = covered_bits(pattern)
        size += len(bits)
        codes |= bits
    # rotations that overlap each other can never be added as a whole
    return frozenset(codes) if size == len(codes) else None


def _candidate_orbits(n, k):
    orbits = {}
    for zeros in itertools.combinations(range(n), k):
        for signs in itertools.product((Symbol.PLUS, Symbol.MINUS), repeat=n - k):
            symbols = list(signs)
            for j in zeros:
                symbols.insert(j, Symbol.ZERO)
            pattern = SignPattern(tuple(symbols))
            orbit = cyclic_orbit(pattern)
            if orbit not in orbits:
                orbits[orbit] = _orbit_codes(orbit)
    return orbits


def _draw_candidate(rng, n, k):
    zeros = set(int(j) for j in rng.choice(n, size=k, replace=False))
    signs = rng.integers(0, 2, size=n)
    return SignPattern(tuple(
        Symbol.ZERO if j in zeros else (Symbol.MINUS if signs[j] else Symbol.PLUS)
        for j in range(n)
    ))


@dataclass
class _Attempt:
    patterns: list
    covered: set
    orbits: int = 0


def _grow(n, k, rng, orbits, cfg, draws, label, attempt):
    """One run of orbit acceptance from the extremes until no feasible orbit is left."""
    full = 2 ** n
    grown = _Attempt(patterns=list(_extremes(n)), covered={0, full - 1})
    feasible = dict(orbits)
    orbit_of = {pattern: orbit for orbit in feasible for pattern in orbit}
    while feasible and len(grown.covered) < full:
        if draws >= cfg.max_draws:
            raise BudgetExhausted(
                f"{label}: draw budget {cfg.max_draws} exhausted at mass {len(grown.covered)}/{full}",
                partial=_assemble(n, grown.patterns, label),
                diagnostics={'draws': draws, 'mass': len(grown.covered), 'orbits': grown.orbits,
                             'attempt': attempt},
            )
        draws += 1
        orbit = orbit_of.get(_draw_candidate(rng, n, k))
        if orbit is None or orbit not in feasible:
            continue
        grown.covered |= feasible.pop(orbit)
        grown.patterns.extend(sorted(orbit))
        grown.orbits += 1
        feasible = {other: codes for other, codes in feasible.items() if not codes & grown.covered}
    return grown, draws


def generate_cp_set(cfg):
    """
    Grow a rotation-closed, disjoint cover of all 2^N sign strings from the
    two extreme strings by adding whole cyclic orbits of random k-ZERO patterns.

    A run that saturates while some string reachable by a k-ZERO orbit is
    still uncovered restarts from the next jumped Philox stream, up to
    `max_restarts` runs within the draw budget. Strings that no admissible
    orbit can cover become full-order terms.
    """
    n, k = cfg.n, cfg.k
    if n > settings.BELLFORGE_MAX_SEED_N:
        raise NTooLarge(f"generator is capped at N={settings.BELLFORGE_MAX_SEED_N}, got N={n}")
    full = 2 ** n
    label = f"CP-N{n}-k{k}-seed{cfg.rng_seed}"

    extremes = {0, full - 1}
    orbits = {
        orbit: codes
        for orbit, codes in _candidate_orbits(n, k).items()
        if codes is not None and not codes & extremes
    }
    reachable = frozenset().union(*orbits.values())

    draws = 0
    best = None
    for attempt in range(cfg.max_restarts):
        stream = np.random.Philox(cfg.rng_seed)
        rng = np.random.Generator(stream.jumped(attempt) if attempt else stream)
        grown, draws = _grow(n, k, rng, orbits, cfg, draws, label, attempt)
        gap = len(reachable - grown.covered)
        if best is None or gap < best[0]:
            best = (gap, attempt, grown)
        if not gap:
            break
        logger.debug(f"{label}: run {attempt} saturated with {gap} coverable strings left, restarting")

    gap, attempt, grown = best
    if gap:
        logger.warning(f"{label}: no exact orbit tiling in {cfg.max_restarts} runs, {gap} coverable strings left")
    residual = sorted(set(range(full)) - grown.covered)
    if residual:
        if not cfg.fill_residual:
            raise BudgetExhausted(
                f"{label}: saturated with {len(residual)} uncovered strings",
                partial=_assemble(n, grown.patterns, label),
                diagnostics={'draws': draws, 'mass': len(grown.covered), 'orbits': grown.orbits,
                             'attempt': attempt, 'saturated': True},
            )
        grown.patterns.extend(SignPattern.from_bits(bits, n) for bits in residual)

    ineq = _assemble(n, grown.patterns, label)
    logger.info(
        f"Generated {label}: {grown.orbits} orbits, {len(residual)} residual full terms,"
        f" {len(ineq)} terms after {draws} draws (run {attempt})"
    )
    return ineq


def _assemble(n, patterns, label):
    terms = tuple(BellTerm(p, builder_weight(p)) for p in patterns)
    return BellInequality(n=n, terms=terms, bound=Fraction(1), label=label)


def drop_extremes(ineq):
    """Remove the all-PLUS and all-MINUS terms; the bound stays."""
    plus, minus = _extremes(ineq.n)
    if plus not in ineq or minus not in ineq:
        raise ExtremesAbsent(f"{ineq.label or 'inequality'} lacks an extreme term")
    kept = [term for term in ineq.terms if term.pattern not in (plus, minus)]
    suffix = '-no-extremes'
    return ineq.replace(terms=kept, label=f"{ineq.label}{suffix}" if ineq.label else suffix[1:])


def orbit_generators(ineq):
    """One canonical representative per cyclic orbit present in `ineq`."""
    seen = set()
    generators = []
    for pattern in ineq.patterns:
        if pattern in seen:
            continue
        orbit = cyclic_orbit(pattern)
        seen |= orbit
        generators.append((min(orbit, key=lambda p: p.sort_key()), len(orbit)))
    return generators


def lower_order_only(ineq):
    return all(term.pattern.zeros > 0 for term in ineq.terms)
