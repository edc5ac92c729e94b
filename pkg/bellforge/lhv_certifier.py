"""
Local-realistic bounds by exhaustive enumeration of deterministic assignments.

Assignments are 2N-bit integers (see Assignment.from_index) enumerated in
natural order; the enumeration is split into disjoint integer ranges that are
reduced independently. All arithmetic is exact integer arithmetic on weights
scaled by their common denominator.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from django.conf import settings

from .exceptions import InvalidPattern, LengthMismatch, NTooLarge
from .term_algebra import Assignment, Symbol

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class BoundReport:
    n: int
    wrapped: bool
    bound: Fraction
    max_abs: Fraction
    signed_min: Fraction
    signed_max: Fraction
    is_mirror: bool
    plus_count: int
    minus_count: int
    assignments: int
    witnesses: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.max_abs <= self.bound


@dataclass(frozen=True)
class MirrorReport:
    is_mirror: bool
    plus_count: int
    minus_count: int
    assignments: int

    def __bool__(self):
        return self.is_mirror


@dataclass(frozen=True)
class VertexTensor:
    n: int
    entries: np.ndarray

    def entry(self, *indices):
        """Entry at 1-based per-party indices in {1, 2, 3}."""
        return int(self.entries[tuple(i - 1 for i in indices)])


def _scaled_weights(ineq, signs):
    scale = math.lcm(ineq.bound.denominator, *(term.weight.denominator for term in ineq.terms))
    weights = [int(term.weight * scale) for term in ineq.terms]
    if signs is None:
        signs = (1,) * len(ineq)
    if len(signs) != len(ineq) or any(s not in (1, -1) for s in signs):
        raise LengthMismatch(f"need one sign in {{+1, -1}} per term, got {len(signs)} for {len(ineq)} terms")
    return scale, weights, tuple(signs)


def _chunk_extremes(ineq, weights, signs, bound_scaled, start, stop):
    codes = np.arange(start, stop, dtype=np.int64)
    sums, diffs = [], []
    for j in range(ineq.n):
        a1 = 1 - 2 * ((codes >> (2 * j)) & 1)
        a2 = 1 - 2 * ((codes >> (2 * j + 1)) & 1)
        sums.append(a1 + a2)
        diffs.append(a1 - a2)

    wrapped = np.zeros(len(codes), dtype=np.int64)
    signed = np.zeros(len(codes), dtype=np.int64)
    for term, weight, sign in zip(ineq.terms, weights, signs):
        value = np.ones(len(codes), dtype=np.int64)
        for j, symbol in enumerate(term.pattern.symbols):
            if symbol is Symbol.PLUS:
                value *= sums[j]
            elif symbol is Symbol.MINUS:
                value *= diffs[j]
        wrapped += weight * np.abs(value)
        signed += sign * weight * value

    def pick(values, best):
        position = int(best(values))
        return int(values[position]), int(codes[position])

    return {
        'wrapped_max': pick(wrapped, np.argmax),
        'signed_min': pick(signed, np.argmin),
        'signed_max': pick(signed, np.argmax),
        'plus': int(np.count_nonzero(signed == bound_scaled)),
        'minus': int(np.count_nonzero(signed == -bound_scaled)),
    }


def _enumerate(ineq, signs, threads, max_n):
    max_n = settings.BELLFORGE_MAX_CERTIFY_N if max_n is None else max_n
    if ineq.n > max_n:
        raise NTooLarge(f"exhaustive enumeration is capped at N={max_n}, got N={ineq.n}")
    scale, weights, signs = _scaled_weights(ineq, signs)
    bound_scaled = int(ineq.bound * scale)
    total = 4 ** ineq.n
    ranges = [(start, min(start + CHUNK_SIZE, total)) for start in range(0, total, CHUNK_SIZE)]
    threads = threads or settings.BELLFORGE_THREADS

    if len(ranges) == 1 or threads <= 1:
        parts = [_chunk_extremes(ineq, weights, signs, bound_scaled, *r) for r in ranges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: _chunk_extremes(ineq, weights, signs, bound_scaled, *r), ranges))

    # chunks are in code order, so strict comparisons keep the lowest witness
    merged = dict(parts[0])
    for part in parts[1:]:
        if part['wrapped_max'][0] > merged['wrapped_max'][0]:
            merged['wrapped_max'] = part['wrapped_max']
        if part['signed_max'][0] > merged['signed_max'][0]:
            merged['signed_max'] = part['signed_max']
        if part['signed_min'][0] < merged['signed_min'][0]:
            merged['signed_min'] = part['signed_min']
        merged['plus'] += part['plus']
        merged['minus'] += part['minus']
    return scale, total, merged


def certify_bound(ineq, wrapped=True, signs=None, threads=None, max_n=None):
    """
    Exact extremes of the inequality over all 4^N deterministic assignments.

    The wrapped form sums per-term moduli; the signed form uses one fixed
    sign per term (all +1 unless `signs` is given).
    """
    scale, total, merged = _enumerate(ineq, signs, threads, max_n)
    signed_min = Fraction(merged['signed_min'][0], scale)
    signed_max = Fraction(merged['signed_max'][0], scale)
    if wrapped:
        max_abs = Fraction(merged['wrapped_max'][0], scale)
        max_code = merged['wrapped_max'][1]
    else:
        max_abs = max(abs(signed_min), abs(signed_max))
        max_code = merged['signed_max'][1] if abs(signed_max) >= abs(signed_min) else merged['signed_min'][1]

    is_mirror = merged['plus'] + merged['minus'] == total
    report = BoundReport(
        n=ineq.n,
        wrapped=wrapped,
        bound=ineq.bound,
        max_abs=max_abs,
        signed_min=signed_min,
        signed_max=signed_max,
        is_mirror=is_mirror,
        plus_count=merged['plus'],
        minus_count=merged['minus'],
        assignments=total,
        witnesses={
            'max_abs': Assignment.from_index(max_code, ineq.n),
            'signed_min': Assignment.from_index(merged['signed_min'][1], ineq.n),
            'signed_max': Assignment.from_index(merged['signed_max'][1], ineq.n),
        },
    )
    logger.info(
        f"Certified {ineq.label or 'inequality'} ({'wrapped' if wrapped else 'signed'}):"
        f" max {max_abs} against bound {ineq.bound} over {total} assignments"
    )
    return report


def mirror_check(ineq, signs=None, threads=None, max_n=None):
    """True iff the signed expression is exactly +bound or -bound on every assignment."""
    _, total, merged = _enumerate(ineq, signs, threads, max_n)
    report = MirrorReport(
        is_mirror=merged['plus'] + merged['minus'] == total,
        plus_count=merged['plus'],
        minus_count=merged['minus'],
        assignments=total,
    )
    logger.debug(f"Mirror check for {ineq.label or 'inequality'}: {report}")
    return report


def vertex_tensor(assignment):
    """The factorizable tensor (A_1^1, A_2^1, 1) x ... x (A_1^N, A_2^N, 1)."""
    entries = np.ones((), dtype=np.int64)
    for a1, a2 in assignment.values:
        entries = np.multiply.outer(entries, np.array([a1, a2, 1], dtype=np.int64))
    return VertexTensor(n=assignment.n, entries=entries)


_SLOT_VECTORS = {
    Symbol.PLUS: np.array([1, 1, 0], dtype=np.int64),
    Symbol.MINUS: np.array([1, -1, 0], dtype=np.int64),
    Symbol.ZERO: np.array([0, 0, 1], dtype=np.int64),
}


def contract_vertex_tensor(tensor, pattern):
    """Contract a vertex tensor with the per-party slot vectors of `pattern`."""
    if tensor.n != pattern.n:
        raise LengthMismatch(f"tensor has {tensor.n} parties, pattern has {pattern.n}")
    if tensor.n == 0:
        raise InvalidPattern("empty tensor")
    value = tensor.entries
    for symbol in pattern.symbols:
        value = np.tensordot(_SLOT_VECTORS[symbol], value, axes=(0, 0))
    return int(value)
