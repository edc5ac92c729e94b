"""
Sum-of-squares screen on correlation-tensor entries.

In a local frame where each party's half-sum observable lies along x and
its half-difference along z, every term of an inequality reads
(product of cos/sin of the party angles) x T_tuple with PLUS -> 1 (x),
MINUS -> 3 (z) and ZERO -> 0. Cauchy-Schwarz then bounds the wrapped value
by |trig vector| * sqrt(sum of T_tuple^2), and the trig vector of a
complete inequality has unit norm.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce

import numpy as np
from django.conf import settings as django_settings
from scipy.spatial.transform import Rotation

from .exceptions import DimensionMismatch
from .quantum_engine import apply_local_unitaries, correlation_tensor, qubit_unitary
from .term_algebra import Symbol

logger = logging.getLogger(__name__)

SLOT_INDEX = {Symbol.PLUS: 1, Symbol.MINUS: 3, Symbol.ZERO: 0}


@dataclass(frozen=True)
class ConditionIndexSet:
    n: int
    indices: tuple
    label: str = ''

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def render(self):
        return [''.join(str(k) for k in index) for index in self.indices]


@dataclass(frozen=True)
class Frame:
    rotations: tuple
    unitaries: tuple


@dataclass(frozen=True)
class SweepResult:
    identity_value: float
    max_value: float
    min_value: float
    frames: int
    best_frame: Frame = None


def condition_indices(ineq):
    return ConditionIndexSet(
        n=ineq.n,
        indices=tuple(tuple(SLOT_INDEX[s] for s in term.pattern.symbols) for term in ineq.terms),
        label=ineq.label,
    )


def condition_value(state, idxset, frame=None):
    """Sum of squared tensor entries over the index set, optionally in a local frame."""
    if state.n != idxset.n:
        raise DimensionMismatch(f"state has {state.n} qubits, index set has {idxset.n}")
    if frame is not None:
        state = apply_local_unitaries(state, frame.unitaries)
    return float(sum(correlation_tensor(state, index) ** 2 for index in idxset.indices))


def _orthogonal(vector):
    axis = np.eye(3)[int(np.argmin(np.abs(vector)))]
    other = np.cross(vector, axis)
    return other / np.linalg.norm(other)


def _party_rotation(first, second):
    total, difference = first + second, first - second
    if np.linalg.norm(total) < 1e-12:
        difference = difference / np.linalg.norm(difference)
        total = _orthogonal(difference)
    else:
        total = total / np.linalg.norm(total)
    difference = difference - np.dot(difference, total) * total
    if np.linalg.norm(difference) < 1e-12:
        difference = _orthogonal(total)
    else:
        difference = difference / np.linalg.norm(difference)
    # rows: sum -> x, -(sum x diff) -> y, diff -> z
    return np.array([total, -np.cross(total, difference), difference])


def frame_for_settings(settings):
    """Local frame in which each party's sum direction is x and difference direction is z."""
    rotations = tuple(_party_rotation(first, second) for first, second in settings.directions)
    return Frame(rotations=rotations, unitaries=tuple(qubit_unitary(r) for r in rotations))


def settings_angles(settings):
    """Per-party theta with |n_1 + n_2| = 2 cos(theta) and |n_1 - n_2| = 2 sin(theta)."""
    return np.array([
        np.arctan2(np.linalg.norm(first - second), np.linalg.norm(first + second))
        for first, second in settings.directions
    ])


def random_frame(n, rng):
    rotations = tuple(Rotation.random(n, rng).as_matrix())
    return Frame(rotations=rotations, unitaries=tuple(qubit_unitary(r) for r in rotations))


def condition_sweep(state, idxset, frames=None, rng_seed=None, threads=None):
    """
    Condition value in the computational frame and in `frames` random local frames.
    """
    frames = 1000 if frames is None else frames
    rng_seed = django_settings.BELLFORGE_SEED if rng_seed is None else rng_seed
    threads = threads or django_settings.BELLFORGE_THREADS
    rng = np.random.Generator(np.random.Philox(rng_seed))
    sampled = [random_frame(state.n, rng) for _ in range(frames)]

    if threads <= 1 or frames <= 1:
        values = [condition_value(state, idxset, frame) for frame in sampled]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda frame: condition_value(state, idxset, frame), sampled))

    identity_value = condition_value(state, idxset)
    best = int(np.argmax(values)) if values else None
    result = SweepResult(
        identity_value=identity_value,
        max_value=max([identity_value, *values]),
        min_value=min([identity_value, *values]),
        frames=frames,
        best_frame=sampled[best] if best is not None else None,
    )
    logger.info(
        f"Condition sweep for {idxset.label or 'index set'}: identity {identity_value:.6f},"
        f" range [{result.min_value:.6f}, {result.max_value:.6f}] over {frames} frames"
    )
    return result


def trig_vector(ineq, thetas):
    """Per-term coefficient times cos(theta_j) on PLUS slots and sin(theta_j) on MINUS slots."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (ineq.n,):
        raise DimensionMismatch(f"need {ineq.n} angles, got shape {thetas.shape}")
    factors = {Symbol.PLUS: np.cos(thetas), Symbol.MINUS: np.sin(thetas), Symbol.ZERO: np.ones(ineq.n)}
    return np.array([
        float(term.coefficient) * np.prod([factors[s][j] for j, s in enumerate(term.pattern.symbols)])
        for term in ineq.terms
    ])


def trig_norm_grid_max(ineq, grid_points=9):
    """Largest trig-vector norm over a product grid of angles in [0, pi/2]."""
    grid = np.linspace(0, np.pi / 2, grid_points)
    factors = {Symbol.PLUS: np.cos(grid), Symbol.MINUS: np.sin(grid), Symbol.ZERO: np.ones(grid_points)}
    squares = np.zeros((grid_points,) * ineq.n)
    for term in ineq.terms:
        values = reduce(np.multiply.outer, [factors[s] for s in term.pattern.symbols])
        squares += (float(term.coefficient) * values) ** 2
    return float(np.sqrt(squares.max()))
