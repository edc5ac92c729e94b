"""
Dense N-qubit states, correlation tensors and Bell operators.

Basis order puts party 1 on the most significant qubit. Density matrices are
never built: a mixed state is a convex list of pure states and every
expectation value is distributed over its components. Bell operators are
applied term by term through local 2x2 actions on the reshaped state vector;
a dense matrix is only formed for N <= BELLFORGE_DENSE_MAX_N.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np
from django.conf import settings as django_settings
from scipy import sparse
from scipy.linalg import expm
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh
from scipy.spatial.transform import Rotation

from .exceptions import ConvergenceFailure, DimensionMismatch, InvalidSettings, InvalidState
from .term_algebra import Symbol, cyclic_orbit

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
DIRECTION_TOLERANCE = 1e-12
SPARSE_MAX_NNZ = 20_000_000

IDENTITY = np.eye(2, dtype=complex)
PAULI = (
    IDENTITY,
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

PSI2_COEFFICIENTS = {
    'a': 0.462854, 'b': 0.161096, 'c': 0.19409, 'd': 0.181191,
    'e': 0.220891, 'f': 0.107669, 'g': 0.039699,
}

PSI2_COMPONENTS = (
    ('a', 1, ['00000']),
    ('b', 1, ['00011', '00110', '01100', '11000', '10001']),
    ('c', 1, ['00101', '01010', '10100', '01001', '10010']),
    ('d', 1, ['00111', '01110', '11100', '11001', '10011']),
    ('e', 1, ['01011', '10110', '11010', '10101']),
    ('e', -1, ['01101']),
    ('f', 1, ['01111', '10111', '11011', '11101', '11110']),
    ('g', 1, ['11111']),
)


def _qubit_count(dimension):
    n = int(dimension).bit_length() - 1
    if n < 1 or 2 ** n != dimension:
        raise DimensionMismatch(f"state dimension {dimension} is not a power of two")
    return n


class PureState:
    """
    Normalized amplitude vector over the 2^N computational basis states.
    """

    def __init__(self, amplitudes, normalize=False):
        amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
        self.n = _qubit_count(len(amplitudes))
        norm = np.linalg.norm(amplitudes)
        if normalize:
            if norm == 0:
                raise InvalidState("cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        elif abs(norm ** 2 - 1) > NORM_TOLERANCE:
            raise InvalidState(f"squared norm {norm ** 2:.12f} differs from 1")
        amplitudes.setflags(write=False)
        self.amplitudes = amplitudes

    @property
    def components(self):
        return ((1.0, self),)

    def tensor(self):
        return self.amplitudes.reshape((2,) * self.n)

    def __repr__(self):
        return f"PureState(n={self.n})"


class MixedState:
    """
    Convex combination of pure states.
    """

    def __init__(self, components):
        components = tuple((float(p), state) for p, state in components)
        if not components:
            raise InvalidState("a mixture needs at least one component")
        if any(p <= 0 for p, _ in components):
            raise InvalidState("mixture probabilities must be positive")
        total = sum(p for p, _ in components)
        if abs(total - 1) > NORM_TOLERANCE:
            raise InvalidState(f"mixture probabilities sum to {total}")
        sizes = {state.n for _, state in components}
        if len(sizes) != 1:
            raise DimensionMismatch(f"mixture components disagree on N: {sorted(sizes)}")
        self.n = sizes.pop()
        self.components = components

    def __repr__(self):
        return f"MixedState(n={self.n}, components={len(self.components)})"


class SettingSet:
    """
    Per-party pair of unit measurement directions (Bloch vectors).
    """

    def __init__(self, directions):
        checked = []
        for j, pair in enumerate(directions):
            if len(pair) != 2:
                raise InvalidSettings(f"party {j} needs exactly two directions")
            vectors = []
            for vector in pair:
                vector = np.array(vector, dtype=float).reshape(-1)
                if vector.shape != (3,):
                    raise InvalidSettings(f"party {j}: direction must have 3 components")
                if abs(np.linalg.norm(vector) - 1) > DIRECTION_TOLERANCE:
                    raise InvalidSettings(f"party {j}: direction {vector} is not a unit vector")
                vector.setflags(write=False)
                vectors.append(vector)
            checked.append(tuple(vectors))
        if not checked:
            raise InvalidSettings("settings need at least one party")
        self.directions = tuple(checked)

    @property
    def n(self):
        return len(self.directions)

    @staticmethod
    def xz_direction(theta):
        """Unit vector in the XZ plane at angle `theta` from the z axis."""
        return np.array([np.sin(theta), 0.0, np.cos(theta)])

    @classmethod
    def from_xz_angles(cls, angle_pairs):
        return cls(tuple((cls.xz_direction(t1), cls.xz_direction(t2)) for t1, t2 in angle_pairs))

    def observables(self, party):
        first, second = self.directions[party]
        return bloch_operator(first), bloch_operator(second)

    def slot_operators(self, party):
        """Half-sum, half-difference and identity operators for one party."""
        a1, a2 = self.observables(party)
        return {
            Symbol.PLUS: (a1 + a2) / 2,
            Symbol.MINUS: (a1 - a2) / 2,
            Symbol.ZERO: IDENTITY,
        }

    def rotated(self, rotations):
        return SettingSet(tuple(
            (rotation @ first, rotation @ second)
            for rotation, (first, second) in zip(rotations, self.directions)
        ))

    def __repr__(self):
        return f"SettingSet(n={self.n})"


def bloch_operator(vector):
    return vector[0] * PAULI[1] + vector[1] * PAULI[2] + vector[2] * PAULI[3]


def qubit_unitary(rotation):
    """SU(2) element U with U (v.sigma) U^dagger = (R v).sigma."""
    rotvec = Rotation.from_matrix(rotation).as_rotvec()
    return expm(-0.5j * bloch_operator(rotvec))


def apply_local(tensor, operator, party):
    moved = np.tensordot(operator, tensor, axes=(1, party))
    return np.moveaxis(moved, 0, party)


def apply_local_unitaries(state, unitaries):
    if len(unitaries) != state.n:
        raise DimensionMismatch(f"need {state.n} local unitaries, got {len(unitaries)}")
    if isinstance(state, MixedState):
        return MixedState((p, apply_local_unitaries(pure, unitaries)) for p, pure in state.components)
    tensor = state.tensor()
    for party, unitary in enumerate(unitaries):
        tensor = apply_local(tensor, unitary, party)
    return PureState(tensor.reshape(-1), normalize=True)


def basis_state(bits):
    n = len(bits)
    amplitudes = np.zeros(2 ** n, dtype=complex)
    amplitudes[int(bits, 2)] = 1
    return PureState(amplitudes)


def ghz_state(n):
    amplitudes = np.zeros(2 ** n, dtype=complex)
    amplitudes[0] = amplitudes[-1] = 1 / np.sqrt(2)
    return PureState(amplitudes)


def singlet_state():
    return PureState(np.array([0, 1, -1, 0]) / np.sqrt(2))


def random_state(n, rng):
    return PureState(rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n), normalize=True)


def psi2_amplitudes():
    """The printed five-qubit amplitudes before renormalization."""
    amplitudes = np.zeros(32, dtype=complex)
    for name, sign, strings in PSI2_COMPONENTS:
        for bits in strings:
            amplitudes[int(bits, 2)] = sign * PSI2_COEFFICIENTS[name]
    return amplitudes


def psi2_state():
    amplitudes = psi2_amplitudes()
    logger.debug(f"psi2 printed squared norm: {np.vdot(amplitudes, amplitudes).real:.8f}")
    return PureState(amplitudes, normalize=True)


def _check_dimensions(ineq, state=None, settings=None):
    if settings is not None and settings.n != ineq.n:
        raise DimensionMismatch(f"settings have {settings.n} parties, inequality has {ineq.n}")
    if state is not None and state.n != ineq.n:
        raise DimensionMismatch(f"state has {state.n} qubits, inequality has {ineq.n}")
    if ineq.n > django_settings.BELLFORGE_MAX_QUBITS:
        raise DimensionMismatch(f"N={ineq.n} is above the qubit ceiling {django_settings.BELLFORGE_MAX_QUBITS}")


def _apply_pauli_string(tensor, index):
    for party, k in enumerate(index):
        if k:
            tensor = apply_local(tensor, PAULI[k], party)
    return tensor


def correlation_tensor(state, index):
    """T_{k_1..k_N} = Tr[rho sigma_{k_1} x ... x sigma_{k_N}], sigma_0 the identity."""
    index = tuple(int(k) for k in index)
    if len(index) != state.n or any(k not in (0, 1, 2, 3) for k in index):
        raise DimensionMismatch(f"index {index} does not fit a {state.n}-qubit state")
    value = 0.0
    for p, pure in state.components:
        tensor = pure.tensor()
        value += p * np.vdot(tensor, _apply_pauli_string(tensor, index)).real
    return float(value)


def correlation_entries(state, indices):
    return {tuple(index): correlation_tensor(state, index) for index in indices}


def not_map(state):
    """
    Flip every Bloch vector: sigma_y on each qubit composed with complex
    conjugation. Each tensor entry picks up (-1)^(number of non-zero indices).
    """
    if isinstance(state, MixedState):
        return MixedState((p, not_map(pure)) for p, pure in state.components)
    tensor = np.conj(state.tensor())
    for party in range(state.n):
        tensor = apply_local(tensor, PAULI[2], party)
    return PureState(tensor.reshape(-1), normalize=True)


def not_mixture(state):
    """Equal mixture of a pure state and its NOT image."""
    return MixedState(((0.5, state), (0.5, not_map(state))))


class BellOperator:
    """
    Signed Bell operator sum_t s_t c_t prod_j (slot operator of party j)
    for one inequality and one settings set.
    """

    def __init__(self, ineq, settings):
        _check_dimensions(ineq, settings=settings)
        self.ineq = ineq
        self.n = ineq.n
        self.dimension = 2 ** ineq.n
        self.coefficients = np.array([float(term.coefficient) for term in ineq.terms])
        slots = [settings.slot_operators(party) for party in range(ineq.n)]
        self.term_factors = [
            [(party, slots[party][symbol]) for party, symbol in enumerate(term.pattern.symbols)
             if symbol is not Symbol.ZERO]
            for term in ineq.terms
        ]
        self._dense_terms = None
        self._sparse_terms = None
        norms = [
            reduce(lambda acc, factor: acc * np.linalg.norm(factor[1], 2), factors, 1.0)
            for factors in self.term_factors
        ]
        self.norm_bound = float(np.sum(np.abs(self.coefficients) * norms))

    @property
    def dense_allowed(self):
        return self.n <= django_settings.BELLFORGE_DENSE_MAX_N

    def apply_term(self, t, tensor):
        for party, operator in self.term_factors[t]:
            tensor = apply_local(tensor, operator, party)
        return tensor

    def apply(self, signs, vector):
        vector = np.asarray(vector, dtype=complex)
        if vector.shape != (self.dimension,):
            raise DimensionMismatch(f"vector has shape {vector.shape}, expected ({self.dimension},)")
        tensor = vector.reshape((2,) * self.n)
        result = np.zeros_like(tensor)
        # fixed term order keeps the floating-point sum deterministic
        for t, (sign, coefficient) in enumerate(zip(signs, self.coefficients)):
            result += sign * coefficient * self.apply_term(t, tensor)
        return result.reshape(-1)

    def term_expectations(self, state):
        values = np.zeros(len(self.term_factors))
        for p, pure in state.components:
            tensor = pure.tensor()
            for t in range(len(self.term_factors)):
                values[t] += p * np.vdot(tensor, self.apply_term(t, tensor)).real
        return values

    def dense_terms(self):
        if not self.dense_allowed:
            raise DimensionMismatch(f"dense operators are capped at N={django_settings.BELLFORGE_DENSE_MAX_N}")
        if self._dense_terms is None:
            stack = []
            for factors in self.term_factors:
                local = dict(factors)
                stack.append(reduce(np.kron, [local.get(party, IDENTITY) for party in range(self.n)]))
            self._dense_terms = np.array(stack)
        return self._dense_terms

    def dense(self, signs):
        weights = np.asarray(signs, dtype=float) * self.coefficients
        return np.tensordot(weights, self.dense_terms(), axes=(0, 0))

    def _local_factors(self, t):
        local = dict(self.term_factors[t])
        return [local.get(party, IDENTITY) for party in range(self.n)]

    @cached_property
    def sparse_allowed(self):
        nnz = sum(
            reduce(lambda acc, m: acc * int(np.count_nonzero(np.abs(m) > 1e-15)), self._local_factors(t), 1)
            for t in range(len(self.term_factors))
        )
        return nnz <= SPARSE_MAX_NNZ

    def sparse(self, signs):
        if self._sparse_terms is None:
            self._sparse_terms = [
                reduce(
                    lambda acc, m: sparse.kron(acc, m, format='csr'),
                    [sparse.csr_matrix(np.where(np.abs(m) > 1e-15, m, 0)) for m in self._local_factors(t)],
                )
                for t in range(len(self.term_factors))
            ]
        weights = np.asarray(signs, dtype=float) * self.coefficients
        total = sparse.csr_matrix((self.dimension, self.dimension), dtype=complex)
        for weight, matrix in zip(weights, self._sparse_terms):
            total = total + weight * matrix
        return total

    def linear_operator(self, signs):
        signs = tuple(signs)
        return LinearOperator(
            (self.dimension, self.dimension),
            matvec=lambda v: self.apply(signs, np.ravel(v)),
            dtype=complex,
        )


def term_expectations(ineq, state, settings):
    _check_dimensions(ineq, state, settings)
    return BellOperator(ineq, settings).term_expectations(state)


def bell_value(ineq, state, settings):
    """Wrapped value sum_t c_t |<prod of half-brackets>| of a state."""
    operator = BellOperator(ineq, settings)
    _check_dimensions(ineq, state, settings)
    return float(np.sum(operator.coefficients * np.abs(operator.term_expectations(state))))


def bell_operator_apply(ineq, settings, sign_choices, vector):
    """One resolution of the moduli (a sign per term) applied to `vector`."""
    if len(sign_choices) != len(ineq):
        raise DimensionMismatch(f"need {len(ineq)} signs, got {len(sign_choices)}")
    return BellOperator(ineq, settings).apply(sign_choices, vector)


@dataclass(frozen=True)
class EigenResult:
    value: float
    state: PureState
    signs: tuple
    eigenvalue: float
    sign_rounds: int


def _start_vector(dimension, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    vector = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
    return vector / np.linalg.norm(vector)


def power_eigenpair(operator, signs, tolerance=1e-10, max_iter=100000, seed=0):
    """
    Largest eigenpair by power iteration on H + shift, the shift being a
    bound on the operator norm so that the top eigenvalue dominates.
    """
    shift = operator.norm_bound
    vector = _start_vector(operator.dimension, seed)
    previous = None
    for iteration in range(max_iter):
        image = operator.apply(signs, vector)
        rayleigh = float(np.vdot(vector, image).real)
        if previous is not None and abs(rayleigh - previous) < tolerance:
            return rayleigh, vector
        previous = rayleigh
        vector = image + shift * vector
        vector /= np.linalg.norm(vector)
    raise ConvergenceFailure(f"power iteration did not converge in {max_iter} iterations")


def top_eigenpair(operator, signs, method='auto', tolerance=1e-10, max_iter=100000, seed=0):
    if method == 'auto':
        method = 'dense' if operator.dense_allowed else 'lanczos'
    if method == 'dense':
        values, vectors = np.linalg.eigh(operator.dense(signs))
        return float(values[-1]), vectors[:, -1]
    if method == 'power':
        return power_eigenpair(operator, signs, tolerance, max_iter, seed)
    matrix = operator.sparse(signs) if operator.sparse_allowed else operator.linear_operator(signs)
    try:
        values, vectors = eigsh(
            matrix, k=1, which='LA',
            v0=_start_vector(operator.dimension, seed), tol=tolerance, maxiter=max_iter,
        )
    except ArpackNoConvergence as exc:
        raise ConvergenceFailure(f"Lanczos iteration did not converge: {exc}") from exc
    return float(values[0]), vectors[:, 0]


def _resolve(operator, signs, method, tolerance, max_iter, seed):
    eigenvalue, vector = top_eigenpair(operator, signs, method, tolerance, max_iter, seed)
    state = PureState(vector, normalize=True)
    expectations = operator.term_expectations(state)
    value = float(np.sum(operator.coefficients * np.abs(expectations)))
    return eigenvalue, state, expectations, value


def _sign_vectors(terms):
    for code in range(2 ** terms):
        yield np.array([-1.0 if code >> t & 1 else 1.0 for t in range(terms)])


def orbit_labels(ineq):
    """Index of the cyclic orbit of every term, in term order."""
    index = {}
    labels = []
    for term in ineq.terms:
        key = min(cyclic_orbit(term.pattern), key=lambda p: p.sort_key())
        labels.append(index.setdefault(key, len(index)))
    return np.array(labels), len(index)


def _orbit_sign_vectors(ineq):
    labels, orbits = orbit_labels(ineq)
    if orbits > django_settings.BELLFORGE_SIGN_EXHAUSTIVE_TERMS:
        return []
    return [per_orbit[labels] for per_orbit in _sign_vectors(orbits)]


def _sign_starts(ineq, sign_starts, rng_seed, initial_signs, warm_signs):
    terms = len(ineq)
    for given, name in ((initial_signs, 'initial'), (warm_signs, 'warm')):
        if given is not None and len(given) != terms:
            raise DimensionMismatch(f"need {terms} {name} signs, got {len(given)}")
    if initial_signs is not None:
        return [np.asarray(initial_signs, dtype=float)]
    starts = [] if warm_signs is None else [np.asarray(warm_signs, dtype=float)]
    if terms <= django_settings.BELLFORGE_SIGN_EXHAUSTIVE_TERMS:
        return starts + list(_sign_vectors(terms))
    sign_starts = django_settings.BELLFORGE_SIGN_STARTS if sign_starts is None else sign_starts
    rng = np.random.Generator(np.random.Philox(rng_seed))
    starts += _orbit_sign_vectors(ineq) or [np.ones(terms)]
    return starts + [rng.choice((-1.0, 1.0), size=terms) for _ in range(sign_starts)]


def max_eigenvalue(ineq, settings, sign_starts=None, rng_seed=0, method='auto', tolerance=1e-10,
                   max_iter=100000, operator=None, initial_signs=None, warm_signs=None):
    """
    Largest wrapped value reachable by any state at fixed settings.

    The moduli are resolved by alternating the top eigenpair of the signed
    operator with re-signing every term by the sign of its expectation in
    that eigenvector. Iteration starts from `initial_signs` alone when given.
    Otherwise small term counts start from every sign vector; larger ones
    start from `warm_signs`, every sign vector that is constant on cyclic
    orbits (when the orbit count allows) and `sign_starts` random vectors.
    If the iteration cycles, every sign vector is tried when the term count
    allows.
    """
    operator = operator or BellOperator(ineq, settings)
    terms = len(ineq)
    starts = _sign_starts(ineq, sign_starts, rng_seed, initial_signs, warm_signs)

    best = None
    cycled = False
    rounds = 0
    seen_starts = set()
    for start in starts:
        if tuple(start) in seen_starts:
            continue
        seen_starts.add(tuple(start))
        signs = start
        visited = set()
        while True:
            rounds += 1
            eigenvalue, state, expectations, value = _resolve(operator, signs, method, tolerance, max_iter, rng_seed)
            if best is None or value > best.value + 1e-12:
                best = EigenResult(value, state, tuple(int(s) for s in signs), eigenvalue, rounds)
            resigned = np.where(expectations > 1e-12, 1.0, np.where(expectations < -1e-12, -1.0, signs))
            if np.array_equal(resigned, signs):
                break
            if tuple(resigned) in visited:
                cycled = True
                break
            visited.add(tuple(signs))
            signs = resigned

    exhausted = initial_signs is None and terms <= django_settings.BELLFORGE_SIGN_EXHAUSTIVE_TERMS
    if cycled and not exhausted and terms <= django_settings.BELLFORGE_SIGN_ENUM_MAX_TERMS:
        logger.warning(f"Sign iteration cycled for {ineq.label or 'inequality'}; enumerating {2 ** terms} sign vectors")
        for signs in _sign_vectors(terms):
            eigenvalue, state, _, value = _resolve(operator, signs, method, tolerance, max_iter, rng_seed)
            if value > best.value + 1e-12:
                best = EigenResult(value, state, tuple(int(s) for s in signs), eigenvalue, rounds)

    logger.debug(f"max eigenvalue of {ineq.label or 'inequality'}: {best.value:.8f} after {rounds} sign rounds")
    return best


def party_environments(ineq, state, settings, party):
    """
    Per-term 2x2 environments G_t of one party at fixed state and fixed
    settings of the other parties: <O_t> = sum_ab M[a, b] G_t[a, b], with M
    the party's slot operator in term t.
    """
    _check_dimensions(ineq, state, settings)
    slots = [settings.slot_operators(j) for j in range(ineq.n)]
    environments = np.zeros((len(ineq), 2, 2), dtype=complex)
    for p, pure in state.components:
        tensor = pure.tensor()
        bra = np.moveaxis(tensor, party, 0).reshape(2, -1).conj()
        for t, term in enumerate(ineq.terms):
            image = tensor
            for j, symbol in enumerate(term.pattern.symbols):
                if j != party and symbol is not Symbol.ZERO:
                    image = apply_local(image, slots[j][symbol], j)
            ket = np.moveaxis(image, party, 0).reshape(2, -1)
            environments[t] += p * (bra @ ket.T)
    return environments, tuple(term.pattern.symbols[party] for term in ineq.terms)


def local_slot_stack(first, second, symbols):
    a1, a2 = bloch_operator(first), bloch_operator(second)
    table = {Symbol.PLUS: (a1 + a2) / 2, Symbol.MINUS: (a1 - a2) / 2, Symbol.ZERO: IDENTITY}
    return np.array([table[symbol] for symbol in symbols])
