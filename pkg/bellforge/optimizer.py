"""
Violation search: symmetric single-angle scans, per-party coordinate ascent
over measurement directions at a fixed state, and see-saw alternation
between the principal eigenvector and the settings.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings as django_settings

from .exceptions import CeilingExceeded, InvalidSettings
from .quantum_engine import (
    BellOperator,
    SettingSet,
    bell_value,
    max_eigenvalue,
    local_slot_stack,
    party_environments,
    random_state,
)

logger = logging.getLogger(__name__)

GOLDEN = (np.sqrt(5) - 1) / 2
LINE_GRID = 48
PLANES = ('xz', 'bloch')


@dataclass(frozen=True)
class ScanConfig:
    grid_points: int = 91
    refine_iters: int = 60
    tolerance: float = 1e-9
    sign_starts: int = None

    def __post_init__(self):
        if self.grid_points < 3:
            raise ValueError(f"grid_points must be at least 3, got {self.grid_points}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")


@dataclass(frozen=True)
class SeeSawConfig:
    restarts: int = 16
    max_rounds: int = 200
    rng_seed: int = None
    convergence_eps: float = 1e-10
    plane: str = 'xz'
    threads: int = None
    # restart 0 starts from the symmetric optimum, scanned for unless warm_start_phi is given
    warm_start: bool = True
    warm_start_phi: float = None
    scan: ScanConfig = None

    def __post_init__(self):
        if self.rng_seed is None:
            object.__setattr__(self, 'rng_seed', django_settings.BELLFORGE_SEED)
        if self.restarts <= 0 or self.max_rounds <= 0 or self.convergence_eps <= 0:
            raise ValueError("restarts, max_rounds and convergence_eps must be positive")
        if self.plane not in PLANES:
            raise ValueError(f"plane must be one of {PLANES}, got {self.plane!r}")


@dataclass(frozen=True)
class ScanResult:
    phi: float
    value: float
    state: object
    grid: tuple = ()


@dataclass(frozen=True)
class FixedStateResult:
    settings: SettingSet
    value: float
    angles: tuple
    history: tuple = ()
    converged: bool = True


@dataclass(frozen=True)
class SeeSawResult:
    state: object
    settings: SettingSet
    value: float
    restart: int
    converged: bool
    histories: tuple = field(default_factory=tuple)


def settings_from_angles(phis):
    """A_1 = cos(phi) Z + sin(phi) X and A_2 = cos(phi) Z - sin(phi) X per party."""
    phis = [float(phi) for phi in phis]
    if not phis:
        raise InvalidSettings("need one angle per party")
    return SettingSet.from_xz_angles([(phi, -phi) for phi in phis])


def _direction(params):
    if len(params) == 1:
        return SettingSet.xz_direction(params[0])
    polar, azimuth = params
    return np.array([np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar)])


def _settings_from_params(params, plane):
    width = 1 if plane == 'xz' else 2
    return SettingSet(tuple(
        (_direction(p[:width]), _direction(p[width:])) for p in params
    ))


def _symmetric_params(phis, plane):
    if plane == 'xz':
        return [np.array([phi, -phi]) for phi in phis]
    return [np.array([phi, 0.0, -phi, 0.0]) for phi in phis]


def check_ceiling(ineq, value):
    ceiling = float(ineq.algebraic_ceiling())
    if value > ceiling + 1e-9:
        raise CeilingExceeded(f"value {value} exceeds the algebraic ceiling {ceiling} of {ineq.label or 'inequality'}")
    return value


def golden_section(objective, lower, upper, tolerance=1e-9, max_iter=200):
    """Maximize a unimodal function on [lower, upper]; returns (x, f(x))."""
    a, b = lower, upper
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(max_iter):
        if b - a < tolerance:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = objective(d)
    return (c, fc) if fc >= fd else (d, fd)


def _max_value(ineq, phi, cfg, rng_seed, previous=None):
    settings = settings_from_angles([phi] * ineq.n)
    operator = BellOperator(ineq, settings)
    warm = None
    if previous is not None:
        warm = np.where(operator.term_expectations(previous.state) < 0, -1.0, 1.0)
    return max_eigenvalue(ineq, settings, sign_starts=cfg.sign_starts, rng_seed=rng_seed, operator=operator,
                          warm_signs=warm)


def scan_symmetric(ineq, cfg=None, rng_seed=None):
    """
    Maximize the top eigenvalue over a common angle phi in [0, pi/2]: a grid
    pass, then golden-section refinement around the best grid point. Each
    point also starts its sign iteration from the expectation signs of the
    previous point's eigenvector. Ties go to the lowest phi.
    """
    cfg = cfg or ScanConfig()
    rng_seed = django_settings.BELLFORGE_SEED if rng_seed is None else rng_seed
    grid = np.linspace(0, np.pi / 2, cfg.grid_points)
    results = []
    for phi in grid:
        results.append(_max_value(ineq, phi, cfg, rng_seed, results[-1] if results else None))
    values = np.array([result.value for result in results])
    best = int(np.argmax(values))
    phi, value, state = float(grid[best]), float(values[best]), results[best].state

    lower = grid[max(best - 1, 0)]
    upper = grid[min(best + 1, len(grid) - 1)]
    refined = {}

    def objective(x):
        result = _max_value(ineq, x, cfg, rng_seed, results[best])
        refined[x] = result
        return result.value

    x, fx = golden_section(objective, lower, upper, cfg.tolerance, cfg.refine_iters)
    if fx > value + 1e-12:
        phi, value, state = float(x), float(fx), refined[x].state

    check_ceiling(ineq, value)
    logger.info(f"Symmetric scan of {ineq.label or 'inequality'}: {value:.6f} at phi={phi:.6f}")
    return ScanResult(phi=phi, value=value, state=state, grid=tuple(zip(grid.tolist(), values.tolist())))


class _PartyObjective:
    """Wrapped value as a function of one party's direction parameters."""

    def __init__(self, ineq, state, settings, party):
        self.coefficients = np.array([float(term.coefficient) for term in ineq.terms])
        self.environments, self.symbols = party_environments(ineq, state, settings, party)

    def __call__(self, params, plane):
        width = 1 if plane == 'xz' else 2
        stack = local_slot_stack(_direction(params[:width]), _direction(params[width:]), self.symbols)
        expectations = np.einsum('tab,tab->t', stack, self.environments).real
        return float(np.sum(self.coefficients * np.abs(expectations)))


def _line_search(objective, params, coordinate, plane, current, tolerance):
    def value_at(x):
        trial = params.copy()
        trial[coordinate] = x
        return objective(trial, plane)

    grid = np.linspace(0, 2 * np.pi, LINE_GRID, endpoint=False)
    values = [value_at(x) for x in grid]
    best = int(np.argmax(values))
    step = grid[1] - grid[0]
    x, fx = golden_section(value_at, grid[best] - step, grid[best] + step, tolerance)
    if values[best] > fx:
        x, fx = grid[best], values[best]
    if fx > current + 1e-13:
        params = params.copy()
        params[coordinate] = x
        return params, fx
    return params, current


def _settings_pass(ineq, state, params, plane, current, tolerance):
    for party in range(ineq.n):
        settings = _settings_from_params(params, plane)
        objective = _PartyObjective(ineq, state, settings, party)
        for coordinate in range(len(params[party])):
            params[party], current = _line_search(objective, params[party], coordinate, plane, current, tolerance)
    return params, current


def _initial_params(ineq, angle_init, plane):
    if np.isscalar(angle_init):
        return _symmetric_params([float(angle_init)] * ineq.n, plane)
    params = [np.array(p, dtype=float) for p in angle_init]
    width = 2 if plane == 'xz' else 4
    if len(params) != ineq.n or any(p.shape != (width,) for p in params):
        raise InvalidSettings(f"need {ineq.n} parameter vectors of length {width} for plane {plane!r}")
    return params


def fixed_state_optimize(ineq, state, angle_init=np.pi / 4, plane='xz', max_rounds=200, tolerance=1e-9,
                         convergence_eps=1e-10):
    """
    Coordinate ascent over each party's direction angles at a fixed state.

    `angle_init` is either a common symmetric angle or one parameter vector
    per party: (theta_1, theta_2) in the XZ plane, (polar_1, azimuth_1,
    polar_2, azimuth_2) on the full Bloch sphere.
    """
    if plane not in PLANES:
        raise ValueError(f"plane must be one of {PLANES}, got {plane!r}")
    params = _initial_params(ineq, angle_init, plane)
    current = bell_value(ineq, state, _settings_from_params(params, plane))
    history = [current]
    converged = False
    for _ in range(max_rounds):
        params, value = _settings_pass(ineq, state, params, plane, current, tolerance)
        history.append(value)
        improved = value - current
        current = value
        if improved < convergence_eps:
            converged = True
            break
    check_ceiling(ineq, current)
    logger.info(f"Fixed-state optimum of {ineq.label or 'inequality'}: {current:.6f} after {len(history) - 1} rounds")
    return FixedStateResult(
        settings=_settings_from_params(params, plane),
        value=current,
        angles=tuple(tuple(p.tolist()) for p in params),
        history=tuple(history),
        converged=converged,
    )


def fixed_state_multistart(ineq, state, restarts=8, rng_seed=None, angle_init=np.pi / 4, plane='xz',
                           max_rounds=200, threads=None):
    """
    Best of `restarts` coordinate ascents at a fixed state. Restart 0 starts
    from `angle_init`, the others from angles uniform on [0, pi] drawn from
    jumped Philox streams. Ties go to the lowest restart.
    """
    if restarts <= 0:
        raise ValueError(f"restarts must be positive, got {restarts}")
    rng_seed = django_settings.BELLFORGE_SEED if rng_seed is None else rng_seed
    threads = threads or django_settings.BELLFORGE_THREADS
    width = 2 if plane == 'xz' else 4

    def run(restart):
        init = angle_init
        if restart:
            rng = np.random.Generator(np.random.Philox(rng_seed).jumped(restart))
            init = [rng.uniform(0, np.pi, size=width) for _ in range(ineq.n)]
        return fixed_state_optimize(ineq, state, angle_init=init, plane=plane, max_rounds=max_rounds)

    if threads <= 1 or restarts == 1:
        results = [run(r) for r in range(restarts)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(restarts)))
    best = 0
    for index, result in enumerate(results):
        if result.value > results[best].value:
            best = index
    return results[best]


def _symmetric_start(ineq, cfg):
    if not cfg.warm_start:
        return None
    if cfg.warm_start_phi is None:
        scan = scan_symmetric(ineq, cfg.scan, rng_seed=cfg.rng_seed)
        return scan.phi, scan.state
    settings = settings_from_angles([cfg.warm_start_phi] * ineq.n)
    return cfg.warm_start_phi, max_eigenvalue(ineq, settings, rng_seed=cfg.rng_seed).state


def _restart(ineq, cfg, restart, warm=None):
    rng = np.random.Generator(np.random.Philox(cfg.rng_seed).jumped(restart))
    width = 2 if cfg.plane == 'xz' else 4
    if restart == 0 and warm is not None:
        params = _symmetric_params([warm[0]] * ineq.n, cfg.plane)
        state = warm[1]
    else:
        params = [rng.uniform(0, np.pi, size=width) for _ in range(ineq.n)]
        state = random_state(ineq.n, rng)

    current = bell_value(ineq, state, _settings_from_params(params, cfg.plane))
    history = [current]
    converged = False
    for _ in range(cfg.max_rounds):
        params, settings_value = _settings_pass(ineq, state, params, cfg.plane, current, 1e-9)
        settings = _settings_from_params(params, cfg.plane)
        operator = BellOperator(ineq, settings)
        signs = np.where(operator.term_expectations(state) < 0, -1.0, 1.0)
        result = max_eigenvalue(ineq, settings, rng_seed=cfg.rng_seed, operator=operator, initial_signs=signs)
        value = settings_value
        if result.value >= settings_value:
            state, value = result.state, result.value
        history.append(value)
        logger.debug(f"see-saw restart {restart}: {value:.10f}")
        improved = value - current
        current = value
        if improved < cfg.convergence_eps:
            converged = True
            break
    return state, _settings_from_params(params, cfg.plane), current, tuple(history), converged


def see_saw(ineq, cfg=None):
    """
    Best wrapped value over independent restarts, each alternating a
    settings step (per-party line search at fixed state) with a state step
    (principal eigenvector at fixed settings). Values never decrease within
    a restart, so with a warm start the result is at least the symmetric
    optimum.
    """
    cfg = cfg or SeeSawConfig()
    threads = cfg.threads or django_settings.BELLFORGE_THREADS
    warm = _symmetric_start(ineq, cfg)
    restarts = range(cfg.restarts)
    if threads <= 1 or cfg.restarts == 1:
        outcomes = [_restart(ineq, cfg, r, warm) for r in restarts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda r: _restart(ineq, cfg, r, warm), restarts))

    best = 0
    for index, outcome in enumerate(outcomes):
        if outcome[2] > outcomes[best][2]:
            best = index
    state, settings, value, _, converged = outcomes[best]
    check_ceiling(ineq, value)
    if not converged:
        logger.warning(f"See-saw on {ineq.label or 'inequality'}: best restart hit the round budget")
    logger.info(f"See-saw on {ineq.label or 'inequality'}: {value:.6f} (restart {best} of {cfg.restarts})")
    return SeeSawResult(
        state=state,
        settings=settings,
        value=value,
        restart=best,
        converged=converged,
        histories=tuple(outcome[3] for outcome in outcomes),
    )

