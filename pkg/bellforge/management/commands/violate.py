import logging

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from bellforge import serialization
from bellforge.exceptions import BellForgeError
from bellforge.optimizer import ScanConfig, SeeSawConfig, fixed_state_multistart, scan_symmetric, see_saw
from bellforge.quantum_engine import MixedState, not_mixture

from ._common import (
    USAGE_ERROR,
    add_inequality_arguments,
    add_out_argument,
    add_seed_argument,
    add_state_arguments,
    add_threads_argument,
    inequality_from,
    seed_from,
    state_from,
    threads_from,
    write_report,
)

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Search for quantum violations: symmetric scan, see-saw, or settings at a fixed state'

    def add_arguments(self, parser):
        add_inequality_arguments(parser)
        add_state_arguments(parser)
        parser.add_argument('--not-mixture', action='store_true',
                            help='Use the equal mixture of the state and its NOT image')
        parser.add_argument('--symmetric', action='store_true', help='Scan a common angle for every party')
        parser.add_argument('--restarts', type=int, default=16,
                            help='See-saw restarts, or settings restarts at a fixed state')
        parser.add_argument('--rounds', type=int, default=200, help='Rounds per restart')
        parser.add_argument('--plane', choices=('xz', 'bloch'), default='xz', help='Measurement directions')
        parser.add_argument('--phi', type=float, default=np.pi / 4, help='Initial common angle at a fixed state')
        parser.add_argument('--grid', type=int, default=91, help='Grid points of the symmetric scan')
        add_seed_argument(parser)
        add_threads_argument(parser)
        add_out_argument(parser, flag='--report')

    def handle(self, *args, **options):
        ineq = inequality_from(options)
        state = state_from(options, required=False)
        if options['not_mixture']:
            if state is None:
                raise CommandError("--not-mixture needs --state or --psi2", returncode=USAGE_ERROR)
            state = not_mixture(state)
        if state is not None and options['symmetric']:
            raise CommandError("--symmetric cannot be combined with a fixed state", returncode=USAGE_ERROR)

        seed = seed_from(options)
        document = {'label': ineq.label, 'n': ineq.n, 'bound': serialization.render_fraction(ineq.bound)}
        try:
            if state is not None:
                result = fixed_state_multistart(ineq, state, restarts=options['restarts'], rng_seed=seed,
                                                angle_init=options['phi'], plane=options['plane'],
                                                max_rounds=options['rounds'], threads=threads_from(options))
                mode, value, settings = 'fixed-state', result.value, result.settings
                document['history'] = list(result.history)
            elif options['symmetric']:
                result = scan_symmetric(ineq, ScanConfig(grid_points=options['grid']), rng_seed=seed)
                mode, value, state = 'symmetric', result.value, result.state
                settings = None
                document['phi'] = result.phi
                self.stdout.write(f"Best common angle: phi = {result.phi:.6f}")
            else:
                cfg = SeeSawConfig(
                    restarts=options['restarts'],
                    max_rounds=options['rounds'],
                    rng_seed=seed,
                    plane=options['plane'],
                    threads=threads_from(options),
                    scan=ScanConfig(grid_points=options['grid']),
                )
                result = see_saw(ineq, cfg)
                mode, value, state, settings = 'see-saw', result.value, result.state, result.settings
                document['restart'] = result.restart
                document['converged'] = result.converged
                if not result.converged:
                    self.stdout.write(self.style.WARNING("Best restart stopped at the round budget"))
        except (BellForgeError, ValueError) as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)

        ratio = value / float(ineq.bound)
        document.update({'mode': mode, 'value': value, 'ratio': ratio, 'seed': seed})
        if settings is not None:
            document['settings'] = serialization.settings_to_dict(settings)
        if state is not None and not isinstance(state, MixedState):
            document['state'] = serialization.state_to_dict(state)

        self.stdout.write(f"Inequality: {ineq.label or '(unlabeled)'} (N={ineq.n}, {len(ineq)} terms)")
        self.stdout.write(f"Mode:       {mode}")
        self.stdout.write(f"Value:      {value:.8f}")
        message = f"Violation ratio {ratio:.6f}"
        self.stdout.write(self.style.SUCCESS(message) if ratio > 1 + 1e-9 else self.style.WARNING(message))
        write_report(self, options.get('out'), document)
