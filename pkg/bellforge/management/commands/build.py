import logging

from django.core.management.base import BaseCommand, CommandError

from bellforge import builder, serialization
from bellforge.exceptions import BellForgeError, BudgetExhausted
from bellforge.term_algebra import SignPattern

from ._common import (
    CHECK_FAILED,
    USAGE_ERROR,
    add_inequality_arguments,
    add_out_argument,
    add_seed_argument,
    inequality_from,
    seed_from,
)

logger = logging.getLogger(__name__)


def _positions(text):
    try:
        return [int(p) - 1 for p in text.split(',') if p.strip()]
    except ValueError:
        raise CommandError(f"--positions must be comma-separated party numbers, got {text!r}", returncode=USAGE_ERROR)


def _add_generate_arguments(parser, required):
    parser.add_argument('--n', type=int, required=required, default=None)
    parser.add_argument('--k', type=int, default=1, help='ZERO symbols per generated pattern')
    parser.add_argument('--draws', type=int, default=None, help='Draw budget')
    parser.add_argument('--restarts', type=int, default=64, help='Runs tried before filling coverable strings')
    parser.add_argument('--no-fill', action='store_true', help='Fail instead of filling residual strings')
    parser.add_argument('--drop-extremes', action='store_true', help='Remove the two extreme terms afterwards')
    add_seed_argument(parser)
    add_out_argument(parser)


class Command(BaseCommand):
    help = 'Build an inequality: full seed, pairing reduction, random orbit set or extreme-term removal'

    def add_arguments(self, parser):
        # without a mode, --n and friends select the generate mode
        _add_generate_arguments(parser, required=False)
        sub = parser.add_subparsers(dest='mode')

        seed = sub.add_parser('seed', help='All 2^N full patterns with weight 1/2^N')
        seed.add_argument('--n', type=int, required=True)
        add_out_argument(seed)

        _add_generate_arguments(sub.add_parser('generate', help='Random rotation-closed orbit set'), required=True)

        reduce = sub.add_parser('reduce', help='Pairing reduction onto a ZERO-bearing pattern')
        add_inequality_arguments(reduce)
        reduce.add_argument('--pattern', required=True, help='Resulting pattern, e.g. +++-0')
        reduce.add_argument('--positions', default=None,
                            help='1-based parties to eliminate (default: the ZERO slots of --pattern)')
        reduce.add_argument('--cyclic', action='store_true', help='Also reduce every rotation of the pattern')
        add_out_argument(reduce)

        drop = sub.add_parser('drop-extremes', help='Remove the all-PLUS and all-MINUS terms')
        add_inequality_arguments(drop)
        add_out_argument(drop)

    def handle(self, *args, **options):
        mode = options.get('mode') or ('generate' if options.get('n') is not None else None)
        if mode is None:
            raise CommandError("choose a mode (seed, generate, reduce, drop-extremes) or pass --n", returncode=USAGE_ERROR)
        try:
            if mode == 'seed':
                ineq = builder.wwwzb_seed(options['n'])
            elif mode == 'generate':
                cfg = builder.GeneratorConfig(
                    n=options['n'],
                    k=options['k'],
                    rng_seed=seed_from(options),
                    max_draws=options['draws'],
                    fill_residual=not options['no_fill'],
                    max_restarts=options['restarts'],
                )
                ineq = builder.generate_cp_set(cfg)
                if options['drop_extremes']:
                    ineq = builder.drop_extremes(ineq)
            elif mode == 'reduce':
                ineq = self._reduce(options)
            else:
                ineq = builder.drop_extremes(inequality_from(options))
        except BudgetExhausted as exc:
            self.stdout.write(self.style.WARNING(f"{exc} {exc.diagnostics}"))
            if exc.partial is not None and options.get('out'):
                serialization.write_json(options['out'], serialization.inequality_to_dict(exc.partial))
            raise CommandError(str(exc), returncode=CHECK_FAILED)
        except BellForgeError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)

        if options.get('out'):
            serialization.write_json(options['out'], serialization.inequality_to_dict(ineq))
            self.stdout.write(self.style.SUCCESS(f"Built {ineq.label or 'inequality'} with {len(ineq)} terms"))
        else:
            self.stdout.write(serialization.dumps_inequality(ineq))

    def _reduce(self, options):
        ineq = inequality_from(options)
        result = SignPattern.parse(options['pattern'])
        positions = _positions(options['positions']) if options['positions'] else list(result.zero_positions())
        if options['cyclic']:
            return builder.cyclic_pair_reduce(ineq, result, positions)
        step = builder.ReductionStep.for_result(result, positions)
        return builder.pair_reduce(ineq, step.merged_patterns, positions)
