import itertools

from django.core.management.base import BaseCommand, CommandError

from bellforge.exceptions import BellForgeError
from bellforge.quantum_engine import correlation_tensor, not_mixture

from ._common import USAGE_ERROR, add_out_argument, add_state_arguments, state_from, write_report


def _index(text, n):
    if len(text) != n or any(c not in '0123' for c in text):
        raise CommandError(f"--index needs {n} digits from 0-3, got {text!r}", returncode=USAGE_ERROR)
    return tuple(int(c) for c in text)


class Command(BaseCommand):
    help = 'Print correlation-tensor entries of a state'

    def add_arguments(self, parser):
        add_state_arguments(parser)
        parser.add_argument('--index', action='append', default=[], help='Entry such as 1133 (repeatable)')
        parser.add_argument('--full', action='store_true', help='Every full-order entry, indices in {1,2,3}')
        parser.add_argument('--not-mixture', action='store_true',
                            help='Use the equal mixture of the state and its NOT image')
        parser.add_argument('--threshold', type=float, default=0.0, help='Hide entries with |T| at or below this')
        add_out_argument(parser)

    def handle(self, *args, **options):
        state = state_from(options)
        if options['not_mixture']:
            state = not_mixture(state)
        indices = [_index(text, state.n) for text in options['index']]
        if options['full']:
            indices.extend(itertools.product((1, 2, 3), repeat=state.n))
        if not indices:
            raise CommandError("give --index or --full", returncode=USAGE_ERROR)

        entries = {}
        try:
            for index in indices:
                entries[''.join(str(k) for k in index)] = correlation_tensor(state, index)
        except BellForgeError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)

        shown = 0
        for key, value in entries.items():
            if abs(value) > options['threshold'] or not options['full']:
                self.stdout.write(f"T_{key} = {value:+.10f}")
                shown += 1
        largest = max(abs(v) for v in entries.values())
        self.stdout.write(self.style.SUCCESS(f"{len(entries)} entries, {shown} shown, max |T| = {largest:.3e}"))
        write_report(self, options.get('out'), {'n': state.n, 'entries': entries})
