from django.core.management.base import BaseCommand, CommandError

from bellforge.builder import drop_extremes
from bellforge.exceptions import BellForgeError
from bellforge.sufficient_condition import (
    condition_indices,
    condition_sweep,
    condition_value,
    frame_for_settings,
)

from ._common import (
    USAGE_ERROR,
    add_inequality_arguments,
    add_out_argument,
    add_seed_argument,
    add_state_arguments,
    add_threads_argument,
    inequality_from,
    seed_from,
    settings_from,
    state_from,
    threads_from,
    write_report,
)


class Command(BaseCommand):
    help = 'Evaluate the sum-of-squares sufficient condition for a state'

    def add_arguments(self, parser):
        add_inequality_arguments(parser)
        add_state_arguments(parser)
        parser.add_argument('--drop-extremes', action='store_true', help='Drop the two full-order extreme tuples')
        parser.add_argument('--settings', default=None, help='Evaluate in the frame matched to these settings')
        parser.add_argument('--frames', type=int, default=0, help='Random local frames to sample')
        add_seed_argument(parser)
        add_threads_argument(parser)
        add_out_argument(parser)

    def handle(self, *args, **options):
        ineq = inequality_from(options)
        state = state_from(options)
        if options['frames'] < 0:
            raise CommandError("--frames must not be negative", returncode=USAGE_ERROR)
        try:
            if options['drop_extremes']:
                ineq = drop_extremes(ineq)
            idxset = condition_indices(ineq)
            document = {'label': ineq.label, 'indices': idxset.render()}
            value = condition_value(state, idxset)
            document['value'] = value
            self.stdout.write(f"Index set ({len(idxset)}): {' '.join(idxset.render())}")
            self.stdout.write(f"Computational frame: {value:.10f}")

            if options['settings']:
                framed = condition_value(state, idxset, frame_for_settings(settings_from(options['settings'])))
                document['settings_frame_value'] = framed
                self.stdout.write(f"Settings frame:      {framed:.10f}")
                value = framed

            if options['frames']:
                sweep = condition_sweep(state, idxset, frames=options['frames'], rng_seed=seed_from(options),
                                        threads=threads_from(options))
                document['sweep'] = {'frames': sweep.frames, 'min': sweep.min_value, 'max': sweep.max_value}
                self.stdout.write(
                    f"Random frames ({sweep.frames}): min {sweep.min_value:.10f}, max {sweep.max_value:.10f}"
                )
        except BellForgeError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)

        if value <= 1:
            self.stdout.write(self.style.SUCCESS("Condition holds: no violation with mirror settings in this frame"))
        else:
            self.stdout.write(self.style.WARNING("Condition fails: this frame gives no guarantee"))
        write_report(self, options.get('out'), document)
