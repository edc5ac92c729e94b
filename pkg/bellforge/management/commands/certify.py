import logging

from django.core.management.base import BaseCommand, CommandError

from bellforge.exceptions import BellForgeError
from bellforge.lhv_certifier import certify_bound, mirror_check
from bellforge.serialization import render_fraction

from ._common import (
    CHECK_FAILED,
    USAGE_ERROR,
    add_inequality_arguments,
    add_out_argument,
    add_threads_argument,
    inequality_from,
    threads_from,
    write_report,
)

logger = logging.getLogger(__name__)


def _signs(text, terms):
    try:
        signs = tuple(int(s) for s in text.split(','))
    except ValueError:
        raise CommandError("--signs must be comma-separated +1/-1 values", returncode=USAGE_ERROR)
    if len(signs) != terms:
        raise CommandError(f"--signs needs {terms} values, got {len(signs)}", returncode=USAGE_ERROR)
    return signs


class Command(BaseCommand):
    help = 'Certify the local-realistic bound by enumerating every deterministic assignment'

    def add_arguments(self, parser):
        add_inequality_arguments(parser)
        parser.add_argument('--wrapped', action='store_true',
                            help='Sum of per-term moduli instead of the signed expression')
        parser.add_argument('--signs', default=None, help='Comma-separated per-term signs of the signed expression')
        parser.add_argument('--mirror', action='store_true',
                            help='Also require the signed expression to be +bound or -bound everywhere')
        add_threads_argument(parser)
        add_out_argument(parser)

    def handle(self, *args, **options):
        ineq = inequality_from(options)
        signs = _signs(options['signs'], len(ineq)) if options['signs'] else None
        threads = threads_from(options)
        try:
            report = certify_bound(ineq, wrapped=options['wrapped'], signs=signs, threads=threads)
            mirror = mirror_check(ineq, signs=signs, threads=threads) if options['mirror'] else None
        except BellForgeError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)

        witness = report.witnesses['max_abs']
        self.stdout.write(f"Inequality:   {ineq.label or '(unlabeled)'} (N={ineq.n}, {len(ineq)} terms)")
        self.stdout.write(f"Form:         {'wrapped' if report.wrapped else 'signed'}")
        self.stdout.write(f"Assignments:  {report.assignments}")
        self.stdout.write(f"Max |value|:  {render_fraction(report.max_abs)} at {witness.values}")
        self.stdout.write(f"Signed range: [{render_fraction(report.signed_min)}, {render_fraction(report.signed_max)}]")
        self.stdout.write(f"Mirror:       {report.is_mirror} (+{report.plus_count} / -{report.minus_count})")

        document = {
            'label': ineq.label,
            'n': ineq.n,
            'wrapped': report.wrapped,
            'bound': render_fraction(report.bound),
            'max_abs': render_fraction(report.max_abs),
            'signed_min': render_fraction(report.signed_min),
            'signed_max': render_fraction(report.signed_max),
            'is_mirror': report.is_mirror,
            'plus_count': report.plus_count,
            'minus_count': report.minus_count,
            'assignments': report.assignments,
            'witness': [list(pair) for pair in witness.values],
            'holds': report.holds,
        }
        if mirror is not None:
            document['mirror'] = {
                'is_mirror': mirror.is_mirror,
                'plus_count': mirror.plus_count,
                'minus_count': mirror.minus_count,
            }
        write_report(self, options.get('out'), document)

        if not report.holds:
            raise CommandError(
                f"bound {render_fraction(report.bound)} exceeded: {render_fraction(report.max_abs)}",
                returncode=CHECK_FAILED,
            )
        if mirror is not None and not mirror.is_mirror:
            raise CommandError(
                f"not a mirror inequality: +{mirror.plus_count} / -{mirror.minus_count}"
                f" of {mirror.assignments} assignments reach the bound",
                returncode=CHECK_FAILED,
            )
        self.stdout.write(self.style.SUCCESS(f"Bound {render_fraction(report.bound)} holds"))
