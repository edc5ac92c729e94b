from django.core.management.base import BaseCommand, CommandError

from bellforge import catalog, serialization
from bellforge.term_algebra import coverage_status

from ._common import USAGE_ERROR, add_out_argument


class Command(BaseCommand):
    help = 'List the built-in inequalities or print one of them'

    def add_arguments(self, parser):
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument('--list', action='store_true', help='List every catalog label')
        group.add_argument('--show', metavar='LABEL', help='Print one inequality as JSON')
        add_out_argument(parser)

    def handle(self, *args, **options):
        if options['list']:
            for entry in catalog.catalog_entries():
                mass = sum(2 ** pattern.zeros for pattern in {p for p, _ in entry.rows})
                ratio = f", reported ratio {entry.reported_ratio}" if entry.reported_ratio else ''
                self.stdout.write(
                    f"{entry.label:<14} N={entry.n:<2} rows={len(entry.rows):<4}"
                    f" {coverage_status(entry.n, mass):<16} {entry.description}{ratio}"
                )
            return

        try:
            entry = catalog.get_entry(options['show'])
        except KeyError as exc:
            raise CommandError(str(exc.args[0]), returncode=USAGE_ERROR)
        ineq = entry.inequality()
        if entry.duplicates:
            self.stdout.write(self.style.WARNING(
                f"{entry.label}: {len(entry.duplicates)} repeated row(s) dropped: "
                + ', '.join(str(p) for p in entry.duplicates)
            ))
        if options.get('out'):
            serialization.write_json(options['out'], serialization.inequality_to_dict(ineq))
            self.stdout.write(self.style.SUCCESS(f"Wrote {entry.label} to {options['out']}"))
        else:
            self.stdout.write(serialization.dumps_inequality(ineq))
