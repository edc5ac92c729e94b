import json

from django.core.management.base import BaseCommand, CommandError

from bellforge.lint import lint_rows

from ._common import CHECK_FAILED, add_inequality_arguments, add_out_argument, rows_from, write_report


class Command(BaseCommand):
    help = 'Audit an inequality listing: mass, disjointness, repeated rows, orbit closure, mirror status'

    def add_arguments(self, parser):
        add_inequality_arguments(parser)
        parser.add_argument('--no-mirror', action='store_true', help='Skip the exhaustive mirror check')
        parser.add_argument('--json', action='store_true', help='Print the report as JSON')
        add_out_argument(parser)

    def handle(self, *args, **options):
        n, rows, bound, label = rows_from(options)
        report = lint_rows(n, rows, label=label, bound=bound, check_mirror=not options['no_mirror'])
        document = report.to_dict()

        if options['json']:
            self.stdout.write(json.dumps(document, indent=2))
        else:
            self.stdout.write(
                f"Inequality:  {label or '(unlabeled)'} (N={n}, {report.rows} rows, {report.terms} distinct)"
            )
            self.stdout.write(f"Mass:        {report.mass} / {report.expected_mass} ({report.status})")
            self.stdout.write(f"Disjoint:    {report.disjoint}")
            self.stdout.write(f"Mirror:      {'not checked' if report.mirror is None else report.mirror}")
            if report.duplicates:
                self.stdout.write(self.style.WARNING(
                    f"Repeated rows: {', '.join(str(p) for p in report.duplicates)}"
                ))
            if report.overlaps:
                self.stdout.write(self.style.WARNING(f"Overlapping pairs: {len(report.overlaps)}"))
                for first, second, codes in report.overlaps:
                    self.stdout.write(f"  {first} / {second}: {len(codes)} shared string(s)")
            if report.open_orbits:
                self.stdout.write(self.style.WARNING(
                    f"Not rotation-closed: {', '.join(str(p) for p in report.open_orbits)}"
                ))
            if report.missing:
                self.stdout.write(self.style.WARNING(f"Missing strings ({len(report.missing)}):"))
                for pattern in report.missing:
                    self.stdout.write(f"  {pattern}")
            for note in report.notes:
                self.stdout.write(note)

        write_report(self, options.get('out'), document)

        if not report.ok:
            raise CommandError(f"{label or 'inequality'} is not complete and disjoint", returncode=CHECK_FAILED)
        self.stdout.write(self.style.SUCCESS(f"{label or 'inequality'} is complete and disjoint"))
