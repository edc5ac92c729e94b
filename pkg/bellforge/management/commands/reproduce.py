from django.core.management.base import BaseCommand, CommandError

from bellforge.reproduce import SCOPES, run_reproduction

from ._common import (
    CHECK_FAILED,
    add_out_argument,
    add_seed_argument,
    add_threads_argument,
    seed_from,
    threads_from,
    write_report,
)


class Command(BaseCommand):
    help = 'Run every reproduction check and print a table of reported against computed values'

    def add_arguments(self, parser):
        parser.add_argument('--scope', choices=SCOPES, default='fast',
                            help="'fast' audits fewer seeds and skips the nine-party scans")
        add_seed_argument(parser)
        add_threads_argument(parser)
        add_out_argument(parser)

    def handle(self, *args, **options):
        report = run_reproduction(scope=options['scope'], seed=seed_from(options), threads=threads_from(options))

        self.stdout.write(f"{'check':<26} {'status':<8} {'runtime':>9}  detail")
        for check in report.checks:
            line = f"{check.name:<26} {check.status:<8} {check.runtime:>8.2f}s  {check.detail}"
            if check.status == 'pass':
                self.stdout.write(self.style.SUCCESS(line))
            elif check.passed:
                self.stdout.write(self.style.WARNING(line))
            else:
                self.stdout.write(self.style.ERROR(line))

        write_report(self, options.get('out'), report.to_dict())
        failed = [check.name for check in report.checks if not check.passed]
        if failed:
            raise CommandError(f"failed checks: {', '.join(failed)}", returncode=CHECK_FAILED)
        self.stdout.write(self.style.SUCCESS(f"All {len(report.checks)} checks passed ({report.scope} scope)"))
