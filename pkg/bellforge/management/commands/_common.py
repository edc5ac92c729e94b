"""
Shared argument handling for the bellforge management commands.
"""
import logging

from django.conf import settings
from django.core.management.base import CommandError

from bellforge import catalog, serialization
from bellforge.exceptions import OverlapError, ParseError
from bellforge.quantum_engine import psi2_state

logger = logging.getLogger(__name__)

CHECK_FAILED = 1
USAGE_ERROR = 2
PARSE_ERROR = 3


def add_seed_argument(parser):
    parser.add_argument('--seed', type=int, default=None, help='RNG seed (default BELLFORGE_SEED)')


def add_threads_argument(parser):
    parser.add_argument('--threads', type=int, default=None, help='Worker cap (default BELLFORGE_THREADS)')


def add_out_argument(parser, flag='--out'):
    parser.add_argument(flag, dest='out', default=None, help='Write the structured report to this JSON file')


def add_inequality_arguments(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--ineq', help='Inequality JSON file')
    group.add_argument('--catalog', help='Catalog label, e.g. INEQ5B')


def add_state_arguments(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--state', help='State JSON file')
    group.add_argument('--psi2', action='store_true', help='Use the built-in five-qubit state')


def seed_from(options):
    return settings.BELLFORGE_SEED if options.get('seed') is None else options['seed']


def threads_from(options):
    threads = options.get('threads') or settings.BELLFORGE_THREADS
    if threads < 1:
        raise CommandError(f"--threads must be positive, got {threads}", returncode=USAGE_ERROR)
    return threads


def parse_failure(exc, path):
    logger.error(f"Could not parse {path}: {exc}")
    return CommandError(f"{path}: {exc}", returncode=PARSE_ERROR)


def _read(loader, path):
    try:
        return loader(path)
    except (ParseError, OverlapError) as exc:
        raise parse_failure(exc, path)
    except OSError as exc:
        raise CommandError(f"{path}: {exc.strerror}", returncode=PARSE_ERROR)


def inequality_from(options, required=True):
    if options.get('ineq'):
        return _read(serialization.load_inequality, options['ineq'])
    if options.get('catalog'):
        try:
            return catalog.catalog_inequality(options['catalog'])
        except KeyError as exc:
            raise CommandError(str(exc.args[0]), returncode=USAGE_ERROR)
    if required:
        raise CommandError("one of --ineq or --catalog is required", returncode=USAGE_ERROR)
    return None


def rows_from(options):
    """Raw rows (n, rows, bound, label), repeated rows kept."""
    if options.get('ineq'):
        return _read(serialization.load_rows, options['ineq'])
    if options.get('catalog'):
        try:
            entry = catalog.get_entry(options['catalog'])
        except KeyError as exc:
            raise CommandError(str(exc.args[0]), returncode=USAGE_ERROR)
        return entry.n, list(entry.rows), entry.bound, entry.label
    raise CommandError("one of --ineq or --catalog is required", returncode=USAGE_ERROR)


def state_from(options, required=True):
    if options.get('state'):
        return _read(serialization.load_state, options['state'])
    if options.get('psi2'):
        return psi2_state()
    if required:
        raise CommandError("one of --state or --psi2 is required", returncode=USAGE_ERROR)
    return None


def settings_from(path):
    return _read(serialization.load_settings, path)


def write_report(command, path, document):
    if not path:
        return
    serialization.write_json(path, document)
    command.stdout.write(f"Report written to {path}")
