"""Run the ``prunetree`` command line through Django.

Usage:

    ./manage.py prunetree sample-gw --lambda 1 --n 10

        Sample ten GW(1) trees and print them as JSON, one per line.

    ./manage.py prunetree verify --suite sink --n 20000

        Run the random sink checks with the seed and worker count from
        the PRUNETREE_* settings.

All subcommands and flags of the ``prunetree`` script are accepted.
"""

import argparse
import logging
import sys
from os import path

from django.core.management.base import BaseCommand, CommandError

from prunetree.env import get_env
from prunetree.script import VERBOSITY, GenericArgparseImplementation


class Command(BaseCommand):
    help = 'Prune trees and run ballistic annihilation.'
    requires_system_checks = []

    def add_arguments(self, parser):
        # this collects the unrecognized arguments to pass through
        parser.add_argument('args', nargs=argparse.REMAINDER)

    def handle(self, *args, **options):
        log = logging.getLogger('prunetree')
        log.setLevel(VERBOSITY[min(int(options.get('verbosity', 1)), 2)])
        if not log.handlers:
            log.addHandler(logging.StreamHandler())

        prog = "%s prunetree" % path.basename(sys.argv[0])
        impl = GenericArgparseImplementation(
            env=get_env(), log=log, prog=prog, stdout=self.stdout,
            stderr=self.stderr)
        retval = impl.run_with_argv(list(args))
        if retval != 0:
            raise CommandError('The prunetree script exited with a '
                               'non-zero exit code (%d).' % retval,
                               returncode=retval)
