"""Shared plumbing of the simulation commands.

A command reads an optional JSON run config, lays its own flags over it
(command line wins), validates the merged document once with
:class:`~competition.serializers.RunConfigSerializer` and maps failures to
exit codes: 1 for an invalid config, 2 for an error while running, 3 for a
failed verification.
"""

import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from competition.exceptions import CompetitionError
from competition.exports import clean
from competition.serializers import RunConfigSerializer

logger = logging.getLogger(__name__)

EXIT_INVALID = 1
EXIT_RUNTIME = 2
EXIT_VERIFICATION = 3

# command-line dest -> run config key
PLAIN_OPTIONS = (
    'seed', 'n', 'lambda1', 'lambda2', 'replicas', 'out', 'epsilon', 'nu', 'workers',
    'thinning', 'max_attempts', 'a1', 'a2', 't_end', 't_sample',
)
FLAG_OPTIONS = ('simple', 'fixed_sequence')


def parse_int_list(text):
    """``"2,2,3,3"`` -> ``[2, 2, 3, 3]``; exits with status 1 on bad input."""
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise CommandError(f"Expected comma-separated integers, got {text!r}", returncode=EXIT_INVALID)


def parse_pmf(text):
    """``"2:0.5,3:0.5"`` -> ``{"2": 0.5, "3": 0.5}``."""
    pmf = {}
    for part in text.split(','):
        try:
            key, mass = part.split(':')
            pmf[str(int(key))] = float(mass)
        except ValueError:
            raise CommandError(f"Malformed pmf entry {part!r}; use value:mass", returncode=EXIT_INVALID)
    return pmf


def parse_seeds(text):
    """``"0,1"`` or ``"0+4,1"`` (several vertices of one type joined by ``+``)."""
    if text == 'uniform':
        return text
    seeds = []
    for part in text.split(','):
        vertices = parse_int_list(part.replace('+', ','))
        seeds.append(vertices[0] if len(vertices) == 1 else vertices)
    return seeds


class ExperimentCommand(BaseCommand):
    """Base class for commands driven by a run config.

    Subclasses implement :meth:`run` and may extend :meth:`add_arguments`.
    """

    command_name = None

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON run config; flags override its values')
        parser.add_argument('--seed', type=int, help='Master seed (required here or in the config)')
        parser.add_argument('--n', type=int, help='Number of vertices for an IID degree source')
        parser.add_argument('--degrees', help='Explicit degree list, e.g. 2,2,3,3')
        parser.add_argument('--degree-file', help='Degree file, one degree per line')
        parser.add_argument('--pmf', help='IID degree law, e.g. 2:0.5,3:0.5')
        parser.add_argument('--out', help='Output directory (created if missing)')

    def add_competition_arguments(self, parser):
        parser.add_argument('--lambda1', type=float)
        parser.add_argument('--lambda2', type=float)
        parser.add_argument('--seeds', help="'uniform' or two vertex ids, e.g. 0,1 or 0+4,1")
        parser.add_argument('--simple', action='store_true', help='Condition on a simple graph')
        parser.add_argument('--max-attempts', type=int, help='Rejection budget for --simple')
        parser.add_argument('--thinning', type=int, help='Record every k-th step after the first ones')
        parser.add_argument('--epsilon', type=float)
        parser.add_argument('--nu', type=int)

    # -- config -------------------------------------------------------------

    def read_config_file(self, path):
        try:
            with open(path, encoding='utf-8') as handle:
                document = json.load(handle)
        except OSError as error:
            raise CommandError(f"Cannot read config {path}: {error}", returncode=EXIT_INVALID)
        except json.JSONDecodeError as error:
            raise CommandError(f"Config {path} is not valid JSON: {error}", returncode=EXIT_INVALID)
        if not isinstance(document, dict):
            raise CommandError(f"Config {path} must hold a JSON object", returncode=EXIT_INVALID)
        return document

    def overrides(self, options):
        """Config keys set on the command line; unset flags are left out."""
        values = {}
        for name in PLAIN_OPTIONS:
            if options.get(name) is not None:
                values[name] = options[name]
        for name in FLAG_OPTIONS:
            if options.get(name):
                values[name] = True
        if options.get('seeds'):
            values['seeds'] = parse_seeds(options['seeds'])
        if options.get('n_values'):
            values['n_values'] = parse_int_list(options['n_values'])
        if options.get('offspring'):
            values['offspring'] = parse_pmf(options['offspring'])
        if options.get('degrees'):
            values['degrees'] = {'kind': 'explicit', 'values': parse_int_list(options['degrees'])}
        elif options.get('degree_file'):
            values['degrees'] = {'kind': 'file', 'path': options['degree_file']}
        elif options.get('pmf'):
            values['degrees'] = {'kind': 'iid', 'pmf': parse_pmf(options['pmf'])}
        return values

    def load_config(self, options):
        """Merge file and flags, validate, and return the bound serializer."""
        document = self.read_config_file(options['config']) if options.get('config') else {}
        document.update(self.overrides(options))
        if self.command_name:
            document.setdefault('command', self.command_name)
        serializer = RunConfigSerializer(data=document)
        if not serializer.is_valid():
            raise CommandError(
                f"Invalid run config: {json.dumps(serializer.errors, sort_keys=True)}",
                returncode=EXIT_INVALID,
            )
        return serializer

    def resolved(self, serializer):
        """The fully resolved config echoed into every output."""
        return clean(dict(serializer.validated_data))

    def output_dir(self, path):
        directory = Path(path)
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as error:
            raise CommandError(f"Cannot create output directory {directory}: {error}",
                               returncode=EXIT_RUNTIME)
        return directory

    # -- execution ----------------------------------------------------------

    def handle(self, *args, **options):
        """Validate the config, run the command and map failures to exit codes.

        Raises:
            CommandError: status 1 for an invalid config, 2 for a simulation or
                output failure
        """
        serializer = self.load_config(options)
        try:
            self.run(serializer, options)
        except ValidationError as error:
            raise CommandError(f"Invalid run config: {error.detail}", returncode=EXIT_INVALID)
        except ValueError as error:
            raise CommandError(f"Invalid run config: {error}", returncode=EXIT_INVALID)
        except CompetitionError as error:
            logger.error("%s failed: %s", self.command_name, error)
            raise CommandError(str(error), returncode=EXIT_RUNTIME)
        except OSError as error:
            raise CommandError(f"Cannot write outputs: {error}", returncode=EXIT_RUNTIME)

    def run(self, serializer, options):
        """Do the work of the command with a validated config.

        Args:
            serializer: bound, valid :class:`~competition.serializers.RunConfigSerializer`
            options: the parsed command-line options
        """
        raise NotImplementedError

    def report(self, message):
        self.stdout.write(self.style.SUCCESS(message))
