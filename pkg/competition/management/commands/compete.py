"""Run a single two-type competition."""

from django.db import transaction

from competition.ensemble import run_single, summarize_outcome
from competition.exports import write_json, write_trajectory_csv
from competition.management.base import ExperimentCommand
from competition.models import ExperimentRun


class Command(ExperimentCommand):
    """Run one competition to termination; writes ``outcome.json`` and
    ``trajectory.csv`` (``k,t,s1,s2,m``).

    The run uses replica stream 0 of the master seed, so it reproduces
    replica 0 of an ensemble with the same config.

    Usage:
        python manage.py compete --pmf 2:0.5,3:0.5 --n 100000 --seed 42 --out out/
    """
    help = 'Runs one competition to termination and writes its outcome and trajectory'
    command_name = 'compete'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_competition_arguments(parser)
        parser.add_argument('--record', action='store_true', help='Store the run in the database')

    def run(self, serializer, options):
        config = serializer.experiment_config()
        outcome, nu, stop = run_single(config)
        result = summarize_outcome(0, outcome, nu, stop)
        resolved = self.resolved(serializer)
        summary = {
            **outcome.as_dict(),
            'frac1': outcome.frac1,
            'frac2': outcome.frac2,
            'window': {'nu': nu, 'stop': stop, **outcome.window},
            'assumptions': config.degree_source.assumption_flags.as_dict(),
        }

        out = self.output_dir(resolved['out'])
        write_json({'config': resolved, 'outcome': summary}, out / 'outcome.json')
        write_trajectory_csv(outcome.trajectory, out / 'trajectory.csv')
        if options['record']:
            with transaction.atomic():
                run = ExperimentRun.record('COMPETE', resolved, summary, [result.as_row()])
            self.stdout.write(f"Stored as run {run.pk}")
        self.report(
            f"n1={outcome.n1} n2={outcome.n2} of n={outcome.n} "
            f"after {outcome.termination_step} steps (t={outcome.termination_time:.4f})"
        )
