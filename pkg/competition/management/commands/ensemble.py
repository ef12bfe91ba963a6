"""Run many independent competitions and aggregate them."""

from django.db import transaction

from competition.ensemble import ReplicaResult, run_ensemble, scaling_study
from competition.exceptions import ReplicaError
from competition.exports import write_json, write_rows
from competition.management.base import ExperimentCommand
from competition.models import ExperimentRun


class Command(ExperimentCommand):
    """Writes ``report.json`` (config echo and aggregates) and ``replicas.csv``
    (one row per replica, in replica order).

    Usage:
        python manage.py ensemble --pmf 2:0.5,3:0.5 --n 10000 --replicas 200 --seed 7 --workers 4
        python manage.py ensemble --pmf 2:0.5,3:0.5 --lambda2 2 --n-values 1000,10000,100000 --scaling ...
    """
    help = 'Runs independent replicas of a competition and writes a JSON report and a CSV'
    command_name = 'ensemble'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_competition_arguments(parser)
        parser.add_argument('--replicas', type=int)
        parser.add_argument('--workers', type=int, help='Worker processes for the replicas')
        parser.add_argument('--fixed-sequence', action='store_true',
                            help='Sample IID degrees once and reuse them in every replica')
        parser.add_argument('--n-values', help='Sizes for --scaling, e.g. 1000,10000,100000')
        parser.add_argument('--scaling', action='store_true',
                            help='Also regress log median N1 on log n over --n-values')
        parser.add_argument('--bootstrap', type=int, default=1000)
        parser.add_argument('--record', action='store_true', help='Store the run in the database')

    def run(self, serializer, options):
        config = serializer.experiment_config()
        resolved = self.resolved(serializer)
        try:
            report = run_ensemble(config)
        except ReplicaError as error:
            if options['record']:
                ExperimentRun.objects.create(
                    kind='ENSEMBLE', config=resolved, seed=resolved['seed'], status='FAILED',
                    summary={'failed_replica': error.index, 'error': str(error.error)},
                )
            raise
        summary = report.summary()
        summary['symmetry_pvalue'] = report.symmetry_pvalue()
        summary['assumptions'] = config.degree_source.assumption_flags.as_dict()
        if options['scaling']:
            scaling = scaling_study(config, bootstrap=options['bootstrap'])
            summary['scaling'] = scaling.summary()
            if not scaling.contains_ratio:
                self.stdout.write(self.style.WARNING(
                    f"Scaling slope {scaling.slope:.3f} misses lambda1/lambda2={scaling.ratio:.3f}"
                ))

        out = self.output_dir(resolved['out'])
        write_json({'config': resolved, 'summary': summary}, out / 'report.json')
        write_rows(report.rows(), ReplicaResult.columns, out / 'replicas.csv')
        if options['record']:
            with transaction.atomic():
                run = ExperimentRun.record('ENSEMBLE', resolved, summary, report.rows())
            self.stdout.write(f"Stored as run {run.pk}")
        frac1 = summary['frac1']
        self.report(
            f"{summary['replicas']} replica(s): mean frac1={frac1['mean']:.4f}, "
            f"coexistence share={summary['coexistence_share']:.3f}"
        )
