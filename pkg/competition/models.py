"""Stored experiment runs.

``compete`` and ``ensemble`` persist a run when called with ``--record``; the
read-only API serves what is stored here.
"""

import math

from django.db import models

from .exports import clean


class ExperimentRun(models.Model):
    """One invocation of a simulation command.

    Attributes:
        kind: the command that produced the run (compete or ensemble)
        config: the fully resolved run config, as echoed into the outputs
        seed: master seed of the run
        status: COMPLETED, or FAILED when a replica raised
        summary: aggregate statistics written to the JSON report
        created_at: when the run was stored
    """

    KIND_CHOICES = [
        ('COMPETE', 'Single competition'),
        ('ENSEMBLE', 'Ensemble of replicas'),
    ]
    STATUS_CHOICES = [
        ('COMPLETED', 'Completed'),
        ('FAILED', 'Failed'),
    ]

    kind = models.CharField(max_length=20, choices=KIND_CHOICES)
    config = models.JSONField()
    seed = models.PositiveBigIntegerField()
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='COMPLETED')
    summary = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', '-id']

    def __str__(self):
        return f"{self.get_kind_display()} #{self.pk} (seed {self.seed})"

    @classmethod
    def record(cls, kind, config, summary, replicas=()):
        """Store a finished run together with its replica rows."""
        run = cls.objects.create(
            kind=kind, config=clean(config), seed=config['seed'], summary=clean(summary),
        )
        ReplicaResult.objects.bulk_create(
            [ReplicaResult.from_row(run, row) for row in replicas]
        )
        return run


def _finite(value):
    return None if value is None or math.isnan(value) else value


class ReplicaResult(models.Model):
    """Terminal counts and martingale diagnostics of one replica."""

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='replicas')
    index = models.PositiveIntegerField()
    n = models.PositiveIntegerField()
    total_edges = models.PositiveBigIntegerField()
    a1 = models.PositiveIntegerField()
    a2 = models.PositiveIntegerField()
    n1 = models.PositiveIntegerField()
    n2 = models.PositiveIntegerField()
    frac1 = models.FloatField()
    frac2 = models.FloatField()
    sup_deviation = models.FloatField(null=True, blank=True)
    qv = models.FloatField(null=True, blank=True)
    min_growth = models.FloatField(null=True, blank=True)
    termination_step = models.PositiveBigIntegerField()

    class Meta:
        ordering = ['run', 'index']
        constraints = [
            models.UniqueConstraint(fields=['run', 'index'], name='unique_replica_per_run'),
        ]

    def __str__(self):
        return f"Replica {self.index} of run {self.run_id}"

    @classmethod
    def from_row(cls, run, row):
        return cls(
            run=run, index=row['index'], n=row['n'], total_edges=row['N'],
            a1=row['a1'], a2=row['a2'], n1=row['n1'], n2=row['n2'],
            frac1=row['frac1'], frac2=row['frac2'],
            sup_deviation=_finite(row.get('sup_deviation')),
            qv=_finite(row.get('qv')),
            min_growth=_finite(row.get('min_growth')),
            termination_step=row['termination_step'],
        )
