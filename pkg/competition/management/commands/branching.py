"""Simulate the branching pair that approximates the early competition."""

import logging

import numpy as np

from competition.branching import (
    BranchingParams,
    default_t_sample,
    estimate_growth_rate,
    estimate_v_distribution,
    offspring_from_degrees,
    simulate_branching_pair,
)
from competition.degrees import compute_stats
from competition.exceptions import InsufficientGrowth
from competition.exports import write_branching_csv, write_json, write_samples
from competition.management.base import ExperimentCommand

logger = logging.getLogger(__name__)

GROWTH_PATHS = 20


class Command(ExperimentCommand):
    """Writes ``branching_trajectory.csv`` (``t,b1,b2`` for one path up to
    ``t_end``), ``v_samples.csv`` (one type-1 fraction per line at
    ``t_sample``) and ``branching.json``.

    The offspring law is ``--offspring`` when given, otherwise ``D_n* - 1``
    of the degree source. Without ``--t-sample`` the sampling time is the one at
    which about ``n**(1/4)`` births are expected, or ``t_end`` when there is
    no degree source.

    Usage:
        python manage.py branching --offspring 2:1 --t-end 8 --replicas 10000 --seed 3
    """
    help = 'Simulates the two-type branching pair and estimates the limiting fraction'
    command_name = 'branching'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--lambda1', type=float)
        parser.add_argument('--lambda2', type=float)
        parser.add_argument('--a1', type=int, help='Initial type-1 population')
        parser.add_argument('--a2', type=int, help='Initial type-2 population')
        parser.add_argument('--offspring', help='Offspring law, e.g. 1:0.4,2:0.6')
        parser.add_argument('--t-end', type=float, help='Horizon of the recorded path')
        parser.add_argument('--t-sample', type=float, help='Time at which fractions are sampled')
        parser.add_argument('--replicas', type=int)

    def run(self, serializer, options):
        data = serializer.validated_data
        lambdas = (data['lambda1'], data['lambda2'])
        path_rng, v_rng, growth_rng, degree_rng = np.random.default_rng(data['seed']).spawn(4)

        stats, seq = None, None
        if data.get('degrees') is not None:
            seq = serializer.degree_source().realize(data['n'], degree_rng)
            stats = compute_stats(seq)
        if data.get('offspring'):
            offspring = {int(k): v for k, v in data['offspring'].items()}
        elif stats is not None:
            offspring = offspring_from_degrees(stats)
        else:
            raise ValueError("branching needs --offspring or a degree source")
        t_sample = data['t_sample']
        if t_sample is None:
            t_sample = default_t_sample(stats, seq.n, lambdas) if stats is not None else data['t_end']

        params = BranchingParams(data['a1'], data['a2'], lambdas[0], lambdas[1], offspring)
        path = simulate_branching_pair(params.a1, params.a2, *lambdas, offspring, data['t_end'], path_rng)
        v = estimate_v_distribution(params, t_sample, data['replicas'], v_rng)
        paths = [path] + [
            simulate_branching_pair(params.a1, params.a2, *lambdas, offspring, data['t_end'], stream)
            for stream in growth_rng.spawn(GROWTH_PATHS - 1)
        ]
        try:
            growth_rate = estimate_growth_rate(paths)
        except InsufficientGrowth as error:
            logger.warning("No growth rate: %s", error)
            growth_rate = None
        offspring_mean = sum(k * float(p) for k, p in offspring.items())

        out = self.output_dir(data['out'])
        write_branching_csv(path, out / 'branching_trajectory.csv')
        write_samples(v.samples, out / 'v_samples.csv')
        write_json({
            'config': self.resolved(serializer),
            'offspring_pmf': {str(k): float(p) for k, p in offspring.items()},
            'final': {'t': data['t_end'], 'b1': path.final.b1, 'b2': path.final.b2,
                      'capped': path.capped},
            'growth_rate': growth_rate,
            'growth_rate_markov': [lam * (offspring_mean - 1.0) for lam in lambdas],
            'v': v.summary(),
        }, out / 'branching.json')
        self.report(f"{v.samples.size} fraction(s) at t={t_sample:.4g}, growth rate {growth_rate}")
