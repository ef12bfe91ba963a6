"""Tests for ensembles, the M_k diagnostics and the enumeration oracle."""

import math
import pickle

from django.test import SimpleTestCase

from competition.degrees import DegreeSource, load_degree_sequence
from competition.ensemble import (
    EnsembleReport,
    ExperimentConfig,
    ReplicaResult,
    constancy_statistic,
    cube_root_ceiling,
    martingale_enumeration_oracle,
    qv_statistic,
    run_ensemble,
    run_replica,
    run_single,
    scaling_study,
    window_stop,
)
from competition.exceptions import (
    IdenticalSeeds,
    InstanceTooLarge,
    InsufficientSizes,
    RangeNotCovered,
    ReplicaError,
    StepNotRecorded,
)
from competition.exploration import Trajectory

PMF = {2: 0.5, 3: 0.5}


def iid_config(**overrides):
    options = dict(degree_source=DegreeSource(kind='iid', pmf=PMF), n=300,
                   lambda1=1.0, lambda2=1.0, replicas=6, seed=2024)
    options.update(overrides)
    return ExperimentConfig(**options)


def hand_built_trajectory(steps=(0, 1, 2, 3, 4), m=(0.5, 0.5, 0.6, 0.4, 0.4)):
    traj = Trajectory()
    qv = 0.0
    previous = m[0]
    for k, value in zip(steps, m):
        qv += (value - previous) ** 2
        previous = value
        traj.record(k, float(k), 1, 1, value, qv)
    return traj


class ExperimentConfigTests(SimpleTestCase):

    def test_default_burn_in(self):
        self.assertEqual(cube_root_ceiling(1000), 10)
        self.assertEqual(cube_root_ceiling(1001), 11)
        self.assertEqual(cube_root_ceiling(1), 1)
        self.assertEqual(iid_config().nu_for(1000), 10)
        self.assertEqual(iid_config(nu=3).nu_for(1000), 3)

    def test_window_stop(self):
        self.assertEqual(window_stop(0.1, 1000), 900)
        self.assertEqual(window_stop(0.5, 5), 2)

    def test_rejects_bad_values(self):
        with self.assertRaises(ValueError):
            iid_config(replicas=0)
        with self.assertRaises(ValueError):
            iid_config(epsilon=1.0)
        with self.assertRaises(ValueError):
            iid_config(lambda2=-1.0)


class RunEnsembleTests(SimpleTestCase):

    def test_single_edge_splits_evenly(self):
        config = ExperimentConfig(degree_source=DegreeSource(kind='explicit', values=(1, 1)),
                                  n=2, lambda1=1.0, lambda2=1.0, replicas=1, seed=1)
        replica = run_ensemble(config).replicas[0]
        self.assertEqual((replica.frac1, replica.frac2), (0.5, 0.5))
        self.assertEqual(replica.termination_step, 1)
        self.assertTrue(math.isnan(replica.qv))

    def test_deterministic_under_seed(self):
        columns = ('n1', 'n2', 'N', 'termination_step', 'frac1')
        first = run_ensemble(iid_config())
        second = run_ensemble(iid_config())
        for name in columns:
            self.assertEqual(first.column(name), second.column(name))
        self.assertEqual(first.summary()['frac1'], second.summary()['frac1'])

    def test_worker_count_does_not_change_results(self):
        serial = run_ensemble(iid_config(replicas=4))
        pooled = run_ensemble(iid_config(replicas=4, workers=2))
        self.assertEqual(serial.column('n1'), pooled.column('n1'))
        self.assertEqual(serial.column('termination_step'), pooled.column('termination_step'))

    def test_replica_is_reproducible_alone(self):
        config = iid_config()
        report = run_ensemble(config)
        again = run_replica(config, 3)
        self.assertEqual(report.replicas[3].n1, again.n1)
        self.assertEqual(report.replicas[3].termination_step, again.termination_step)
        outcome, nu, stop = run_single(config, 3)
        self.assertEqual(outcome.n1, again.n1)
        self.assertEqual((nu, stop), (again.nu, again.stop))

    def test_fixed_sequence_shared_by_replicas(self):
        report = run_ensemble(iid_config(fixed_sequence=True))
        self.assertEqual(len(set(report.column('N'))), 1)
        varied = run_ensemble(iid_config())
        self.assertGreater(len(set(varied.column('N'))), 1)

    def test_simple_graph_conditioning(self):
        report = run_ensemble(iid_config(simple=True, replicas=3))
        for replica in report.replicas:
            self.assertLessEqual(replica.n1 + replica.n2, replica.n)

    def test_failures_name_the_replica(self):
        config = ExperimentConfig(degree_source=DegreeSource(kind='explicit', values=(2, 2, 2)),
                                  n=3, lambda1=1.0, lambda2=1.0, replicas=2, seed=1, seeds=(1, 1))
        with self.assertRaises(ReplicaError) as caught:
            run_ensemble(config)
        self.assertEqual(caught.exception.index, 0)
        self.assertIsInstance(caught.exception.error, IdenticalSeeds)

    def test_rows_follow_csv_columns(self):
        report = run_ensemble(iid_config(replicas=2))
        self.assertEqual(list(report.rows()[0]), list(ReplicaResult.columns))
        self.assertEqual(report.column('index'), [0, 1])


class EnsembleSummaryTests(SimpleTestCase):

    def replica(self, index, frac1, frac2):
        return ReplicaResult(index=index, n=100, N=120, a1=2, a2=3, n1=int(frac1 * 100),
                             n2=int(frac2 * 100), frac1=frac1, frac2=frac2, nu=5, stop=108,
                             sup_deviation=0.01 * index, qv=math.nan, min_growth=0.5,
                             termination_step=110)

    def test_order_invariant(self):
        replicas = [self.replica(i, f, 1 - f) for i, f in enumerate((0.05, 0.3, 0.5, 0.95))]
        forward = EnsembleReport(config={}, replicas=replicas).summary()
        backward = EnsembleReport(config={}, replicas=replicas[::-1]).summary()
        self.assertEqual(forward, backward)
        self.assertEqual(forward['coexistence_share'], 0.5)
        self.assertEqual(forward['full_coverage_share'], 1.0)
        self.assertEqual(forward['qv']['count'], 0)
        self.assertEqual(forward['growth_floor_share'], 1.0)

    def test_symmetry_pvalue(self):
        replicas = [self.replica(i, f, 1 - f) for i, f in enumerate((0.25, 0.5, 0.5, 0.75))]
        self.assertEqual(EnsembleReport(config={}, replicas=replicas).symmetry_pvalue(), 1.0)

    def test_replicas_ending_before_the_window_miss_the_growth_floor(self):
        replicas = [self.replica(i, 0.5, 0.5) for i in range(4)]
        replicas[2].min_growth = math.nan
        summary = EnsembleReport(config={}, replicas=replicas).summary()
        self.assertEqual(summary['growth_floor_share'], 0.75)
        self.assertEqual(summary['ended_before_window'], 1)
        self.assertEqual(summary['min_growth']['count'], 3)


class StatisticTests(SimpleTestCase):
    """Sup deviation and quadratic variation on hand-built trajectories."""

    def test_constant_fraction(self):
        traj = hand_built_trajectory(m=(0.5,) * 5)
        self.assertEqual(constancy_statistic(traj, 0, 0.1, 100), 0.0)
        self.assertEqual(qv_statistic(traj, 0, 0.1, 100), 0.0)

    def test_known_values(self):
        traj = hand_built_trajectory()
        self.assertAlmostEqual(constancy_statistic(traj, 1, 0.5, 10), 0.1)
        self.assertAlmostEqual(qv_statistic(traj, 1, 0.5, 10), 0.05)
        # window [1, 2]: increments into steps 1 and 2
        self.assertAlmostEqual(qv_statistic(traj, 1, 0.75, 10), 0.01)

    def test_increment_into_window_start_counts(self):
        traj = hand_built_trajectory(m=(0.5, 0.7, 0.7, 0.7, 0.7))
        self.assertAlmostEqual(qv_statistic(traj, 1, 0.5, 10), 0.04)
        self.assertEqual(constancy_statistic(traj, 1, 0.5, 10), 0.0)
        self.assertEqual(qv_statistic(traj, 2, 0.5, 10), 0.0)

    def test_thinned_window_needs_the_step_before_it(self):
        full = hand_built_trajectory()
        thinned = Trajectory()
        for k in (1, 2, 4):
            row = full.row(k)
            thinned.record(k, row['t'], row['s1'], row['s2'], row['m'], row['qv'])
        self.assertAlmostEqual(qv_statistic(thinned, 2, 0.5, 10), qv_statistic(full, 2, 0.5, 10))
        with self.assertRaises(RangeNotCovered):
            qv_statistic(thinned, 4, 0.5, 10)

    def test_thinned_trajectory_reads_running_sum(self):
        full = hand_built_trajectory()
        thinned = Trajectory()
        for k in (0, 2, 4):
            row = full.row(k)
            thinned.record(k, row['t'], row['s1'], row['s2'], row['m'], row['qv'])
        self.assertAlmostEqual(qv_statistic(thinned, 0, 0.5, 10), qv_statistic(full, 0, 0.5, 10))
        with self.assertRaises(RangeNotCovered):
            qv_statistic(thinned, 0, 0.7, 10)

    def test_range_not_covered(self):
        traj = hand_built_trajectory()
        with self.assertRaises(RangeNotCovered):
            constancy_statistic(traj, 5, 0.1, 100)
        with self.assertRaises(StepNotRecorded):
            traj.m_at(7)


class ScalingStudyTests(SimpleTestCase):

    def test_needs_three_sizes_over_two_decades(self):
        with self.assertRaises(InsufficientSizes):
            scaling_study(iid_config(lambda2=2.0), n_values=(100, 1000))
        with self.assertRaises(InsufficientSizes):
            scaling_study(iid_config(lambda2=2.0), n_values=(100, 200, 500))

    def test_report_shape(self):
        report = scaling_study(iid_config(lambda2=2.0, replicas=20), n_values=(50, 500, 5000),
                               bootstrap=50)
        summary = report.summary()
        self.assertEqual(summary['sizes'], [50, 500, 5000])
        self.assertEqual(summary['expected_slope'], 0.5)
        self.assertTrue(summary['exploratory'])
        low, high = report.interval
        self.assertLessEqual(low, high)


class MartingaleOracleTests(SimpleTestCase):

    def test_equal_intensities_are_exact(self):
        self.assertEqual(martingale_enumeration_oracle(load_degree_sequence([1, 1]), (0, 1), 1), 0.0)
        self.assertLessEqual(
            martingale_enumeration_oracle(load_degree_sequence([2, 2, 2]), (0, 1), 1), 1e-12
        )
        self.assertLessEqual(
            martingale_enumeration_oracle(load_degree_sequence([2, 2, 3, 3]), (0, 2), 1), 1e-12
        )

    def test_unequal_intensities_break_the_property(self):
        residual = martingale_enumeration_oracle(load_degree_sequence([2, 2, 3, 3]), (0, 2), 0.5)
        self.assertGreater(residual, 0.0)

    def test_instance_too_large(self):
        with self.assertRaises(InstanceTooLarge):
            martingale_enumeration_oracle(load_degree_sequence([2] * 6), (0, 1), 1)


class ExceptionPicklingTests(SimpleTestCase):

    def test_errors_survive_worker_boundary(self):
        error = ReplicaError(4, StepNotRecorded(12))
        restored = pickle.loads(pickle.dumps(error))
        self.assertEqual(restored.index, 4)
        self.assertEqual(restored.error.k, 12)
        self.assertEqual(str(restored), str(error))
