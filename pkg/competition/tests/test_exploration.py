"""Tests for the two-type exploration engine."""

from collections import Counter

import networkx as nx
import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from competition.degrees import load_degree_sequence, sample_iid_degrees
from competition.ensemble import constancy_statistic, qv_statistic, window_stop
from competition.exceptions import (
    IdenticalSeeds,
    InvariantViolation,
    NoActiveHalfEdges,
    StepNotRecorded,
    VertexOutOfRange,
)
from competition.exploration import (
    ExplorationState,
    HalfEdgeStatus,
    check_invariants,
    init,
    init_single_type,
    m_at,
    run_to_termination,
    run_until,
)
from competition.pairing import component_sizes, sample_simple_graph


def rng(seed=0):
    return np.random.default_rng(seed)


class InitTests(SimpleTestCase):

    def test_initial_counts(self):
        state = init(load_degree_sequence([2, 2, 3, 3]), (0, 2), 1.0, 1.0, rng())
        self.assertEqual((state.s1, state.s2), (2, 3))
        self.assertAlmostEqual(m_at(state, 0), 0.4)
        self.assertEqual((state.a1, state.a2), (2, 3))

        state = init(load_degree_sequence([2, 2]), (0, 1), 1.0, 1.0, rng())
        self.assertEqual((state.s1, state.s2), (2, 2))
        self.assertEqual(m_at(state, 0), 0.5)

    def test_bad_seeds(self):
        seq = load_degree_sequence([2, 2, 2])
        with self.assertRaises(IdenticalSeeds):
            init(seq, (0, 0), 1.0, 1.0, rng())
        with self.assertRaises(IdenticalSeeds):
            init(seq, ((0, 1), 1), 1.0, 1.0, rng())
        with self.assertRaises(VertexOutOfRange):
            init(seq, (0, 3), 1.0, 1.0, rng())

    def test_uniform_seeds_are_distinct(self):
        seq = load_degree_sequence([2] * 10)
        for seed in range(20):
            state = init(seq, 'uniform', 1.0, 1.0, rng(seed))
            self.assertNotEqual(state.seeds[0], state.seeds[1])

    def test_several_seeds_per_type(self):
        state = init(load_degree_sequence([2, 2, 3, 3]), ((0, 1), (2,)), 1.0, 1.0, rng())
        self.assertEqual((state.s1, state.s2), (4, 3))
        self.assertEqual((state.n1, state.n2), (2, 1))

    def test_non_positive_intensity(self):
        with self.assertRaises(ValueError):
            init(load_degree_sequence([2, 2]), (0, 1), 1.0, 0.0, rng())


class StepTests(SimpleTestCase):
    """Single transitions of the jump chain."""

    def test_new_infection_activates_remaining_half_edges(self):
        # every active half-edge of vertex 0 is paired with a degree-3 vertex
        seq = load_degree_sequence([2, 3, 3])
        partners = [2, 5, 0, 4, 3, 1, 7, 6]
        state = ExplorationState(seq, 1.0, 1.0, partners=partners).seed([0])
        self.assertEqual((state.s1, state.s2), (2, 0))
        event = state.step(rng())
        self.assertTrue(event.new_infection)
        self.assertEqual((state.s1, state.s2), (3, 0))
        self.assertEqual(state.m, 1.0)
        self.assertEqual(state.status_of(event.r), HalfEdgeStatus.PAIRED)

    def test_infection_records_type_step_and_time(self):
        seq = load_degree_sequence([2, 3, 3])
        partners = [2, 5, 0, 4, 3, 1, 7, 6]
        state = ExplorationState(seq, 1.0, 1.0, partners=partners).seed([0])
        self.assertEqual(state.infection_of(0), (1, 0, 0.0))
        self.assertIsNone(state.infection_of(1))
        event = state.step(rng(4))
        self.assertEqual(state.infection_of(event.target_vertex), (1, 1, state.t))
        self.assertGreater(state.t, 0.0)
        other = 3 - event.target_vertex
        self.assertIsNone(state.infection_of(other))

    def test_collision_of_last_actives_keeps_m(self):
        state = init(load_degree_sequence([1, 1]), (0, 1), 1.0, 1.0, rng())
        event = state.step(rng())
        self.assertFalse(event.new_infection)
        self.assertEqual((state.s1, state.s2), (0, 0))
        self.assertEqual(m_at(state, 1), 0.5)
        with self.assertRaises(NoActiveHalfEdges):
            state.step(rng())

    def test_first_step_law_on_two_vertices(self):
        """On (2,2) a self-pairing has probability 1/3, split evenly by type."""
        seq = load_degree_sequence([2, 2])
        generator = rng(17)
        counts = Counter()
        runs = 6000
        for _ in range(runs):
            state = init(seq, (0, 1), 1.0, 1.0, generator)
            state.step(generator)
            counts[(state.s1, state.s2)] += 1
        self.assertEqual(set(counts), {(0, 2), (2, 0), (1, 1)})
        observed = [counts[(0, 2)], counts[(2, 0)], counts[(1, 1)]]
        expected = [runs / 6, runs / 6, runs * 2 / 3]
        self.assertGreater(stats.chisquare(observed, expected).pvalue, 1e-3)

    def test_clock_is_nondecreasing(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 200, rng(1))
        state = init(seq, 'uniform', 1.0, 2.0, rng(2), thinning=1)
        outcome = run_to_termination(state, rng(3))
        times = outcome.trajectory.t
        self.assertTrue(all(a <= b for a, b in zip(times, times[1:])))


class ConservationTests(SimpleTestCase):

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32), st.floats(min_value=0.2, max_value=5.0))
    def test_invariants_hold_every_step(self, seed, lambda2):
        seq = sample_iid_degrees({1: 0.2, 2: 0.4, 3: 0.4}, 60, rng(seed))
        state = init(seq, 'uniform', 1.0, lambda2, rng(seed), debug=True)
        outcome = run_to_termination(state, rng(seed + 1))
        self.assertLessEqual(outcome.n1 + outcome.n2, seq.n)
        self.assertGreaterEqual(min(outcome.n1, outcome.n2), 1)
        self.assertEqual(outcome.final_graph.edge_count, seq.total_edges)
        self.assertEqual(outcome.final_graph.degrees().tolist(), seq.degrees.tolist())

    def test_corrupted_counter_detected(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 100, rng(4))
        state = init(seq, 'uniform', 1.0, 1.0, rng(5))
        state.step(rng(6))
        check_invariants(state)
        state.paired_count += 1
        with self.assertRaises(InvariantViolation):
            check_invariants(state)


class RunToTerminationTests(SimpleTestCase):

    def test_two_vertices_one_edge(self):
        outcome = run_to_termination(init(load_degree_sequence([1, 1]), (0, 1), 1.0, 1.0, rng()), rng())
        self.assertEqual((outcome.n1, outcome.n2), (1, 1))
        self.assertEqual(outcome.termination_step, 1)
        self.assertEqual(outcome.final_graph.edges.tolist(), [[0, 1]])

    def test_small_sequence_completes_graph(self):
        for seed in range(10):
            state = init(load_degree_sequence([2, 2, 3, 3]), 'uniform', 1.0, 1.0, rng(seed))
            outcome = run_to_termination(state, rng(seed))
            self.assertLessEqual(outcome.n1 + outcome.n2, 4)
            self.assertEqual(outcome.final_graph.edge_count, 5)

    def test_last_step_repeats_previous_m(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 300, rng(8))
        outcome = run_to_termination(init(seq, 'uniform', 1.0, 1.0, rng(9), thinning=1), rng(9))
        traj = outcome.trajectory
        self.assertEqual(traj.last_step, outcome.termination_step)
        self.assertEqual(traj.m[-1], traj.m[-2])

    def test_thinned_trajectory(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 2000, rng(10))
        state = init(seq, 'uniform', 1.0, 1.0, rng(11), thinning=50, full_steps=20, checkpoints=(77,))
        outcome = run_to_termination(state, rng(12))
        traj = outcome.trajectory
        self.assertIn(77, traj)
        self.assertIn(outcome.termination_step, traj)
        for k in traj.k:
            self.assertTrue(k < 20 or k % 50 == 0 or k in (77, outcome.termination_step))
        if outcome.termination_step > 21:
            with self.assertRaises(StepNotRecorded):
                traj.m_at(21)

    def test_scale_invariance(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 500, rng(13))
        first = run_to_termination(init(seq, 'uniform', 1.0, 1.0, rng(14), thinning=1), rng(14))
        second = run_to_termination(init(seq, 'uniform', 3.0, 3.0, rng(14), thinning=1), rng(14))
        self.assertEqual((first.n1, first.n2), (second.n1, second.n2))
        self.assertEqual(first.trajectory.s1, second.trajectory.s1)
        self.assertEqual(first.trajectory.s2, second.trajectory.s2)
        np.testing.assert_allclose(np.array(second.trajectory.t) * 3.0, first.trajectory.t, rtol=1e-9)

    def test_fixed_pairing_is_respected(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 200, rng(15))
        graph = sample_simple_graph(seq, rng(16))
        state = init(seq, 'uniform', 1.0, 1.0, rng(17), partners=graph.pairing, debug=True)
        outcome = run_to_termination(state, rng(18))
        self.assertTrue(np.array_equal(outcome.final_graph.pairing, graph.pairing))

    def test_online_window_matches_recomputation(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 1000, rng(19))
        nu, stop = 10, window_stop(0.1, seq.total_edges)
        state = init(seq, 'uniform', 1.0, 1.0, rng(20), thinning=1, window=(nu, stop))
        outcome = run_to_termination(state, rng(21))
        if outcome.termination_step < nu:
            self.skipTest("run ended before the window")
        traj = outcome.trajectory
        self.assertEqual(outcome.window['qv'], qv_statistic(traj, nu, 0.1, seq.total_edges))
        self.assertEqual(outcome.window['sup_deviation'],
                         constancy_statistic(traj, nu, 0.1, seq.total_edges))


class SingleTypeTests(SimpleTestCase):

    def test_explores_exactly_the_component(self):
        seq = sample_iid_degrees({1: 0.5, 2: 0.5}, 300, rng(22))
        state = init_single_type(seq, 0, rng(23))
        outcome = run_to_termination(state, rng(24))
        graph = outcome.final_graph.to_networkx()
        self.assertEqual(outcome.n1, len(nx.node_connected_component(graph, 0)))
        self.assertEqual(outcome.n2, 0)
        self.assertLessEqual(outcome.n1, component_sizes(outcome.final_graph)[0])

    def test_run_until_stops_before_horizon(self):
        seq = sample_iid_degrees({2: 0.5, 3: 0.5}, 5000, rng(25))
        state = run_until(init(seq, 'uniform', 1.0, 1.0, rng(26)), 1.5, rng(26))
        self.assertLessEqual(state.t, 1.5)
        self.assertGreater(state.active_count, 0)
