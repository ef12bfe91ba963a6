"""Two-type competition engine.

The graph is revealed while the infections spread. Every half-edge is free
or paired; a free half-edge is active (of type 1 or 2) when its vertex is
infected and inactive otherwise. One step of the jump chain:

1. draw the exponential holding time at rate ``lambda1*s1 + lambda2*s2``;
2. pick the infecting type with probability ``lambda_i*s_i / rate``;
3. pick a uniform active half-edge ``q`` of that type;
4. pick its partner ``r`` uniformly among the other free half-edges (or read
   it from a fixed pairing);
5. pair ``q`` and ``r``. If ``r`` sits on an uninfected vertex ``y``, ``y``
   takes the type of ``q`` and its other ``d_y - 1`` half-edges become active;
   otherwise ``r`` was active and both active counts drop.

The random draws happen in exactly that order (holding time, type, ``q``,
``r``), so a seed reproduces a run across refactors. The type draw only sees
``lambda2 / lambda1``; scaling both rates leaves the jump chain untouched and
rescales the clock.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .exceptions import (
    ExhaustedFreePool,
    IdenticalSeeds,
    InvariantViolation,
    NoActiveHalfEdges,
    StepNotRecorded,
    VertexOutOfRange,
)
from .pairing import pairing_to_graph, uniform_matching

logger = logging.getLogger(__name__)

DEFAULT_THINNING = 100
FULL_TRAJECTORY_STEPS = 1000


class HalfEdgeStatus(IntEnum):
    """State of one half-edge; the active values double as the infection type."""
    FREE_INACTIVE = 0
    FREE_ACTIVE_1 = 1
    FREE_ACTIVE_2 = 2
    PAIRED = 3


UNINFECTED = 0


@dataclass(frozen=True)
class Event:
    """What one step of the jump chain did."""

    k: int
    t: float
    infecting_type: int
    q: int
    r: int
    source_vertex: int
    target_vertex: int
    new_infection: bool
    s1: int
    s2: int
    m: float


class Trajectory:
    """Recorded ``(k, t, s1, s2, M_k)`` samples plus the running sum of
    squared M-increments, kept exact even on thinned steps."""

    columns = ('k', 't', 's1', 's2', 'm', 'qv')

    def __init__(self):
        self.k = []
        self.t = []
        self.s1 = []
        self.s2 = []
        self.m = []
        self.qv = []
        self._rows = {}

    def record(self, k, t, s1, s2, m, qv):
        """Append one sample; a step that is already recorded is ignored.

        Args:
            k: step index
            t: continuous time after step ``k``
            s1, s2: active half-edges of each type
            m: the fraction ``M_k``
            qv: running sum of squared M-increments up to step ``k``
        """
        if k in self._rows:
            return
        self._rows[k] = len(self.k)
        self.k.append(k)
        self.t.append(t)
        self.s1.append(s1)
        self.s2.append(s2)
        self.m.append(m)
        self.qv.append(qv)

    def __len__(self):
        return len(self.k)

    def __contains__(self, k):
        return k in self._rows

    def row(self, k):
        """All columns of step ``k`` as a dict; raises :class:`StepNotRecorded`."""
        try:
            index = self._rows[k]
        except KeyError:
            raise StepNotRecorded(k) from None
        return {name: getattr(self, name)[index] for name in self.columns}

    def m_at(self, k):
        try:
            return self.m[self._rows[k]]
        except KeyError:
            raise StepNotRecorded(k) from None

    @property
    def last_step(self):
        return self.k[-1] if self.k else None

    def is_complete_between(self, start, stop):
        """True if every step in ``[start, stop]`` was recorded."""
        return all(k in self._rows for k in range(start, stop + 1))

    def rows(self):
        return zip(self.k, self.t, self.s1, self.s2, self.m)


class WindowMonitor:
    """Exact statistics of ``M_k`` over the steps ``start <= k <= stop``.

    Tracks ``sup |M_k - M_start|``, the sum of ``(M_k - M_{k-1})**2`` for
    ``start <= k <= stop`` and ``min S_k / k``.
    """

    def __init__(self, start, stop):
        self.start = start
        self.stop = stop
        self.anchor = None
        self.sup_deviation = 0.0
        self.qv = 0.0
        self.min_growth = math.inf
        self.last_step = None

    def observe(self, k, m, m_prev, s):
        """Feed step ``k``; steps outside the window are ignored."""
        if k < self.start or k > self.stop:
            return
        if k == self.start:
            self.anchor = m
        else:
            self.sup_deviation = max(self.sup_deviation, abs(m - self.anchor))
        if k > 0:
            self.qv += (m - m_prev) ** 2
            self.min_growth = min(self.min_growth, s / k)
        self.last_step = k

    @property
    def covered(self):
        return self.last_step == self.stop

    def as_dict(self):
        return {
            'start': self.start,
            'stop': self.stop,
            'covered': self.covered,
            'sup_deviation': self.sup_deviation,
            'qv': self.qv,
            'min_growth': None if math.isinf(self.min_growth) else self.min_growth,
        }


def _as_vertex_set(seed):
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(v) for v in seed)


class ExplorationState:
    """Half-edge table, active pools and counters of one competition run.

    Use :func:`init` or :func:`init_single_type` to build one. A state is
    single-threaded; independent states with independent generators can run
    in parallel.
    """

    def __init__(self, seq, lambda1, lambda2, partners=None, thinning=DEFAULT_THINNING,
                 full_steps=FULL_TRAJECTORY_STEPS, checkpoints=(), window=None, debug=False):
        if lambda1 <= 0 or lambda2 <= 0:
            raise ValueError("Infection intensities must be positive")
        self.seq = seq
        self.lambda1 = float(lambda1)
        self.lambda2 = float(lambda2)
        self.rho = self.lambda2 / self.lambda1
        self.thinning = max(1, int(thinning))
        self.full_steps = full_steps
        self.checkpoints = frozenset(checkpoints)
        self.debug = debug

        total = seq.total_half_edges
        self.owner = seq.owners.tolist()
        self.offsets = seq.offsets.tolist()
        self.status = [HalfEdgeStatus.FREE_INACTIVE.value] * total
        self.partner = [-1] * total
        self.fixed_partners = None if partners is None else np.asarray(partners).tolist()
        self.free = list(range(total))
        self.free_pos = list(range(total))
        self.active = ([], [], [])
        self.active_pos = [-1] * total
        self.vertex_type = [UNINFECTED] * seq.n
        self.infected_step = [-1] * seq.n
        self.infected_time = [math.nan] * seq.n
        self.infected = [0, 0, 0]
        self.paired_count = 0

        self.k = 0
        self.t = 0.0
        self.m = math.nan
        self.qv_total = 0.0
        self.seeds = ((), ())
        self.a1 = 0
        self.a2 = 0
        self.trajectory = Trajectory()
        self.monitor = WindowMonitor(*window) if window else None

    # -- counters -----------------------------------------------------------

    @property
    def s1(self):
        return len(self.active[1])

    @property
    def s2(self):
        return len(self.active[2])

    @property
    def active_count(self):
        return len(self.active[1]) + len(self.active[2])

    @property
    def free_count(self):
        return len(self.free)

    @property
    def n1(self):
        return self.infected[1]

    @property
    def n2(self):
        return self.infected[2]

    @property
    def finished(self):
        return self.active_count == 0

    def status_of(self, half_edge):
        return HalfEdgeStatus(self.status[half_edge])

    def infection_of(self, vertex):
        """``(type, step, time)`` for an infected vertex, else None."""
        kind = self.vertex_type[vertex]
        if kind == UNINFECTED:
            return None
        return kind, self.infected_step[vertex], self.infected_time[vertex]

    # -- pool bookkeeping ---------------------------------------------------

    def _remove_free(self, h):
        """Swap-remove ``h`` from the free pool in O(1)."""
        pos = self.free_pos[h]
        last = self.free.pop()
        if last != h:
            self.free[pos] = last
            self.free_pos[last] = pos
        self.free_pos[h] = -1

    def _add_active(self, h, kind):
        pool = self.active[kind]
        self.active_pos[h] = len(pool)
        pool.append(h)
        self.status[h] = kind

    def _remove_active(self, h, kind):
        pool = self.active[kind]
        pos = self.active_pos[h]
        last = pool.pop()
        if last != h:
            pool[pos] = last
            self.active_pos[last] = pos
        self.active_pos[h] = -1

    def _infect(self, vertex, kind, skip=-1):
        """Give ``vertex`` type ``kind`` and activate its half-edges.

        ``skip`` is the half-edge that just paired into the vertex; it stays
        paired instead of becoming active.
        """
        self.vertex_type[vertex] = kind
        self.infected_step[vertex] = self.k
        self.infected_time[vertex] = self.t
        self.infected[kind] += 1
        for h in range(self.offsets[vertex], self.offsets[vertex + 1]):
            if h != skip:
                self._add_active(h, kind)

    def _current_m(self):
        s1 = len(self.active[1])
        total = s1 + len(self.active[2])
        if total > 0:
            return s1 / total
        return self.m

    def _record(self, m_prev):
        """Sample the trajectory (first steps, every ``thinning``-th step and the
        checkpoints) and feed the window monitor.
        """
        k = self.k
        if k < self.full_steps or k % self.thinning == 0 or k in self.checkpoints:
            self.trajectory.record(k, self.t, self.s1, self.s2, self.m, self.qv_total)
        if self.monitor is not None:
            self.monitor.observe(k, self.m, m_prev, self.active_count)

    def seed(self, seed_sets):
        """Infect the seed vertices at time 0 and record ``M_0``."""
        n = self.seq.n
        sets = [_as_vertex_set(s) for s in seed_sets]
        for vertices in sets:
            for v in vertices:
                if not 0 <= v < n:
                    raise VertexOutOfRange(v, n)
        flat = [v for vertices in sets for v in vertices]
        if len(set(flat)) != len(flat):
            raise IdenticalSeeds(f"Seed vertices must be distinct, got {sets}")
        for kind, vertices in enumerate(sets, start=1):
            for v in vertices:
                self._infect(v, kind)
        self.seeds = tuple(sets) + ((),) * (2 - len(sets))
        self.a1 = self.s1
        self.a2 = self.s2
        self.m = self._current_m()
        self._record(self.m)
        return self

    # -- dynamics -----------------------------------------------------------

    def step(self, rng, t_limit=None):
        """Perform one pairing; returns the :class:`Event`.

        With ``t_limit`` set, returns None without changing the state when the
        sampled holding time would move the clock past ``t_limit``.
        """
        active1, active2 = self.active[1], self.active[2]
        s1, s2 = len(active1), len(active2)
        if s1 + s2 == 0:
            raise NoActiveHalfEdges("The infections have stopped")
        free = self.free
        free_total = len(free)
        if free_total < 2:
            raise ExhaustedFreePool(
                f"{free_total} free half-edge(s) left with {s1 + s2} active at step {self.k}"
            )

        holding = rng.standard_exponential() / (self.lambda1 * s1 + self.lambda2 * s2)
        if t_limit is not None and self.t + holding > t_limit:
            return None
        kind = 1 if rng.random() < s1 / (s1 + self.rho * s2) else 2
        pool = active1 if kind == 1 else active2
        q = pool[int(rng.random() * len(pool))]
        if self.fixed_partners is None:
            r = q
            while r == q:
                r = free[int(rng.random() * free_total)]
        else:
            r = self.fixed_partners[q]

        status = self.status
        r_status = status[r]
        self.partner[q] = r
        self.partner[r] = q
        self._remove_free(q)
        self._remove_free(r)
        self._remove_active(q, kind)
        status[q] = HalfEdgeStatus.PAIRED.value
        status[r] = HalfEdgeStatus.PAIRED.value
        self.paired_count += 2

        self.k += 1
        self.t += holding
        target = self.owner[r]
        new_infection = self.vertex_type[target] == UNINFECTED
        if new_infection:
            self._infect(target, kind, skip=r)
        else:
            self._remove_active(r, r_status)

        m_prev = self.m
        self.m = self._current_m()
        self.qv_total += (self.m - m_prev) ** 2
        self._record(m_prev)
        if self.debug:
            check_invariants(self)
        return Event(
            k=self.k, t=self.t, infecting_type=kind, q=q, r=r,
            source_vertex=self.owner[q], target_vertex=target,
            new_infection=new_infection, s1=self.s1, s2=self.s2, m=self.m,
        )

    def complete_graph(self, rng):
        """Pair the remaining free half-edges and return the final graph."""
        remaining = list(self.free)
        if self.fixed_partners is None:
            pairs = uniform_matching(remaining, rng)
        else:
            pairs = [(h, self.fixed_partners[h]) for h in remaining if h < self.fixed_partners[h]]
        for a, b in pairs:
            self.partner[a] = b
            self.partner[b] = a
        return pairing_to_graph(self.seq, self.partner)


@dataclass
class CompetitionOutcome:
    """Terminal counts and recorded trajectory of a finished run."""

    n1: int
    n2: int
    n: int
    N: int
    seeds: tuple
    a1: int
    a2: int
    lambda1: float
    lambda2: float
    termination_step: int
    termination_time: float
    final_graph: object
    trajectory: Trajectory
    window: dict = field(default_factory=dict)

    @property
    def frac1(self):
        return self.n1 / self.n

    @property
    def frac2(self):
        return self.n2 / self.n

    def as_dict(self):
        return {
            'n': self.n,
            'N': self.N,
            'seeds': [list(s) for s in self.seeds],
            'a1': self.a1,
            'a2': self.a2,
            'lambdas': [self.lambda1, self.lambda2],
            'n1': self.n1,
            'n2': self.n2,
            'termination_step': self.termination_step,
            'termination_time': self.termination_time,
        }


def init(seq, seeds, lambda1, lambda2, rng, **options):
    """Build the initial state with the seed vertices infected.

    Args:
        seq: the :class:`~competition.degrees.DegreeSequence`
        seeds: ``None``/``'uniform'`` for two uniform distinct vertices, or a
            pair whose entries are a vertex or a tuple of vertices
        lambda1, lambda2: infection intensities
        rng: ``numpy.random.Generator``
        **options: forwarded to :class:`ExplorationState` (``partners``,
            ``thinning``, ``checkpoints``, ``window``, ``debug``)
    """
    if seq.n < 2:
        raise VertexOutOfRange(1, seq.n)
    if seeds is None or seeds == 'uniform':
        picked = rng.choice(seq.n, size=2, replace=False)
        seeds = (int(picked[0]), int(picked[1]))
    elif len(seeds) != 2:
        raise IdenticalSeeds(f"Expected two seeds, got {seeds!r}")
    state = ExplorationState(seq, lambda1, lambda2, **options)
    state.seed(seeds)
    logger.debug("Seeded %s with a1=%d a2=%d", state.seeds, state.a1, state.a2)
    return state


def init_single_type(seq, vertex, rng, **options):
    """One-type exploration from ``vertex``; reaches exactly its component."""
    if vertex is None:
        vertex = int(rng.integers(seq.n))
    state = ExplorationState(seq, 1.0, 1.0, **options)
    return state.seed([vertex])


def run_until(state, t_end, rng):
    """Step until the infections stop or the clock would pass ``t_end``."""
    while not state.finished:
        if state.step(rng, t_limit=t_end) is None:
            break
    return state


def run_to_termination(state, rng, trajectory_thinning=None):
    """Run the jump chain until no active half-edge is left, then complete
    the graph with a uniform matching of the remaining free half-edges."""
    if trajectory_thinning is not None:
        state.thinning = max(1, int(trajectory_thinning))
    while state.active_count:
        state.step(rng)
    traj = state.trajectory
    if traj.last_step != state.k:
        traj.record(state.k, state.t, state.s1, state.s2, state.m, state.qv_total)
    graph = state.complete_graph(rng)
    logger.debug(
        "Run finished at step %d (t=%.4f): n1=%d n2=%d of n=%d",
        state.k, state.t, state.n1, state.n2, state.seq.n,
    )
    return CompetitionOutcome(
        n1=state.n1, n2=state.n2, n=state.seq.n, N=state.seq.total_edges,
        seeds=state.seeds, a1=state.a1, a2=state.a2,
        lambda1=state.lambda1, lambda2=state.lambda2,
        termination_step=state.k, termination_time=state.t,
        final_graph=graph, trajectory=traj,
        window=state.monitor.as_dict() if state.monitor else {},
    )


def m_at(source, k):
    """``M_k`` from a state or an outcome, with the carry-forward rule."""
    return source.trajectory.m_at(k)


def check_invariants(state):
    """Conservation checks; raises :class:`InvariantViolation`."""
    total = state.seq.total_half_edges
    status = state.status
    paired = sum(1 for s in status if s == HalfEdgeStatus.PAIRED)
    if state.paired_count + state.free_count != total:
        raise InvariantViolation(
            f"paired {state.paired_count} + free {state.free_count} != {total}"
        )
    if paired != state.paired_count or paired != 2 * state.k:
        raise InvariantViolation(f"{paired} paired half-edges after {state.k} steps")
    for kind in (1, 2):
        if sum(1 for s in status if s == kind) != len(state.active[kind]):
            raise InvariantViolation(f"Active pool of type {kind} out of sync")
    for h in state.free:
        kind = state.vertex_type[state.owner[h]]
        if status[h] != kind:
            raise InvariantViolation(
                f"Free half-edge {h} has status {status[h]} on a vertex of type {kind}"
            )
