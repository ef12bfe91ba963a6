"""Monte Carlo experiments over many independent competitions.

Replica ``r`` draws from ``SeedSequence(seed, spawn_key=(r,))``, so any single
replica can be reproduced without running the others. Replicas run in a
joblib worker pool and are folded in replica order.

Also holds the diagnostics for the fraction ``M_k`` (sup deviation and
quadratic variation over ``nu <= k <= (1 - epsilon) N``), the scaling study
for unequal intensities, and the exact enumeration oracle for the
martingale property.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

import numpy as np
from joblib import Parallel, delayed
from scipy import stats as scipy_stats

from .degrees import DegreeSource
from .exceptions import (
    CompetitionError,
    InstanceTooLarge,
    InsufficientSizes,
    RangeNotCovered,
    ReplicaError,
)
from .exploration import DEFAULT_THINNING, FULL_TRAJECTORY_STEPS, init, run_to_termination
from .pairing import DEFAULT_MAX_ATTEMPTS, sample_simple_graph

logger = logging.getLogger(__name__)

FIXED_SEQUENCE_KEY = 2 ** 32 - 1
BOOTSTRAP_KEY = 2 ** 32 - 2
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
COEXISTENCE_BAND = (0.1, 0.9)
FULL_COVERAGE = 0.99
GROWTH_FLOOR = 0.01


def cube_root_ceiling(n):
    """Smallest integer ``m`` with ``m**3 >= n``."""
    m = max(1, round(n ** (1.0 / 3.0)))
    while m ** 3 < n:
        m += 1
    while m > 1 and (m - 1) ** 3 >= n:
        m -= 1
    return m


def window_stop(epsilon, total_edges):
    """Last step ``floor((1 - epsilon) N)`` of the diagnostics window."""
    return math.floor((1.0 - epsilon) * total_edges)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run of replicas depends on.

    ``nu=None`` means the default burn-in ``ceil(n**(1/3))``. With an IID
    degree source every replica samples its own degrees unless
    ``fixed_sequence`` is set.
    """

    degree_source: DegreeSource
    n: int
    lambda1: float
    lambda2: float
    replicas: int
    seed: int
    n_values: tuple = ()
    seeds: object = 'uniform'
    nu: int = None
    epsilon: float = 0.1
    thinning: int = DEFAULT_THINNING
    full_steps: int = FULL_TRAJECTORY_STEPS
    simple: bool = False
    fixed_sequence: bool = False
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    workers: int = 1
    debug: bool = False

    def __post_init__(self):
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("lambdas must be positive")

    def nu_for(self, n):
        return self.nu if self.nu is not None else cube_root_ceiling(n)

    def with_n(self, n):
        return replace(self, n=n)

    def describe(self):
        data = asdict(self)
        data['degree_source'] = self.degree_source.describe()
        data['n_values'] = list(self.n_values)
        if not isinstance(self.seeds, str):
            data['seeds'] = [list(s) if isinstance(s, (tuple, list)) else s for s in self.seeds]
        return data


def replica_generator(seed, index):
    """Generator for replica ``index``, independent of every other index."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass
class ReplicaResult:
    """Per-replica statistics (one row of the ensemble CSV)."""

    index: int
    n: int
    N: int
    a1: int
    a2: int
    n1: int
    n2: int
    frac1: float
    frac2: float
    nu: int
    stop: int
    sup_deviation: float
    qv: float
    min_growth: float
    termination_step: int
    trajectory: object = field(default=None, repr=False, compare=False)

    columns = (
        'index', 'n', 'N', 'a1', 'a2', 'n1', 'n2', 'frac1', 'frac2', 'nu', 'stop',
        'sup_deviation', 'qv', 'min_growth', 'termination_step',
    )

    def as_row(self):
        return {name: getattr(self, name) for name in self.columns}


def run_single(config, index=0, fixed=None):
    """One full competition on replica stream ``index``.

    Returns:
        ``(outcome, nu, stop)`` where ``[nu, stop]`` is the diagnostics window
    """
    rng = replica_generator(config.seed, index)
    seq = fixed if fixed is not None else config.degree_source.realize(config.n, rng)
    nu = config.nu_for(seq.n)
    stop = window_stop(config.epsilon, seq.total_edges)
    partners = None
    if config.simple:
        partners = sample_simple_graph(seq, rng, config.max_attempts).pairing
    state = init(
        seq, config.seeds, config.lambda1, config.lambda2, rng,
        partners=partners, thinning=config.thinning, full_steps=config.full_steps,
        checkpoints=(max(nu - 1, 0), nu, stop), window=(nu, stop) if nu <= stop else None,
        debug=config.debug,
    )
    return run_to_termination(state, rng), nu, stop


def summarize_outcome(index, outcome, nu, stop, keep_trajectory=False):
    """Per-replica statistics of a finished run; NaN where the window was not reached."""
    monitor = outcome.window
    covered = bool(monitor) and monitor['start'] <= outcome.termination_step
    min_growth = monitor.get('min_growth') if covered else None
    return ReplicaResult(
        index=index, n=outcome.n, N=outcome.N, a1=outcome.a1, a2=outcome.a2,
        n1=outcome.n1, n2=outcome.n2, frac1=outcome.frac1, frac2=outcome.frac2,
        nu=nu, stop=stop,
        sup_deviation=monitor['sup_deviation'] if covered else math.nan,
        qv=monitor['qv'] if covered else math.nan,
        min_growth=math.nan if min_growth is None else min_growth,
        termination_step=outcome.termination_step,
        trajectory=outcome.trajectory if keep_trajectory else None,
    )


def run_replica(config, index, fixed=None, keep_trajectory=False):
    """Run replica ``index`` of ``config`` and collect its statistics."""
    try:
        outcome, nu, stop = run_single(config, index, fixed)
    except CompetitionError as error:
        raise ReplicaError(index, error) from error
    return summarize_outcome(index, outcome, nu, stop, keep_trajectory)


def _mean(values):
    return math.fsum(values) / len(values) if values else math.nan


def _std(values):
    if len(values) < 2:
        return 0.0
    centre = _mean(values)
    return math.sqrt(math.fsum((v - centre) ** 2 for v in values) / (len(values) - 1))


def _describe(values):
    finite = sorted(v for v in values if not math.isnan(v))
    if not finite:
        return {'count': 0, 'mean': None, 'std': None, 'quantiles': {}}
    quantiles = np.quantile(finite, QUANTILES)
    return {
        'count': len(finite),
        'mean': _mean(finite),
        'std': _std(finite),
        'min': finite[0],
        'max': finite[-1],
        'quantiles': {str(q): float(v) for q, v in zip(QUANTILES, quantiles)},
    }


@dataclass
class EnsembleReport:
    """Per-replica results of one ensemble, in replica order.

    Attributes:
        config: the resolved configuration, as echoed into the JSON report
        replicas: list of :class:`ReplicaResult`
    """
    config: dict
    replicas: list

    def column(self, name):
        return [getattr(r, name) for r in self.replicas]

    def rows(self):
        return [r.as_row() for r in self.replicas]

    def summary(self):
        """Aggregates; invariant under reordering of the replicas."""
        frac1 = sorted(self.column('frac1'))
        frac2 = self.column('frac2')
        total = [a + b for a, b in zip(self.column('frac1'), frac2)]
        low, high = COEXISTENCE_BAND
        growth = [g for g in self.column('min_growth') if not math.isnan(g)]
        counts, _ = np.histogram(frac1, bins=10, range=(0.0, 1.0))
        return {
            'replicas': len(self.replicas),
            'frac1': _describe(frac1),
            'frac2': _describe(frac2),
            'frac1_histogram': counts.tolist(),
            'coexistence_share': sum(low < f < high for f in frac1) / len(frac1),
            'full_coverage_share': sum(t >= FULL_COVERAGE for t in total) / len(total),
            'sup_deviation': _describe(self.column('sup_deviation')),
            'qv': _describe(self.column('qv')),
            'min_growth': _describe(growth),
            # replicas that stopped before the window count against the floor
            'growth_floor_share': sum(g >= GROWTH_FLOOR for g in growth) / len(self.replicas),
            'ended_before_window': len(self.replicas) - len(growth),
            'a1': _describe([float(a) for a in self.column('a1')]),
            'a2': _describe([float(a) for a in self.column('a2')]),
        }

    def symmetry_pvalue(self):
        """Two-sample KS p-value between the ``frac1`` and ``frac2`` columns."""
        return float(scipy_stats.ks_2samp(self.column('frac1'), self.column('frac2')).pvalue)


def run_ensemble(config, keep_trajectories=False):
    """Run ``config.replicas`` independent competitions.

    Deterministic given ``config.seed``; the worker count does not change
    the result.
    """
    fixed = None
    if not config.degree_source.is_iid:
        fixed = config.degree_source.fixed_sequence()
    elif config.fixed_sequence:
        fixed = config.degree_source.realize(
            config.n, replica_generator(config.seed, FIXED_SEQUENCE_KEY)
        )
    logger.info(
        "Running %d replica(s): n=%s lambdas=(%s, %s) seed=%d workers=%d",
        config.replicas, fixed.n if fixed is not None else config.n,
        config.lambda1, config.lambda2, config.seed, config.workers,
    )
    jobs = (delayed(run_replica)(config, index, fixed, keep_trajectories)
            for index in range(config.replicas))
    results = Parallel(n_jobs=config.workers)(jobs)
    return EnsembleReport(config=config.describe(), replicas=list(results))


def _range_end(trajectory, nu, epsilon, N):
    """Closing step of the window, clipped to the last recorded step.

    Raises:
        RangeNotCovered: if ``nu`` was not recorded or lies past the closing step
    """
    stop = min(window_stop(epsilon, N), trajectory.last_step)
    if nu not in trajectory or nu > stop:
        raise RangeNotCovered(f"Trajectory does not cover steps [{nu}, {stop}]")
    return stop


def constancy_statistic(trajectory, nu, epsilon, N):
    """``sup |M_k - M_nu|`` over the recorded steps in ``[nu, (1-epsilon)N]``.

    Only recorded steps are visited, so a thinned trajectory gives a lower
    bound on the true supremum. A run that stopped before ``(1-epsilon)N``
    is read up to its last step.
    """
    stop = _range_end(trajectory, nu, epsilon, N)
    anchor = trajectory.m_at(nu)
    deviation = 0.0
    for k, m in zip(trajectory.k, trajectory.m):
        if nu <= k <= stop:
            deviation = max(deviation, abs(m - anchor))
    return deviation


def qv_statistic(trajectory, nu, epsilon, N):
    """Sum of ``(M_k - M_{k-1})**2`` for ``nu <= k <= (1-epsilon)N``.

    The increment into step ``nu`` is part of the sum (there is none into
    step 0). Recomputed from the samples when every step from ``nu - 1`` on
    was recorded, otherwise read from the running sum the engine stores with
    each sample.

    Args:
        trajectory: a :class:`~competition.exploration.Trajectory`
        nu: burn-in step opening the window
        epsilon: the window closes at ``floor((1 - epsilon) N)``
        N: total number of edges

    Raises:
        RangeNotCovered: if ``nu``, ``nu - 1`` or the closing step is missing
    """
    stop = _range_end(trajectory, nu, epsilon, N)
    first = max(nu, 1)
    if trajectory.is_complete_between(first - 1, stop):
        total = 0.0
        previous = trajectory.m_at(first - 1)
        for k in range(first, stop + 1):
            current = trajectory.m_at(k)
            total += (current - previous) ** 2
            previous = current
        return total
    if stop not in trajectory or first - 1 not in trajectory:
        raise RangeNotCovered(f"Steps {first - 1} and {stop} needed from a thinned trajectory")
    return trajectory.row(stop)['qv'] - trajectory.row(first - 1)['qv']


@dataclass
class ScalingReport:
    """Growth of the weaker type's median count with ``n`` (exploratory)."""

    sizes: list
    medians: list
    slope: float
    interval: tuple
    ratio: float
    bootstrap: int
    exploratory: bool = True

    @property
    def contains_ratio(self):
        return self.interval[0] <= self.ratio <= self.interval[1]

    def summary(self):
        return {
            'sizes': self.sizes,
            'medians': self.medians,
            'slope': self.slope,
            'interval': list(self.interval),
            'expected_slope': self.ratio,
            'contains_expected': self.contains_ratio,
            'bootstrap': self.bootstrap,
            'exploratory': self.exploratory,
        }


def _slope(sizes, medians):
    return float(np.polyfit(np.log(sizes), np.log(medians), 1)[0])


def scaling_study(config, n_values=None, bootstrap=1000, confidence=0.95):
    """Regress ``log median N1`` on ``log n`` with a bootstrap interval.

    The conjectured slope is ``lambda1 / lambda2``; a miss is logged, never
    raised.

    Raises:
        InsufficientSizes: fewer than three sizes, or sizes spanning less than
            two decades
    """
    sizes = sorted(set(n_values or config.n_values))
    if len(sizes) < 3 or sizes[-1] < 100 * sizes[0]:
        raise InsufficientSizes(f"Need three sizes spanning two decades, got {sizes}")
    counts = []
    for n in sizes:
        report = run_ensemble(config.with_n(n))
        counts.append(np.asarray(report.column('n1'), dtype=float))
    medians = [float(np.median(c)) for c in counts]
    slope = _slope(sizes, medians)

    rng = replica_generator(config.seed, BOOTSTRAP_KEY)
    slopes = np.empty(bootstrap)
    for b in range(bootstrap):
        resampled = [np.median(rng.choice(c, size=c.size, replace=True)) for c in counts]
        slopes[b] = _slope(sizes, resampled)
    tail = (1.0 - confidence) / 2.0
    interval = (float(np.quantile(slopes, tail)), float(np.quantile(slopes, 1.0 - tail)))
    report = ScalingReport(sizes=sizes, medians=medians, slope=slope, interval=interval,
                           ratio=config.lambda1 / config.lambda2, bootstrap=bootstrap)
    if not report.contains_ratio:
        logger.warning(
            "Scaling slope %.3f with interval [%.3f, %.3f] misses lambda1/lambda2=%.3f",
            slope, interval[0], interval[1], report.ratio,
        )
    return report


def _fraction(s1, s2, previous):
    total = s1 + s2
    return Fraction(s1, total) if total else previous


def martingale_enumeration_oracle(seq, seeds, lambda_ratio, max_half_edges=10):
    """Exact check of ``E[M_{k+1} | state] = M_k`` over every reachable state.

    Walks the whole jump-chain tree with rational probabilities; the
    intensities enter only through ``lambda_ratio = lambda1 / lambda2``.

    Returns:
        the largest ``|E[M_{k+1} | state] - M_k|`` as a float

    Raises:
        InstanceTooLarge: if ``2N`` exceeds ``max_half_edges``
    """
    total = seq.total_half_edges
    if total > max_half_edges:
        raise InstanceTooLarge(f"{total} half-edges exceed the enumeration limit {max_half_edges}")
    weights = (None, Fraction(lambda_ratio), Fraction(1))
    owner = seq.owners.tolist()
    offsets = seq.offsets.tolist()

    status = [0] * total
    vertex_type = [0] * seq.n
    for kind, vertex in enumerate(seeds, start=1):
        vertex_type[vertex] = kind
        for h in range(offsets[vertex], offsets[vertex + 1]):
            status[h] = kind
    start = (tuple(status), tuple(vertex_type))
    first = _fraction(status.count(1), status.count(2), None)

    worst = Fraction(0)
    seen = set()
    stack = [(start, first)]
    while stack:
        (status, vertex_type), m = stack.pop()
        if (status, vertex_type, m) in seen:
            continue
        seen.add((status, vertex_type, m))
        pools = {kind: [h for h, s in enumerate(status) if s == kind] for kind in (1, 2)}
        free = [h for h, s in enumerate(status) if s != 3]
        rate = weights[1] * len(pools[1]) + weights[2] * len(pools[2])
        if rate == 0 or len(free) < 2:
            continue
        expected = Fraction(0)
        for kind in (1, 2):
            pool = pools[kind]
            if not pool:
                continue
            per_q = weights[kind] / rate
            for q in pool:
                for r in free:
                    if r == q:
                        continue
                    p = per_q / (len(free) - 1)
                    nxt = list(status)
                    types = list(vertex_type)
                    nxt[q] = nxt[r] = 3
                    target = owner[r]
                    if types[target] == 0:
                        types[target] = kind
                        for h in range(offsets[target], offsets[target + 1]):
                            if h != r:
                                nxt[h] = kind
                    m_next = _fraction(nxt.count(1), nxt.count(2), m)
                    expected += p * m_next
                    stack.append(((tuple(nxt), tuple(types)), m_next))
        worst = max(worst, abs(expected - m))
    logger.debug("Enumerated %d states; worst residual %s", len(seen), worst)
    return float(worst)
