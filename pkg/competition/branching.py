"""Two independent continuous-time Markov branching processes.

Each active half-edge of type ``i`` fires at rate ``lambda_i`` and is replaced
by ``xi`` new ones, ``xi`` drawn from the offspring law ``D* - 1``. Only the
population counts matter for the exponential races, so the simulation works
on counts. The two processes run on separate sub-streams of the generator
and are merged by event time; process 1 is unaffected by the parameters of
process 2 under a fixed seed.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .degrees import compute_stats
from .exceptions import InsufficientGrowth, InvalidPmf, InvariantViolation
from .exploration import init, run_until

logger = logging.getLogger(__name__)

DEFAULT_MAX_POPULATION = 10 ** 7
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


class OffspringLaw:
    """Sampler for an offspring law on the nonnegative integers."""

    def __init__(self, pmf):
        clean = {}
        for key, mass in pmf.items():
            value, mass = int(key), float(mass)
            if value < 0 or mass < 0:
                raise InvalidPmf(f"Invalid offspring entry {key}: {mass}")
            if mass > 0:
                clean[value] = clean.get(value, 0.0) + mass
        total = sum(clean.values())
        if not clean or abs(total - 1.0) > 1e-9:
            raise InvalidPmf(f"Offspring pmf sums to {total!r}, not 1")
        self.pmf = dict(sorted(clean.items()))
        self.support = list(self.pmf)
        self.cumulative = np.cumsum(list(self.pmf.values())) / total
        self.minimum = self.support[0]
        self.mean = sum(k * p for k, p in self.pmf.items())

    def sample(self, rng):
        if len(self.support) == 1:
            return self.support[0]
        index = int(np.searchsorted(self.cumulative, rng.random(), side='right'))
        return self.support[min(index, len(self.support) - 1)]


@dataclass(frozen=True)
class BranchingParams:
    """Initial populations, intensities and offspring law of a branching pair."""
    a1: int
    a2: int
    lambda1: float
    lambda2: float
    offspring_pmf: dict

    def __post_init__(self):
        if self.a1 < 0 or self.a2 < 0:
            raise ValueError("Initial populations must be nonnegative")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("Intensities must be positive")


@dataclass
class BranchingState:
    """Population counts of the pair at time ``t``."""

    b1: int
    b2: int
    t: float
    lambda1: float
    lambda2: float
    offspring_pmf: dict
    a1: int
    a2: int

    @property
    def fraction(self):
        total = self.b1 + self.b2
        return self.b1 / total if total else math.nan


@dataclass
class BranchingTrajectory:
    """Merged event history; row ``j`` is the state right after event ``j``
    (row 0 is time 0)."""

    t: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    final: BranchingState
    capped: bool = False

    def rows(self):
        return zip(self.t.tolist(), self.b1.tolist(), self.b2.tolist())

    def population_at(self, times):
        """Total population right after the last event at or before each time."""
        index = np.searchsorted(self.t, times, side='right') - 1
        return self.b1[index] + self.b2[index]


def _simulate_process(a, rate, law, t_end, rng, max_population):
    """Event times and populations of one process started from ``a``.

    Returns:
        ``(times, counts, final_population, capped)``
    """
    times, counts = [], []
    b, t = a, 0.0
    capped = False
    while b > 0:
        t += rng.standard_exponential() / (rate * b)
        if t > t_end:
            break
        new = b + law.sample(rng) - 1
        if law.minimum >= 1 and new < b:
            raise InvariantViolation(f"Population decreased from {b} to {new}")
        b = new
        times.append(t)
        counts.append(b)
        if b >= max_population:
            capped = True
            break
    return times, counts, b, capped


def simulate_branching_pair(a1, a2, lambda1, lambda2, offspring_pmf, t_end, rng,
                            max_population=DEFAULT_MAX_POPULATION, record=True):
    """Simulate the pair up to ``t_end``.

    Extinction is a valid outcome; a process at 0 simply has no more events.
    A process whose population reaches ``max_population`` stops early and the
    result is flagged ``capped``.

    Returns:
        :class:`BranchingTrajectory` (``record=True``) or the final
        :class:`BranchingState`
    """
    params = BranchingParams(a1, a2, lambda1, lambda2, offspring_pmf)
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    law = OffspringLaw(params.offspring_pmf)
    rng1, rng2 = rng.spawn(2)
    t1, c1, b1, cap1 = _simulate_process(a1, lambda1, law, t_end, rng1, max_population)
    t2, c2, b2, cap2 = _simulate_process(a2, lambda2, law, t_end, rng2, max_population)
    final = BranchingState(b1=b1, b2=b2, t=t_end, lambda1=lambda1, lambda2=lambda2,
                           offspring_pmf=law.pmf, a1=a1, a2=a2)
    if cap1 or cap2:
        logger.warning("Branching population capped at %d before t=%s", max_population, t_end)
    if not record:
        return final

    times = np.concatenate(([0.0], t1, t2))
    from_first = np.concatenate(([False], np.ones(len(t1), bool), np.zeros(len(t2), bool)))
    order = np.argsort(times, kind='stable')
    times, from_first = times[order], from_first[order]
    first_seen = np.cumsum(from_first)
    second_seen = np.cumsum(~from_first) - 1
    series1 = np.concatenate(([a1], np.asarray(c1, dtype=np.int64)))[first_seen]
    series2 = np.concatenate(([a2], np.asarray(c2, dtype=np.int64)))[second_seen]
    return BranchingTrajectory(t=times, b1=series1, b2=series2, final=final,
                               capped=cap1 or cap2)


@dataclass
class VDistribution:
    """Empirical law of ``b1 / (b1 + b2)`` at a sampling time."""

    samples: np.ndarray
    t_sample: float
    extinct: int = 0
    bins: int = 20
    histogram: list = field(default_factory=list)
    quantiles: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples.size:
            counts, _ = np.histogram(self.samples, bins=self.bins, range=(0.0, 1.0))
            self.histogram = counts.tolist()
            values = np.quantile(self.samples, QUANTILES)
            self.quantiles = {str(q): float(v) for q, v in zip(QUANTILES, values)}

    @property
    def mean(self):
        return float(self.samples.mean()) if self.samples.size else math.nan

    def summary(self):
        return {
            't_sample': self.t_sample,
            'replicas': int(self.samples.size) + self.extinct,
            'extinct': self.extinct,
            'mean': self.mean,
            'quantiles': self.quantiles,
            'histogram': self.histogram,
        }


def estimate_v_distribution(params, t_sample, replicas, rng, max_population=DEFAULT_MAX_POPULATION):
    """Sample the type-1 fraction of the branching pair at ``t_sample``.

    Replicas where both processes died out carry no fraction and are only
    counted in ``extinct``.
    """
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    fractions = []
    extinct = 0
    for stream in rng.spawn(replicas):
        state = simulate_branching_pair(
            params.a1, params.a2, params.lambda1, params.lambda2, params.offspring_pmf,
            t_sample, stream, max_population=max_population, record=False,
        )
        if state.b1 + state.b2 == 0:
            extinct += 1
        else:
            fractions.append(state.fraction)
    return VDistribution(samples=np.asarray(fractions, dtype=float), t_sample=t_sample, extinct=extinct)


def estimate_growth_rate(trajectories, min_population=10, grid_points=200):
    """Empirical Malthusian rate: slope of log total population against time.

    Each trajectory is sampled on a regular time grid from the moment its
    population reaches ``min_population`` until its horizon, or until its
    last event with a positive population if both types died out. With
    several trajectories the slope is pooled with per-trajectory intercepts.

    Args:
        trajectories: one :class:`BranchingTrajectory` or a list of them
        min_population: total population at which sampling starts
        grid_points: samples per trajectory

    Raises:
        InsufficientGrowth: if the usable populations span less than two
            decades
    """
    if isinstance(trajectories, BranchingTrajectory):
        trajectories = [trajectories]
    xs, ys = [], []
    smallest, largest = math.inf, 0
    for traj in trajectories:
        population = traj.b1 + traj.b2
        reached = np.nonzero(population >= min_population)[0]
        if reached.size == 0:
            continue
        start = traj.t[reached[0]]
        if population[-1] == 0:
            stop = traj.t[np.nonzero(population)[0][-1]]
        elif traj.capped:
            stop = traj.t[-1]
        else:
            stop = traj.final.t
        if stop <= start:
            continue
        grid = np.linspace(start, stop, grid_points)
        values = traj.population_at(grid)
        smallest = min(smallest, int(values.min()))
        largest = max(largest, int(values.max()))
        x = grid - grid.mean()
        y = np.log(values) - np.log(values).mean()
        xs.append(x)
        ys.append(y)
    if not xs or largest < 100 * smallest:
        raise InsufficientGrowth(
            f"Population range [{smallest}, {largest}] spans less than two decades"
        )
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    return float(np.dot(x, y) / np.dot(x, x))


def offspring_from_degrees(stats):
    """Offspring law ``D_n* - 1`` of the exploration."""
    return stats.offspring_pmf()


def default_t_sample(stats, n, lambdas):
    """Sampling time at which about ``n**(1/4)`` births are expected."""
    rate = max(lambdas) * (stats.mean_excess - 1.0)
    if rate <= 0:
        raise InsufficientGrowth(f"Offspring mean {stats.mean_excess} gives no growth")
    return math.log(n) / (4.0 * rate)


@dataclass
class CouplingReport:
    """Exploration counts at ``t_sample`` against the branching oracle."""

    t_sample: float
    replicas: int
    means: dict
    variances: dict
    z_scores: dict
    total_variation: float
    z_threshold: float

    @property
    def max_abs_z(self):
        return max(abs(z) for z in self.z_scores.values())

    @property
    def diverged(self):
        return self.max_abs_z > self.z_threshold

    def summary(self):
        return {
            't_sample': self.t_sample,
            'replicas': self.replicas,
            'means': self.means,
            'variances': self.variances,
            'z_scores': self.z_scores,
            'total_variation': self.total_variation,
            'diverged': self.diverged,
        }


def _z(a, b, se_a, se_b):
    scale = math.sqrt(se_a ** 2 + se_b ** 2)
    if scale == 0:
        return 0.0 if a == b else math.copysign(math.inf, a - b)
    return (a - b) / scale


def _moment_z_scores(name, sample, oracle):
    n = sample.size
    mean_s, mean_o = sample.mean(), oracle.mean()
    ddof = 1 if n > 1 else 0
    var_s, var_o = sample.var(ddof=ddof), oracle.var(ddof=ddof)
    z_mean = _z(mean_s, mean_o, math.sqrt(var_s / n), math.sqrt(var_o / n))
    dev_s = (sample - mean_s) ** 2
    dev_o = (oracle - mean_o) ** 2
    z_var = _z(var_s, var_o, dev_s.std() / math.sqrt(n), dev_o.std() / math.sqrt(n))
    means = {f'{name}_exploration': float(mean_s), f'{name}_branching': float(mean_o)}
    variances = {f'{name}_exploration': float(var_s), f'{name}_branching': float(var_o)}
    return means, variances, {f'{name}_mean': z_mean, f'{name}_variance': z_var}


def _binned_total_variation(first, second, bins):
    edges = []
    for axis in range(2):
        pooled = np.concatenate((first[:, axis], second[:, axis]))
        cut = np.unique(np.quantile(pooled, np.linspace(0.0, 1.0, bins + 1)))
        if cut.size < 2:
            cut = np.array([cut[0], cut[0] + 1.0])
        edges.append(cut)
    p, _, _ = np.histogram2d(first[:, 0], first[:, 1], bins=edges)
    q, _, _ = np.histogram2d(second[:, 0], second[:, 1], bins=edges)
    return float(0.5 * np.abs(p / p.sum() - q / q.sum()).sum())


def coupling_check(seq, lambdas, t_sample, replicas, rng, seeds='uniform', bins=10, z_threshold=4.0):
    """Compare ``(S1_t, S2_t)`` from the engine with the branching pair.

    Each replica seeds the engine, runs it to ``t_sample``, and simulates the
    branching pair from the same ``(a1, a2)`` with offspring ``D_n* - 1`` on
    an independent sub-stream.
    """
    lambda1, lambda2 = lambdas
    offspring = offspring_from_degrees(compute_stats(seq))
    engine_counts = np.zeros((replicas, 2))
    oracle_counts = np.zeros((replicas, 2))
    for index, stream in enumerate(rng.spawn(replicas)):
        engine_rng, oracle_rng = stream.spawn(2)
        state = init(seq, seeds, lambda1, lambda2, engine_rng, thinning=10 ** 9, full_steps=0)
        run_until(state, t_sample, engine_rng)
        engine_counts[index] = (state.s1, state.s2)
        final = simulate_branching_pair(state.a1, state.a2, lambda1, lambda2, offspring,
                                        t_sample, oracle_rng, record=False)
        oracle_counts[index] = (final.b1, final.b2)

    means, variances, z_scores = {}, {}, {}
    for axis, name in enumerate(('s1', 's2')):
        m, v, z = _moment_z_scores(name, engine_counts[:, axis], oracle_counts[:, axis])
        means.update(m)
        variances.update(v)
        z_scores.update(z)
    report = CouplingReport(
        t_sample=t_sample, replicas=replicas, means=means, variances=variances,
        z_scores=z_scores,
        total_variation=_binned_total_variation(engine_counts, oracle_counts, bins),
        z_threshold=z_threshold,
    )
    if report.diverged:
        logger.info("Coupling diverged at t=%s (max |z|=%.2f, n=%d)", t_sample, report.max_abs_z, seq.n)
    return report


def polya_urn_fractions(replicas, draws, rng, a1=1, a2=1):
    """Colour-1 fraction of Pólya urns after ``draws`` draws each.

    The jump chain of a race between two rate-1 Yule processes is this urn.
    """
    white = np.full(replicas, float(a1))
    black = np.full(replicas, float(a2))
    for _ in range(draws):
        pick = rng.random(replicas) < white / (white + black)
        white += pick
        black += ~pick
    return white / (white + black)
