"""Degree sequences for the configuration model.

A degree sequence is the vector ``(d_1, ..., d_n)`` of half-edge counts. This
module loads and samples sequences, computes the empirical law of ``D_n``
together with its size-biased version ``D_n*``, and reports which of the
regularity assumptions a sequence satisfies.

Vertices are indexed from 0 everywhere in the package.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .exceptions import InvalidPmf, NonPositiveDegree, OddTotalDegree

logger = logging.getLogger(__name__)

PMF_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class DegreeSequence:
    """A validated degree sequence.

    Attributes:
        degrees: int64 array of positive degrees, one per vertex
    """

    degrees: np.ndarray

    @property
    def n(self):
        return int(self.degrees.shape[0])

    @cached_property
    def total_half_edges(self):
        return int(self.degrees.sum())

    @property
    def total_edges(self):
        return self.total_half_edges // 2

    @cached_property
    def offsets(self):
        """First global half-edge id of every vertex, plus a final sentinel 2N."""
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=offsets[1:])
        return offsets

    @cached_property
    def owners(self):
        """Vertex owning each global half-edge id."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)

    def half_edges_of(self, vertex):
        return range(int(self.offsets[vertex]), int(self.offsets[vertex + 1]))

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, DegreeSequence):
            return NotImplemented
        return np.array_equal(self.degrees, other.degrees)

    def __hash__(self):
        return hash(self.degrees.tobytes())

    def __repr__(self):
        head = ", ".join(str(d) for d in self.degrees[:8])
        tail = ", ..." if self.n > 8 else ""
        return f"DegreeSequence(n={self.n}, N={self.total_edges}, degrees=({head}{tail}))"


@dataclass(frozen=True)
class DegreeStats:
    """Empirical law of ``D_n`` and of its size-biased version ``D_n*``."""

    pmf: dict
    mean: float
    second_moment: float
    size_biased_pmf: dict
    mean_excess: float

    def offspring_pmf(self):
        """Law of ``D_n* - 1``, the offspring law of the exploration."""
        return {d - 1: p for d, p in self.size_biased_pmf.items()}


@dataclass(frozen=True)
class AssumptionFlags:
    """Which of the degree assumptions a sequence or a pmf satisfies.

    Attributes:
        all_at_least_two: every degree is at least 2
        some_above_two: some degree exceeds 2 (with positive mass for a pmf)
        finite_second_moment_declared: finite support is known, only for pmfs
        supercritical: the mean excess degree exceeds 1
    """
    all_at_least_two: bool
    some_above_two: bool
    finite_second_moment_declared: bool
    supercritical: bool

    @property
    def satisfied(self):
        return self.all_at_least_two and self.some_above_two

    def as_dict(self):
        return {
            'all_at_least_two': self.all_at_least_two,
            'some_above_two': self.some_above_two,
            'finite_second_moment_declared': self.finite_second_moment_declared,
            'supercritical': self.supercritical,
        }


def load_degree_sequence(raw):
    """Validate a list of integers and wrap it as a :class:`DegreeSequence`.

    Raises:
        NonPositiveDegree: if the list is empty or holds an entry below 1
        OddTotalDegree: if the degrees sum to an odd number
    """
    values = [int(d) for d in raw]
    if not values:
        raise NonPositiveDegree(0, None)
    for index, value in enumerate(values):
        if value < 1:
            raise NonPositiveDegree(index, value)
    total = sum(values)
    if total % 2:
        raise OddTotalDegree(total)
    return DegreeSequence(np.asarray(values, dtype=np.int64))


def validate_pmf(pmf):
    """Return ``pmf`` with integer keys, or raise :class:`InvalidPmf`."""
    if not pmf:
        raise InvalidPmf("Degree pmf is empty")
    clean = {}
    for key, mass in pmf.items():
        degree = int(key)
        mass = float(mass)
        if degree < 1:
            raise InvalidPmf(f"Degree {degree} is not a positive integer")
        if mass < 0:
            raise InvalidPmf(f"Negative mass {mass} at degree {degree}")
        clean[degree] = clean.get(degree, 0.0) + mass
    total = sum(clean.values())
    if abs(total - 1.0) > PMF_TOLERANCE:
        raise InvalidPmf(f"Degree pmf sums to {total!r}, not 1")
    return dict(sorted(clean.items()))


def sample_iid_degrees(pmf, n, rng):
    """Draw ``n`` IID degrees from ``pmf`` and fix the parity if needed.

    When the draws sum to an odd number one uniformly chosen entry is
    increased by 1, which keeps every other draw untouched.
    """
    pmf = validate_pmf(pmf)
    if n < 1:
        raise ValueError(f"Cannot sample {n} degrees")
    support = np.fromiter(pmf.keys(), dtype=np.int64)
    probs = np.fromiter(pmf.values(), dtype=float)
    draws = rng.choice(support, size=n, p=probs / probs.sum())
    if int(draws.sum()) % 2:
        index = int(rng.integers(n))
        draws[index] += 1
        logger.debug("Parity fix applied at vertex %d", index)
    return DegreeSequence(draws.astype(np.int64))


def compute_stats(seq):
    """Exact empirical moments of ``D_n`` and the size-biased law."""
    values, counts = np.unique(seq.degrees, return_counts=True)
    n = seq.n
    total = int(np.dot(values, counts))
    square_total = int(np.dot(values * values, counts))
    pmf = {int(d): float(Fraction(int(c), n)) for d, c in zip(values, counts)}
    size_biased = {int(d): float(Fraction(int(d) * int(c), total)) for d, c in zip(values, counts)}
    return DegreeStats(
        pmf=pmf,
        mean=float(Fraction(total, n)),
        second_moment=float(Fraction(square_total, n)),
        size_biased_pmf=size_biased,
        mean_excess=float(Fraction(square_total - total, total)),
    )


def check_assumptions(seq):
    """Proxy flags for the degree assumptions on one finite sequence.

    Convergence of ``D_n`` cannot be checked from a single list, so
    ``finite_second_moment_declared`` is always False here.
    """
    stats = compute_stats(seq)
    return AssumptionFlags(
        all_at_least_two=int(seq.degrees.min()) >= 2,
        some_above_two=int(seq.degrees.max()) > 2,
        finite_second_moment_declared=False,
        supercritical=stats.mean_excess > 1.0,
    )


def pmf_assumptions(pmf):
    """Flags for an IID degree law with finite support."""
    pmf = validate_pmf(pmf)
    support = [d for d, p in pmf.items() if p > 0]
    mean = sum(d * p for d, p in pmf.items())
    second = sum(d * d * p for d, p in pmf.items())
    return AssumptionFlags(
        all_at_least_two=min(support) >= 2,
        some_above_two=max(support) > 2,
        finite_second_moment_declared=True,
        supercritical=(second - mean) / mean > 1.0,
    )


def read_degree_file(path):
    """Read one degree per line; blank lines and ``#`` comments are skipped."""
    values = []
    with open(path, encoding='utf-8') as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            values.append(int(line))
    return load_degree_sequence(values)


def write_degree_file(seq, path):
    """Write a ``# n=... N=...`` header, then one degree per line."""
    path = Path(path)
    with path.open('w', encoding='utf-8') as handle:
        handle.write(f"# n={seq.n} N={seq.total_edges}\n")
        for degree in seq.degrees:
            handle.write(f"{int(degree)}\n")
    return path


@dataclass(frozen=True)
class DegreeSource:
    """Where the degrees of a run come from.

    ``kind`` is ``explicit`` (a fixed list), ``file`` (a degree file, loaded
    once) or ``iid`` (a pmf sampled afresh for each realization).
    """

    kind: str
    values: tuple = ()
    pmf: dict = field(default_factory=dict)
    path: str = ''

    @classmethod
    def from_config(cls, config):
        """Build a source from the ``degrees`` block of a run config.

        Args:
            config: dict with ``kind`` and one of ``values``, ``path`` or ``pmf``

        Raises:
            ValueError: for an unknown kind
        """
        kind = config['kind']
        if kind == 'explicit':
            return cls(kind=kind, values=tuple(int(d) for d in config['values']))
        if kind == 'file':
            return cls(kind=kind, path=str(config['path']),
                       values=tuple(int(d) for d in read_degree_file(config['path']).degrees))
        if kind == 'iid':
            return cls(kind=kind, pmf=validate_pmf(config['pmf']))
        raise ValueError(f"Unknown degree source kind: {kind}")

    @property
    def is_iid(self):
        return self.kind == 'iid'

    def fixed_sequence(self):
        return load_degree_sequence(self.values)

    def realize(self, n, rng):
        """One degree sequence; ``n`` is ignored for explicit sources."""
        if self.is_iid:
            return sample_iid_degrees(self.pmf, n, rng)
        return self.fixed_sequence()

    @property
    def assumption_flags(self):
        if self.is_iid:
            return pmf_assumptions(self.pmf)
        return check_assumptions(self.fixed_sequence())

    def describe(self):
        if self.is_iid:
            return {'kind': self.kind, 'pmf': {str(d): p for d, p in self.pmf.items()}}
        if self.kind == 'file':
            return {'kind': self.kind, 'path': self.path}
        return {'kind': self.kind, 'values': list(self.values)}
