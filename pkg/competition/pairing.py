"""Uniform pairing of half-edges.

Half-edges carry global ids in ``[0, 2N)``; the half-edges of vertex ``v``
are the contiguous block ``offsets[v] .. offsets[v+1]-1`` of the degree
sequence. A pairing is stored as a ``partner`` array with
``partner[partner[h]] == h``.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

from .exceptions import MaxAttemptsExceeded, OddSetSize

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 1000


def uniform_matching(half_edges, rng):
    """Uniform perfect matching of ``half_edges``.

    Takes the first remaining half-edge of the pool and matches it to a
    uniform other remaining one, removing both by swapping them to the front.
    Every one of the ``(m-1)!!`` matchings has the same probability.

    Returns:
        list of ``(a, b)`` pairs in the order they were formed
    """
    pool = sorted(half_edges)
    size = len(pool)
    if size % 2:
        raise OddSetSize(size)
    pairs = []
    for i in range(0, size, 2):
        j = int(rng.integers(i + 1, size))
        pool[i + 1], pool[j] = pool[j], pool[i + 1]
        pairs.append((pool[i], pool[i + 1]))
    return pairs


@dataclass(frozen=True, eq=False)
class Multigraph:
    """A configuration-model graph together with the pairing that built it.

    Attributes:
        n: number of vertices
        edges: ``(N, 2)`` array of vertex pairs; self-loops appear as ``(u, u)``
        pairing: partner array over global half-edge ids
    """

    n: int
    edges: np.ndarray
    pairing: np.ndarray

    @property
    def edge_count(self):
        return int(self.edges.shape[0])

    def degrees(self):
        """Degree of every vertex, a self-loop counting twice."""
        counts = np.bincount(self.edges.ravel(), minlength=self.n)
        return counts.astype(np.int64)

    def canonical_edges(self):
        """Sorted edge list with ``u <= v`` per edge, usable as a dict key."""
        ordered = np.sort(self.edges, axis=1)
        return tuple(sorted(map(tuple, ordered.tolist())))

    def to_networkx(self):
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges.tolist())
        return graph


def pairing_to_graph(seq, partner):
    """Build the :class:`Multigraph` of a complete partner array."""
    partner = np.asarray(partner, dtype=np.int64)
    ids = np.arange(partner.shape[0], dtype=np.int64)
    first = ids < partner
    owners = seq.owners
    edges = np.column_stack((owners[ids[first]], owners[partner[first]]))
    return Multigraph(n=seq.n, edges=edges, pairing=partner)


def generate_configuration_graph(seq, rng):
    """Pair all ``2N`` half-edges of ``seq`` uniformly at random."""
    partner = np.empty(seq.total_half_edges, dtype=np.int64)
    # consecutive pairs of a uniform permutation form a uniform matching
    order = rng.permutation(seq.total_half_edges)
    a, b = order[0::2], order[1::2]
    partner[a] = b
    partner[b] = a
    return pairing_to_graph(seq, partner)


def is_simple(graph):
    """True iff ``graph`` has no self-loop and no repeated vertex pair."""
    edges = graph.edges
    if edges.shape[0] == 0:
        return True
    if np.any(edges[:, 0] == edges[:, 1]):
        return False
    ordered = np.sort(edges, axis=1)
    return np.unique(ordered, axis=0).shape[0] == ordered.shape[0]


def sample_simple_graph(seq, rng, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """Rejection-sample a uniform simple graph with the degrees of ``seq``.

    Raises:
        MaxAttemptsExceeded: if ``max_attempts`` configuration graphs were all
            non-simple
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    warn_at = max(1, max_attempts // 10)
    for attempt in range(1, max_attempts + 1):
        graph = generate_configuration_graph(seq, rng)
        if is_simple(graph):
            logger.debug("Simple graph accepted after %d attempt(s)", attempt)
            return graph
        if attempt == warn_at and max_attempts > 1:
            logger.warning(
                "Still no simple graph after %d of %d attempts (n=%d)",
                attempt, max_attempts, seq.n,
            )
    raise MaxAttemptsExceeded(max_attempts)


def component_sizes(graph):
    """Connected component sizes, largest first."""
    sizes = [len(c) for c in nx.connected_components(graph.to_networkx())]
    return sorted(sizes, reverse=True)


def giant_component_fraction(graph):
    """Share of the vertices in the largest component."""
    sizes = component_sizes(graph)
    return sizes[0] / graph.n if sizes else 0.0


def write_edge_list(graph, path):
    """Write ``u v`` per line with 0-based vertex ids."""
    path = Path(path)
    with path.open('w', encoding='utf-8') as handle:
        for u, v in graph.edges.tolist():
            handle.write(f"{u} {v}\n")
    return path


def read_edge_list(path):
    """Read a ``u v`` edge list; blank lines and ``#`` comments are skipped.

    Returns:
        list of ``(u, v)`` integer pairs in file order
    """
    edges = []
    with open(path, encoding='utf-8') as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith('#'):
                u, v = line.split()
                edges.append((int(u), int(v)))
    return edges
