"""Sample one configuration-model graph and write it out."""

from competition.degrees import write_degree_file
from competition.ensemble import replica_generator
from competition.exports import write_json
from competition.management.base import ExperimentCommand
from competition.pairing import (
    generate_configuration_graph,
    giant_component_fraction,
    is_simple,
    sample_simple_graph,
    write_edge_list,
)


class Command(ExperimentCommand):
    """Write ``graph.edges`` (``u v`` per line, 0-based), ``degrees.txt`` and
    ``generate.json`` for one graph.

    Usage:
        python manage.py generate --degrees 2,2,2 --seed 1 --simple --out out/
    """
    help = 'Samples one configuration-model graph and writes its edge list and degree file'
    command_name = 'generate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--simple', action='store_true', help='Reject until the graph is simple')
        parser.add_argument('--max-attempts', type=int, help='Rejection budget for --simple')

    def run(self, serializer, options):
        data = serializer.validated_data
        source = serializer.degree_source()
        rng = replica_generator(data['seed'], 0)
        seq = source.realize(data['n'], rng)
        if data['simple']:
            graph = sample_simple_graph(seq, rng, data['max_attempts'])
        else:
            graph = generate_configuration_graph(seq, rng)

        out = self.output_dir(data['out'])
        write_edge_list(graph, out / 'graph.edges')
        write_degree_file(seq, out / 'degrees.txt')
        write_json({
            'config': self.resolved(serializer),
            'n': seq.n,
            'N': seq.total_edges,
            'simple': is_simple(graph),
            'giant_component_fraction': giant_component_fraction(graph),
            'assumptions': source.assumption_flags.as_dict(),
        }, out / 'generate.json')
        self.report(f"Wrote a graph with n={seq.n}, N={seq.total_edges} to {out}")
