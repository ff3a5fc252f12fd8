import os

from core.commands import W5HCommand
from core.serialization import read_query
from entity_resolution.resolver import load_entities
from ingest.parsers import load_corpus
from search.engine import SCORERS, W5HF, SearchEngine
from search.indexes import load_indexes


class Command(W5HCommand):
    help = "Rank a corpus for a structured w5h query."
    config_overrides = {'corpus': 'paths.corpus', 'index': 'paths.index', 'entities': 'paths.entities'}

    def add_command_arguments(self, parser):
        parser.add_argument('--query', required=True, help="Query JSON in the canonical query shape.")
        parser.add_argument('--corpus', help="Entity-resolved corpus the indexes were built from.")
        parser.add_argument('--index', help="Index directory written by the index command.")
        parser.add_argument('--entities', help="Entity file used to resolve names in the query.")
        parser.add_argument('--scorer', '--text-scorer', choices=SCORERS, default=W5HF, help="Ranking function.")
        parser.add_argument('--top', type=int, default=20, help="Number of results to show.")

    def run(self, config, **options):
        corpus = load_corpus(config.path('corpus'))
        frequency, text = load_indexes(config.path('index'), corpus)

        query = read_query(options['query'])
        entities = config.path('entities')
        if entities and os.path.exists(entities):
            query = load_entities(entities).resolve_query(query)

        engine = SearchEngine.from_config(corpus, frequency, text, config)
        results = engine.search(query, options['scorer'], options['top'])

        payload = {
            'scorer': options['scorer'],
            'results': [
                {'rank': rank, 'id': result.object_id, 'score': result.total_score, 'breakdown': result.breakdown}
                for rank, result in enumerate(results, start=1)
            ],
        }
        lines = [f"{'rank':>4}  {'score':>12}  id"]
        for rank, result in enumerate(results, start=1):
            lines.append(f"{rank:>4}  {result.total_score:>12.4f}  {result.object_id}")
            if options.get('verbosity', 1) >= 2:
                for term, value in result.breakdown.items():
                    lines.append(f"{'':>20}{term} = {value:.4f}")
        if not results:
            lines.append("No matching objects.")
        self.emit(options, payload, '\n'.join(lines))
