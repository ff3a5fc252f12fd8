from core.commands import W5HCommand
from ingest.parsers import load_corpus
from search.indexes import build_indexes, save_indexes


class Command(W5HCommand):
    help = "Build the frequency and text indexes of an entity-resolved corpus."
    config_overrides = {'corpus': 'paths.corpus', 'output': 'paths.index'}

    def add_command_arguments(self, parser):
        parser.add_argument('--corpus', help="Entity-resolved corpus JSONL.")
        parser.add_argument('--output', help="Directory that receives the index files.")

    def run(self, config, **options):
        corpus = load_corpus(config.path('corpus'))
        frequency, text = build_indexes(corpus, config)
        output = config.path('index')
        save_indexes(output, corpus, frequency, text, config)
        self.emit(
            options,
            {'objects': len(corpus), 'users': len(frequency.f_user), 'groups': len(frequency.f_group), 'output': output},
            f"Indexed {len(corpus)} objects ({len(frequency.f_user)} users, {len(frequency.f_group)} groups) into {output}.",
        )
