from core.commands import W5HCommand
from core.serialization import write_corpus
from ingest.dictionary import load_dictionary
from ingest.parsers import WarningCollector, ingest_files


class Command(W5HCommand):
    help = "Parse raw source records (or canonical JSONL) into a canonical w5h corpus."
    config_overrides = {'dict': 'paths.dictionary', 'output': 'paths.corpus'}

    def add_command_arguments(self, parser):
        parser.add_argument('--input', nargs='+', required=True, help="Raw-record or canonical JSONL files.")
        parser.add_argument('--dict', help="Label dictionary JSON.")
        parser.add_argument('--output', help="Canonical corpus JSONL to write.")

    def run(self, config, **options):
        dictionary_path = config.path('dictionary')
        dictionary = load_dictionary(dictionary_path) if dictionary_path else None
        collector = WarningCollector()
        objects = ingest_files(
            options['input'],
            dictionary=dictionary,
            role_weights=config.role_weights,
            threads=config.threads,
            collector=collector,
        )
        output = config.path('corpus')
        write_corpus(objects, output)
        self.emit(
            options,
            {'objects': len(objects), 'warnings': collector.items, 'output': output},
            f"Wrote {len(objects)} objects to {output} ({len(collector)} warnings).",
        )
