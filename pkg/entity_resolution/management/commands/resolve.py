from core.commands import W5HCommand
from core.serialization import write_corpus
from entity_resolution.models import load_geocache
from entity_resolution.resolver import load_truth_forms, pairwise_quality, resolve_corpus, save_entities
from ingest.parsers import load_corpus


class Command(W5HCommand):
    help = "Resolve people and locations of a corpus into canonical entities."
    config_overrides = {
        'corpus': 'paths.corpus',
        'geocache': 'paths.geocache',
        'entities': 'paths.entities',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--corpus', help="Canonical corpus to resolve.")
        parser.add_argument('--geocache', help="Offline geocode cache JSON.")
        parser.add_argument('--output', required=True, help="Resolved corpus JSONL to write.")
        parser.add_argument('--entities', help="Where to write the entity file.")
        parser.add_argument('--no-merge', action='store_true', help="One entity per surface form, no matching.")
        parser.add_argument('--truth', help="Synth truth file; reports pairwise precision and recall.")

    def run(self, config, **options):
        corpus = load_corpus(config.path('corpus'))
        cache = load_geocache(config.path('geocache'))
        resolution = resolve_corpus(corpus, cache, merge=not options['no_merge'])
        write_corpus(resolution.objects, options['output'])
        save_entities(resolution, config.path('entities'))

        payload = {
            'objects': len(resolution.objects),
            'persons': len(resolution.persons),
            'locations': len(resolution.locations),
            'output': options['output'],
            'entities': config.path('entities'),
        }
        text = (
            f"Resolved {payload['objects']} objects: {payload['persons']} people, "
            f"{payload['locations']} locations."
        )
        if options.get('truth'):
            quality = pairwise_quality(resolution, load_truth_forms(options['truth']))
            payload['quality'] = quality
            text += f"\nPairwise precision {quality['precision']:.4f}, recall {quality['recall']:.4f}."
        self.emit(options, payload, text)
