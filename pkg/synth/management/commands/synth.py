from core.commands import W5HCommand
from synth.generator import SynthSpec, generate_corpus


class Command(W5HCommand):
    help = "Generate a seeded synthetic trace corpus with its ground truth."

    def add_command_arguments(self, parser):
        parser.add_argument('--spec', help="Synthetic corpus spec JSON; the built-in defaults otherwise.")
        parser.add_argument('--out', required=True, help="Corpus JSONL to write.")
        parser.add_argument('--truth', help="Ground-truth JSON to write.")
        parser.add_argument('--geocache', help="Geocode cache JSON for the place pool.")
        parser.add_argument('--objects', type=int, help="Override the spec's object count.")
        parser.add_argument('--seed', type=int, help="Override the spec's seed.")

    def run(self, config, **options):
        spec = SynthSpec.load(options.get('spec'))
        changes = {key: options[key] for key in ('objects', 'seed') if options.get(key) is not None}
        if changes:
            spec = spec.with_changes(**changes)

        result = generate_corpus(spec)
        result.write(options['out'], options.get('truth'), options.get('geocache'))

        rates = result.truth['rates']
        self.emit(
            options,
            {'objects': len(result.objects), 'entities': len(result.truth['entities']), 'rates': rates,
             'output': options['out']},
            f"Wrote {len(result.objects)} objects to {options['out']} "
            f"(who {rates['who']:.3f}, when {rates['when']:.3f}, what {rates['what']:.3f}, where {rates['where']:.3f}).",
        )
