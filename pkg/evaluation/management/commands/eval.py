import argparse
import os

from core.commands import W5HCommand
from entity_resolution.resolver import MERGE, Resolution, load_entities, resolve_people
from evaluation.models import DEFAULT_GROUPS, WhenPrecision
from evaluation.runner import (
    NO_ENTITY, load_cases, render_summary, run_cases, run_eval, summary_frame, write_cases, write_reports,
)
from ingest.parsers import load_corpus
from search.indexes import load_indexes


def _comma_list(value):
    return [item.strip() for item in value.split(',') if item.strip()]


def _comma_ints(value):
    try:
        return [int(item) for item in _comma_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated group numbers, got {value!r}")


class Command(W5HCommand):
    help = "Run the known-item evaluation: generated query groups ranked under every scorer."
    config_overrides = {
        'corpus': 'paths.corpus',
        'index': 'paths.index',
        'entities': 'paths.entities',
        'groups': 'groups',
        'scorers': 'scorers',
        'seed': 'seed',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--corpus', help="Entity-resolved corpus JSONL.")
        parser.add_argument('--index', help="Index directory built from that corpus.")
        parser.add_argument('--entities', help="Entity file; supplies the names generated queries use.")
        parser.add_argument('--groups', type=_comma_ints, help="Query groups to run, e.g. 1,2,3.")
        parser.add_argument('--scorers', type=_comma_list, help="Scorers to compare, e.g. w5hf,fieldbm25.")
        parser.add_argument('--seed', type=int, help="Query generation seed.")
        parser.add_argument('--out', required=True, help="Report directory.")
        parser.add_argument('--scenarios', type=int, help="Scenarios per group (250 unless given).")
        parser.add_argument(
            '--when-precision', choices=WhenPrecision.values, help="Precision of generated time values.",
        )
        parser.add_argument(
            '--entity-ablation', action='store_true', help=f"Also score {NO_ENTITY}: w5h-f without merged people.",
        )
        parser.add_argument('--cases', help="JSONL of hand-written cases; writes cases.csv.")

    def _resolution(self, config, corpus):
        path = config.path('entities')
        if path and os.path.exists(path):
            return load_entities(path)
        objects, persons, ref_entities = resolve_people(corpus)
        return Resolution(persons, [], objects=objects, mode=MERGE, ref_entities=ref_entities)

    def run(self, config, **options):
        corpus = load_corpus(config.path('corpus'))
        indexes = load_indexes(config.path('index'), corpus)
        resolution = self._resolution(config, corpus)
        names = {person.entity_id: person.label for person in resolution.persons}

        scorers = list(config.scorers)
        if options['entity_ablation'] and NO_ENTITY not in scorers:
            scorers.append(NO_ENTITY)

        specs = []
        for group_id in config.groups:
            spec = DEFAULT_GROUPS[group_id]
            if options.get('scenarios') is not None:
                spec = spec.with_scenarios(options['scenarios'])
            if options.get('when_precision'):
                spec = spec.with_precision(options['when_precision'])
            specs.append(spec)

        result = run_eval(corpus, indexes, specs, scorers, config.seed, names=names, config=config)
        written = write_reports(result, options['out'])
        if options.get('cases'):
            frame = run_cases(corpus, indexes, load_cases(options['cases']), scorers, resolution, config)
            written.append(write_cases(frame, options['out']))

        self.emit(
            options,
            {'summary': summary_frame(result).to_dict(orient='records'), 'written': written},
            render_summary(result) + f"\nWrote {len(written)} files to {options['out']}.",
        )
