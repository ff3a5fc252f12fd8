import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.test import SimpleTestCase, tag

from core.models import PersonRef
from entity_resolution.models import GeocodeCache, name_key, normalize_surface
from entity_resolution.resolver import load_truth_forms, pairwise_quality, resolve_corpus
from entity_resolution.swoosh import match_person
from ingest.parsers import load_corpus

from .generator import ALIAS_KINDS, CANONICAL, CorpusGenerator, SynthSpec, generate_corpus, make_vocabulary
from .pools import FIRST_NAMES, PLACES, SURNAMES


def small_spec(**changes):
    return SynthSpec.from_dict({'objects': 300, 'seed': 5, **changes})


class SynthSpecTests(SimpleTestCase):

    def test_defaults(self):
        spec = SynthSpec.from_dict()
        self.assertEqual(spec.objects, 5000)
        self.assertEqual(spec.entities, 40)
        self.assertEqual(len(spec.groups), 3)
        self.assertAlmostEqual(sum(spec.sources.values()), 1.0)

    def test_mixture_must_sum_to_one(self):
        with self.assertRaises(ValidationError) as raised:
            SynthSpec.from_dict({'sources': {'gmail': 0.5, 'twitter': 0.4}})
        self.assertEqual(raised.exception.code, 'invalid_spec')
        self.assertNotIn('Group source', ' '.join(raised.exception.messages))
        self.assertIn('sources', ' '.join(raised.exception.messages))

    def test_alias_rate_range(self):
        with self.assertRaises(ValidationError):
            SynthSpec.from_dict({'alias_rate': 1.5})

    def test_group_larger_than_pool(self):
        with self.assertRaises(ValidationError) as raised:
            SynthSpec.from_dict({'entities': 2, 'groups': [{'members': [0, 1, 2], 'rate': 0.1, 'source': 'gmail'}]})
        self.assertEqual(raised.exception.code, 'infeasible_spec')

    def test_group_member_outside_pool(self):
        with self.assertRaises(ValidationError) as raised:
            SynthSpec.from_dict({'entities': 5, 'groups': [{'members': [1, 7], 'rate': 0.1}]})
        self.assertEqual(raised.exception.code, 'infeasible_spec')

    def test_groups_cannot_outnumber_who(self):
        with self.assertRaises(ValidationError) as raised:
            SynthSpec.from_dict({'who_rate': 0.1})
        self.assertEqual(raised.exception.code, 'infeasible_spec')

    def test_unknown_key(self):
        with self.assertRaises(ValidationError) as raised:
            SynthSpec.from_dict({'owners': 3})
        self.assertEqual(raised.exception.code, 'invalid_spec')

    def test_with_changes_keeps_the_rest(self):
        spec = small_spec().with_changes(seed=9)
        self.assertEqual((spec.objects, spec.seed), (300, 9))
        self.assertEqual(spec.groups, small_spec().groups)


class GenerateCorpusTests(SimpleTestCase):

    def test_zero_objects(self):
        result = generate_corpus(small_spec(objects=0))
        self.assertEqual(result.objects, [])
        self.assertEqual(result.truth['entities'], [])
        self.assertEqual(result.truth['rates'], {'who': 0.0, 'when': 0.0, 'what': 0.0, 'where': 0.0})

    def test_same_seed_same_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = []
            for run in range(2):
                paths.append([Path(tmp) / f'{name}{run}' for name in ('corpus', 'truth', 'geocache')])
                generate_corpus(small_spec()).write(*paths[-1])
            for first, second in zip(*paths):
                self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_seed_changes_the_corpus(self):
        first = generate_corpus(small_spec())
        second = generate_corpus(small_spec(seed=6))
        self.assertNotEqual(first.objects, second.objects)

    def test_objects_are_well_formed(self):
        result = generate_corpus(small_spec())
        ids = [obj.id for obj in result.objects]
        self.assertEqual(len(ids), len(set(ids)))
        for obj in result.objects:
            self.assertTrue(obj.id.startswith(obj.source + '-'))
            self.assertEqual(len(obj.how), 1)
            self.assertLessEqual(len(obj.when), 1)
            if obj.who:
                self.assertEqual(obj.who[0].role, 'from')
                self.assertTrue(all(ref.role == 'to' for ref in obj.who[1:]))

    def test_file_round_trip(self):
        result = generate_corpus(small_spec())
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'corpus.jsonl'
            result.write(path)
            self.assertEqual(load_corpus(str(path)), result.objects)

    def test_no_aliases_gives_identity_truth(self):
        result = generate_corpus(small_spec(alias_rate=0.0))
        for entity in result.truth['entities']:
            self.assertEqual(len(entity['forms']), 1)
        resolution = resolve_corpus(result.objects, GeocodeCache())
        self.assertEqual(len(resolution.persons), len(result.truth['entities']))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'truth.json'
            result.write(Path(tmp) / 'corpus.jsonl', path)
            quality = pairwise_quality(resolution, load_truth_forms(str(path)))
        self.assertEqual((quality['precision'], quality['recall']), (1.0, 1.0))

    def test_alias_forms_match_only_their_entity(self):
        spec = small_spec(alias_rate=0.6)
        result = generate_corpus(spec)
        canonical = {entity.truth_id: PersonRef(*entity.form(CANONICAL)) for entity in CorpusGenerator(spec).entities}
        refs = {
            entity['id']: [PersonRef(raw_name=form['name'], raw_emails=tuple(form['emails'])) for form in entity['forms']]
            for entity in result.truth['entities']
        }
        self.assertTrue(any(len(forms) > 1 for forms in refs.values()))
        for truth_id, forms in refs.items():
            for ref in forms:
                self.assertTrue(match_person(ref, canonical[truth_id]), ref)
            for other_id, others in refs.items():
                if other_id != truth_id:
                    self.assertFalse(any(match_person(ref, other) for ref in forms for other in others))

    def test_aliases_never_merge_two_people(self):
        result = generate_corpus(small_spec(alias_rate=0.3))
        resolution = resolve_corpus(result.objects, GeocodeCache())
        forms = [
            (entity['id'], PersonRef(raw_name=form['name'], raw_emails=tuple(form['emails'])))
            for entity in result.truth['entities'] for form in entity['forms']
        ]
        self.assertEqual(pairwise_quality(resolution, forms)['precision'], 1.0)

    def test_every_form_kind_matches_canonical(self):
        entity = CorpusGenerator(small_spec()).entities[0]
        canonical = PersonRef(*entity.form(CANONICAL))
        for kind in ALIAS_KINDS:
            self.assertTrue(match_person(PersonRef(*entity.form(kind)), canonical), kind)

    def test_geocache_lists_decoys_first(self):
        result = generate_corpus(small_spec())
        self.assertEqual(
            [candidate['address'] for candidate in result.geocache['Campos']],
            ['Campos, Balearic Islands, Spain', 'Campos, Rio de Janeiro, Brazil'],
        )
        self.assertNotIn('Home', result.geocache)
        self.assertEqual(result.geocache['Hellas'], result.geocache['Greece'])

    def test_hints_resolve_ambiguous_places(self):
        result = generate_corpus(small_spec(objects=200, where_rate=1.0, what_rate=1.0))
        resolution = resolve_corpus(result.objects, GeocodeCache.from_dict(result.geocache))
        places = {normalize_surface(surface): place for place in PLACES for surface in place.surfaces}
        addresses = {location.canonical_id: location.address for location in resolution.locations}
        seen = set()
        for obj in resolution.objects:
            for ref in obj.where:
                place = places[normalize_surface(ref.raw_text)]
                self.assertEqual(addresses[ref.canonical_id], place.address)
                if place.decoy:
                    seen.add(place.address)
        self.assertTrue(seen)

    def test_vocabulary_avoids_names(self):
        words = make_vocabulary(3000)
        self.assertEqual(len(set(words)), 3000)
        names = {token for name in FIRST_NAMES + SURNAMES for token in name_key(name)}
        self.assertFalse(names & set(words))

    @tag('slow')
    def test_default_spec_population_rates(self):
        spec = SynthSpec.from_dict()
        result = generate_corpus(spec)
        self.assertEqual(len(result.objects), 5000)
        targets = {'who': spec.who_rate, 'when': spec.when_rate, 'what': spec.what_rate, 'where': spec.where_rate}
        objects = result.objects
        for name, target in targets.items():
            measured = sum(1 for obj in objects if obj.get(name)) / len(objects)
            self.assertAlmostEqual(measured, result.truth['rates'][name])
            self.assertLessEqual(abs(measured - target), 0.02, name)
        for group in result.truth['groups']:
            self.assertLessEqual(abs(group['observed_rate'] - group['rate']), 0.02)


class SynthCommandTests(SimpleTestCase):

    def test_command_writes_corpus_and_truth(self):
        with tempfile.TemporaryDirectory() as tmp:
            corpus, truth = Path(tmp) / 'corpus.jsonl', Path(tmp) / 'truth.json'
            out = StringIO()
            call_command('synth', '--out', str(corpus), '--truth', str(truth), '--objects', '40', '--seed', '3',
                         stdout=out)
            self.assertEqual(len(load_corpus(str(corpus))), 40)
            self.assertEqual(json.loads(truth.read_text(encoding='utf-8'))['seed'], 3)
            self.assertIn('Wrote 40 objects', out.getvalue())
