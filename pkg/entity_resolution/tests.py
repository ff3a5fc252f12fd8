import json
import random
import tempfile
from collections import Counter
from pathlib import Path

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from core.models import LocationRef, PersonRef, Query, TraceObject

from .locations import resolve_where
from .models import GeocodeCache, PersonEntity, load_geocache, name_key
from .resolver import load_truth_forms, pairwise_quality, resolve_corpus, resolve_people
from .swoosh import match_person, merge_person, rswoosh

FIRST = ['John', 'Anna', 'Maria', 'Nikos', 'Eleni', 'Paul']
LAST = ['Smith', 'Jones', 'Papas', 'Campos']
EMAILS = [f'user{n}@mail.test' for n in range(12)]


def random_ref(rng):
    first, last = rng.choice(FIRST), rng.choice(LAST)
    name = rng.choice([f'{first} {last}', f'{last}, {first}', f'{first[0]}. {last}', ''])
    emails = tuple(rng.sample(EMAILS, rng.choice([0, 0, 1, 2])))
    if not name and not emails:
        emails = (rng.choice(EMAILS),)
    return PersonRef(raw_name=name, raw_emails=emails)


def naive_closure(records):
    """Merge any matching pair, rescanning from the start until nothing matches."""
    entities = {}
    for record in records:
        entity = merge_person(record, record)
        entities[entity.entity_id] = merge_person(entities[entity.entity_id], entity) if entity.entity_id in entities else entity
    entities = list(entities.values())
    changed = True
    while changed:
        changed = False
        for i in range(len(entities)):
            for j in range(i + 1, len(entities)):
                if match_person(entities[i], entities[j]):
                    merged = merge_person(entities[i], entities[j])
                    entities = [e for k, e in enumerate(entities) if k not in (i, j)] + [merged]
                    changed = True
                    break
            if changed:
                break
    return sorted(entities, key=lambda entity: entity.entity_id)


def shape(entities):
    return [(e.entity_id, e.names, e.emails) for e in entities]


class MatchPersonTests(SimpleTestCase):

    def test_name_token_sets(self):
        self.assertTrue(match_person(PersonRef('John Smith', ('js@x.com',)), PersonRef('Smith, John')))
        self.assertFalse(match_person(PersonRef('John Smith'), PersonRef('John Smithe')))

    def test_shared_email_dominates(self):
        self.assertTrue(match_person(PersonRef('J. Smith', ('js@x.com',)), PersonRef('Jane Smith', ('JS@x.com',))))

    def test_initials_are_dropped(self):
        self.assertEqual(name_key('J. Smith'), frozenset({'smith'}))
        self.assertTrue(match_person(PersonRef('J. Smith'), PersonRef('Smith')))

    def test_empty_entity_rejected(self):
        with self.assertRaises(ValidationError):
            PersonEntity(entity_id='x')


class MergePersonTests(SimpleTestCase):

    def test_union(self):
        merged = merge_person(PersonRef('John Smith'), PersonRef('Smith John', ('js@x.com',)))
        self.assertEqual(merged.names, {'John Smith', 'Smith John'})
        self.assertEqual(merged.emails, {'js@x.com'})

    def test_idempotent(self):
        entity = PersonEntity(entity_id='e1', names={'John Smith'}, emails={'js@x.com'})
        self.assertEqual(merge_person(entity, entity), entity)

    def test_smallest_id_wins(self):
        a = PersonEntity(entity_id='b', names={'John Smith'})
        b = PersonEntity(entity_id='a', names={'Smith John'})
        self.assertEqual(merge_person(a, b).entity_id, 'a')

    def test_three_aliases_across_two_sources(self):
        refs = [
            PersonRef('John Smith', ('js@x.com',)),
            PersonRef('Smith, John'),
            PersonRef('J. Smith', ('john@work.test', 'js@x.com')),
        ]
        entities = rswoosh(refs)
        self.assertEqual(len(entities), 1)
        self.assertEqual(entities[0].names, {'John Smith', 'Smith, John', 'J. Smith'})
        self.assertEqual(len(entities[0].emails), 2)
        self.assertEqual(shape(entities), shape(naive_closure(refs)))

    def test_merge_properties_on_matching_inputs(self):
        rng = random.Random(7)
        checked = 0
        while checked < 10000:
            a, b, c = (merge_person(ref, ref) for ref in (random_ref(rng), random_ref(rng), random_ref(rng)))
            if not match_person(a, b):
                continue
            self.assertEqual(merge_person(a, b), merge_person(b, a))
            if match_person(b, c):
                self.assertEqual(merge_person(merge_person(a, b), c), merge_person(a, merge_person(b, c)))
            checked += 1


class RSwooshTests(SimpleTestCase):

    def test_empty(self):
        self.assertEqual(rswoosh([]), [])

    def test_unmatchable_refs_stay_apart(self):
        refs = [PersonRef('Anna Jones'), PersonRef('Paul Papas'), PersonRef('', ('x@y.test',))]
        self.assertEqual(len(rswoosh(refs)), 3)

    def test_equals_naive_closure(self):
        rng = random.Random(11)
        refs = [random_ref(rng) for _ in range(100)]
        entities = rswoosh(refs)
        self.assertEqual(shape(entities), shape(naive_closure(refs)))
        for i, a in enumerate(entities):
            for b in entities[i + 1:]:
                self.assertFalse(match_person(a, b))

    def test_order_independent(self):
        rng = random.Random(5)
        refs = [random_ref(rng) for _ in range(60)]
        expected = shape(rswoosh(refs))
        for _ in range(20):
            rng.shuffle(refs)
            self.assertEqual(shape(rswoosh(refs)), expected)


class ResolveWhereTests(SimpleTestCase):

    def corpus(self, brazil, france):
        return [
            TraceObject(id=f'o{n}', source='gmail', what=['Brazil trip'] if n < brazil else ['France trip'])
            for n in range(brazil + france)
        ]

    def test_aliases_share_one_entity(self):
        cache = GeocodeCache.from_dict({
            'Greece': [{'address': 'Greece', 'lat': 39.07, 'lon': 21.82}],
            'Hellas': [{'address': 'Greece', 'lat': 39.07, 'lon': 21.82}],
        })
        entities, refs = resolve_where([LocationRef('Greece'), LocationRef('Hellas')], cache, [])
        self.assertEqual(len(entities), 1)
        self.assertEqual(entities[0].surface_forms, {'Greece', 'Hellas'})
        self.assertEqual(refs[0].canonical_id, refs[1].canonical_id)

    def test_uncached_text_is_a_singleton(self):
        entities, refs = resolve_where([LocationRef('Student Center')], GeocodeCache(), [])
        self.assertEqual(len(entities), 1)
        self.assertEqual(entities[0].surface_forms, {'Student Center'})
        self.assertIsNone(entities[0].address)
        self.assertEqual(refs[0].canonical_id, entities[0].canonical_id)

    def test_ambiguous_text_ranked_by_corpus_term_frequency(self):
        cache = GeocodeCache.from_dict({'Campos': [
            {'address': 'Campos, Corse, France', 'lat': 42.1, 'lon': 9.2},
            {'address': 'Campos, Rio de Janeiro, Brazil', 'lat': -21.75, 'lon': -41.32},
        ]})
        entities, _ = resolve_where([LocationRef('Campos')], cache, self.corpus(brazil=40, france=0))
        self.assertEqual(entities[0].address, 'Campos, Rio de Janeiro, Brazil')

    def test_tie_keeps_cache_order(self):
        cache = GeocodeCache.from_dict({'Campos': [
            {'address': 'Campos, France'},
            {'address': 'Campos, Brazil'},
        ]})
        entities, _ = resolve_where([LocationRef('Campos')], cache, self.corpus(brazil=0, france=0))
        self.assertEqual(entities[0].address, 'Campos, France')

    def test_shared_coords_merge(self):
        refs = [LocationRef('Home', coords=(40.00001, 22.0)), LocationRef('My place', coords=(40.00002, 22.0))]
        entities, _ = resolve_where(refs, GeocodeCache(), [])
        self.assertEqual(len(entities), 1)

    def test_coords_within_tolerance_merge_across_cells(self):
        for near in ((40.10004, 40.10006), (40.09999, 40.10005), (40.1, 40.1001)):
            refs = [LocationRef('Home', coords=(near[0], 22.0)), LocationRef('My place', coords=(near[1], 22.0))]
            entities, _ = resolve_where(refs, GeocodeCache(), [])
            self.assertEqual(len(entities), 1, near)

    def test_coords_beyond_tolerance_stay_apart(self):
        refs = [LocationRef('Home', coords=(40.1, 22.0)), LocationRef('Office', coords=(40.1003, 22.0))]
        entities, refs = resolve_where(refs, GeocodeCache(), [])
        self.assertEqual(len(entities), 2)
        self.assertNotEqual(refs[0].canonical_id, refs[1].canonical_id)

    def test_malformed_cache_entries_rejected(self):
        for data in ({'Greece': [{'lat': 39.07, 'lon': 21.82}]}, {'Greece': {'address': 'Greece'}}, ['Greece']):
            with self.assertRaises(ValidationError) as raised:
                GeocodeCache.from_dict(data)
            self.assertEqual(raised.exception.code, 'invalid_geocache')


class ResolveCorpusTests(SimpleTestCase):

    def setUp(self):
        self.corpus = [
            TraceObject(id='m1', source='gmail', what=['hi'], who=[PersonRef('John Smith', ('js@x.com',))]),
            TraceObject(id='m2', source='gmail', what=['re: hi'], who=[PersonRef('J. Smith', ('js@x.com',))]),
            TraceObject(
                id='f1', source='facebook', who=[PersonRef('Smith, John'), PersonRef('Anna Smith')],
                where=[LocationRef('Washington')],
            ),
        ]

    def test_every_ref_resolved_and_other_dimensions_untouched(self):
        resolution = resolve_corpus(self.corpus, GeocodeCache())
        for before, after in zip(self.corpus, resolution.objects):
            self.assertEqual(before.what, after.what)
            self.assertEqual(before.when, after.when)
            self.assertEqual(before.how, after.how)
            self.assertTrue(all(ref.entity_id for ref in after.who))
            self.assertTrue(all(ref.canonical_id for ref in after.where))
        john = {ref.entity_id for obj in resolution.objects for ref in obj.who if 'Anna' not in ref.raw_name}
        self.assertEqual(len(john), 1)
        self.assertEqual(len(resolution.persons), 2)

    def test_emails_belong_to_one_entity(self):
        resolution = resolve_corpus(self.corpus, GeocodeCache())
        owners = Counter(email for person in resolution.persons for email in person.emails)
        self.assertTrue(all(count == 1 for count in owners.values()))

    def test_display_name_is_most_frequent_then_lexicographic(self):
        _, persons, _ = resolve_people(self.corpus)
        john = next(person for person in persons if 'js@x.com' in person.emails)
        self.assertEqual(john.display_name, 'J. Smith')

    def test_surface_mode_keeps_aliases_apart(self):
        _, persons, _ = resolve_people(self.corpus, merge=False)
        self.assertEqual(len(persons), 4)

    def test_resolve_query(self):
        resolution = resolve_corpus(self.corpus, GeocodeCache())
        query = resolution.resolve_query(
            Query(who=[PersonRef('John Smith'), PersonRef('Nobody Here')], where=[LocationRef('washington')])
        )
        self.assertEqual(query.who[0].entity_id, resolution.objects[0].who[0].entity_id)
        self.assertIsNone(query.who[1].entity_id)
        self.assertEqual(query.where[0].canonical_id, resolution.objects[2].where[0].canonical_id)

    def test_pairwise_quality(self):
        resolution = resolve_corpus(self.corpus, GeocodeCache())
        truth = [
            ('E1', PersonRef('John Smith', ('js@x.com',))),
            ('E1', PersonRef('Smith, John')),
            ('E2', PersonRef('Anna Smith')),
        ]
        quality = pairwise_quality(resolution, truth)
        self.assertEqual(quality['precision'], 1.0)
        self.assertEqual(quality['recall'], 1.0)


class LoaderTests(SimpleTestCase):

    def write(self, text):
        handle = tempfile.NamedTemporaryFile('w', suffix='.json', delete=False, encoding='utf-8')
        with handle:
            handle.write(text)
        self.addCleanup(Path(handle.name).unlink)
        return handle.name

    def test_truth_file(self):
        path = self.write(json.dumps({'entities': [{'id': 'E1', 'forms': [{'name': 'Ann Lee', 'emails': ['ann@x.org']}]}]}))
        self.assertEqual(load_truth_forms(path), [('E1', PersonRef('Ann Lee', ('ann@x.org',)))])

    def test_malformed_truth_file(self):
        with self.assertRaises(ValidationError) as raised:
            load_truth_forms(self.write('{"entities": ['))
        self.assertEqual(raised.exception.code, 'malformed_json')
        with self.assertRaises(ValidationError) as raised:
            load_truth_forms(self.write(json.dumps({'entities': [{'forms': [{'name': 'Ann Lee'}]}]})))
        self.assertEqual(raised.exception.code, 'invalid_truth')

    def test_malformed_geocache_file(self):
        with self.assertRaises(ValidationError) as raised:
            load_geocache(self.write('{"Greece": '))
        self.assertEqual(raised.exception.code, 'malformed_json')
        with self.assertRaises(ValidationError) as raised:
            load_geocache(self.write(json.dumps({'Greece': [{'lat': 39.07}]})))
        self.assertEqual(raised.exception.code, 'invalid_geocache')
