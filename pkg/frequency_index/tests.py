import random
import tempfile
from collections import Counter, defaultdict
from pathlib import Path

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from core.models import LocationRef, PersonRef, TimePoint, TraceObject
from core.persistence import read_versioned

from .builder import compute_frequency, load_index, save_index
from .models import FreqIndex, is_key_shaped, time_key, time_keys

SOURCES = ['gmail', 'facebook', 'twitter']
USERS = ['u1', 'u2', 'u3', 'u4', 'u5']
PLACES = ['loc-a', 'loc-b', 'loc-c']


def person(entity_id, role=None, weight=1.0):
    return PersonRef(raw_name=entity_id.upper(), entity_id=entity_id, role=role, role_weight=weight)


def random_corpus(rng, size, weighted=False):
    corpus = []
    for n in range(size):
        who = [
            person(user, role=rng.choice(['from', 'to']), weight=rng.choice([1.0, 0.5, 2.0]) if weighted else 1.0)
            for user in rng.sample(USERS, rng.randint(0, 3))
        ]
        when = []
        for _ in range(rng.randint(0, 2)):
            year, month, day = rng.choice([2015, 2016]), rng.randint(1, 3), rng.randint(1, 3)
            when.append(rng.choice([
                TimePoint(year), TimePoint(year, month), TimePoint(year, month, day), TimePoint(year, month, day, 10, 5),
            ]))
        where = [LocationRef(place.title(), canonical_id=place) for place in rng.sample(PLACES, rng.randint(0, 2))]
        corpus.append(TraceObject(id=f'o{n}', source=rng.choice(SOURCES), who=who, when=when, where=where))
    return corpus


def naive_recount(corpus):
    """Independent single pass: nine plain dicts keyed the way FreqIndex keys them."""
    maps = {name: defaultdict(float) for name in (
        'f_user', 'f_user_src', 'f_group', 'f_group_src', 'f_user_time', 'f_user_time_src', 'f_group_time',
        'f_loc', 'f_loc_src',
    )}
    for obj in corpus:
        weights = {}
        for ref in obj.who:
            weights[ref.entity_id] = max(weights.get(ref.entity_id, 0.0), ref.role_weight)
        keys = set()
        for point in obj.when:
            if point.year is not None:
                keys.add(str(point.year))
                if point.month is not None:
                    keys.add(f'{point.year}-{point.month:02d}')
                    keys.add(f'--{point.month:02d}')
                    if point.day is not None:
                        keys.add(f'{point.year}-{point.month:02d}-{point.day:02d}')
        group = tuple(sorted(weights))
        group_weight = 1.0
        for weight in weights.values():
            group_weight *= weight
        if group:
            maps['f_group'][group] += group_weight
            maps['f_group_src'][(obj.source, group)] += group_weight
        for key in keys:
            if group:
                maps['f_group_time'][(group, key)] += group_weight
            for user, weight in weights.items():
                maps['f_user_time'][(user, key)] += weight
                maps['f_user_time_src'][(obj.source, (user, key))] += weight
        for user, weight in weights.items():
            maps['f_user'][user] += weight
            maps['f_user_src'][(obj.source, user)] += weight
        for place in {ref.canonical_id for ref in obj.where}:
            maps['f_loc'][place] += 1
            maps['f_loc_src'][(obj.source, place)] += 1
    return maps


def flatten(index):
    flat = {}
    for name in FreqIndex.TOTALS:
        flat[name] = dict(getattr(index, name))
    for name in FreqIndex.PER_SOURCE:
        flat[name] = {(source, key): count for source, counts in getattr(index, name).items() for key, count in counts.items()}
    return flat


class TimeKeyTests(SimpleTestCase):

    def test_generalizations(self):
        self.assertEqual(time_keys(TimePoint(2017, 4, 22, 16, 58)), ['2017', '2017-04', '2017-04-22', '--04'])
        self.assertEqual(time_keys(TimePoint(2017)), ['2017'])
        self.assertEqual(time_keys(TimePoint(month=6)), ['--06'])

    def test_query_lookup_key(self):
        self.assertEqual(time_key(TimePoint(2017)), '2017')
        self.assertEqual(time_key(TimePoint(month=6)), '--06')
        self.assertEqual(time_key(TimePoint(2017, 4, 22, 16, 58)), '2017-04-22')
        self.assertTrue(is_key_shaped(TimePoint(2017, 4)))
        self.assertFalse(is_key_shaped(TimePoint(2017, 4, 22, 16, 58)))


class ComputeFrequencyTests(SimpleTestCase):

    def test_empty_corpus(self):
        self.assertTrue(compute_frequency([]).is_empty())

    def test_single_object(self):
        obj = TraceObject(id='o1', source='gmail', who=[person('a'), person('b')], when=[TimePoint(2017, 4)])
        index = compute_frequency([obj])
        self.assertEqual(index.user('a'), 1)
        self.assertEqual(index.user('b'), 1)
        self.assertEqual(index.group(('a', 'b')), 1)
        for key in ('2017', '2017-04', '--04'):
            self.assertEqual(index.user_time('a', key), 1)
            self.assertEqual(index.user_time('b', key), 1)
            self.assertEqual(index.group_time(('a', 'b'), key), 1)
        self.assertEqual(len(index.f_user_time), 6)
        self.assertFalse(index.f_loc)

    def test_subgroups_are_not_credited(self):
        obj = TraceObject(id='o1', source='gmail', who=[person('a'), person('b'), person('c')])
        index = compute_frequency([obj])
        self.assertEqual(index.group(('a', 'b', 'c')), 1)
        self.assertEqual(index.group(('a', 'b')), 0)

    def test_duplicate_people_and_times_count_once(self):
        obj = TraceObject(
            id='o1', source='gmail', who=[person('a', 'from'), person('a', 'cc')],
            when=[TimePoint(2017, 4, 1), TimePoint(2017, 4, 2)],
        )
        index = compute_frequency([obj])
        self.assertEqual(index.user('a'), 1)
        self.assertEqual(index.user_time('a', '2017-04'), 1)
        self.assertEqual(index.user_time('a', '2017-04-02'), 1)

    def test_role_weights(self):
        obj = TraceObject(id='o1', source='gmail', who=[person('a', 'from'), person('b', 'cc')])
        index = compute_frequency([obj], role_weights={'cc': 0.5})
        self.assertEqual(index.user('a'), 1)
        self.assertEqual(index.user('b'), 0.5)
        self.assertEqual(index.group(('a', 'b')), 0.5)

    def test_unresolved_person(self):
        obj = TraceObject(id='x9', source='gmail', who=[PersonRef('Nobody')])
        with self.assertRaises(ValidationError) as raised:
            compute_frequency([obj])
        self.assertEqual(raised.exception.code, 'unresolved_person')
        self.assertIn('x9', raised.exception.messages[0])

    def test_equals_naive_recount(self):
        rng = random.Random(17)
        for trial in range(100):
            corpus = random_corpus(rng, 50, weighted=trial % 2 == 1)
            expected = naive_recount(corpus)
            actual = flatten(compute_frequency(corpus, threads=2))
            self.assertEqual(actual['f_user'], dict(expected['f_user']))
            self.assertEqual(actual['f_group'], dict(expected['f_group']))
            self.assertEqual(actual['f_loc'], dict(expected['f_loc']))
            self.assertEqual(actual['f_user_src'], dict(expected['f_user_src']))
            self.assertEqual(actual['f_group_src'], dict(expected['f_group_src']))
            self.assertEqual(actual['f_loc_src'], dict(expected['f_loc_src']))
            for name in ('f_user_time', 'f_group_time', 'f_user_time_src'):
                self.assertEqual(actual[name].keys(), expected[name].keys(), name)
                for key, count in expected[name].items():
                    self.assertAlmostEqual(actual[name][key], count, places=9)

    def test_totals_equal_per_source_sums(self):
        index = compute_frequency(random_corpus(random.Random(2), 200))
        for total, per_source in (('f_user', 'f_user_src'), ('f_group', 'f_group_src'),
                                  ('f_user_time', 'f_user_time_src'), ('f_loc', 'f_loc_src')):
            summed = Counter()
            for counts in getattr(index, per_source).values():
                summed.update(counts)
            self.assertEqual(+summed, +getattr(index, total))
            self.assertTrue(all(float(count).is_integer() and count >= 0 for count in summed.values()))

    def test_build_is_additive(self):
        corpus = random_corpus(random.Random(8), 40)
        incremental = compute_frequency(corpus[:-1])
        incremental.add(corpus[-1])
        self.assertEqual(incremental, compute_frequency(corpus))

    def test_sharded_build_equals_sequential(self):
        corpus = random_corpus(random.Random(9), 120)
        sequential = FreqIndex()
        for obj in corpus:
            sequential.add(obj)
        self.assertEqual(compute_frequency(corpus, threads=4), sequential)


class PersistenceTests(SimpleTestCase):

    def setUp(self):
        self.index = compute_frequency(random_corpus(random.Random(4), 50))
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name) / 'frequency.json'

    def tearDown(self):
        self.directory.cleanup()

    def test_round_trip(self):
        save_index(self.index, self.path, corpus_hash='abc')
        self.assertEqual(load_index(self.path), self.index)
        head, _ = read_versioned(self.path, 'frequency')
        self.assertEqual(head['format_version'], 1)

    def test_truncated_file(self):
        save_index(self.index, self.path)
        text = self.path.read_text(encoding='utf-8')
        self.path.write_text(text[:-20], encoding='utf-8')
        with self.assertRaises(ValidationError) as raised:
            load_index(self.path)
        self.assertEqual(raised.exception.code, 'checksum')

    def test_future_version(self):
        save_index(self.index, self.path)
        text = self.path.read_text(encoding='utf-8')
        self.path.write_text(text.replace('"format_version":1', '"format_version":999', 1), encoding='utf-8')
        with self.assertRaises(ValidationError) as raised:
            load_index(self.path)
        self.assertEqual(raised.exception.code, 'version_mismatch')

    def test_corpus_mismatch_warns(self):
        save_index(self.index, self.path, corpus_hash='abc')
        with self.assertLogs('frequency_index.builder', level='WARNING'):
            load_index(self.path, expected_corpus_hash='def')

    def test_group_keys_survive(self):
        obj = TraceObject(id='o1', source='gmail', who=[person('a'), person('b')], when=[TimePoint(2016)])
        index = compute_frequency([obj])
        save_index(index, self.path)
        loaded = load_index(self.path)
        self.assertEqual(loaded.group_time(('a', 'b'), '2016'), 1)
        self.assertEqual(loaded.group_src('gmail', ('a', 'b')), 1)
