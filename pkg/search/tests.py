import json
import random
from pathlib import Path

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from core.config import load_config
from core.models import DimensionTag, LocationRef, PersonRef, Query, TimePoint, TraceObject
from core.serialization import object_from_dict
from entity_resolution.models import GeocodeCache
from entity_resolution.resolver import resolve_corpus
from frequency_index.builder import compute_frequency
from text_index.models import TextIndex

from .engine import FIELD_BM25, W5HF, SearchEngine, f_score
from .models import candidate_set, dimension_matches

MARCH_POST = Path(__file__).resolve().parent.parent / 'core' / 'fixtures' / 'march_post.jsonl'
WORDS = ['coffee', 'thesis', 'science', 'march', 'dinner', 'budget', 'photo', 'trip']


def march_post():
    return object_from_dict(json.loads(MARCH_POST.read_text(encoding='utf-8')))


def person(entity_id):
    return PersonRef(raw_name=entity_id.title(), entity_id=entity_id)


def random_corpus(rng, size):
    corpus = []
    for n in range(size):
        corpus.append(TraceObject(
            id=f'o{n:03d}',
            source=rng.choice(['gmail', 'facebook', 'twitter']),
            what=[' '.join(rng.sample(WORDS, rng.randint(1, 4)))],
            who=[person(user) for user in rng.sample(['ann', 'bob', 'cat', 'dan'], rng.randint(0, 3))],
            when=[TimePoint(rng.choice([2015, 2016]), rng.randint(1, 4), rng.randint(1, 5))] if rng.random() < 0.8 else [],
            where=[LocationRef('Cafe', canonical_id='cafe')] if rng.random() < 0.3 else [],
        ))
    return corpus


class MarchPostTests(SimpleTestCase):

    def setUp(self):
        resolution = resolve_corpus([march_post()], GeocodeCache())
        self.corpus = resolution.objects
        self.frequency = compute_frequency(self.corpus)
        self.text = TextIndex.build(self.corpus)
        self.march_query = resolution.resolve_query(Query(
            what=['March for Science'],
            who=[PersonRef('John Smith'), PersonRef('Anna Smith')],
            when=[TimePoint(2017)],
        ))

    def test_march_query_breakdown_lists_every_term(self):
        result = f_score(self.march_query, self.corpus[0], self.frequency, self.text)
        john, anna = (ref.entity_id for ref in self.march_query.who)
        expected = {
            'f[g]',
            f'f[u={john}]', f'f[u={anna}]',
            f'f_s[u={john}]', f'f_s[u={anna}]',
            f'f[u={john}][dt=2017]', f'f[u={anna}][dt=2017]',
            f'f_s[u={john}][dt=2017]', f'f_s[u={anna}][dt=2017]',
            'f[g][dt=2017]', 'score_when', 'score_what',
        }
        self.assertEqual(set(result.breakdown), expected)
        self.assertEqual(result.breakdown['score_when'], 1.0)
        self.assertGreater(result.breakdown['score_what'], 0.0)
        self.assertAlmostEqual(result.total_score, sum(result.breakdown.values()), places=9)
        self.assertAlmostEqual(result.total_score - result.breakdown['score_what'], 11.0, places=9)

    def test_what_only_query_is_score_what(self):
        query = Query(what=['science'])
        result = f_score(query, self.corpus[0], self.frequency, self.text)
        self.assertEqual(list(result.breakdown), ['score_what'])
        self.assertEqual(result.total_score, result.breakdown['score_what'])

    def test_dimension_matches(self):
        obj = self.corpus[0]
        self.assertTrue(dimension_matches(self.march_query, obj, DimensionTag.WHO))
        self.assertTrue(dimension_matches(Query(when=[TimePoint(2017)]), obj, DimensionTag.WHEN))
        self.assertTrue(dimension_matches(Query(how=['facebook']), obj, DimensionTag.HOW))
        self.assertFalse(dimension_matches(Query(when=[TimePoint(2016)]), obj, DimensionTag.WHEN))

    def test_where_needs_a_location(self):
        obj = TraceObject(id='x', source='gmail', what=['hi'])
        query = Query(where=[LocationRef('Paris', canonical_id='paris')])
        self.assertFalse(dimension_matches(query, obj, DimensionTag.WHERE))

    def test_non_candidate_rejected(self):
        with self.assertRaises(ValidationError) as raised:
            f_score(Query(what=['unrelated']), self.corpus[0], self.frequency, self.text)
        self.assertEqual(raised.exception.code, 'not_a_candidate')


class SearchEngineTests(SimpleTestCase):

    def setUp(self):
        self.corpus = random_corpus(random.Random(21), 50)
        self.frequency = compute_frequency(self.corpus)
        self.text = TextIndex.build(self.corpus)
        self.engine = SearchEngine(self.corpus, self.frequency, self.text)
        self.query = Query(what=['coffee'], who=[person('ann')], when=[TimePoint(2016, 2)])

    def test_candidates_equal_exhaustive_scan(self):
        rng = random.Random(3)
        queries = [self.query, Query(what=['nothingmatches'])]
        for _ in range(20):
            queries.append(Query(
                what=[rng.choice(WORDS)],
                who=[person(rng.choice(['ann', 'bob', 'eve']))],
                when=[rng.choice([TimePoint(2015), TimePoint(month=3), TimePoint(2016, 2, 3, 9, 0)])],
                where=[LocationRef('Cafe', canonical_id='cafe')] if rng.random() < 0.5 else [],
            ))
        for query in queries:
            expected = {obj.id for obj in candidate_set(query, self.corpus)}
            actual = {self.corpus[position].id for position in self.engine.candidates(query)}
            self.assertEqual(actual, expected)

    def test_single_dimension_candidates(self):
        query = Query(who=[person('bob')])
        expected = {obj.id for obj in self.corpus if 'bob' in obj.entity_ids()}
        self.assertEqual({self.corpus[p].id for p in self.engine.candidates(query)}, expected)

    def test_rank_equals_exhaustive_scoring(self):
        ranked = self.engine.rank(self.query)
        oracle = sorted(
            (f_score(self.query, obj, self.frequency, self.text) for obj in candidate_set(self.query, self.corpus)),
            key=lambda result: (-result.total_score, result.object_id),
        )
        self.assertEqual([r.object_id for r in ranked], [r.object_id for r in oracle])
        for mine, theirs in zip(ranked, oracle):
            self.assertEqual(mine.breakdown, theirs.breakdown)

    def test_totals_equal_hand_summed_lookups(self):
        query = Query(who=[person('ann')], when=[TimePoint(2016)])
        for result in self.engine.rank(query):
            obj = next(o for o in self.corpus if o.id == result.object_id)
            total = 0.0
            if 'ann' in obj.entity_ids():
                total += self.frequency.f_group[('ann',)]
                total += self.frequency.f_user['ann'] + self.frequency.f_user_src[obj.source]['ann']
            dated = any(point.year == 2016 for point in obj.when)
            if dated and 'ann' in obj.entity_ids():
                total += self.frequency.f_user_time[('ann', '2016')]
                total += self.frequency.f_user_time_src[obj.source][('ann', '2016')]
                total += self.frequency.f_group_time[(('ann',), '2016')]
            total += 1.0 if dated else 0.0
            self.assertAlmostEqual(result.total_score, total, places=9)

    def test_removing_a_dimension_never_raises_a_score(self):
        reduced = Query(who=self.query.who, when=self.query.when)
        full = {r.object_id: r.total_score for r in self.engine.rank(self.query)}
        for result in self.engine.rank(reduced):
            self.assertGreaterEqual(full[result.object_id], result.total_score)

    def test_contributions_are_non_negative(self):
        for result in self.engine.rank(self.query):
            self.assertTrue(all(value >= 0 for value in result.breakdown.values()))

    def test_field_bm25_pipeline_adds_nothing(self):
        ranked = self.engine.rank(self.query, FIELD_BM25)
        direct = sorted(
            ((-self.text.field_bm25_score(self.query, self.text.position(obj.id)), obj.id)
             for obj in candidate_set(self.query, self.corpus)),
        )
        self.assertEqual([r.object_id for r in ranked], [object_id for _, object_id in direct])

    def test_ties_break_by_id(self):
        corpus = [
            TraceObject(id='b', source='gmail', what=['same text']),
            TraceObject(id='a', source='gmail', what=['same text']),
        ]
        engine = SearchEngine(corpus, compute_frequency(corpus), TextIndex.build(corpus))
        for scorer in ('w5hf', 'fieldbm25', 'bm25', 'tfidf'):
            self.assertEqual([r.object_id for r in engine.rank(Query(what=['same']), scorer)], ['a', 'b'])

    def test_top_k(self):
        self.assertEqual(self.engine.search(self.query, W5HF, 0), [])
        self.assertEqual(len(self.engine.search(self.query, W5HF, 3)), 3)

    def test_unknown_scorer(self):
        with self.assertRaises(ValidationError) as raised:
            self.engine.search(self.query, 'pagerank')
        self.assertEqual(raised.exception.code, 'unknown_scorer')

    def test_index_from_another_corpus(self):
        with self.assertRaises(ValidationError):
            SearchEngine(self.corpus[:10], self.frequency, self.text)


class DefaultWeightTests(SimpleTestCase):
    """A busy source must not bury the one object whose text matches."""

    def setUp(self):
        self.corpus = [
            TraceObject(
                id=f'mail{n:02d}', source='gmail', what=['lunch plans'], who=[person('ann')],
                when=[TimePoint(2016, 3, n % 28 + 1)],
            )
            for n in range(20)
        ]
        self.corpus.append(TraceObject(
            id='post', source='facebook', what=['thesis defense'], who=[person('ann')], when=[TimePoint(2016, 5, 2)],
        ))
        self.frequency = compute_frequency(self.corpus)
        self.text = TextIndex.build(self.corpus)
        self.query = Query(what=['thesis'], who=[person('ann')], when=[TimePoint(2016)])

    def test_settings_weights_rank_text_match_first(self):
        engine = SearchEngine.from_config(self.corpus, self.frequency, self.text, load_config())
        ranked = engine.rank(self.query)
        self.assertEqual(ranked[0].object_id, 'post')
        self.assertGreater(ranked[1].breakdown['f_s[u=ann]'], ranked[0].breakdown['f_s[u=ann]'])

    def test_unit_weights_let_source_counts_dominate(self):
        engine = SearchEngine(self.corpus, self.frequency, self.text)
        self.assertNotEqual(engine.rank(self.query)[0].object_id, 'post')
