import math
import tempfile
from pathlib import Path

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from core.models import LocationRef, PersonRef, Query, TimePoint, TraceObject

from .analysis import STOPWORDS, field_tokens, tokenize
from .models import TextIndex, load_text_index, save_text_index

TOY = [
    TraceObject(id='d1', source='gmail', what=['science march science'], who=[PersonRef('Anna Smith')]),
    TraceObject(id='d2', source='facebook', what=['march for science in washington'], where=[LocationRef('Washington')]),
    TraceObject(id='d3', source='twitter', what=['coffee'], who=[PersonRef('John Smith')], when=[TimePoint(2017)]),
    TraceObject(id='d4', source='gmail', what=['smith family dinner'], how=['Gmail message']),
    TraceObject(id='d5', source='dropbox', what=['thesis draft science chapter'], who=[PersonRef('Bob White')]),
]


def brute_fields(obj):
    """Field token lists written out longhand."""
    fields = {
        'what': ' '.join(obj.what),
        'who': ' '.join(f"{ref.raw_name} {' '.join(ref.raw_emails)}" for ref in obj.who),
        'when': ' '.join(point.isoformat().replace('T', ' ') for point in obj.when),
        'where': ' '.join(ref.raw_text for ref in obj.where),
        'how': ' '.join(list(obj.how) + [obj.source]),
    }
    tokens = {name: tokenize(text) for name, text in fields.items()}
    tokens['all'] = [token for name in ('what', 'who', 'when', 'where', 'how') for token in tokens[name]]
    return tokens


def brute_tfidf(corpus, terms, doc):
    docs = [brute_fields(obj)['all'] for obj in corpus]
    mine = brute_fields(doc)['all']
    total = 0.0
    for term in terms:
        tf = mine.count(term)
        df = sum(1 for tokens in docs if term in tokens)
        if tf:
            total += tf * math.log(len(docs) / df)
    return total


def brute_bm25(corpus, terms, doc, field='all', k1=1.2, b=0.75):
    docs = [brute_fields(obj)[field] for obj in corpus]
    mine = brute_fields(doc)[field]
    avgdl = sum(map(len, docs)) / len(docs)
    total = 0.0
    for term in terms:
        tf = mine.count(term)
        if not tf:
            continue
        df = sum(1 for tokens in docs if term in tokens)
        idf = math.log((len(docs) - df + 0.5) / (df + 0.5) + 1)
        total += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(mine) / avgdl))
    return total


class TokenizeTests(SimpleTestCase):

    def test_examples(self):
        self.assertEqual(tokenize('March for Science!'), ['march', 'for', 'science'])
        self.assertEqual(tokenize(''), [])
        self.assertEqual(tokenize('SIGIR-2013'), ['sigir', '2013'])

    def test_underscore_splits_and_stopwords_are_optional(self):
        self.assertEqual(tokenize('snake_case'), ['snake', 'case'])
        self.assertEqual(tokenize('March for Science', STOPWORDS), ['march', 'science'])


class ScorerTests(SimpleTestCase):

    def setUp(self):
        self.index = TextIndex.build(TOY)

    def test_tfidf_matches_oracle(self):
        terms = ['science', 'march', 'smith']
        for obj in TOY:
            position = self.index.position(obj.id)
            self.assertAlmostEqual(self.index.tfidf_score(terms, position), brute_tfidf(TOY, terms, obj), places=9)

    def test_bm25_matches_oracle(self):
        terms = ['science', 'washington', 'smith', 'gmail']
        for obj in TOY:
            position = self.index.position(obj.id)
            self.assertAlmostEqual(self.index.bm25_score(terms, position), brute_bm25(TOY, terms, obj), places=9)

    def test_field_bm25_matches_oracle(self):
        query = Query(what=['science'], who=[PersonRef('Smith')])
        for obj in TOY:
            position = self.index.position(obj.id)
            expected = brute_bm25(TOY, ['science'], obj, 'what') + brute_bm25(TOY, ['smith'], obj, 'who')
            self.assertAlmostEqual(self.index.field_bm25_score(query, position), expected, places=9)

    def test_absent_term_contributes_nothing(self):
        position = self.index.position('d3')
        self.assertEqual(self.index.tfidf_score(['science'], position), 0.0)
        self.assertEqual(self.index.bm25_score(['science'], position), 0.0)

    def test_single_document_corpus_has_zero_idf(self):
        index = TextIndex.build(TOY[:1])
        self.assertEqual(index.tfidf_score(['science'], 0), 0.0)

    def test_bm25_at_average_length(self):
        corpus = [TraceObject(id='a', source='s', what=['x y']), TraceObject(id='b', source='s', what=['z w'])]
        index = TextIndex.build(corpus)
        idf = math.log((2 - 1 + 0.5) / (1 + 0.5) + 1)
        self.assertAlmostEqual(index.bm25_score(['x'], 0, 'what'), idf * 2.2 / 2.2, places=12)

    def test_day_query_matches_minute_timestamp(self):
        obj = TraceObject(id='t1', source='facebook', what=['march'], when=[TimePoint(2017, 4, 22, 16, 58)])
        self.assertEqual(field_tokens(obj)['when'], ['2017', '04', '22', '16', '58'])
        index = TextIndex.build([obj, TOY[0]])
        query = Query(when=[TimePoint(2017, 4, 22)])
        self.assertGreater(index.field_bm25_score(query, index.position('t1')), 0.0)
        self.assertEqual(index.field_bm25_score(query, index.position('d1')), 0.0)

    def test_field_isolation(self):
        query = Query(who=[PersonRef('Smith')])
        self.assertEqual(self.index.field_bm25_score(query, self.index.position('d4')), 0.0)

    def test_what_only_query_reduces_to_what_field(self):
        query = Query(what=['science march'])
        for obj in TOY:
            position = self.index.position(obj.id)
            self.assertEqual(
                self.index.field_bm25_score(query, position),
                self.index.bm25_score(['science', 'march'], position, 'what'),
            )

    def test_batch_scores_equal_single_scores(self):
        query = Query(what=['science'], who=[PersonRef('Anna Smith')], how=['gmail'])
        terms = ['science', 'smith', 'gmail', 'science']
        tfidf = self.index.tfidf_scores(terms)
        bm25 = self.index.bm25_scores(terms)
        fields = self.index.field_bm25_scores(query)
        for position in range(self.index.n_docs):
            self.assertEqual(tfidf.get(position, 0.0), self.index.tfidf_score(terms, position))
            self.assertEqual(bm25.get(position, 0.0), self.index.bm25_score(terms, position))
            self.assertEqual(fields.get(position, 0.0), self.index.field_bm25_score(query, position))

    def test_monotone_in_tf(self):
        corpus = [
            TraceObject(id='a', source='s', what=['cat dog bird fish']),
            TraceObject(id='b', source='s', what=['cat cat bird fish']),
            TraceObject(id='c', source='s', what=['mouse']),
        ]
        index = TextIndex.build(corpus)
        self.assertLess(index.bm25_score(['cat'], 0), index.bm25_score(['cat'], 1))
        self.assertLess(index.tfidf_score(['cat'], 0), index.tfidf_score(['cat'], 1))

    def test_adding_a_document_keeps_other_tf(self):
        index = TextIndex.build(TOY[:3])
        before = index.tf('science', 0)
        index.add(TOY[3])
        self.assertEqual(index.tf('science', 0), before)
        self.assertEqual(index.n_docs, 4)


class TextIndexPersistenceTests(SimpleTestCase):

    def test_round_trip_and_checksum(self):
        index = TextIndex.build(TOY)
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'text.json'
            save_text_index(index, path)
            loaded = load_text_index(path)
            self.assertEqual(loaded, index)
            self.assertEqual(loaded.bm25_score(['science'], 0), index.bm25_score(['science'], 0))
            path.write_text(path.read_text(encoding='utf-8')[:-5], encoding='utf-8')
            with self.assertRaises(ValidationError):
                load_text_index(path)
