import itertools
import random
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, tag
from scipy import stats

from core.models import DimensionTag, PersonRef, Query, TimePoint, TraceObject, time_matches
from core.serialization import dumps, query_to_dict
from entity_resolution.models import GeocodeCache
from entity_resolution.resolver import resolve_corpus
from frequency_index.builder import compute_frequency
from search.engine import BM25, FIELD_BM25, TFIDF, W5HF, SearchEngine
from search.models import ScoredResult
from synth.generator import SynthSpec, generate_corpus
from text_index.analysis import tokenize
from text_index.models import TextIndex

from .generator import generalize, generate_scenarios, what_terms
from .metrics import mrr, ndcg_at_k, target_rank, tie_range, wilcoxon_signed_rank
from .models import DEFAULT_GROUPS, QueryGroupSpec, WhenPrecision
from .runner import NO_ENTITY, group_frame, load_cases, run_cases, run_eval, write_reports


def results(scores):
    return [ScoredResult(object_id=object_id, total_score=score) for object_id, score in scores.items()]


def resolved_synth(**changes):
    """A resolved synthetic corpus with its indexes and display names."""
    generated = generate_corpus(SynthSpec.from_dict(changes))
    resolution = resolve_corpus(generated.objects, GeocodeCache.from_dict(generated.geocache))
    corpus = resolution.objects
    indexes = (compute_frequency(corpus), TextIndex.build(corpus))
    names = {person.entity_id: person.label for person in resolution.persons}
    return corpus, indexes, names


class RankMetricTests(SimpleTestCase):

    def test_closed_forms(self):
        self.assertEqual(mrr([1]), 1.0)
        self.assertEqual(ndcg_at_k(1, 10), 1.0)
        self.assertAlmostEqual(mrr([3]), 1 / 3)
        self.assertAlmostEqual(ndcg_at_k(3, 10), 0.5)
        self.assertEqual(ndcg_at_k(15, 10), 0.0)
        self.assertAlmostEqual(ndcg_at_k(15, 20), 0.25)
        self.assertEqual(mrr([1, 1, 1]), 1.0)

    def test_empty_and_invalid_ranks(self):
        with self.assertRaises(ValidationError) as raised:
            mrr([])
        self.assertEqual(raised.exception.code, 'empty_ranks')
        with self.assertRaises(ValidationError) as raised:
            ndcg_at_k(0, 10)
        self.assertEqual(raised.exception.code, 'invalid_rank')

    def test_ndcg_is_antitone(self):
        values = [ndcg_at_k(rank, 10) for rank in range(1, 30)]
        self.assertEqual(values, sorted(values, reverse=True))
        self.assertTrue(all(value == 0.0 for value in values[10:]))

    def test_unique_top_score(self):
        self.assertEqual(target_rank(results({'a': 3.0, 'b': 2.0, 'c': 1.0}), 'a'), 1.0)

    def test_tie_block_median(self):
        ranked = results({'top': 9.0, 'a': 5.0, 'b': 5.0, 'target': 5.0, 'c': 5.0, 'low': 1.0})
        self.assertEqual(tie_range(ranked, 'target'), (2, 5))
        self.assertEqual(target_rank(ranked, 'target'), 3.5)

    def test_missing_target(self):
        with self.assertLogs('evaluation.metrics', 'WARNING'):
            self.assertEqual(target_rank(results({'a': 1.0}), 'zzz', corpus_size=50), 51.0)
        self.assertIsNone(tie_range(results({'a': 1.0}), 'zzz'))

    def test_random_vectors_match_sort_and_scan(self):
        rng = random.Random(17)
        for _ in range(1000):
            size = rng.randint(1, 30)
            scores = {f'd{n:02d}': float(rng.randint(0, 5)) for n in range(size)}
            target = rng.choice(sorted(scores))
            ordered = sorted(scores, key=lambda key: (-scores[key], key))
            positions = [i + 1 for i, key in enumerate(ordered) if scores[key] == scores[target]]
            expected = (positions[0] + positions[-1]) / 2
            shuffled = results(scores)
            rng.shuffle(shuffled)
            self.assertEqual(target_rank(shuffled, target), expected)


def brute_force_p(differences):
    """Two-sided exact p-value by enumerating every sign assignment."""
    ranks = stats.rankdata(np.abs(differences))
    plus = ranks[differences > 0].sum()
    statistic = min(plus, ranks.sum() - plus)
    hits = sum(
        1 for signs in itertools.product((0, 1), repeat=len(ranks))
        if np.dot(signs, ranks) <= statistic + 1e-9
    )
    return min(1.0, 2 * hits / 2 ** len(ranks))


class WilcoxonTests(SimpleTestCase):

    def test_identical_lists(self):
        values = list(range(12))
        statistic, p_value = wilcoxon_signed_rank(values, values)
        self.assertEqual((statistic, p_value), (0.0, 1.0))

    def test_constant_domination(self):
        first = np.linspace(0, 1, 50)
        result = wilcoxon_signed_rank(first + 0.5, first)
        self.assertEqual(result.statistic, 0.0)
        self.assertLess(result.p_value, 0.01)
        self.assertEqual(result.n, 50)

    def test_exact_matches_scipy(self):
        rng = np.random.default_rng(20)
        first, second = rng.normal(size=20), rng.normal(0.3, 1.0, size=20)
        statistic, p_value = wilcoxon_signed_rank(first, second)
        reference = stats.wilcoxon(first, second, method='exact')
        self.assertAlmostEqual(statistic, reference.statistic, places=9)
        self.assertAlmostEqual(p_value, reference.pvalue, places=6)

    def test_exact_with_ties_matches_enumeration(self):
        first = np.array([1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0, 1.0, 4.0, 0.0, 2.0, 6.0])
        second = np.array([0.0, 1.0, 3.0, 1.0, 4.0, 6.0, 3.0, 0.0, 4.0, 1.0, 0.0, 3.0])
        differences = first - second
        _, p_value = wilcoxon_signed_rank(first, second)
        self.assertAlmostEqual(p_value, brute_force_p(differences[differences != 0]), places=12)

    def test_normal_approximation_matches_scipy(self):
        rng = np.random.default_rng(40)
        first, second = rng.normal(size=40), rng.normal(0.4, 1.0, size=40)
        statistic, p_value = wilcoxon_signed_rank(first, second)
        reference = stats.wilcoxon(first, second, method='approx', correction=False)
        self.assertAlmostEqual(statistic, reference.statistic, places=9)
        self.assertAlmostEqual(p_value, reference.pvalue, places=9)

    def test_preconditions(self):
        with self.assertRaises(ValidationError) as raised:
            wilcoxon_signed_rank([1, 2, 3], [1, 2, 4])
        self.assertEqual(raised.exception.code, 'too_few_pairs')
        with self.assertRaises(ValidationError) as raised:
            wilcoxon_signed_rank(range(12), range(11))
        self.assertEqual(raised.exception.code, 'length_mismatch')


class QueryGroupSpecTests(SimpleTestCase):

    def test_default_groups(self):
        self.assertEqual([spec.group_id for spec in DEFAULT_GROUPS.values()], [1, 2, 3, 4, 5])
        self.assertEqual(DEFAULT_GROUPS[1].dimensions, (DimensionTag.WHAT,))
        self.assertEqual(len(DEFAULT_GROUPS[4].dimensions), 4)
        five = DEFAULT_GROUPS[5]
        self.assertEqual([five.count(tag) for tag in five.dimensions], [2, 2, 1, 1])
        self.assertTrue(all(spec.scenarios * spec.queries_per_scenario == 1500 for spec in DEFAULT_GROUPS.values()))

    def test_where_cannot_be_generated(self):
        with self.assertRaises(ValidationError):
            QueryGroupSpec(9, (DimensionTag.WHERE,))

    def test_generalize(self):
        point = TimePoint(2016, 3, 15, 9, 30)
        self.assertEqual(generalize(point, WhenPrecision.YEAR), TimePoint(2016))
        self.assertEqual(generalize(point, WhenPrecision.MONTH), TimePoint(2016, 3))
        self.assertEqual(generalize(point, WhenPrecision.DAY), TimePoint(2016, 3, 15))
        self.assertEqual(generalize(TimePoint(2016), WhenPrecision.DAY), TimePoint(2016))
        self.assertEqual(generalize(TimePoint(month=6), WhenPrecision.DAY), TimePoint(month=6))


class GenerateScenariosTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.corpus, cls.indexes, cls.names = resolved_synth(objects=400, seed=11)

    def test_same_seed_same_scenarios(self):
        spec = DEFAULT_GROUPS[3].with_scenarios(20)
        self.assertEqual(
            generate_scenarios(self.corpus, spec, 42, self.names),
            generate_scenarios(self.corpus, spec, 42, self.names),
        )
        self.assertNotEqual(
            generate_scenarios(self.corpus, spec, 42, self.names),
            generate_scenarios(self.corpus, spec, 43, self.names),
        )

    def test_single_term_target_is_forced(self):
        corpus = [
            TraceObject(id='only', source='gmail', what=['Coffee, coffee!']),
            TraceObject(id='empty', source='gmail', who=[PersonRef('Ann', entity_id='ann')]),
        ]
        scenarios = generate_scenarios(corpus, DEFAULT_GROUPS[1].with_scenarios(3), 1)
        for scenario in scenarios:
            self.assertEqual(scenario.target_id, 'only')
            self.assertEqual({query for _, query in scenario.queries}, {Query(what=['coffee'])})

    def test_group5_shape(self):
        by_id = {obj.id: obj for obj in self.corpus}
        for scenario in generate_scenarios(self.corpus, DEFAULT_GROUPS[5].with_scenarios(15), 42, self.names):
            target = by_id[scenario.target_id]
            self.assertEqual(len(scenario.queries), 6)
            for query_id, query in scenario.queries:
                self.assertTrue(query_id.startswith(f'g5-s{scenario.number:03d}-q'))
                terms = tokenize(query.what[0])
                self.assertEqual(len(terms), 2)
                self.assertTrue(set(terms) <= set(what_terms(target)))
                self.assertEqual(len(query.who), 2)
                self.assertTrue(query.entity_ids() <= target.entity_ids())
                self.assertEqual(len(query.entity_ids()), 2)
                self.assertEqual(len(query.when), 1)
                self.assertTrue(any(time_matches(query.when[0], point) for point in target.when))
                self.assertEqual(query.how, (target.source,))

    def test_who_values_use_display_names(self):
        for scenario in generate_scenarios(self.corpus, DEFAULT_GROUPS[2].with_scenarios(10), 3, self.names):
            for _, query in scenario.queries:
                ref = query.who[0]
                if self.names.get(ref.entity_id):
                    self.assertEqual(ref.raw_name, self.names[ref.entity_id])

    def test_no_targets(self):
        corpus = [TraceObject(id='x', source='gmail', what=['hello'])]
        with self.assertRaises(ValidationError) as raised:
            generate_scenarios(corpus, DEFAULT_GROUPS[2], 42)
        self.assertEqual(raised.exception.code, 'no_targets')

    def test_targets_are_always_candidates(self):
        engine = SearchEngine(self.corpus, *self.indexes)
        for spec in DEFAULT_GROUPS.values():
            for scenario in generate_scenarios(self.corpus, spec.with_scenarios(20), 42, self.names):
                position = engine.text.position(scenario.target_id)
                for _, query in scenario.queries:
                    self.assertIn(position, engine.candidates(query))


class RunEvalTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.corpus, cls.indexes, cls.names = resolved_synth(objects=300, seed=4)

    def test_one_row_per_query(self):
        spec = DEFAULT_GROUPS[2].with_scenarios(5)
        result = run_eval(self.corpus, self.indexes, [spec], [W5HF], 42, self.names)
        report = result.report(2, W5HF)
        self.assertEqual(len(group_frame([report])), 30)
        self.assertEqual(result.significance, [])
        self.assertTrue(0 < report.mrr <= 1)
        self.assertTrue(all(outcome.found for outcome in report.outcomes))

    def test_reports_are_byte_identical(self):
        specs = [DEFAULT_GROUPS[1].with_scenarios(4), DEFAULT_GROUPS[3].with_scenarios(4)]
        scorers = [W5HF, FIELD_BM25, BM25, TFIDF]
        with tempfile.TemporaryDirectory() as tmp:
            runs = []
            for run in range(2):
                directory = Path(tmp) / f'run{run}'
                result = run_eval(self.corpus, self.indexes, specs, scorers, 42, self.names)
                runs.append({Path(path).name: Path(path).read_bytes() for path in write_reports(result, directory)})
            self.assertEqual(runs[0], runs[1])
            self.assertEqual(sorted(runs[0]), ['group1.csv', 'group3.csv', 'significance.csv', 'summary.md'])
            header = runs[0]['group3.csv'].decode('utf-8').splitlines()[0]
            self.assertEqual(header, 'query_id,scenario,target,scorer,rank,rr,ndcg10,ndcg20')
            significance = runs[0]['significance.csv'].decode('utf-8').splitlines()
            self.assertEqual(len(significance), 1 + 2 * 6)

    def test_entity_ablation_scorer(self):
        spec = DEFAULT_GROUPS[2].with_scenarios(3)
        result = run_eval(self.corpus, self.indexes, [spec], [W5HF, NO_ENTITY], 42, self.names)
        self.assertEqual(len(result.report(2, NO_ENTITY).outcomes), 18)
        self.assertTrue(all(outcome.rank >= 1 for outcome in result.report(2, NO_ENTITY).outcomes))

    def test_unknown_scorer(self):
        with self.assertRaises(ValidationError) as raised:
            run_eval(self.corpus, self.indexes, [DEFAULT_GROUPS[1].with_scenarios(1)], ['pagerank'], 42)
        self.assertEqual(raised.exception.code, 'unknown_scorer')

    def test_cases(self):
        target = next(obj for obj in self.corpus if obj.what)
        query = Query(what=[what_terms(target)[0]])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'cases.jsonl'
            path.write_text(
                dumps({'name': 'first', 'target': target.id, 'query': query_to_dict(query)}) + '\n'
                + dumps({'name': 'lost', 'target': 'no-such-id', 'query': query_to_dict(query)}) + '\n',
                encoding='utf-8',
            )
            cases = load_cases(str(path))
        with self.assertLogs('evaluation.metrics', 'WARNING'):
            frame = run_cases(self.corpus, self.indexes, cases, [W5HF, BM25])
        self.assertEqual(len(frame), 4)
        found = frame[frame['name'] == 'first']
        for row in found.itertuples():
            low, high = map(int, row.range.split('-'))
            self.assertEqual(row.rank, (low + high) / 2)
        self.assertEqual(set(frame[frame['name'] == 'lost']['range']), {'absent'})


@tag('slow')
class AcceptanceTests(SimpleTestCase):
    """Runs on the default synthetic corpus; exclude with --exclude-tag slow."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.corpus, cls.indexes, cls.names = resolved_synth()

    def test_group3_scorer_ordering(self):
        scorers = [W5HF, FIELD_BM25, BM25, TFIDF]
        result = run_eval(self.corpus, self.indexes, [DEFAULT_GROUPS[3]], scorers, 42, self.names)
        scores = [result.report(3, scorer).mrr for scorer in scorers]
        self.assertEqual(len(result.report(3, W5HF).outcomes), 1500)
        self.assertEqual(scores, sorted(scores, reverse=True), scores)
        self.assertEqual(len(set(scores)), 4)
        pair = next(row for row in result.significance if (row.scorer_a, row.scorer_b) == (W5HF, FIELD_BM25))
        self.assertLess(pair.p_value, 0.05)

    def test_entity_resolution_helps_group2(self):
        result = run_eval(self.corpus, self.indexes, [DEFAULT_GROUPS[2]], [W5HF, NO_ENTITY], 42, self.names)
        self.assertGreater(result.report(2, W5HF).mrr, result.report(2, NO_ENTITY).mrr)
        self.assertLess(result.significance[0].p_value, 0.05)

    def test_known_item_guarantee(self):
        engine = SearchEngine(self.corpus, *self.indexes)
        checked = 0
        for spec in DEFAULT_GROUPS.values():
            for scenario in generate_scenarios(self.corpus, spec, 42, self.names):
                position = engine.text.position(scenario.target_id)
                for _, query in scenario.queries:
                    self.assertIn(position, engine.candidates(query))
                    checked += 1
        self.assertEqual(checked, 7500)
