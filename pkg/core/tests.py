import contextlib
import io
import json
import tempfile
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, tag

from TraceSearch.cli import main

from .config import load_config
from .models import DimensionTag, PersonRef, Query, TimePoint, TraceObject, get_dimension, time_matches
from .persistence import read_versioned, write_versioned
from .serialization import dumps, object_from_dict, object_to_dict, query_from_dict, query_to_dict

MARCH_POST = Path(__file__).resolve().parent / 'fixtures' / 'march_post.jsonl'


class TimePointTests(SimpleTestCase):

    def test_parse_every_granularity(self):
        self.assertEqual(TimePoint.parse('2017'), TimePoint(2017))
        self.assertEqual(TimePoint.parse('2017-04'), TimePoint(2017, 4))
        self.assertEqual(TimePoint.parse('2017-04-22'), TimePoint(2017, 4, 22))
        self.assertEqual(TimePoint.parse('2017-04-22T16:58'), TimePoint(2017, 4, 22, 16, 58))
        self.assertEqual(TimePoint.parse('--06'), TimePoint(month=6))
        for text in ('2017', '2017-04', '2017-04-22', '2017-04-22T16:58', '--06'):
            self.assertEqual(TimePoint.parse(text).isoformat(), text)

    def test_every_shape_round_trips(self):
        points = [
            TimePoint(2017), TimePoint(2017, 4), TimePoint(2017, 4, 22), TimePoint(2017, 4, 22, 16),
            TimePoint(2017, 4, 22, 16, 58), TimePoint(month=6), TimePoint(month=2, day=29),
            TimePoint(month=6, day=15, hour=9), TimePoint(month=6, day=15, hour=9, minute=5),
        ]
        for point in points:
            self.assertEqual(TimePoint.parse(point.isoformat()), point, point.isoformat())
        self.assertEqual(TimePoint(2017, 4, 22, 16).isoformat(), '2017-04-22T16')
        self.assertEqual(TimePoint(month=6, day=15).isoformat(), '--06-15')

    def test_invalid_points(self):
        for text in ('17', '2017-4', 'April 2017', '2017-04-22 16:58', '-', '--'):
            with self.assertRaises(ValidationError) as raised:
                TimePoint.parse(text)
            self.assertEqual(raised.exception.code, 'malformed_time')
        for fields in ({}, {'year': 2017, 'day': 3}, {'year': 2017, 'month': 13}, {'year': 2017, 'month': 2, 'day': 30}):
            with self.assertRaises(ValidationError):
                TimePoint(**fields)
        self.assertEqual(TimePoint(month=2, day=29).day, 29)

    def test_time_matches(self):
        target = TimePoint(2017, 4, 22, 16, 58)
        self.assertTrue(time_matches(TimePoint(2017), target))
        self.assertTrue(time_matches(TimePoint(month=4), target))
        self.assertTrue(time_matches(TimePoint(2017, 4, 22), target))
        self.assertFalse(time_matches(TimePoint(2016), target))
        self.assertFalse(time_matches(TimePoint(2017, 5), target))
        self.assertFalse(time_matches(target, TimePoint(2017)))


class TraceObjectTests(SimpleTestCase):

    def test_march_post_round_trip(self):
        line = MARCH_POST.read_text(encoding='utf-8').strip()
        obj = object_from_dict(json.loads(line))
        self.assertEqual(dumps(object_to_dict(obj)), line)
        self.assertEqual(get_dimension(obj, 'when'), (TimePoint(2017, 4, 22, 16, 58),))
        self.assertEqual([ref.raw_name for ref in get_dimension(obj, DimensionTag.WHO)], ['John Smith', 'Anna Smith'])
        self.assertEqual(obj.get('why'), ())

    def test_required_fields(self):
        with self.assertRaises(ValidationError) as raised:
            TraceObject(source='gmail')
        self.assertEqual(raised.exception.code, 'missing_id')
        with self.assertRaises(ValidationError) as raised:
            TraceObject(id='x')
        self.assertEqual(raised.exception.code, 'missing_source')
        with self.assertRaises(ValidationError) as raised:
            PersonRef()
        self.assertEqual(raised.exception.code, 'empty_person')

    def test_queries(self):
        with self.assertRaises(ValidationError) as raised:
            Query()
        self.assertEqual(raised.exception.code, 'empty_query')
        query = Query(source='Gmail', what=['thesis'], how=['Facebook'])
        self.assertEqual(query.wanted_sources, {'gmail', 'facebook'})
        self.assertEqual(query.dimensions(), [DimensionTag.WHAT, DimensionTag.HOW])
        self.assertEqual(query_from_dict(query_to_dict(query)), query)


class ConfigTests(SimpleTestCase):

    def write_json(self, payload):
        handle = tempfile.NamedTemporaryFile('w', suffix='.json', delete=False, encoding='utf-8')
        with handle:
            handle.write(payload if isinstance(payload, str) else json.dumps(payload))
        self.addCleanup(Path(handle.name).unlink)
        return handle.name

    def test_defaults_come_from_settings(self):
        config = load_config()
        self.assertEqual(config.k1, settings.W5H['k1'])
        self.assertEqual(config.scorers, ['w5hf', 'fieldbm25', 'bm25', 'tfidf'])
        self.assertEqual(config.path('corpus'), 'corpus.jsonl')

    def test_flags_win_over_file(self):
        path = self.write_json({'k1': 2.0, 'seed': 7, 'paths': {'corpus': 'from-file.jsonl'}})
        config = load_config(path, {'seed': 9, 'k1': None})
        self.assertEqual(config.k1, 2.0)
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.path('corpus'), 'from-file.jsonl')
        self.assertEqual(config.path('index'), 'index')

    def test_rejected_files(self):
        with self.assertRaises(ValidationError) as raised:
            load_config(self.write_json({'k3': 1}))
        self.assertEqual(raised.exception.code, 'unknown_config_key')
        with self.assertRaises(ValidationError) as raised:
            load_config(self.write_json('{"k1": '))
        self.assertEqual(raised.exception.code, 'malformed_json')
        with self.assertRaises(ValidationError) as raised:
            load_config(self.write_json({'scorers': ['pagerank']}))
        self.assertEqual(raised.exception.code, 'invalid_config')
        with self.assertRaises(ValidationError) as raised:
            load_config(None, {'b': 1.5})
        self.assertEqual(raised.exception.code, 'invalid_config')


class VersionedFileTests(SimpleTestCase):

    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.path = Path(directory.name) / 'freq.idx'
        write_versioned(self.path, 'frequency', {'f[g]': {'a': 1}}, corpus_hash='abc')

    def test_round_trip(self):
        head, body = read_versioned(self.path, 'frequency')
        self.assertEqual(head['corpus_hash'], 'abc')
        self.assertEqual(body, {'f[g]': {'a': 1}})

    def test_wrong_kind(self):
        with self.assertRaises(ValidationError) as raised:
            read_versioned(self.path, 'text')
        self.assertEqual(raised.exception.code, 'wrong_kind')

    def test_truncated_body(self):
        self.path.write_text(self.path.read_text(encoding='utf-8')[:-3], encoding='utf-8')
        with self.assertRaises(ValidationError) as raised:
            read_versioned(self.path, 'frequency')
        self.assertEqual(raised.exception.code, 'checksum')

    def test_version_mismatch(self):
        head, body = self.path.read_text(encoding='utf-8').split('\n', 1)
        head = json.loads(head)
        head['format_version'] = 99
        self.path.write_text(dumps(head) + '\n' + body, encoding='utf-8')
        with self.assertRaises(ValidationError) as raised:
            read_versioned(self.path, 'frequency')
        self.assertEqual(raised.exception.code, 'version_mismatch')


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class CliTests(SimpleTestCase):

    def test_help(self):
        code, out, _ = run_cli('--help')
        self.assertEqual(code, 0)
        self.assertIn('eval', out)

    def test_unknown_subcommand(self):
        code, _, err = run_cli('frobnicate')
        self.assertEqual(code, 2)
        self.assertIn('frobnicate', err)

    def test_usage_error(self):
        code, _, _ = run_cli('search', '--no-such-flag')
        self.assertEqual(code, 2)

    def test_missing_input_exits_1(self):
        code, _, err = run_cli('search', '--query', '/nonexistent/query.json')
        self.assertEqual(code, 1)
        self.assertTrue(err)

    def test_subcommand_with_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            config = tmp / 'config.json'
            config.write_text(json.dumps({'threads': 2}), encoding='utf-8')
            out_path = tmp / 'small.jsonl'
            code, out, err = run_cli(
                'synth', '--config', str(config), '--objects', '5', '--out', str(out_path), '--format', 'json',
            )
            self.assertEqual(code, 0, err)
            self.assertEqual(json.loads(out)['objects'], 5)
            self.assertEqual(len(out_path.read_text(encoding='utf-8').splitlines()), 5)

    def test_bad_config_file_exits_1(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / 'config.json'
            config.write_text('{"k3": 1}', encoding='utf-8')
            code, _, err = run_cli('synth', '--config', str(config), '--out', str(Path(tmp) / 'x.jsonl'))
            self.assertEqual(code, 1)
            self.assertIn('k3', err)

    def test_bad_geocache_exits_1(self):
        with tempfile.TemporaryDirectory() as tmp:
            geocache = Path(tmp) / 'geocache.json'
            geocache.write_text('{"Washington": [{"lat": 38.9}]}', encoding='utf-8')
            code, _, err = run_cli(
                'resolve', '--corpus', str(MARCH_POST), '--geocache', str(geocache),
                '--output', str(Path(tmp) / 'resolved.jsonl'), '--entities', str(Path(tmp) / 'entities.json'),
            )
            self.assertEqual(code, 1)
            self.assertIn('Washington', err)
            self.assertNotIn('Traceback', err)

    @tag('slow')
    def test_pipeline(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            spec = tmp / 'spec.json'
            spec.write_text(json.dumps({'objects': 300, 'seed': 5}), encoding='utf-8')
            query = tmp / 'query.json'
            query.write_text(json.dumps({'what': ['coffee'], 'when': ['2016']}), encoding='utf-8')
            steps = [
                ('synth', '--spec', spec, '--out', tmp / 'raw.jsonl', '--truth', tmp / 'truth.json',
                 '--geocache', tmp / 'geocache.json'),
                ('ingest', '--input', tmp / 'raw.jsonl', '--output', tmp / 'corpus.jsonl'),
                ('resolve', '--corpus', tmp / 'corpus.jsonl', '--geocache', tmp / 'geocache.json',
                 '--output', tmp / 'resolved.jsonl', '--entities', tmp / 'entities.json', '--truth', tmp / 'truth.json'),
                ('index', '--corpus', tmp / 'resolved.jsonl', '--output', tmp / 'index'),
                ('search', '--query', query, '--corpus', tmp / 'resolved.jsonl', '--index', tmp / 'index',
                 '--entities', tmp / 'entities.json', '--format', 'json'),
                ('eval', '--corpus', tmp / 'resolved.jsonl', '--index', tmp / 'index', '--entities',
                 tmp / 'entities.json', '--groups', '1,2', '--scenarios', '2', '--scorers', 'w5hf,bm25',
                 '--out', tmp / 'report'),
            ]
            for step in steps:
                code, out, err = run_cli(*map(str, step))
                self.assertEqual(code, 0, f"{step[0]}: {err}")
            self.assertEqual(
                sorted(path.name for path in (tmp / 'report').iterdir()),
                ['group1.csv', 'group2.csv', 'significance.csv', 'summary.md'],
            )
            first = (tmp / 'report' / 'group2.csv').read_bytes()
            self.assertEqual(run_cli(*map(str, steps[-1]))[0], 0)
            self.assertEqual((tmp / 'report' / 'group2.csv').read_bytes(), first)
