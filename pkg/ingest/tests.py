import json
import random
import tempfile
from collections import Counter
from pathlib import Path

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from core.models import DimensionTag, LocationRef, PersonRef, TimePoint

from .dictionary import LabelDictionary, classify_label, load_dictionary
from .parsers import RawRecord, WarningCollector, ingest_files, load_corpus, parse_record

FIXTURES = Path(__file__).resolve().parent / 'fixtures'


def write_lines(directory, name, lines):
    path = Path(directory) / name
    path.write_text(''.join(line + '\n' for line in lines), encoding='utf-8')
    return str(path)


class ClassifyLabelTests(SimpleTestCase):

    def setUp(self):
        self.dictionary = load_dictionary(FIXTURES / 'dictionary.json')

    def test_gmail_labels(self):
        self.assertEqual(classify_label(self.dictionary, 'gmail', 'From'), DimensionTag.WHO)
        self.assertEqual(classify_label(self.dictionary, 'gmail', 'Subject'), DimensionTag.WHAT)
        self.assertIsNone(classify_label(self.dictionary, 'gmail', 'X-Unknown-Header'))

    def test_lookup_is_case_insensitive(self):
        self.assertEqual(classify_label(self.dictionary, 'Gmail', 'from'), DimensionTag.WHO)

    def test_source_mapping_wins_over_fallback(self):
        dictionary = LabelDictionary.from_dict({
            'sources': {'notes': {'title': 'how'}},
            'fallback': {'title': 'what'},
        })
        self.assertEqual(classify_label(dictionary, 'notes', 'title'), DimensionTag.HOW)
        self.assertEqual(classify_label(dictionary, 'other', 'title'), DimensionTag.WHAT)

    def test_invalid_dimension_rejected(self):
        with self.assertRaises(ValidationError) as raised:
            LabelDictionary.from_dict({'sources': {'gmail': {'From': 'whom'}}})
        self.assertEqual(raised.exception.code, 'invalid_dictionary')


class ParseRecordTests(SimpleTestCase):

    def setUp(self):
        self.dictionary = load_dictionary(FIXTURES / 'dictionary.json')

    def test_march_post(self):
        data = json.loads((FIXTURES / 'march_post_raw.jsonl').read_text(encoding='utf-8'))
        obj, unmapped = parse_record(self.dictionary, RawRecord.from_dict(data))
        self.assertEqual(unmapped, [])
        self.assertEqual(obj.id, 'fb-post-1')
        self.assertEqual(len(obj.what), 2)
        self.assertEqual([ref.raw_name for ref in obj.who], ['John Smith', 'Anna Smith'])
        self.assertEqual(obj.when, (TimePoint(2017, 4, 22, 16, 58),))
        self.assertEqual(obj.where, (LocationRef('Washington'),))
        self.assertEqual(obj.how, ('Facebook post',))

    def test_single_field_record(self):
        obj, _ = parse_record(self.dictionary, RawRecord(source='gmail', fields=[('Body', 'hello')]))
        self.assertEqual(obj.what, ('hello',))
        self.assertEqual((obj.who, obj.when, obj.where, obj.why), ((), (), (), ()))
        self.assertEqual(len(obj.how), 1)

    def test_people_split_into_name_and_email(self):
        record = RawRecord(source='gmail', fields=[('From', 'Ashley Park <Ashley@Park.org>')])
        obj, _ = parse_record(self.dictionary, record, role_weights={'from': 2.0})
        self.assertEqual(obj.who, (PersonRef('Ashley Park', ('ashley@park.org',), role='from', role_weight=2.0),))

    def test_source_date_format(self):
        record = RawRecord(source='gmail', fields=[('Date', 'Mon, 15 Jul 2013 09:30:00 +0200')])
        obj, _ = parse_record(self.dictionary, record)
        self.assertEqual(obj.when, (TimePoint(2013, 7, 15, 7, 30),))

    def test_malformed_date_dropped_with_warning(self):
        collector = WarningCollector()
        record = RawRecord(source='gmail', fields=[('Subject', 'lunch?'), ('Date', 'sometime next week')])
        with self.assertLogs('ingest.parsers', level='WARNING'):
            obj, _ = parse_record(self.dictionary, record, collector=collector)
        self.assertEqual(obj.when, ())
        self.assertEqual(obj.what, ('lunch?',))
        self.assertEqual(len(collector), 1)

    def test_unmapped_labels_reported(self):
        record = RawRecord(source='gmail', fields=[('Subject', 'hi'), ('X-Unknown-Header', '1')])
        _, unmapped = parse_record(self.dictionary, record)
        self.assertEqual(unmapped, ['X-Unknown-Header'])

    def test_empty_record_rejected(self):
        with self.assertRaises(ValidationError) as raised:
            parse_record(self.dictionary, RawRecord(source='gmail', fields=[]))
        self.assertEqual(raised.exception.code, 'empty_record')

    def test_deterministic(self):
        record = RawRecord(source='twitter', fields=[('text', 'hello'), ('user', 'A B')])
        first, _ = parse_record(self.dictionary, record)
        second, _ = parse_record(self.dictionary, record)
        self.assertEqual(first, second)


class RawSampleTests(SimpleTestCase):

    def setUp(self):
        self.dictionary = load_dictionary(FIXTURES / 'dictionary.json')
        self.manifest = json.loads((FIXTURES / 'raw_sample_manifest.json').read_text(encoding='utf-8'))

    def test_counts_match_manifest(self):
        collector = WarningCollector()
        with self.assertLogs('ingest.parsers', level='WARNING'):
            objects = load_corpus(str(FIXTURES / 'raw_sample.jsonl'), self.dictionary, collector=collector)
        self.assertEqual(len(objects), self.manifest['objects'])
        self.assertEqual(dict(Counter(obj.source for obj in objects)), self.manifest['sources'])
        tally = {tag.value: sum(len(obj.get(tag)) for obj in objects) for tag in DimensionTag}
        self.assertEqual(tally, self.manifest['dimensions'])
        self.assertEqual(len(collector), self.manifest['malformed_dates'])

    def test_mixed_fixture_histogram(self):
        manifest = json.loads((FIXTURES / 'mixed_500_manifest.json').read_text(encoding='utf-8'))
        collector = WarningCollector()
        objects = load_corpus(str(FIXTURES / 'mixed_500.jsonl'), self.dictionary, collector=collector)
        self.assertEqual(len(objects), manifest['objects'])
        self.assertEqual(len({obj.id for obj in objects}), manifest['objects'])
        self.assertEqual(dict(Counter(obj.source for obj in objects)), manifest['sources'])
        for name, count in manifest['dimensions'].items():
            self.assertEqual(sum(len(obj.get(name)) for obj in objects), count, name)
        self.assertEqual(len(collector), manifest['malformed_dates'])

    def test_concurrent_ingest_keeps_every_warning(self):
        collector = WarningCollector()
        paths = [str(FIXTURES / 'raw_sample.jsonl'), str(FIXTURES / 'mixed_500.jsonl')]
        with self.assertLogs('ingest.parsers', level='WARNING'):
            objects = ingest_files(paths, self.dictionary, threads=2, collector=collector)
        self.assertEqual(len(objects), self.manifest['objects'] + 500)
        self.assertEqual(len(collector), self.manifest['malformed_dates'])

    def test_every_fixture_label_maps(self):
        for path in ('raw_sample.jsonl', 'march_post_raw.jsonl', 'mixed_500.jsonl'):
            for line in (FIXTURES / path).read_text(encoding='utf-8').splitlines():
                record = RawRecord.from_dict(json.loads(line))
                for label, _ in record.fields:
                    self.assertIsNotNone(classify_label(self.dictionary, record.source, label), (path, label))


class GeneratedRecordTests(SimpleTestCase):
    """Counts per dimension, tallied straight from the dictionary JSON."""

    def test_two_hundred_records(self):
        raw = json.loads((FIXTURES / 'dictionary.json').read_text(encoding='utf-8'))
        dictionary = LabelDictionary.from_dict(raw)
        samples = {
            'who': lambda n: f'Person {n}',
            'what': lambda n: f'note number {n}',
            'when': lambda n: f'2016-05-{n % 28 + 1:02d}',
            'where': lambda n: f'Place {n % 7}',
            'how': lambda n: f'channel {n % 3}',
        }
        rng = random.Random(3)
        lines, expected = [], Counter()
        for n in range(200):
            source = rng.choice(sorted(raw['sources']))
            labels = [label for label in raw['sources'][source] if not label.startswith('_')]
            chosen = rng.sample(labels, rng.randint(1, min(4, len(labels))))
            fields = []
            for label in chosen:
                dimension = raw['sources'][source][label]
                fields.append([label, samples[dimension](n)])
                if dimension != 'how':
                    expected[dimension] += 1
            type_label = f'{source} item'
            hows = {type_label.casefold()} | {value.casefold() for label, value in fields if raw['sources'][source][label] == 'how'}
            expected['how'] += len(hows)
            lines.append(json.dumps({'id': f'g{n}', 'source': source, 'type': type_label, 'fields': fields}))

        with tempfile.TemporaryDirectory() as directory:
            objects = load_corpus(write_lines(directory, 'generated.jsonl', lines), dictionary)
        self.assertEqual(len(objects), 200)
        tally = Counter()
        for obj in objects:
            for tag in DimensionTag:
                tally[tag.value] += len(obj.get(tag))
        self.assertEqual(+tally, +expected)


class LoadCorpusTests(SimpleTestCase):

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as directory:
            self.assertEqual(load_corpus(write_lines(directory, 'empty.jsonl', [])), [])

    def test_duplicate_id(self):
        line = json.dumps({'id': 'a1', 'source': 'gmail', 'what': ['x']})
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(ValidationError) as raised:
                load_corpus(write_lines(directory, 'dup.jsonl', [line, line]))
        self.assertEqual(raised.exception.code, 'duplicate_id')
        self.assertIn('a1', raised.exception.messages[0])

    def test_malformed_line_reports_line_number(self):
        good = json.dumps({'id': 'a1', 'source': 'gmail', 'what': ['x']})
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(ValidationError) as raised:
                load_corpus(write_lines(directory, 'bad.jsonl', [good, '{"id": ']))
        self.assertEqual(raised.exception.code, 'malformed_json')
        self.assertIn('line 2', raised.exception.messages[0])

    def test_parallel_ingest_keeps_order(self):
        with tempfile.TemporaryDirectory() as directory:
            paths = [
                write_lines(directory, f'part{n}.jsonl', [
                    json.dumps({'id': f'p{n}-{m}', 'source': 'gmail', 'what': [str(m)]}) for m in range(5)
                ])
                for n in range(4)
            ]
            objects = ingest_files(paths, threads=3)
        self.assertEqual([obj.id for obj in objects], [f'p{n}-{m}' for n in range(4) for m in range(5)])
