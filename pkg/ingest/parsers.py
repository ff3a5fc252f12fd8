"""
Turns raw source records into TraceObjects and loads corpora from disk.
"""
import datetime
import hashlib
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from email.utils import getaddresses

from django.core.exceptions import ValidationError

from core.models import DimensionTag, LocationRef, PersonRef, TimePoint, TraceObject
from core.serialization import dumps, is_canonical_line, iter_json_lines, location_from_dict, object_from_dict

from .dictionary import classify_label

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawRecord:
    source: str
    fields: tuple
    record_type: str = ''
    id: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'fields', tuple((str(label), value) for label, value in self.fields))
        if not self.source:
            raise ValidationError("A raw record needs a source.", code='missing_source')

    @classmethod
    def from_dict(cls, data):
        fields = data.get('fields') or ()
        if isinstance(fields, dict):
            fields = list(fields.items())
        return cls(
            source=data.get('source') or '',
            fields=tuple(fields),
            record_type=data.get('type') or '',
            id=str(data.get('id') or ''),
        )

    @property
    def type_label(self):
        return self.record_type or f"{self.source} record"

    def fingerprint(self):
        payload = dumps([self.source, self.type_label, [list(pair) for pair in self.fields]])
        return hashlib.sha1(payload.encode('utf-8')).hexdigest()[:16]


class WarningCollector:
    """Thread-safe sink for recoverable ingest problems."""

    def __init__(self):
        self._lock = threading.Lock()
        self._items = []

    def warn(self, message, *args):
        logger.warning(message, *args)
        with self._lock:
            self._items.append(message % args if args else message)

    @property
    def items(self):
        with self._lock:
            return list(self._items)

    def __len__(self):
        with self._lock:
            return len(self._items)


def _values(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return [item for item in value if item not in (None, '')]
    return [] if value == '' else [value]


def _parse_people(value, role, role_weights):
    weight = role_weights.get(role, 1.0)
    people = []
    for item in _values(value):
        if isinstance(item, dict):
            emails = tuple(email.strip().lower() for email in item.get('emails') or () if email.strip())
            name = (item.get('name') or '').strip()
        else:
            name, emails = _split_address(str(item))
        if name or emails:
            people.append(PersonRef(raw_name=name, raw_emails=emails, role=role, role_weight=weight))
    return people


def _split_address(text):
    """`John Smith <js@x.com>` -> ('John Smith', ('js@x.com',)); bare names stay names."""
    name, address = getaddresses([text])[0]
    if '@' in address:
        return name.strip(), (address.strip().lower(),)
    return text.strip(), ()


def _parse_time(text, formats):
    try:
        return TimePoint.parse(text)
    except ValidationError:
        pass
    for fmt in formats:
        try:
            value = datetime.datetime.strptime(text.strip(), fmt)
        except ValueError:
            continue
        if value.tzinfo is not None:
            value = value.astimezone(datetime.timezone.utc)
        return TimePoint.from_datetime(value, _granularity(fmt))
    return None


def _granularity(fmt):
    if '%M' in fmt:
        return 'minute'
    if '%H' in fmt or '%I' in fmt:
        return 'hour'
    if '%d' in fmt or '%j' in fmt:
        return 'day'
    if '%m' in fmt or '%b' in fmt or '%B' in fmt:
        return 'month'
    return 'year'


def parse_record(dictionary, record, role_weights=None, collector=None):
    """
    Classify every field of `record` and build its TraceObject.

    Returns `(object, unmapped_labels)`. A malformed date drops only that
    value; an unmapped label is reported, never guessed.
    """
    if not record.fields:
        raise ValidationError(
            "Record %(id)s from %(source)s has no fields.",
            code='empty_record',
            params={'id': record.id or '?', 'source': record.source},
        )
    if not dictionary.knows(record.source):
        raise ValidationError(
            "Source %(source)s is not in the label dictionary and there is no fallback.",
            code='unknown_source',
            params={'source': record.source},
        )

    if collector is None:
        collector = WarningCollector()
    role_weights = role_weights or {}
    formats = dictionary.formats_for(record.source)
    object_id = record.id or f"{record.source.casefold()}-{record.fingerprint()}"
    dims = {tag: [] for tag in DimensionTag}
    unmapped = []

    for label, value in record.fields:
        tag = classify_label(dictionary, record.source, label)
        if tag is None:
            unmapped.append(label)
            continue
        if tag == DimensionTag.WHO:
            dims[tag].extend(_parse_people(value, label.casefold(), role_weights))
        elif tag == DimensionTag.WHEN:
            for item in _values(value):
                point = _parse_time(str(item), formats)
                if point is None:
                    collector.warn(
                        "Dropped malformed date %r in %s field %s", item, object_id, label
                    )
                    continue
                dims[tag].append(point)
        elif tag == DimensionTag.WHERE:
            for item in _values(value):
                if isinstance(item, dict):
                    dims[tag].append(location_from_dict(item))
                elif str(item).strip():
                    dims[tag].append(LocationRef(raw_text=str(item).strip()))
        else:
            dims[tag].extend(str(item) for item in _values(value))

    how = [record.type_label]
    seen = {record.type_label.casefold()}
    for item in dims[DimensionTag.HOW]:
        if item.casefold() not in seen:
            seen.add(item.casefold())
            how.append(item)

    obj = TraceObject(
        id=object_id,
        source=record.source,
        what=dims[DimensionTag.WHAT],
        who=dims[DimensionTag.WHO],
        when=dims[DimensionTag.WHEN],
        where=dims[DimensionTag.WHERE],
        why=dims[DimensionTag.WHY],
        how=how,
    )
    return obj, unmapped


def _read_file(path, dictionary, role_weights, collector):
    objects = []
    for number, data in iter_json_lines(path):
        try:
            if is_canonical_line(data):
                obj = object_from_dict(data)
            else:
                if dictionary is None:
                    raise ValidationError("raw records need a label dictionary", code='missing_dictionary')
                obj, unmapped = parse_record(dictionary, RawRecord.from_dict(data), role_weights, collector)
                for label in unmapped:
                    collector.warn("Unmapped label %r from %s in %s", label, obj.source, obj.id)
        except ValidationError as exc:
            raise ValidationError(
                "%(path)s line %(line)s: %(error)s",
                code=getattr(exc, 'code', None) or 'invalid_record',
                params={'path': path, 'line': number, 'error': '; '.join(exc.messages)},
            )
        objects.append(obj)
    logger.info("Read %d objects from %s", len(objects), path)
    return objects


def _check_unique(objects):
    seen = set()
    for obj in objects:
        if obj.id in seen:
            raise ValidationError("Duplicate object id %(id)s.", code='duplicate_id', params={'id': obj.id})
        seen.add(obj.id)


def load_corpus(path, dictionary=None, role_weights=None, collector=None):
    """
    Load a canonical corpus, or raw records classified with `dictionary`.
    Ids must be unique across the file.
    """
    if collector is None:
        collector = WarningCollector()
    objects = _read_file(path, dictionary, role_weights or {}, collector)
    _check_unique(objects)
    return objects


def ingest_files(paths, dictionary=None, role_weights=None, threads=1, collector=None):
    """Parse several files, concurrently when `threads` > 1, keeping input order."""
    if collector is None:
        collector = WarningCollector()
    role_weights = role_weights or {}
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        batches = list(pool.map(lambda path: _read_file(path, dictionary, role_weights, collector), paths))
    objects = [obj for batch in batches for obj in batch]
    _check_unique(objects)
    return objects
