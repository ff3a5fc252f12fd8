"""
Canonical JSON Lines codec for trace objects and queries.

One trace per line, UTF-8, keys `id, source, what, who, when, where, why, how`.
`who` entries are `{name, emails, role, weight, entity_id?}`, `when` entries
are `YYYY[-MM[-DD[THH:MM]]]` or `--MM` strings, and `where` entries are
`{text, id?, lat?, lon?}` objects (a bare string is accepted on input).
"""
import json

from django.core.exceptions import ValidationError

from .models import LocationRef, PersonRef, Query, TimePoint, TraceObject


def dumps(payload):
    """Compact, key-order-stable JSON used for every file we write."""
    return json.dumps(payload, ensure_ascii=False, separators=(',', ':'))


def person_to_dict(ref):
    data = {
        'name': ref.raw_name,
        'emails': list(ref.raw_emails),
        'role': ref.role,
        'weight': ref.role_weight,
    }
    if ref.entity_id is not None:
        data['entity_id'] = ref.entity_id
    return data


def person_from_dict(data):
    if isinstance(data, str):
        return PersonRef(raw_name=data)
    return PersonRef(
        raw_name=data.get('name') or '',
        raw_emails=tuple(data.get('emails') or ()),
        entity_id=data.get('entity_id'),
        role=data.get('role'),
        role_weight=float(data.get('weight', 1.0)),
    )


def location_to_dict(ref):
    data = {'text': ref.raw_text}
    if ref.canonical_id is not None:
        data['id'] = ref.canonical_id
    if ref.coords is not None:
        data['lat'], data['lon'] = ref.coords
    return data


def location_from_dict(data):
    if isinstance(data, str):
        return LocationRef(raw_text=data)
    coords = (data['lat'], data['lon']) if 'lat' in data and 'lon' in data else None
    return LocationRef(raw_text=data.get('text') or '', canonical_id=data.get('id'), coords=coords)


def _dimensions_to_dict(record):
    return {
        'what': list(record.what),
        'who': [person_to_dict(ref) for ref in record.who],
        'when': [point.isoformat() for point in record.when],
        'where': [location_to_dict(ref) for ref in record.where],
        'why': list(record.why),
        'how': list(record.how),
    }


def _dimensions_from_dict(data):
    return {
        'what': tuple(data.get('what') or ()),
        'who': tuple(person_from_dict(item) for item in data.get('who') or ()),
        'when': tuple(TimePoint.parse(item) for item in data.get('when') or ()),
        'where': tuple(location_from_dict(item) for item in data.get('where') or ()),
        'why': tuple(data.get('why') or ()),
        'how': tuple(data.get('how') or ()),
    }


def object_to_dict(obj):
    return {'id': obj.id, 'source': obj.source, **_dimensions_to_dict(obj)}


def object_from_dict(data):
    return TraceObject(id=str(data.get('id') or ''), source=data.get('source') or '', **_dimensions_from_dict(data))


def query_to_dict(query):
    return {'source': query.source, **_dimensions_to_dict(query)}


def query_from_dict(data):
    return Query(source=data.get('source') or '', **_dimensions_from_dict(data))


def is_canonical_line(data):
    return isinstance(data, dict) and 'id' in data and 'fields' not in data


def iter_json_lines(path):
    """Yield `(line_number, payload)` for every non-blank line of a JSONL file."""
    with open(path, encoding='utf-8') as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield number, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    "%(path)s line %(line)s is not valid JSON: %(error)s",
                    code='malformed_json',
                    params={'path': path, 'line': number, 'error': exc.msg},
                )


def write_corpus(objects, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        for obj in objects:
            handle.write(dumps(object_to_dict(obj)))
            handle.write('\n')


def read_query(path):
    with open(path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                "Query file %(path)s is not valid JSON: %(error)s",
                code='malformed_json',
                params={'path': path, 'error': exc.msg},
            )
    return query_from_dict(data)
