"""
Corpus-level entity resolution and the Resolution it produces.
"""
import json
import logging
from collections import Counter, defaultdict
from dataclasses import replace

from django.core.exceptions import ValidationError

from core.models import PersonRef
from core.serialization import dumps

from .locations import resolve_where
from .models import LocationEntity, PersonEntity, normalize_surface
from .swoosh import KeyIndex, as_entity, person_id, rswoosh, stable_id

logger = logging.getLogger(__name__)

MERGE = 'merge'
SURFACE = 'surface'


def surface_key(ref):
    """Identity of a reference when entities are not merged: its name, else its email."""
    name = normalize_surface(ref.raw_name)
    if name:
        return 'name:' + name
    return 'email:' + min(email.casefold() for email in ref.raw_emails)


def _display_names(mentions):
    """entity_id -> most frequent raw name, ties to the lexicographically smallest."""
    names = {}
    for entity_id, counts in mentions.items():
        if counts:
            names[entity_id] = min(counts.items(), key=lambda item: (-item[1], item[0]))[0]
    return names


class Resolution:
    """
    The outcome of resolving a corpus: rewritten objects, person and
    location entities, and lookups that resolve new references (from a
    query, or from ground truth) onto the same entities.
    """

    def __init__(self, persons, locations, objects=(), mode=MERGE, ref_entities=None):
        self.persons = list(persons)
        self.locations = list(locations)
        self.objects = list(objects)
        self.mode = mode
        self.ref_entities = dict(ref_entities or {})
        self._persons = {person.entity_id: person for person in self.persons}
        self._surfaces = {}
        self._index = KeyIndex()
        for person in self.persons:
            if mode == MERGE:
                self._index.add(person)
            for name in person.names:
                self._surfaces.setdefault('name:' + normalize_surface(name), person.entity_id)
            for email in person.emails:
                self._surfaces.setdefault('email:' + email, person.entity_id)
        self._places = {}
        for location in self.locations:
            for form in location.surface_forms:
                self._places.setdefault(normalize_surface(form), location.canonical_id)
            if location.address:
                self._places.setdefault(normalize_surface(location.address), location.canonical_id)

    def person(self, entity_id):
        return self._persons.get(entity_id)

    def entity_for(self, ref):
        """The entity id a person reference resolves to, or None."""
        if ref.entity_id and ref.entity_id in self._persons:
            return ref.entity_id
        known = self.ref_entities.get(person_id(ref))
        if known is not None:
            return known
        if self.mode == SURFACE:
            return self._surfaces.get(surface_key(ref))
        found = self._surfaces.get(surface_key(ref))
        if found is not None:
            return found
        partner = self._index.find(as_entity(ref))
        return partner.entity_id if partner is not None else None

    def place_for(self, ref):
        if ref.canonical_id and any(ref.canonical_id == entity.canonical_id for entity in self.locations):
            return ref.canonical_id
        return self._places.get(normalize_surface(ref.raw_text))

    def resolve_query(self, query):
        """
        Map a query's raw who and where values onto entity and location ids.
        Values that resolve to nothing are kept unresolved and match nothing.
        """
        who = []
        for ref in query.who:
            entity_id = self.entity_for(ref)
            if entity_id is None:
                logger.warning("Query person %r matches no known entity", ref.label)
            who.append(replace(ref, entity_id=entity_id))
        where = []
        for ref in query.where:
            canonical_id = self.place_for(ref)
            if canonical_id is None:
                logger.warning("Query location %r matches no known location", ref.raw_text)
            where.append(replace(ref, canonical_id=canonical_id))
        return replace(query, who=tuple(who), where=tuple(where))


def resolve_people(corpus, merge=True):
    """
    Give every PersonRef in `corpus` an entity id.

    With `merge`, references are resolved with R-Swoosh; without it every
    distinct surface form (name, else email) is its own entity. Returns
    `(objects, persons, ref_entities)`.
    """
    refs = [ref for obj in corpus for ref in obj.who]
    ref_entities = {}

    if merge:
        persons = rswoosh([replace(ref, entity_id=None) for ref in refs])
        index = KeyIndex()
        for person in persons:
            index.add(person)
        for ref in refs:
            seed = as_entity(replace(ref, entity_id=None))
            partner = index.find(seed)
            ref_entities[person_id(ref)] = partner.entity_id if partner is not None else seed.entity_id
    else:
        names, emails = defaultdict(set), defaultdict(set)
        ids = {}
        for ref in refs:
            key = surface_key(ref)
            if key not in ids:
                ids[key] = stable_id('person', ref.label, key)
            if ref.raw_name.strip():
                names[key].add(ref.raw_name.strip())
            emails[key].update(email for email in ref.raw_emails if email.strip())
            ref_entities[person_id(ref)] = ids[key]
        persons = sorted(
            (PersonEntity(entity_id=ids[key], names=names[key], emails=emails[key]) for key in ids),
            key=lambda person: person.entity_id,
        )

    mentions = defaultdict(Counter)
    objects = []
    for obj in corpus:
        who = []
        for ref in obj.who:
            entity_id = ref_entities[person_id(ref)]
            if ref.raw_name.strip():
                mentions[entity_id][ref.raw_name.strip()] += 1
            who.append(replace(ref, entity_id=entity_id))
        objects.append(replace(obj, who=tuple(who)))

    display = _display_names(mentions)
    persons = [replace(person, display_name=display.get(person.entity_id, '')) for person in persons]
    logger.info(
        "Resolved %d person references into %d entities (%s)", len(refs), len(persons), MERGE if merge else SURFACE
    )
    return objects, persons, ref_entities


def resolve_corpus(corpus, cache, merge=True):
    """Resolve people and places of a whole corpus. Only who and where change."""
    objects, persons, ref_entities = resolve_people(corpus, merge=merge)
    refs = [ref for obj in objects for ref in obj.where]
    locations, rewritten = resolve_where(refs, cache, objects)

    position = 0
    resolved = []
    for obj in objects:
        count = len(obj.where)
        if count:
            obj = replace(obj, where=tuple(rewritten[position:position + count]))
            position += count
        resolved.append(obj)
    return Resolution(
        persons, locations, objects=resolved, mode=MERGE if merge else SURFACE, ref_entities=ref_entities
    )


def entities_to_dict(resolution):
    return {
        'mode': resolution.mode,
        'persons': [
            {
                'id': person.entity_id,
                'display_name': person.display_name,
                'names': sorted(person.names),
                'emails': sorted(person.emails),
            }
            for person in resolution.persons
        ],
        'locations': [
            {
                'id': location.canonical_id,
                'surface_forms': sorted(location.surface_forms),
                'address': location.address,
                **({'lat': location.coords[0], 'lon': location.coords[1]} if location.coords else {}),
            }
            for location in resolution.locations
        ],
        'refs': dict(sorted(resolution.ref_entities.items())),
    }


def entities_from_dict(data):
    persons = [
        PersonEntity(
            entity_id=item['id'],
            names=item.get('names') or (),
            emails=item.get('emails') or (),
            display_name=item.get('display_name') or '',
        )
        for item in data.get('persons') or ()
    ]
    locations = [
        LocationEntity(
            canonical_id=item['id'],
            surface_forms=item.get('surface_forms') or (),
            address=item.get('address'),
            coords=(item['lat'], item['lon']) if 'lat' in item and 'lon' in item else None,
        )
        for item in data.get('locations') or ()
    ]
    return Resolution(persons, locations, mode=data.get('mode') or MERGE, ref_entities=data.get('refs'))


def save_entities(resolution, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(dumps(entities_to_dict(resolution)))
        handle.write('\n')


def load_entities(path):
    with open(path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                "Entities file %(path)s is not valid JSON: %(error)s",
                code='malformed_json',
                params={'path': path, 'error': exc.msg},
            )
    return entities_from_dict(data)


def load_truth_forms(path):
    """`(true_entity, PersonRef)` pairs from a synth truth file."""
    with open(path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                "Truth file %(path)s is not valid JSON: %(error)s",
                code='malformed_json',
                params={'path': path, 'error': exc.msg},
            )
    try:
        return [
            (entity['id'], PersonRef(raw_name=form.get('name') or '', raw_emails=tuple(form.get('emails') or ())))
            for entity in data.get('entities') or ()
            for form in entity.get('forms') or ()
        ]
    except (AttributeError, KeyError, TypeError):
        raise ValidationError("Truth file %(path)s is not a truth file.", code='invalid_truth', params={'path': path})


def _pairs(count):
    return count * (count - 1) // 2


def pairwise_quality(resolution, truth_forms):
    """
    Pairwise precision and recall of the person clustering. Each distinct
    surface form counts once; unresolvable forms are their own cluster.
    """
    forms = {}
    for truth_id, ref in truth_forms:
        forms.setdefault(person_id(ref), (truth_id, ref))

    predicted, actual, both = Counter(), Counter(), Counter()
    for key, (truth_id, ref) in forms.items():
        entity_id = resolution.entity_for(ref) or f'unresolved:{key}'
        predicted[entity_id] += 1
        actual[truth_id] += 1
        both[(truth_id, entity_id)] += 1

    true_positive = sum(_pairs(count) for count in both.values())
    predicted_pairs = sum(_pairs(count) for count in predicted.values())
    actual_pairs = sum(_pairs(count) for count in actual.values())
    return {
        'forms': len(forms),
        'precision': true_positive / predicted_pairs if predicted_pairs else 1.0,
        'recall': true_positive / actual_pairs if actual_pairs else 1.0,
    }
