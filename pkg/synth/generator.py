"""
Seeded synthetic personal-trace corpora with planted structure.

Everything is drawn from one numpy Generator in a fixed order, so a spec
and its seed always produce the same corpus, truth file and geocode cache.
"""
import calendar
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import NON_FIELD_ERRORS, ValidationError

from core.models import LocationRef, PersonRef, TimePoint, TraceObject
from core.serialization import write_corpus
from text_index.analysis import STOPWORDS, tokenize

from .forms import DEFAULT_SPEC, SynthSpecForm
from .pools import (
    EMAIL_DOMAINS, FIRST_NAMES, MIDDLE_NAMES, PLACES, SOURCE_LABELS, SURNAMES, syllable_word,
)

logger = logging.getLogger(__name__)

CANONICAL = 'canonical'
ALIAS_KINDS = ('reversed', 'initial', 'alternate_email', 'email_only')
MEASURED_DIMENSIONS = ('who', 'when', 'what', 'where')


@dataclass(frozen=True)
class FrequentGroup:
    members: tuple
    rate: float
    source: str = ''


@dataclass(frozen=True)
class SynthSpec:
    objects: int
    sources: dict
    entities: int
    groups: tuple
    source_affinity: float
    who_rate: float
    when_rate: float
    what_rate: float
    where_rate: float
    alias_rate: float
    start_year: int
    end_year: int
    locations: int
    vocabulary: int
    zipf_exponent: float
    text_length_mu: float
    text_length_sigma: float
    name_mention_rate: float
    number_rate: float
    seed: int

    @classmethod
    def from_dict(cls, data=None):
        data = data or {}
        unknown = sorted(set(data) - set(DEFAULT_SPEC))
        if unknown:
            raise ValidationError(
                "Unknown spec keys: %(keys)s.", code='invalid_spec', params={'keys': ', '.join(unknown)}
            )
        form = SynthSpecForm(data={**DEFAULT_SPEC, **data})
        if not form.is_valid():
            code = 'infeasible_spec' if form.has_error(NON_FIELD_ERRORS, 'infeasible_spec') else 'invalid_spec'
            raise ValidationError(
                "; ".join(f"{name}: {' '.join(errors)}" for name, errors in form.errors.items()), code=code
            )
        cleaned = dict(form.cleaned_data)
        cleaned['groups'] = tuple(
            FrequentGroup(members=tuple(group['members']), rate=float(group['rate']), source=group.get('source') or '')
            for group in cleaned['groups']
        )
        return cls(**cleaned)

    def to_dict(self):
        data = {name: getattr(self, name) for name in DEFAULT_SPEC}
        data['sources'] = dict(self.sources)
        data['groups'] = [
            {'members': list(group.members), 'rate': group.rate, 'source': group.source} for group in self.groups
        ]
        return data

    def with_changes(self, **changes):
        return type(self).from_dict({**self.to_dict(), **changes})

    @classmethod
    def load(cls, path=None):
        if not path:
            return cls.from_dict()
        with open(path, encoding='utf-8') as handle:
            try:
                data = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    "Spec file %(path)s is not valid JSON: %(error)s",
                    code='malformed_json',
                    params={'path': path, 'error': exc.msg},
                )
        if not isinstance(data, dict):
            raise ValidationError("Spec file %(path)s must hold an object.", code='invalid_spec', params={'path': path})
        return cls.from_dict(data)


@dataclass(frozen=True)
class SynthEntity:
    """A true identity and the surface forms it can be mentioned under."""
    truth_id: str
    given: str
    last: str
    email: str
    alternate_email: str
    initial: str
    source: str
    years: tuple

    @property
    def name(self):
        return f"{self.given} {self.last}"

    @property
    def first(self):
        return self.given.split()[0]

    def form(self, kind):
        """`(raw_name, raw_emails)` of one surface form; every form matches the canonical one."""
        if kind == CANONICAL:
            return self.name, (self.email,)
        if kind == 'reversed':
            return f"{self.last}, {self.given}", ()
        if kind == 'initial':
            return f"{self.given} {self.initial}. {self.last}", (self.email,)
        if kind == 'alternate_email':
            return self.name, (self.alternate_email,)
        if kind == 'email_only':
            return '', (self.email,)
        raise ValueError(f"Unknown surface form {kind!r}.")


@dataclass
class SynthCorpus:
    objects: list
    truth: dict
    geocache: dict

    def write(self, corpus_path, truth_path=None, geocache_path=None):
        write_corpus(self.objects, corpus_path)
        for path, payload in ((truth_path, self.truth), (geocache_path, self.geocache)):
            if path:
                with open(path, 'w', encoding='utf-8', newline='\n') as handle:
                    json.dump(payload, handle, ensure_ascii=False, indent=2)
                    handle.write('\n')


def zipf_weights(size, exponent):
    """Probabilities proportional to 1 / rank ** exponent."""
    weights = 1.0 / np.arange(1, size + 1, dtype=float) ** exponent
    return weights / weights.sum()


def _reserved_tokens():
    texts = [*FIRST_NAMES, *MIDDLE_NAMES, *SURNAMES, *EMAIL_DOMAINS, 'work.example', *SOURCE_LABELS.values()]
    for place in PLACES:
        texts.extend(place.surfaces)
        texts.extend(filter(None, (place.address, place.hint, place.decoy[0] if place.decoy else None)))
    return {token for text in texts for token in tokenize(text)} | STOPWORDS


def make_vocabulary(size):
    reserved = _reserved_tokens()
    words, number = [], 0
    while len(words) < size:
        word = syllable_word(number)
        number += 1
        if word not in reserved:
            words.append(word)
    return words


class CorpusGenerator:
    """Draws one corpus for a spec. Use `generate_corpus` rather than this directly."""

    def __init__(self, spec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.source_names = sorted(spec.sources)
        self.source_p = np.array([spec.sources[name] for name in self.source_names], dtype=float)
        self.source_p /= self.source_p.sum()
        self.entities = self._make_entities()
        self.popularity = zipf_weights(len(self.entities), spec.zipf_exponent)
        self.vocabulary = make_vocabulary(spec.vocabulary)
        self.word_p = zipf_weights(len(self.vocabulary), spec.zipf_exponent)
        self.places = PLACES[:spec.locations]

        group_total = sum(group.rate for group in spec.groups)
        self.solo_who_rate = (spec.who_rate - group_total) / (1 - group_total) if group_total < 1 else 1.0

        self.used_forms = defaultdict(set)
        self.group_counts = Counter()
        self.populated = Counter()

    def _draw_source(self):
        return self.source_names[int(self.rng.choice(len(self.source_names), p=self.source_p))]

    def _make_entities(self):
        spec, rng = self.spec, self.rng
        preferred = [self._draw_source() for _ in range(spec.entities)]
        for group in spec.groups:
            for member in group.members:
                preferred[member] = group.source or preferred[group.members[0]]

        entities = []
        for index in range(spec.entities):
            given = FIRST_NAMES[index % len(FIRST_NAMES)]
            cycle = index // len(FIRST_NAMES)
            if cycle:
                given = f"{given} {MIDDLE_NAMES[cycle - 1]}"
            last = SURNAMES[int(rng.integers(len(SURNAMES)))]
            first_year = int(rng.integers(spec.start_year, spec.end_year + 1))
            span = int(rng.integers(2, 5))
            entities.append(SynthEntity(
                truth_id=f"e{index:03d}",
                given=given,
                last=last,
                email=f"{given[0]}{last}{index:02d}@{EMAIL_DOMAINS[index % len(EMAIL_DOMAINS)]}".lower(),
                alternate_email=f"{given.split()[0]}.{last}{index}@work.example".lower(),
                initial=chr(ord('A') + index % 26),
                source=preferred[index],
                years=(first_year, min(spec.end_year, first_year + span - 1)),
            ))
        return entities

    def _pick_group(self):
        draw, total = self.rng.random(), 0.0
        for group in self.spec.groups:
            total += group.rate
            if draw < total:
                return group
        return None

    def _draw_people(self):
        """The entities of one object and the source it comes from."""
        rng, count = self.rng, len(self.entities)
        group = self._pick_group()
        if group is not None:
            members = [self.entities[index] for index in group.members]
            return members, group.source or members[0].source
        if rng.random() >= self.solo_who_rate:
            return [], self._draw_source()

        primary = int(rng.choice(count, p=self.popularity))
        members = [self.entities[primary]]
        extra = min(int(rng.integers(0, 3)), count - 1)
        if extra:
            weights = self.popularity.copy()
            weights[primary] = 0.0
            weights /= weights.sum()
            members.extend(self.entities[int(i)] for i in rng.choice(count, size=extra, replace=False, p=weights))
        source = members[0].source if rng.random() < self.spec.source_affinity else self._draw_source()
        return members, source

    def _draw_time(self, members):
        rng = self.rng
        first, last = members[0].years if members else (self.spec.start_year, self.spec.end_year)
        year = int(rng.integers(first, last + 1))
        month = int(rng.integers(1, 13))
        day = int(rng.integers(1, calendar.monthrange(year, month)[1] + 1))
        return TimePoint(year, month, day, int(rng.integers(0, 24)), int(rng.integers(0, 60)))

    def _insert(self, words, word):
        words.insert(int(self.rng.integers(0, len(words) + 1)), word)

    def _draw_words(self):
        spec, rng = self.spec, self.rng
        length = int(np.clip(np.rint(rng.lognormal(spec.text_length_mu, spec.text_length_sigma)), 1, 120))
        words = [self.vocabulary[int(i)] for i in rng.choice(len(self.vocabulary), size=length, p=self.word_p)]
        if rng.random() < spec.name_mention_rate:
            self._insert(words, self.entities[int(rng.choice(len(self.entities), p=self.popularity))].first)
        if rng.random() < spec.number_rate:
            if rng.random() < 0.5:
                number = str(int(rng.integers(spec.start_year, spec.end_year + 1)))
            else:
                number = f"{int(rng.integers(1, 29)):02d}"
            self._insert(words, number)
        return words

    def _mention(self, entity, position):
        spec, rng = self.spec, self.rng
        kind = CANONICAL
        if rng.random() < spec.alias_rate:
            kind = ALIAS_KINDS[int(rng.integers(len(ALIAS_KINDS)))]
        name, emails = entity.form(kind)
        self.used_forms[entity.truth_id].add((name, emails))
        return PersonRef(raw_name=name, raw_emails=emails, role='from' if position == 0 else 'to')

    def draw_object(self, number):
        spec, rng = self.spec, self.rng
        members, source = self._draw_people()
        when = [self._draw_time(members)] if rng.random() < spec.when_rate else []
        words = self._draw_words() if rng.random() < spec.what_rate else []
        where = []
        if rng.random() < spec.where_rate:
            place = self.places[int(rng.integers(len(self.places)))]
            where.append(LocationRef(place.surfaces[int(rng.integers(len(place.surfaces)))]))
            if place.hint and words:
                words.append(place.hint)
        text = ' '.join(words)
        what = [text[:1].upper() + text[1:]] if words else []
        who = [self._mention(entity, position) for position, entity in enumerate(members)]

        if members:
            self.group_counts[frozenset(entity.truth_id for entity in members)] += 1
        for name, values in (('who', who), ('when', when), ('what', what), ('where', where)):
            if values:
                self.populated[name] += 1
        return TraceObject(
            id=f"{source}-{number:05d}",
            source=source,
            what=what,
            who=who,
            when=when,
            where=where,
            how=[SOURCE_LABELS.get(source, f"{source.title()} item")],
        )

    def truth(self, objects):
        total = len(objects)
        entities = []
        for entity in self.entities:
            forms = sorted(self.used_forms.get(entity.truth_id, ()))
            if forms:
                entities.append({
                    'id': entity.truth_id,
                    'display_name': entity.name,
                    'forms': [{'name': name, 'emails': list(emails)} for name, emails in forms],
                })
        groups = []
        for group in self.spec.groups:
            key = frozenset(self.entities[index].truth_id for index in group.members)
            groups.append({
                'members': sorted(key),
                'source': group.source or self.entities[group.members[0]].source,
                'rate': group.rate,
                'observed_rate': self.group_counts[key] / total if total else 0.0,
            })
        return {
            'seed': self.spec.seed,
            'objects': total,
            'entities': entities,
            'groups': groups,
            'rates': {name: self.populated[name] / total if total else 0.0 for name in MEASURED_DIMENSIONS},
        }

    def geocache(self):
        cache = {}
        for place in self.places:
            if place.address is None:
                continue
            candidates = [place.decoy] if place.decoy else []
            candidates.append((place.address, place.coords))
            for surface in place.surfaces:
                cache[surface] = [
                    {'address': address, 'lat': coords[0], 'lon': coords[1]} for address, coords in candidates
                ]
        return cache


def generate_corpus(spec):
    """Draw a corpus, its ground truth and a geocode cache for the place pool."""
    generator = CorpusGenerator(spec)
    objects = [generator.draw_object(number) for number in range(spec.objects)]
    result = SynthCorpus(objects=objects, truth=generator.truth(objects), geocache=generator.geocache())
    logger.info(
        "Generated %s objects over %s entities with seed %s.", len(objects), len(generator.entities), spec.seed,
    )
    return result
