"""
Canonical person and location entities, and the offline geocode cache.
"""
import json
import re
from dataclasses import dataclass, field

from django.core.exceptions import ValidationError
from django.utils.functional import cached_property

_PUNCTUATION = re.compile(r'[^\w\s]|_')


def normalize_surface(text):
    """Casefolded text with runs of whitespace collapsed."""
    return ' '.join(text.casefold().split())


def name_key(name):
    """
    The token set two names must share to match: casefolded, punctuation
    stripped, single-letter tokens (initials) dropped.
    """
    tokens = _PUNCTUATION.sub(' ', name.casefold()).split()
    return frozenset(token for token in tokens if len(token) > 1)


@dataclass(frozen=True)
class PersonEntity:
    entity_id: str
    names: frozenset = frozenset()
    emails: frozenset = frozenset()
    display_name: str = field(default='', compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'names', frozenset(self.names))
        object.__setattr__(self, 'emails', frozenset(email.casefold() for email in self.emails))
        if not self.names and not self.emails:
            raise ValidationError(
                "Person entity %(id)s has neither names nor emails.", code='empty_entity', params={'id': self.entity_id}
            )

    @cached_property
    def name_keys(self):
        return frozenset(key for key in map(name_key, self.names) if key)

    @property
    def label(self):
        if self.display_name:
            return self.display_name
        return min(self.names) if self.names else min(self.emails)

    def __str__(self):
        return f"{self.label} [{self.entity_id}]"


@dataclass(frozen=True)
class LocationEntity:
    canonical_id: str
    surface_forms: frozenset = frozenset()
    address: str | None = None
    coords: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, 'surface_forms', frozenset(self.surface_forms))
        if not self.surface_forms:
            raise ValidationError(
                "Location entity %(id)s has no surface forms.", code='empty_entity', params={'id': self.canonical_id}
            )

    def __str__(self):
        return self.address or min(self.surface_forms)


@dataclass(frozen=True)
class GeocodeCandidate:
    address: str
    coords: tuple[float, float] | None = None


class GeocodeCache:
    """Raw location text -> candidate addresses, in the order the geocoder returned them."""

    def __init__(self, entries=None):
        self._entries = {
            normalize_surface(raw): tuple(candidates) for raw, candidates in (entries or {}).items()
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ValidationError("A geocode cache maps raw text to candidate lists.", code='invalid_geocache')
        entries = {}
        for raw, candidates in data.items():
            if not isinstance(candidates, list):
                raise ValidationError(
                    "Geocode entry %(raw)r is not a list of candidates.", code='invalid_geocache', params={'raw': raw}
                )
            entries[raw] = []
            for item in candidates:
                if not isinstance(item, dict) or not item.get('address'):
                    raise ValidationError(
                        "Geocode candidate for %(raw)r has no address.", code='invalid_geocache', params={'raw': raw}
                    )
                try:
                    coords = (float(item['lat']), float(item['lon'])) if 'lat' in item and 'lon' in item else None
                except (TypeError, ValueError):
                    raise ValidationError(
                        "Geocode candidate for %(raw)r has bad coordinates.", code='invalid_geocache', params={'raw': raw}
                    )
                entries[raw].append(GeocodeCandidate(address=item['address'], coords=coords))
        return cls(entries)

    def lookup(self, raw_text):
        return self._entries.get(normalize_surface(raw_text), ())

    def __len__(self):
        return len(self._entries)


def load_geocache(path):
    if not path:
        return GeocodeCache()
    with open(path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                "Geocode cache %(path)s is not valid JSON: %(error)s",
                code='malformed_json',
                params={'path': path, 'error': exc.msg},
            )
    return GeocodeCache.from_dict(data)
