"""
The w5h value types shared by every app.

Nothing here is stored in the database: traces, queries and their parts are
immutable dataclasses that validate themselves on construction, the same
way the form and model `clean()` methods guard their instances.
"""
import datetime
import re
from dataclasses import dataclass, field

from django.core.exceptions import ValidationError
from django.db import models


class DimensionTag(models.TextChoices):
    WHAT = 'what', 'What'
    WHO = 'who', 'Who'
    WHEN = 'when', 'When'
    WHERE = 'where', 'Where'
    WHY = 'why', 'Why'
    HOW = 'how', 'How'


_TIME_RE = re.compile(
    r'^(?:(?P<year>\d{4})|-)'
    r'(?:-(?P<month>\d{2})(?:-(?P<day>\d{2})(?:T(?P<hour>\d{2})(?::(?P<minute>\d{2}))?)?)?)?$'
)


@dataclass(frozen=True)
class TimePoint:
    """
    A possibly partial point in time. Granularity is implied by which fields
    are present: `TimePoint(year=2017)` is "some time in 2017",
    `TimePoint(month=6)` is "some June".
    """
    year: int | None = None
    month: int | None = None
    day: int | None = None
    hour: int | None = None
    minute: int | None = None

    def __post_init__(self):
        self.clean()

    def clean(self):
        if all(value is None for value in (self.year, self.month, self.day, self.hour, self.minute)):
            raise ValidationError("A time point needs at least one field.", code='empty_time')
        if self.day is not None and self.month is None:
            raise ValidationError("A day requires a month.", code='invalid_time')
        if self.hour is not None and self.day is None:
            raise ValidationError("An hour requires a day.", code='invalid_time')
        if self.minute is not None and self.hour is None:
            raise ValidationError("A minute requires an hour.", code='invalid_time')
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValidationError("Month %(month)s is out of range.", code='invalid_time', params={'month': self.month})
        if self.day is not None:
            # 2000 is a leap year, so Feb 29 passes when the year is unknown.
            try:
                datetime.date(self.year or 2000, self.month, self.day)
            except ValueError:
                raise ValidationError(
                    "%(value)s is not a calendar date.", code='invalid_time', params={'value': self.isoformat()}
                )
        if self.hour is not None and not 0 <= self.hour <= 23:
            raise ValidationError("Hour %(hour)s is out of range.", code='invalid_time', params={'hour': self.hour})
        if self.minute is not None and not 0 <= self.minute <= 59:
            raise ValidationError("Minute %(minute)s is out of range.", code='invalid_time', params={'minute': self.minute})

    @classmethod
    def parse(cls, text):
        """
        Parse `YYYY[-MM[-DD[THH[:MM]]]]`. Without a year the text starts
        with `--`: `--06` is some June, `--06-15` some June 15th.
        """
        match = _TIME_RE.match(text.strip())
        if match is None or (match['year'] is None and match['month'] is None):
            raise ValidationError("%(value)r is not a w5h time.", code='malformed_time', params={'value': text})
        return cls(**{key: int(value) for key, value in match.groupdict().items() if value is not None})

    @classmethod
    def from_datetime(cls, value, granularity='minute'):
        fields = ('year', 'month', 'day', 'hour', 'minute')
        keep = fields[:fields.index(granularity) + 1]
        return cls(**{name: getattr(value, name) for name in keep})

    def isoformat(self):
        text = f"{self.year:04d}" if self.year is not None else '-'
        if self.month is not None:
            text += f"-{self.month:02d}"
        if self.day is not None:
            text += f"-{self.day:02d}"
        if self.hour is not None:
            text += f"T{self.hour:02d}"
        if self.minute is not None:
            text += f":{self.minute:02d}"
        return text

    def __str__(self):
        return self.isoformat()


def time_matches(query_dt, obj_dt):
    """True iff every field present in `query_dt` equals the one in `obj_dt`."""
    for name in ('year', 'month', 'day', 'hour', 'minute'):
        wanted = getattr(query_dt, name)
        if wanted is not None and getattr(obj_dt, name) != wanted:
            return False
    return True


@dataclass(frozen=True)
class PersonRef:
    raw_name: str = ''
    raw_emails: tuple[str, ...] = ()
    entity_id: str | None = None
    role: str | None = None
    role_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'raw_emails', tuple(self.raw_emails))
        self.clean()

    def clean(self):
        if not self.raw_name.strip() and not any(email.strip() for email in self.raw_emails):
            raise ValidationError("A person reference needs a name or an email.", code='empty_person')
        if self.role_weight < 0:
            raise ValidationError(
                "Role weight %(weight)s is negative.", code='invalid_weight', params={'weight': self.role_weight}
            )

    @property
    def label(self):
        return self.raw_name or self.raw_emails[0]

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class LocationRef:
    raw_text: str
    canonical_id: str | None = None
    coords: tuple[float, float] | None = None

    def __post_init__(self):
        if self.coords is not None:
            object.__setattr__(self, 'coords', (float(self.coords[0]), float(self.coords[1])))
        self.clean()

    def clean(self):
        if not self.raw_text.strip():
            raise ValidationError("A location reference needs its raw text.", code='empty_location')
        if self.coords is not None:
            lat, lon = self.coords
            if not -90 <= lat <= 90 or not -180 <= lon <= 180:
                raise ValidationError(
                    "Coordinates %(coords)s are out of range.", code='invalid_coords', params={'coords': self.coords}
                )

    def __str__(self):
        return self.raw_text


DIMENSIONS = tuple(DimensionTag)


@dataclass(frozen=True)
class _W5HShape:
    source: str = ''
    what: tuple[str, ...] = ()
    who: tuple[PersonRef, ...] = ()
    when: tuple[TimePoint, ...] = ()
    where: tuple[LocationRef, ...] = ()
    why: tuple[str, ...] = ()
    how: tuple[str, ...] = ()

    def __post_init__(self):
        for tag in DIMENSIONS:
            object.__setattr__(self, tag.value, tuple(getattr(self, tag.value)))
        self.clean()

    def clean(self):
        pass

    def get(self, tag):
        """The stored list for a dimension (`O.get("who")`)."""
        return getattr(self, DimensionTag(tag).value)

    def entity_ids(self):
        return frozenset(ref.entity_id for ref in self.who if ref.entity_id is not None)


@dataclass(frozen=True)
class TraceObject(_W5HShape):
    """One digital trace: a source plus six dimension lists."""
    id: str = field(default='', kw_only=True)

    def clean(self):
        if not self.id:
            raise ValidationError("A trace object needs an id.", code='missing_id')
        if not self.source:
            raise ValidationError(
                "Trace object %(id)s has no source.", code='missing_source', params={'id': self.id}
            )

    def __str__(self):
        return f"{self.id} ({self.source})"


@dataclass(frozen=True)
class Query(_W5HShape):
    """
    A structured query. It has the shape of a trace minus the id; `source`
    and the how dimension both name wanted data sources.
    """

    def clean(self):
        if not self.source and not any(self.get(tag) for tag in DIMENSIONS):
            raise ValidationError("A query needs at least one non-empty dimension.", code='empty_query')

    @property
    def wanted_sources(self):
        wanted = {value.casefold() for value in self.how}
        if self.source:
            wanted.add(self.source.casefold())
        return wanted

    def dimensions(self):
        """The dimensions this query constrains, in canonical order."""
        present = [tag for tag in DIMENSIONS if self.get(tag)]
        if self.source and DimensionTag.HOW not in present:
            present.append(DimensionTag.HOW)
        return present


def get_dimension(obj, tag):
    return obj.get(tag)
