"""
Frequency counters over users, groups, times and locations.
"""
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from django.core.exceptions import ValidationError


def time_keys(point):
    """
    Every generalization of a TimePoint that the index counts: year, year-month,
    year-month-day and the bare month. Hours and minutes are never keys.
    """
    keys = []
    if point.year is not None:
        keys.append(f"{point.year:04d}")
        if point.month is not None:
            keys.append(f"{point.year:04d}-{point.month:02d}")
            if point.day is not None:
                keys.append(f"{point.year:04d}-{point.month:02d}-{point.day:02d}")
    if point.month is not None:
        keys.append(f"--{point.month:02d}")
    return keys


def time_key(point):
    """
    The key a query time is looked up under: its own shape, truncated to the
    day. A yearless point is looked up by its month.
    """
    if point.year is None:
        return f"--{point.month:02d}"
    if point.month is None:
        return f"{point.year:04d}"
    if point.day is None:
        return f"{point.year:04d}-{point.month:02d}"
    return f"{point.year:04d}-{point.month:02d}-{point.day:02d}"


def is_key_shaped(point):
    """True when the point is exactly one of the generalizations `time_keys` produces."""
    if point.year is None:
        return point.day is None
    return point.hour is None


def object_time_keys(obj):
    keys = set()
    for point in obj.when:
        keys.update(time_keys(point))
    return keys


def group_key(entity_ids):
    return tuple(sorted(set(entity_ids)))


def _per_source():
    return defaultdict(Counter)


@dataclass
class FreqIndex:
    """
    The nine counter maps. Totals are keyed by entity, group, (entity, time),
    (group, time) and location; the `_src` maps hold the same counts split by
    source, so every total equals the sum of its per-source counterparts.
    """
    f_user: Counter = field(default_factory=Counter)
    f_user_src: defaultdict = field(default_factory=_per_source)
    f_group: Counter = field(default_factory=Counter)
    f_group_src: defaultdict = field(default_factory=_per_source)
    f_user_time: Counter = field(default_factory=Counter)
    f_user_time_src: defaultdict = field(default_factory=_per_source)
    f_group_time: Counter = field(default_factory=Counter)
    f_loc: Counter = field(default_factory=Counter)
    f_loc_src: defaultdict = field(default_factory=_per_source)

    TOTALS = ('f_user', 'f_group', 'f_user_time', 'f_group_time', 'f_loc')
    PER_SOURCE = ('f_user_src', 'f_group_src', 'f_user_time_src', 'f_loc_src')

    def add(self, obj, role_weights=None):
        """Count one entity-resolved object."""
        role_weights = role_weights or {}
        weights = {}
        for ref in obj.who:
            if ref.entity_id is None:
                raise ValidationError(
                    "Object %(id)s has an unresolved person %(name)r.",
                    code='unresolved_person',
                    params={'id': obj.id, 'name': ref.label},
                )
            weight = role_weights.get(ref.role, ref.role_weight) if ref.role else ref.role_weight
            weights[ref.entity_id] = max(weights.get(ref.entity_id, weight), weight)

        source = obj.source
        keys = sorted(object_time_keys(obj))
        if weights:
            group = group_key(weights)
            group_weight = 1.0
            for weight in weights.values():
                group_weight *= weight
            self.f_group[group] += group_weight
            self.f_group_src[source][group] += group_weight
            for key in keys:
                self.f_group_time[(group, key)] += group_weight
            for user, weight in weights.items():
                self.f_user[user] += weight
                self.f_user_src[source][user] += weight
                for key in keys:
                    self.f_user_time[(user, key)] += weight
                    self.f_user_time_src[source][(user, key)] += weight

        for location in sorted({ref.canonical_id for ref in obj.where if ref.canonical_id}):
            self.f_loc[location] += 1
            self.f_loc_src[source][location] += 1

    def merge(self, other):
        """Add another index's counts into this one."""
        for name in self.TOTALS:
            getattr(self, name).update(getattr(other, name))
        for name in self.PER_SOURCE:
            mine = getattr(self, name)
            for source, counts in getattr(other, name).items():
                mine[source].update(counts)
        return self

    def user(self, entity_id):
        return self.f_user.get(entity_id, 0)

    def user_src(self, source, entity_id):
        return self.f_user_src.get(source, {}).get(entity_id, 0)

    def group(self, group):
        return self.f_group.get(group, 0)

    def group_src(self, source, group):
        return self.f_group_src.get(source, {}).get(group, 0)

    def user_time(self, entity_id, key):
        return self.f_user_time.get((entity_id, key), 0)

    def user_time_src(self, source, entity_id, key):
        return self.f_user_time_src.get(source, {}).get((entity_id, key), 0)

    def group_time(self, group, key):
        return self.f_group_time.get((group, key), 0)

    def location(self, canonical_id):
        return self.f_loc.get(canonical_id, 0)

    def __eq__(self, other):
        if not isinstance(other, FreqIndex):
            return NotImplemented
        if any(+getattr(self, name) != +getattr(other, name) for name in self.TOTALS):
            return False
        for name in self.PER_SOURCE:
            mine = {source: +counts for source, counts in getattr(self, name).items() if +counts}
            theirs = {source: +counts for source, counts in getattr(other, name).items() if +counts}
            if mine != theirs:
                return False
        return True

    def is_empty(self):
        return not any(getattr(self, name) for name in self.TOTALS)
