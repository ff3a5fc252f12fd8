"""
Known-item query generation: pick a target object, then build queries
from values sampled out of the target's own dimensions.
"""
import logging

import numpy as np
from django.core.exceptions import ValidationError

from core.models import DimensionTag, PersonRef, Query, TimePoint
from text_index.analysis import STOPWORDS, tokenize

from .models import Scenario, WhenPrecision

logger = logging.getLogger(__name__)

_PRECISIONS = (WhenPrecision.YEAR, WhenPrecision.MONTH, WhenPrecision.DAY)


def what_terms(obj):
    """Distinct non-stopword what tokens, in order of first occurrence."""
    return list(dict.fromkeys(tokenize(' '.join(obj.what), STOPWORDS)))


def who_refs(obj):
    """One reference per distinct resolved entity, in mention order."""
    refs = {}
    for ref in obj.who:
        if ref.entity_id and ref.entity_id not in refs:
            refs[ref.entity_id] = ref
    return list(refs.values())


def is_eligible(obj, spec):
    dims = spec.dimensions
    if DimensionTag.WHAT in dims and len(what_terms(obj)) < spec.count(DimensionTag.WHAT):
        return False
    if DimensionTag.WHO in dims and len(who_refs(obj)) < spec.count(DimensionTag.WHO):
        return False
    if DimensionTag.WHEN in dims and len(set(obj.when)) < spec.count(DimensionTag.WHEN):
        return False
    return True


def generalize(point, precision):
    """The query value for a target time at the given precision, never finer than the point itself."""
    if point.year is None:
        return TimePoint(month=point.month)
    if precision == WhenPrecision.YEAR or point.month is None:
        return TimePoint(point.year)
    if precision == WhenPrecision.MONTH or point.day is None:
        return TimePoint(point.year, point.month)
    return TimePoint(point.year, point.month, point.day)


def _sample(rng, items, count):
    return [items[int(i)] for i in rng.choice(len(items), size=count, replace=False)]


def _query_person(ref, names):
    name = names.get(ref.entity_id) or ref.raw_name
    if name:
        return PersonRef(raw_name=name, entity_id=ref.entity_id)
    return PersonRef(raw_emails=ref.raw_emails, entity_id=ref.entity_id)


def build_query(target, spec, rng, names=None):
    names = names or {}
    parts = {}
    for tag in spec.dimensions:
        count = spec.count(tag)
        if tag == DimensionTag.WHAT:
            parts['what'] = [' '.join(_sample(rng, what_terms(target), count))]
        elif tag == DimensionTag.WHO:
            parts['who'] = [_query_person(ref, names) for ref in _sample(rng, who_refs(target), count)]
        elif tag == DimensionTag.WHEN:
            values = []
            for point in _sample(rng, sorted(set(target.when), key=str), count):
                precision = spec.when_precision
                if precision == WhenPrecision.ANY:
                    precision = _PRECISIONS[int(rng.integers(len(_PRECISIONS)))]
                values.append(generalize(point, precision))
            parts['when'] = values
        elif tag == DimensionTag.HOW:
            parts['how'] = [target.source]
    return Query(**parts)


def generate_scenarios(corpus, spec, rng_seed, names=None):
    """
    Scenarios of one query group. `names` maps entity ids to the display
    name a query should use; without it the target's own mention is used.
    """
    rng = np.random.default_rng([rng_seed, spec.group_id])
    targets = [obj for obj in corpus if is_eligible(obj, spec)]
    if not targets and spec.scenarios:
        raise ValidationError(
            "No object in the corpus has the %(dims)s values group %(id)s needs.",
            code='no_targets',
            params={'dims': ', '.join(tag.value for tag in spec.dimensions), 'id': spec.group_id},
        )
    logger.debug("Group %s: %d of %d objects can be targets", spec.group_id, len(targets), len(corpus))

    scenarios = []
    for number in range(spec.scenarios):
        target = targets[int(rng.integers(len(targets)))]
        queries = tuple(
            (f"g{spec.group_id}-s{number:03d}-q{index}", build_query(target, spec, rng, names))
            for index in range(spec.queries_per_scenario)
        )
        scenarios.append(Scenario(
            group_id=spec.group_id, number=number, target_id=target.id, queries=queries, seed=rng_seed,
        ))
    return scenarios
