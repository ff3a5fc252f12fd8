"""
Scored results and the per-dimension match rules.
"""
from dataclasses import dataclass, field

from django.core.exceptions import ValidationError

from core.models import DimensionTag, time_matches
from text_index.analysis import tokenize


@dataclass(frozen=True)
class ScoredResult:
    object_id: str
    total_score: float
    breakdown: dict = field(default_factory=dict)

    def __post_init__(self):
        self.clean()

    def clean(self):
        if self.breakdown and abs(sum(self.breakdown.values()) - self.total_score) > 1e-9:
            raise ValidationError(
                "Score of %(id)s does not equal the sum of its terms.", code='breakdown_mismatch',
                params={'id': self.object_id},
            )

    @classmethod
    def from_breakdown(cls, object_id, breakdown):
        total = 0.0
        for value in breakdown.values():
            total += value
        return cls(object_id=object_id, total_score=total, breakdown=breakdown)

    @property
    def sort_key(self):
        return -self.total_score, self.object_id


def _tokens(texts):
    return {token for text in texts for token in tokenize(text)}


def dimension_matches(query, obj, tag):
    """Whether `obj` satisfies the query's values for one dimension."""
    tag = DimensionTag(tag)
    if tag == DimensionTag.WHO:
        wanted = query.entity_ids()
        return bool(wanted & obj.entity_ids())
    if tag == DimensionTag.WHEN:
        return any(time_matches(dt, point) for dt in query.when for point in obj.when)
    if tag == DimensionTag.WHERE:
        wanted = {ref.canonical_id for ref in query.where if ref.canonical_id}
        return any(ref.canonical_id in wanted for ref in obj.where)
    if tag == DimensionTag.HOW:
        have = {obj.source.casefold()} | {item.casefold() for item in obj.how}
        return bool(query.wanted_sources & have)
    return bool(_tokens(query.get(tag)) & _tokens(obj.get(tag)))


def is_candidate(query, obj):
    return any(dimension_matches(query, obj, tag) for tag in query.dimensions())


def candidate_set(query, corpus):
    """Objects matching at least one of the query's dimensions, by direct scan."""
    return {obj for obj in corpus if is_candidate(query, obj)}
