"""
Query group definitions and the records an evaluation run produces.
"""
from dataclasses import dataclass, field, replace

from django.core.exceptions import ValidationError
from django.db import models

from core.models import DimensionTag

from .metrics import mrr, ndcg_at_k

GENERATED_DIMENSIONS = (DimensionTag.WHAT, DimensionTag.WHO, DimensionTag.WHEN, DimensionTag.HOW)


class WhenPrecision(models.TextChoices):
    YEAR = 'year', 'Year'
    MONTH = 'month', 'Month'
    DAY = 'day', 'Day'
    ANY = 'any', 'Any'


@dataclass(frozen=True)
class QueryGroupSpec:
    """
    Which dimensions a group's queries carry and how many values each
    dimension gets. Dimensions missing from `values` get one value.
    """
    group_id: int
    dimensions: tuple
    values: dict = field(default_factory=dict)
    scenarios: int = 250
    queries_per_scenario: int = 6
    when_precision: str = WhenPrecision.ANY

    def __post_init__(self):
        object.__setattr__(self, 'dimensions', tuple(DimensionTag(tag) for tag in self.dimensions))
        object.__setattr__(self, 'values', {DimensionTag(tag): int(count) for tag, count in self.values.items()})
        self.clean()

    def clean(self):
        if not self.dimensions:
            raise ValidationError("Query group %(id)s has no dimensions.", code='invalid_group', params={'id': self.group_id})
        unsupported = [tag.value for tag in self.dimensions if tag not in GENERATED_DIMENSIONS]
        if unsupported:
            raise ValidationError(
                "Query group %(id)s cannot generate %(dims)s values.",
                code='invalid_group',
                params={'id': self.group_id, 'dims': ', '.join(unsupported)},
            )
        if any(count < 1 for count in self.values.values()):
            raise ValidationError(
                "Query group %(id)s asks for fewer than one value.", code='invalid_group', params={'id': self.group_id}
            )
        if self.scenarios < 0 or self.queries_per_scenario < 1:
            raise ValidationError(
                "Query group %(id)s needs a non-negative scenario count and at least one query each.",
                code='invalid_group',
                params={'id': self.group_id},
            )
        if self.when_precision not in WhenPrecision.values:
            raise ValidationError(
                "Unknown time precision %(value)s.", code='invalid_group', params={'value': self.when_precision}
            )

    def count(self, tag):
        return self.values.get(DimensionTag(tag), 1)

    def with_scenarios(self, scenarios):
        return replace(self, scenarios=scenarios)

    def with_precision(self, when_precision):
        return replace(self, when_precision=when_precision)


_WHAT, _WHO, _WHEN, _HOW = GENERATED_DIMENSIONS

DEFAULT_GROUPS = {
    1: QueryGroupSpec(1, (_WHAT,)),
    2: QueryGroupSpec(2, (_WHAT, _WHO)),
    3: QueryGroupSpec(3, (_WHAT, _WHO, _WHEN)),
    4: QueryGroupSpec(4, (_WHAT, _WHO, _WHEN, _HOW)),
    5: QueryGroupSpec(5, (_WHAT, _WHO, _WHEN, _HOW), values={_WHAT: 2, _WHO: 2}),
}


@dataclass(frozen=True)
class Scenario:
    """One target object and the queries generated from it, as `(query_id, Query)` pairs."""
    group_id: int
    number: int
    target_id: str
    queries: tuple
    seed: int


@dataclass(frozen=True)
class QueryOutcome:
    query_id: str
    scenario: int
    target_id: str
    scorer: str
    rank: float
    rank_range: tuple | None = None

    @property
    def found(self):
        return self.rank_range is not None

    @property
    def reciprocal_rank(self):
        return 1.0 / self.rank

    def ndcg(self, k):
        return ndcg_at_k(self.rank, k)


@dataclass
class EvalReport:
    """Every outcome of one scorer on one query group."""
    group_id: int
    scorer: str
    outcomes: list = field(default_factory=list)

    @property
    def ranks(self):
        return [outcome.rank for outcome in self.outcomes]

    @property
    def mrr(self):
        return mrr(self.ranks)

    def mean_ndcg(self, k):
        if not self.outcomes:
            raise ValidationError("No queries were evaluated for group %(id)s.", code='empty_ranks',
                                  params={'id': self.group_id})
        return sum(outcome.ndcg(k) for outcome in self.outcomes) / len(self.outcomes)

    @property
    def missing(self):
        return sum(1 for outcome in self.outcomes if not outcome.found)


@dataclass(frozen=True)
class Significance:
    group_id: int
    scorer_a: str
    scorer_b: str
    statistic: float
    p_value: float
    n: int
