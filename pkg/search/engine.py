"""
w5h-f scoring and the search engine that ranks a corpus for a query.
"""
import logging
from collections import defaultdict

from django.core.exceptions import ValidationError

from core.models import DimensionTag, time_matches
from frequency_index.models import group_key, is_key_shaped, object_time_keys, time_key
from text_index.analysis import query_terms, tokenize

from .models import ScoredResult, is_candidate

logger = logging.getLogger(__name__)

W5HF = 'w5hf'
FIELD_BM25 = 'fieldbm25'
BM25 = 'bm25'
TFIDF = 'tfidf'
SCORERS = (W5HF, FIELD_BM25, BM25, TFIDF)


class ObjectView:
    """The sets w5h-f scoring looks at, computed once per object."""
    __slots__ = ('obj', 'users', 'time_keys', 'places', 'hows')

    def __init__(self, obj):
        self.obj = obj
        self.users = obj.entity_ids()
        self.time_keys = frozenset(object_time_keys(obj))
        self.places = frozenset(ref.canonical_id for ref in obj.where if ref.canonical_id)
        self.hows = frozenset({obj.source.casefold()} | {item.casefold() for item in obj.how})


class QueryPlan:
    """
    A query prepared for w5h-f: its entities, group, time lookup keys,
    locations, wanted sources and what terms.
    """

    def __init__(self, query, term_weights=None, field_weights=None):
        self.query = query
        self.term_weights = term_weights or {}
        self.field_weights = field_weights or {}
        self.users = sorted({ref.entity_id for ref in query.who if ref.entity_id})
        # An unresolved member means no object can hold the whole group.
        resolved = all(ref.entity_id for ref in query.who)
        self.group = group_key(self.users) if self.users and resolved else None
        self.times = []
        seen = set()
        for point in query.when:
            key = time_key(point)
            if (key, point) not in seen:
                seen.add((key, point))
                self.times.append((point, key, is_key_shaped(point)))
        self.places = sorted({ref.canonical_id for ref in query.where if ref.canonical_id})
        self.sources = query.wanted_sources
        self.what_terms = query_terms(query, DimensionTag.WHAT)

    def weight(self, family):
        return self.term_weights.get(family, 1.0)

    def matched_time_keys(self, view):
        keys = []
        for point, key, shaped in self.times:
            if shaped:
                matched = key in view.time_keys
            else:
                matched = any(time_matches(point, value) for value in view.obj.when)
            if matched and key not in keys:
                keys.append(key)
        return keys

    def breakdown(self, view, frequency, text, position):
        """Every applicable w5h-f term of one object, in canonical order."""
        terms = {}
        source = view.obj.source
        users = [user for user in self.users if user in view.users]
        keys = self.matched_time_keys(view)
        has_group = self.group is not None and view.users.issuperset(self.group)

        if has_group:
            terms['f[g]'] = self.weight('group') * frequency.group(self.group)
        for user in users:
            terms[f'f[u={user}]'] = self.weight('user') * frequency.user(user)
        for user in users:
            terms[f'f_s[u={user}]'] = self.weight('user_src') * frequency.user_src(source, user)
        for user in users:
            for key in keys:
                terms[f'f[u={user}][dt={key}]'] = self.weight('user_time') * frequency.user_time(user, key)
        for user in users:
            for key in keys:
                terms[f'f_s[u={user}][dt={key}]'] = (
                    self.weight('user_time_src') * frequency.user_time_src(source, user, key)
                )
        if has_group:
            for key in keys:
                terms[f'f[g][dt={key}]'] = self.weight('group_time') * frequency.group_time(self.group, key)
        for place in self.places:
            if place in view.places:
                terms[f'f[addr={place}]'] = self.weight('location') * frequency.location(place)
        if self.query.when:
            terms['score_when'] = self.weight('when') * (1.0 if keys else 0.0)
        if self.sources:
            terms['score_how'] = self.weight('how') * (1.0 if self.sources & view.hows else 0.0)
        if self.what_terms:
            what = self.field_weights.get('what', 1.0) * text.bm25_score(self.what_terms, position, 'what')
            terms['score_what'] = self.weight('what') * what
        return terms

    def score(self, view, frequency, text, position):
        return ScoredResult.from_breakdown(view.obj.id, self.breakdown(view, frequency, text, position))


def f_score(query, obj, frequency, text, term_weights=None, field_weights=None):
    """The w5h-f score of one candidate object, with its per-term breakdown."""
    if not is_candidate(query, obj):
        raise ValidationError(
            "Object %(id)s matches none of the query's dimensions.", code='not_a_candidate', params={'id': obj.id}
        )
    plan = QueryPlan(query, term_weights, field_weights)
    return plan.score(ObjectView(obj), frequency, text, text.position(obj.id))


class SearchEngine:
    """
    Ranks one corpus with its frequency and text indexes. Candidate lookup
    goes through inverted maps built here, one per matchable dimension.
    """

    def __init__(self, corpus, frequency, text, term_weights=None, field_weights=None):
        self.objects = list(corpus)
        if text.doc_ids != [obj.id for obj in self.objects]:
            raise ValidationError(
                "The text index was built from a different corpus.", code='index_mismatch'
            )
        self.frequency = frequency
        self.text = text
        self.term_weights = term_weights or {}
        self.field_weights = field_weights or {}
        self.views = [ObjectView(obj) for obj in self.objects]
        self._by_user = defaultdict(set)
        self._by_time = defaultdict(set)
        self._by_place = defaultdict(set)
        self._by_how = defaultdict(set)
        for position, view in enumerate(self.views):
            for user in view.users:
                self._by_user[user].add(position)
            for key in view.time_keys:
                self._by_time[key].add(position)
            for place in view.places:
                self._by_place[place].add(position)
            for how in view.hows:
                self._by_how[how].add(position)

    @classmethod
    def from_config(cls, corpus, frequency, text, config):
        return cls(corpus, frequency, text, term_weights=config.term_weights, field_weights=config.field_weights)

    def candidates(self, query):
        """Positions of every object matching at least one query dimension."""
        found = set()
        for ref in query.who:
            if ref.entity_id:
                found |= self._by_user.get(ref.entity_id, set())
        for point in query.when:
            superset = self._by_time.get(time_key(point), set())
            if is_key_shaped(point):
                found |= superset
            else:
                found.update(p for p in superset if any(time_matches(point, v) for v in self.objects[p].when))
        for ref in query.where:
            if ref.canonical_id:
                found |= self._by_place.get(ref.canonical_id, set())
        for source in query.wanted_sources:
            found |= self._by_how.get(source, set())
        found |= self.text.docs_with_any(query_terms(query, DimensionTag.WHAT), 'what')
        if query.why:
            wanted = {token for text in query.why for token in tokenize(text)}
            found.update(
                position for position, obj in enumerate(self.objects)
                if wanted & {token for text in obj.why for token in tokenize(text)}
            )
        return found

    def score(self, query, scorer=W5HF):
        """Unsorted results of every object the scorer considers."""
        if scorer == W5HF:
            plan = QueryPlan(query, self.term_weights, self.field_weights)
            return [
                plan.score(self.views[position], self.frequency, self.text, position)
                for position in self.candidates(query)
            ]
        if scorer == FIELD_BM25:
            scores = self.text.field_bm25_scores(query, self.field_weights)
            return [
                ScoredResult.from_breakdown(self.objects[p].id, {'field_bm25': scores.get(p, 0.0)})
                for p in self.candidates(query)
            ]
        if scorer in (BM25, TFIDF):
            terms = query_terms(query)
            scores = self.text.bm25_scores(terms) if scorer == BM25 else self.text.tfidf_scores(terms)
            return [
                ScoredResult.from_breakdown(self.objects[p].id, {scorer: value}) for p, value in scores.items()
            ]
        raise ValidationError(
            "Unknown scorer %(scorer)s; choose one of %(choices)s.",
            code='unknown_scorer',
            params={'scorer': scorer, 'choices': ', '.join(SCORERS)},
        )

    def rank(self, query, scorer=W5HF):
        """The full ranked list: score descending, then object id ascending."""
        return sorted(self.score(query, scorer), key=lambda result: result.sort_key)

    def search(self, query, scorer=W5HF, k=20):
        return self.rank(query, scorer)[:max(k, 0)]
