"""
Per-field inverted index and the three keyword scorers built on it.

Every scorer walks the query terms in the order given, so scoring one
document and scoring a whole postings list produce bit-identical values.
"""
import logging
import math
from collections import Counter

from core.persistence import read_versioned, write_versioned

from .analysis import ALL_FIELD, STOPWORDS, TEXT_FIELDS, field_tokens, query_terms

logger = logging.getLogger(__name__)

KIND = 'text'
FIELDS = TEXT_FIELDS + (ALL_FIELD,)


def tfidf_idf(n_docs, df):
    return math.log(n_docs / df)


def bm25_idf(n_docs, df):
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1)


class TextIndex:

    def __init__(self, k1=1.2, b=0.75, use_stopwords=False):
        self.k1 = k1
        self.b = b
        self.use_stopwords = use_stopwords
        self.doc_ids = []
        self.positions = {}
        self.postings = {name: {} for name in FIELDS}
        self.lengths = {name: [] for name in FIELDS}
        self._totals = dict.fromkeys(FIELDS, 0)

    @classmethod
    def build(cls, corpus, k1=1.2, b=0.75, use_stopwords=False):
        index = cls(k1=k1, b=b, use_stopwords=use_stopwords)
        for obj in corpus:
            index.add(obj)
        logger.info("Indexed %d documents", index.n_docs)
        return index

    def add(self, obj):
        position = len(self.doc_ids)
        self.doc_ids.append(obj.id)
        self.positions[obj.id] = position
        tokens = field_tokens(obj, STOPWORDS if self.use_stopwords else None)
        tokens[ALL_FIELD] = [token for name in TEXT_FIELDS for token in tokens[name]]
        for name in FIELDS:
            self.lengths[name].append(len(tokens[name]))
            self._totals[name] += len(tokens[name])
            postings = self.postings[name]
            for term, tf in Counter(tokens[name]).items():
                postings.setdefault(term, {})[position] = tf

    @property
    def n_docs(self):
        return len(self.doc_ids)

    def df(self, term, field=ALL_FIELD):
        return len(self.postings[field].get(term, ()))

    def tf(self, term, position, field=ALL_FIELD):
        return self.postings[field].get(term, {}).get(position, 0)

    def avgdl(self, field=ALL_FIELD):
        return self._totals[field] / self.n_docs if self.n_docs else 0.0

    def position(self, object_id):
        return self.positions[object_id]

    def docs_with_any(self, terms, field=ALL_FIELD):
        postings = self.postings[field]
        found = set()
        for term in terms:
            found.update(postings.get(term, ()))
        return found

    def _terms(self, terms):
        if self.use_stopwords:
            return [term for term in terms if term not in STOPWORDS]
        return list(terms)

    # Per-term contributions

    def _tfidf_term(self, tf, df):
        return tf * tfidf_idf(self.n_docs, df)

    def _bm25_term(self, tf, df, length, avgdl):
        norm = 1 - self.b + self.b * length / avgdl if avgdl else 1.0
        return bm25_idf(self.n_docs, df) * tf * (self.k1 + 1) / (tf + self.k1 * norm)

    # One document

    def tfidf_score(self, terms, position):
        postings = self.postings[ALL_FIELD]
        score = 0.0
        for term in self._terms(terms):
            docs = postings.get(term)
            if docs and position in docs:
                score += self._tfidf_term(docs[position], len(docs))
        return score

    def bm25_score(self, terms, position, field=ALL_FIELD):
        postings = self.postings[field]
        avgdl = self.avgdl(field)
        length = self.lengths[field][position]
        score = 0.0
        for term in self._terms(terms):
            docs = postings.get(term)
            if docs and position in docs:
                score += self._bm25_term(docs[position], len(docs), length, avgdl)
        return score

    def field_bm25_score(self, query, position, field_weights=None, fields=TEXT_FIELDS):
        """Sum over the query's fields of BM25 within that field, times the field weight."""
        field_weights = field_weights or {}
        score = 0.0
        for name in fields:
            terms = query_terms(query, name)
            if terms:
                score += field_weights.get(name, 1.0) * self.bm25_score(terms, position, name)
        return score

    # Whole postings lists

    def tfidf_scores(self, terms):
        postings = self.postings[ALL_FIELD]
        scores = {}
        for term in self._terms(terms):
            docs = postings.get(term)
            if not docs:
                continue
            for position, tf in docs.items():
                scores[position] = scores.get(position, 0.0) + self._tfidf_term(tf, len(docs))
        return scores

    def bm25_scores(self, terms, field=ALL_FIELD):
        postings = self.postings[field]
        avgdl = self.avgdl(field)
        lengths = self.lengths[field]
        scores = {}
        for term in self._terms(terms):
            docs = postings.get(term)
            if not docs:
                continue
            for position, tf in docs.items():
                contribution = self._bm25_term(tf, len(docs), lengths[position], avgdl)
                scores[position] = scores.get(position, 0.0) + contribution
        return scores

    def field_bm25_scores(self, query, field_weights=None, fields=TEXT_FIELDS):
        field_weights = field_weights or {}
        scores = {}
        for name in fields:
            terms = query_terms(query, name)
            if not terms:
                continue
            weight = field_weights.get(name, 1.0)
            for position, value in self.bm25_scores(terms, name).items():
                scores[position] = scores.get(position, 0.0) + weight * value
        return scores

    def __eq__(self, other):
        if not isinstance(other, TextIndex):
            return NotImplemented
        return (
            (self.k1, self.b, self.use_stopwords, self.doc_ids) == (other.k1, other.b, other.use_stopwords, other.doc_ids)
            and self.postings == other.postings
            and self.lengths == other.lengths
        )


def text_index_to_dict(index):
    return {
        'k1': index.k1,
        'b': index.b,
        'stopwords': index.use_stopwords,
        'doc_ids': index.doc_ids,
        'fields': {
            name: {
                'lengths': index.lengths[name],
                'postings': {
                    term: sorted([position, tf] for position, tf in docs.items())
                    for term, docs in sorted(index.postings[name].items())
                },
            }
            for name in FIELDS
        },
    }


def text_index_from_dict(data):
    index = TextIndex(k1=data['k1'], b=data['b'], use_stopwords=data.get('stopwords', False))
    index.doc_ids = list(data['doc_ids'])
    index.positions = {object_id: position for position, object_id in enumerate(index.doc_ids)}
    for name in FIELDS:
        stored = data['fields'][name]
        index.lengths[name] = list(stored['lengths'])
        index._totals[name] = sum(index.lengths[name])
        index.postings[name] = {
            term: {position: tf for position, tf in rows} for term, rows in stored['postings'].items()
        }
    return index


def save_text_index(index, path, corpus_hash=''):
    write_versioned(path, KIND, text_index_to_dict(index), corpus_hash=corpus_hash)


def load_text_index(path, expected_corpus_hash=None):
    head, body = read_versioned(path, KIND)
    if expected_corpus_hash and head.get('corpus_hash') and head['corpus_hash'] != expected_corpus_hash:
        logger.warning("%s was built from a different corpus than the one being searched", path)
    return text_index_from_dict(body)
