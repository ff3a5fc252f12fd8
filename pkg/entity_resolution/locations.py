"""
Location resolution against the offline geocode cache.
"""
import logging
import math
from collections import Counter
from dataclasses import replace

from text_index.analysis import field_texts, tokenize

from .models import LocationEntity, normalize_surface
from .swoosh import stable_id

logger = logging.getLogger(__name__)


def corpus_term_counts(corpus):
    counts = Counter()
    for obj in corpus:
        for texts in field_texts(obj).values():
            for text in texts:
                counts.update(tokenize(text))
    return counts


def rank_candidates(candidates, term_counts):
    """The candidate whose address terms occur most often in the corpus; ties keep cache order."""
    best, best_score = None, -1
    for candidate in candidates:
        score = sum(term_counts[term] for term in tokenize(candidate.address))
        if score > best_score:
            best, best_score = candidate, score
    return best


class _UnionFind:
    def __init__(self, size):
        self.parent = list(range(size))

    def find(self, item):
        while self.parent[item] != item:
            self.parent[item] = self.parent[self.parent[item]]
            item = self.parent[item]
        return item

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[max(a, b)] = min(a, b)


COORD_TOLERANCE = 1e-4
# Absorbs float noise in decimal degrees, e.g. 40.1001 - 40.1 > 1e-4.
_SLACK = 1e-9


def _coord_cell(coords):
    return math.floor(coords[0] / COORD_TOLERANCE), math.floor(coords[1] / COORD_TOLERANCE)


def coords_close(a, b, tolerance=COORD_TOLERANCE):
    return abs(a[0] - b[0]) <= tolerance + _SLACK and abs(a[1] - b[1]) <= tolerance + _SLACK


def resolve_where(refs, cache, corpus, term_counts=None):
    """
    Resolve location references to canonical entities.

    Returns `(entities, rewritten_refs)`; the refs come back in input order
    with `canonical_id` set, and coords filled in from the cache when the
    reference had none.
    """
    refs = list(refs)
    if not refs:
        return [], []
    if term_counts is None and len(cache):
        term_counts = corpus_term_counts(corpus)

    seeds = []
    by_surface = {}
    for ref in refs:
        surface = normalize_surface(ref.raw_text)
        if surface in by_surface:
            seed = seeds[by_surface[surface]]
            seed['forms'].add(ref.raw_text.strip())
            if seed['coords'] is None and ref.coords is not None:
                seed['coords'] = ref.coords
            continue
        chosen = rank_candidates(cache.lookup(ref.raw_text), term_counts or Counter())
        if chosen is not None:
            key = 'addr:' + normalize_surface(chosen.address)
            seed_id = stable_id('location', chosen.address, key)
        else:
            seed_id = stable_id('location', surface, 'text:' + surface)
        by_surface[surface] = len(seeds)
        seeds.append({
            'id': seed_id,
            'forms': {ref.raw_text.strip()},
            'address': chosen.address if chosen else None,
            'coords': (chosen.coords if chosen and chosen.coords else ref.coords),
        })

    groups = _UnionFind(len(seeds))
    owners = {}
    cells = {}
    for position, seed in enumerate(seeds):
        if seed['address']:
            key = normalize_surface(seed['address'])
            if key in owners:
                groups.union(owners[key], position)
            else:
                owners[key] = position
        if seed['coords'] is not None:
            lat_cell, lon_cell = _coord_cell(seed['coords'])
            for cell in ((lat_cell + i, lon_cell + j) for i in (-1, 0, 1) for j in (-1, 0, 1)):
                for other in cells.get(cell, ()):
                    if coords_close(seeds[other]['coords'], seed['coords']):
                        groups.union(other, position)
            cells.setdefault((lat_cell, lon_cell), []).append(position)

    members = {}
    for position in range(len(seeds)):
        members.setdefault(groups.find(position), []).append(seeds[position])

    entities = []
    seed_to_entity = {}
    for group in members.values():
        group.sort(key=lambda seed: seed['id'])
        addresses = sorted(seed['address'] for seed in group if seed['address'])
        entity = LocationEntity(
            canonical_id=group[0]['id'],
            surface_forms=frozenset(form for seed in group for form in seed['forms']),
            address=addresses[0] if addresses else None,
            coords=next((seed['coords'] for seed in group if seed['coords'] is not None), None),
        )
        entities.append(entity)
        for seed in group:
            seed_to_entity[seed['id']] = entity
    entities.sort(key=lambda entity: entity.canonical_id)

    rewritten = []
    for ref in refs:
        seed = seeds[by_surface[normalize_surface(ref.raw_text)]]
        entity = seed_to_entity[seed['id']]
        rewritten.append(replace(ref, canonical_id=entity.canonical_id, coords=ref.coords or entity.coords))
    logger.info("Resolved %d location references into %d entities", len(refs), len(entities))
    return entities, rewritten
