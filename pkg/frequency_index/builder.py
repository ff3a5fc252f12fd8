"""
Building, saving and loading the frequency index.
"""
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor

from core.persistence import read_versioned, sha256_text, write_versioned
from core.serialization import dumps, object_to_dict

from .models import FreqIndex

logger = logging.getLogger(__name__)

KIND = 'frequency'


def corpus_hash(corpus):
    return sha256_text('\n'.join(dumps(object_to_dict(obj)) for obj in corpus))


def weights_hash(role_weights):
    return sha256_text(dumps(dict(sorted((role_weights or {}).items()))))


def _build_shard(objects, role_weights):
    index = FreqIndex()
    for obj in objects:
        index.add(obj, role_weights)
    return index


def compute_frequency(corpus, role_weights=None, threads=1):
    """
    Count every object of an entity-resolved corpus. Objects are grouped by
    source and each source is counted on its own; the shards are then added
    together, which gives the same counts as one sequential pass.
    """
    by_source = defaultdict(list)
    for obj in corpus:
        by_source[obj.source].append(obj)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        shards = list(pool.map(lambda source: _build_shard(by_source[source], role_weights), sorted(by_source)))

    index = FreqIndex()
    for shard in shards:
        index.merge(shard)
    logger.info("Counted %d objects from %d sources", sum(map(len, by_source.values())), len(by_source))
    return index


def _plain(key):
    return key


def _pair_out(key):
    return [key[0], key[1]]


def _pair_in(key):
    return key[0], key[1]


def _group_out(key):
    return list(key)


def _group_in(key):
    return tuple(key)


def _group_pair_out(key):
    return [list(key[0]), key[1]]


def _group_pair_in(key):
    return tuple(key[0]), key[1]


# name -> (encode, decode) for each counter family's keys
_CODECS = {
    'f_user': (_plain, _plain),
    'f_user_src': (_plain, _plain),
    'f_group': (_group_out, _group_in),
    'f_group_src': (_group_out, _group_in),
    'f_user_time': (_pair_out, _pair_in),
    'f_user_time_src': (_pair_out, _pair_in),
    'f_group_time': (_group_pair_out, _group_pair_in),
    'f_loc': (_plain, _plain),
    'f_loc_src': (_plain, _plain),
}


def _rows(counter, encode):
    return sorted(([encode(key), count] for key, count in counter.items()), key=dumps)


def _load_rows(counter, rows, decode):
    for key, count in rows:
        counter[decode(key)] = count


def index_to_dict(index):
    body = {}
    for name, (encode, _) in _CODECS.items():
        counts = getattr(index, name)
        if name in FreqIndex.PER_SOURCE:
            body[name] = {source: _rows(counts[source], encode) for source in sorted(counts)}
        else:
            body[name] = _rows(counts, encode)
    return body


def index_from_dict(data):
    index = FreqIndex()
    for name, (_, decode) in _CODECS.items():
        counts = getattr(index, name)
        if name in FreqIndex.PER_SOURCE:
            for source, rows in (data.get(name) or {}).items():
                _load_rows(counts[source], rows, decode)
        else:
            _load_rows(counts, data.get(name) or (), decode)
    return index


def save_index(index, path, corpus_hash='', weights_hash=''):
    write_versioned(path, KIND, index_to_dict(index), corpus_hash=corpus_hash, weights_hash=weights_hash)


def load_index(path, expected_corpus_hash=None):
    """Load a frequency index; warns when it was built from another corpus."""
    head, body = read_versioned(path, KIND)
    if expected_corpus_hash and head.get('corpus_hash') and head['corpus_hash'] != expected_corpus_hash:
        logger.warning("%s was built from a different corpus than the one being searched", path)
    return index_from_dict(body)
