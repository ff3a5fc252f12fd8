"""
The on-disk index directory: one frequency file and one text file.
"""
from pathlib import Path

from frequency_index.builder import compute_frequency, corpus_hash, load_index, save_index, weights_hash
from text_index.models import TextIndex, load_text_index, save_text_index

FREQUENCY_FILE = 'frequency.json'
TEXT_FILE = 'text.json'


def build_indexes(corpus, config):
    frequency = compute_frequency(corpus, config.role_weights, threads=config.threads)
    text = TextIndex.build(corpus, k1=config.k1, b=config.b)
    return frequency, text


def save_indexes(directory, corpus, frequency, text, config):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    digest = corpus_hash(corpus)
    save_index(frequency, directory / FREQUENCY_FILE, corpus_hash=digest, weights_hash=weights_hash(config.role_weights))
    save_text_index(text, directory / TEXT_FILE, corpus_hash=digest)


def load_indexes(directory, corpus=None):
    """Load both indexes; when `corpus` is given, warn if they were built from another one."""
    directory = Path(directory)
    digest = corpus_hash(corpus) if corpus is not None else None
    frequency = load_index(directory / FREQUENCY_FILE, expected_corpus_hash=digest)
    text = load_text_index(directory / TEXT_FILE, expected_corpus_hash=digest)
    return frequency, text
