"""
Known-item rank metrics and the Wilcoxon signed-rank test.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from scipy import stats

logger = logging.getLogger(__name__)

# Up to this many non-zero pairs the null distribution is enumerated exactly.
EXACT_LIMIT = 25
MIN_PAIRS = 10


def tie_range(results, target_id):
    """
    The ranks `(a, b)` the target's score ties across, before any tie
    breaking, or None when the target was not scored.
    """
    scores = [result.total_score for result in results]
    target = next((result.total_score for result in results if result.object_id == target_id), None)
    if target is None:
        return None
    greater = sum(1 for score in scores if score > target)
    tied = sum(1 for score in scores if score == target)
    return greater + 1, greater + tied


def target_rank(results, target_id, corpus_size=None):
    """Median rank of the target's tie block; `corpus_size + 1` when the target is missing."""
    results = list(results)
    found = tie_range(results, target_id)
    if found is None:
        size = len(results) if corpus_size is None else corpus_size
        logger.warning("Target %s is missing from the ranking; counted at rank %d", target_id, size + 1)
        return float(size + 1)
    low, high = found
    return (low + high) / 2


def _check_rank(rank):
    if rank < 1:
        raise ValidationError("Rank %(rank)s is below 1.", code='invalid_rank', params={'rank': rank})


def mrr(ranks):
    ranks = np.asarray(list(ranks), dtype=float)
    if ranks.size == 0:
        raise ValidationError("Cannot average an empty list of ranks.", code='empty_ranks')
    if (ranks < 1).any():
        _check_rank(ranks.min())
    return float(np.mean(1.0 / ranks))


def ndcg_at_k(rank, k):
    """Gain of a single relevant item; the ideal ranking scores 1."""
    _check_rank(rank)
    if rank > k:
        return 0.0
    return float(1.0 / np.log2(1.0 + rank))


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n: int

    def __iter__(self):
        yield self.statistic
        yield self.p_value


def _exact_p(ranks, statistic):
    """
    Two-sided p-value from the exact null distribution of W+. Midranks are
    doubled so every rank is an integer and ties are handled exactly.
    """
    doubled = np.rint(np.asarray(ranks) * 2).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for rank in doubled:
        shifted = np.zeros_like(counts)
        shifted[rank:] = counts[:total + 1 - rank]
        counts = counts + shifted
    cutoff = int(np.floor(statistic * 2 + 1e-9))
    tail = counts[:cutoff + 1].sum() / float(2 ** len(doubled))
    return min(1.0, 2.0 * tail)


def _normal_p(ranks, statistic):
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    _, ties = np.unique(ranks, return_counts=True)
    variance -= float(np.sum(ties ** 3 - ties)) / 48.0
    if variance <= 0:
        return 1.0
    z = (statistic - mean) / np.sqrt(variance)
    return min(1.0, float(2.0 * stats.norm.cdf(z)))


def wilcoxon_signed_rank(first, second):
    """
    Paired two-sided Wilcoxon signed-rank test. Zero differences are
    dropped; the statistic is min(W+, W-).
    """
    first = np.asarray(list(first), dtype=float)
    second = np.asarray(list(second), dtype=float)
    if first.shape != second.shape:
        raise ValidationError(
            "Paired samples differ in length (%(a)s vs %(b)s).",
            code='length_mismatch',
            params={'a': first.size, 'b': second.size},
        )
    if first.size < MIN_PAIRS:
        raise ValidationError(
            "The signed-rank test needs at least %(min)s pairs, got %(n)s.",
            code='too_few_pairs',
            params={'min': MIN_PAIRS, 'n': first.size},
        )
    differences = first - second
    differences = differences[differences != 0]
    n = differences.size
    if n == 0:
        return WilcoxonResult(statistic=0.0, p_value=1.0, n=0)

    ranks = stats.rankdata(np.abs(differences))
    plus = float(ranks[differences > 0].sum())
    minus = float(ranks[differences < 0].sum())
    statistic = min(plus, minus)
    if n <= EXACT_LIMIT:
        p_value = _exact_p(ranks, statistic)
    else:
        p_value = _normal_p(ranks, statistic)
    return WilcoxonResult(statistic=statistic, p_value=p_value, n=n)
