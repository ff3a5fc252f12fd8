"""
Evaluation runs: rank every generated query under every scorer, compare
scorers pairwise, and write the reports.
"""
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

import pandas as pd
from django.core.exceptions import ValidationError

from core.config import load_config
from core.serialization import query_from_dict
from entity_resolution.resolver import SURFACE, Resolution, resolve_people
from frequency_index.builder import compute_frequency
from search.engine import SCORERS, W5HF, SearchEngine

from .generator import generate_scenarios
from .metrics import MIN_PAIRS, target_rank, tie_range, wilcoxon_signed_rank
from .models import EvalReport, QueryOutcome, Significance

logger = logging.getLogger(__name__)

NO_ENTITY = 'w5hf-noer'
FLOAT_FORMAT = '%.6f'


class NoEntityVariant:
    """
    w5h-f over a corpus whose people were not merged: one identity per
    surface form. Queries are re-resolved by their surface form.
    """

    def __init__(self, engine, resolution):
        self.engine = engine
        self.resolution = resolution

    @classmethod
    def build(cls, corpus, text, config=None):
        objects, persons, ref_entities = resolve_people(corpus, merge=False)
        frequency = compute_frequency(
            objects,
            role_weights=config.role_weights if config else None,
            threads=config.threads if config else 1,
        )
        engine = SearchEngine(
            objects, frequency, text,
            term_weights=config.term_weights if config else None,
            field_weights=config.field_weights if config else None,
        )
        return cls(engine, Resolution(persons, [], objects=objects, mode=SURFACE, ref_entities=ref_entities))

    def score(self, query):
        stripped = replace(query, who=tuple(replace(ref, entity_id=None) for ref in query.who))
        return self.engine.score(self.resolution.resolve_query(stripped), W5HF)


@dataclass
class EvaluationResult:
    reports: list = field(default_factory=list)
    significance: list = field(default_factory=list)

    def report(self, group_id, scorer):
        return next(r for r in self.reports if r.group_id == group_id and r.scorer == scorer)

    def group_ids(self):
        return sorted({report.group_id for report in self.reports})


def _outcome(query_id, scenario, target_id, scorer, results, corpus_size):
    return QueryOutcome(
        query_id=query_id,
        scenario=scenario,
        target_id=target_id,
        scorer=scorer,
        rank=target_rank(results, target_id, corpus_size),
        rank_range=tie_range(results, target_id),
    )


def build_engines(corpus, indexes, scorers, config=None):
    """
    The search engine over `indexes`, plus the no-entity variant when a
    scorer asks for it. Weights come from `config`, or the settings defaults.
    """
    frequency, text = indexes
    if config is None:
        config = load_config()
    engine = SearchEngine.from_config(corpus, frequency, text, config)
    ablation = NoEntityVariant.build(corpus, text, config) if NO_ENTITY in scorers else None
    return engine, ablation


def _scorer_function(engine, scorer, ablation):
    if scorer == NO_ENTITY and ablation is not None:
        return ablation.score
    if scorer not in SCORERS:
        raise ValidationError(
            "Unknown scorer %(scorer)s; choose one of %(choices)s.",
            code='unknown_scorer',
            params={'scorer': scorer, 'choices': ', '.join((*SCORERS, NO_ENTITY))},
        )
    return lambda query: engine.score(query, scorer)


def compare_scorers(reports, group_id):
    """Wilcoxon over per-query reciprocal ranks for every pair of scorers."""
    rows = []
    for first, second in combinations(reports, 2):
        if len(first.outcomes) < MIN_PAIRS:
            logger.warning("Group %s has %d queries; skipping the significance test", group_id, len(first.outcomes))
            break
        result = wilcoxon_signed_rank(
            [outcome.reciprocal_rank for outcome in first.outcomes],
            [outcome.reciprocal_rank for outcome in second.outcomes],
        )
        rows.append(Significance(
            group_id=group_id, scorer_a=first.scorer, scorer_b=second.scorer,
            statistic=result.statistic, p_value=result.p_value, n=result.n,
        ))
    return rows


def run_eval(corpus, indexes, group_specs, scorers, seed, names=None, config=None):
    """
    Evaluate every scorer on every query group of an entity-resolved
    corpus. `indexes` is the `(frequency, text)` pair built from it;
    `names` maps entity ids to the display names generated who values use.
    """
    engine, ablation = build_engines(corpus, indexes, scorers, config)
    corpus = engine.objects
    threads = config.threads if config is not None else 1
    result = EvaluationResult()
    for spec in group_specs:
        scenarios = generate_scenarios(corpus, spec, seed, names)
        jobs = [
            (query_id, scenario.number, scenario.target_id, query)
            for scenario in scenarios
            for query_id, query in scenario.queries
        ]
        reports = []
        for scorer in scorers:
            score = _scorer_function(engine, scorer, ablation)

            def evaluate(job, scorer=scorer, score=score):
                query_id, number, target_id, query = job
                return _outcome(query_id, number, target_id, scorer, score(query), len(corpus))

            with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
                outcomes = list(pool.map(evaluate, jobs))
            report = EvalReport(group_id=spec.group_id, scorer=scorer, outcomes=outcomes)
            if report.missing:
                logger.warning("Group %s, %s: %d targets missing from their ranking", spec.group_id, scorer, report.missing)
            if outcomes:
                logger.info(
                    "Group %s, %s: MRR %.4f over %d queries", spec.group_id, scorer, report.mrr, len(outcomes)
                )
            reports.append(report)
        result.reports.extend(reports)
        result.significance.extend(compare_scorers(reports, spec.group_id))
    return result


# --- REPORTS ---

def group_frame(reports):
    rows = [
        {
            'query_id': outcome.query_id,
            'scenario': outcome.scenario,
            'target': outcome.target_id,
            'scorer': report.scorer,
            'rank': outcome.rank,
            'rr': outcome.reciprocal_rank,
            'ndcg10': outcome.ndcg(10),
            'ndcg20': outcome.ndcg(20),
        }
        for report in reports
        for outcome in report.outcomes
    ]
    columns = ['query_id', 'scenario', 'target', 'scorer', 'rank', 'rr', 'ndcg10', 'ndcg20']
    return pd.DataFrame(rows, columns=columns)


def summary_frame(result):
    rows = [
        {
            'group': report.group_id,
            'scorer': report.scorer,
            'queries': len(report.outcomes),
            'mrr': report.mrr,
            'ndcg10': report.mean_ndcg(10),
            'ndcg20': report.mean_ndcg(20),
        }
        for report in result.reports
        if report.outcomes
    ]
    return pd.DataFrame(rows, columns=['group', 'scorer', 'queries', 'mrr', 'ndcg10', 'ndcg20'])


def significance_frame(result):
    columns = ['group', 'scorer_a', 'scorer_b', 'statistic', 'p_value', 'n']
    rows = [
        {
            'group': row.group_id, 'scorer_a': row.scorer_a, 'scorer_b': row.scorer_b,
            'statistic': row.statistic, 'p_value': row.p_value, 'n': row.n,
        }
        for row in result.significance
    ]
    return pd.DataFrame(rows, columns=columns)


def _to_csv(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def _markdown_table(frame, formats):
    header = '| ' + ' | '.join(frame.columns) + ' |'
    rule = '|' + '|'.join('---' for _ in frame.columns) + '|'
    lines = [header, rule]
    for row in frame.itertuples(index=False):
        cells = [formats.get(column, '{}').format(value) for column, value in zip(frame.columns, row)]
        lines.append('| ' + ' | '.join(cells) + ' |')
    return lines


def render_summary(result):
    summary = summary_frame(result)
    significance = significance_frame(result)
    lines = ['# Evaluation summary', '']
    for group_id in result.group_ids():
        lines.append(f'## Group {group_id}')
        lines.append('')
        table = summary[summary['group'] == group_id].drop(columns='group')
        lines.extend(_markdown_table(table, {'mrr': '{:.4f}', 'ndcg10': '{:.4f}', 'ndcg20': '{:.4f}'}))
        pairs = significance[significance['group'] == group_id].drop(columns='group')
        if not pairs.empty:
            lines.append('')
            lines.extend(_markdown_table(pairs, {'statistic': '{:.1f}', 'p_value': '{:.6f}'}))
        lines.append('')
    return '\n'.join(lines)


def write_reports(result, directory):
    """`group<k>.csv` per group, `significance.csv` and `summary.md`."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for group_id in result.group_ids():
        path = os.path.join(directory, f'group{group_id}.csv')
        _to_csv(group_frame([r for r in result.reports if r.group_id == group_id]), path)
        written.append(path)
    path = os.path.join(directory, 'significance.csv')
    _to_csv(significance_frame(result), path)
    written.append(path)
    path = os.path.join(directory, 'summary.md')
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(render_summary(result))
    written.append(path)
    return written


# --- CASES ---

def load_cases(path):
    """Hand-written known-item cases, one `{"name", "target", "query"}` object per line."""
    cases = []
    with open(path, encoding='utf-8') as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    "%(path)s line %(line)s is not valid JSON: %(error)s",
                    code='malformed_json',
                    params={'path': path, 'line': number, 'error': exc.msg},
                )
            if not data.get('target') or not isinstance(data.get('query'), dict):
                raise ValidationError(
                    "%(path)s line %(line)s needs a target and a query.",
                    code='invalid_case',
                    params={'path': path, 'line': number},
                )
            cases.append((data.get('name') or data['target'], data['target'], query_from_dict(data['query'])))
    return cases


def run_cases(corpus, indexes, cases, scorers, resolution=None, config=None):
    """Rank each case under every scorer; returns a frame with the target's rank and tie range."""
    engine, ablation = build_engines(corpus, indexes, scorers, config)
    rows = []
    for name, target_id, query in cases:
        if resolution is not None:
            query = resolution.resolve_query(query)
        for scorer in scorers:
            results = _scorer_function(engine, scorer, ablation)(query)
            found = tie_range(results, target_id)
            rows.append({
                'name': name,
                'target': target_id,
                'scorer': scorer,
                'rank': target_rank(results, target_id, len(engine.objects)),
                'range': f'{found[0]}-{found[1]}' if found else 'absent',
            })
    return pd.DataFrame(rows, columns=['name', 'target', 'scorer', 'rank', 'range'])


def write_cases(frame, directory):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, 'cases.csv')
    _to_csv(frame, path)
    return path
