"""
Evaluation harness: per-query metrics, aggregation and report files.

The TSV report has one row per method with the columns of ``REPORT_COLUMNS``.
An optional timestamp goes on a single leading ``#`` line so that report
bodies stay byte-identical between runs.
"""
import json
import logging
import statistics
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple, Union

from search.models import SearchResult
from .metrics import average_precision, ndcg, precision_at_1, reciprocal_rank, recall_at_k
from .models import EvalReport, QRels, QueryRecord

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("method", "MAP", "P@1", "MRR", "NDCG", "MRR@10", "mean_eval_count")
DEFAULT_CUTOFF = 20


def _mean(values) -> float:
    values = list(values)
    return statistics.fmean(values) if values else 0.0


def evaluate(
    results: Mapping[int, SearchResult],
    qrels: QRels,
    k: int = DEFAULT_CUTOFF,
    failures: Optional[Mapping[int, str]] = None,
) -> EvalReport:
    """
    Score ``results`` against ``qrels`` with ranked lists truncated to ``k``.

    Queries without a result (or listed in ``failures``) are reported as
    errors and left out of the averages.
    """
    failures = dict(failures or {})
    records, errors = [], []
    for query_id in qrels:
        if query_id in failures:
            errors.append((query_id, failures[query_id]))
            continue
        result = results.get(query_id)
        if result is None:
            errors.append((query_id, "no search result"))
            continue
        ranked = result.ids[:k]
        relevant = qrels.relevant(query_id)
        records.append(
            QueryRecord(
                query_id=query_id,
                ranked=tuple(ranked),
                relevant=tuple(sorted(relevant)),
                average_precision=average_precision(ranked, relevant),
                precision_at_1=precision_at_1(ranked, relevant),
                reciprocal_rank=reciprocal_rank(ranked, relevant),
                ndcg=ndcg(ranked, relevant, cutoff=k),
                reciprocal_rank_at_10=reciprocal_rank(ranked, relevant, cutoff=10),
                recall=recall_at_k(ranked, relevant, k),
                eval_count=result.eval_count,
            )
        )

    if errors:
        logger.warning("%d of %d queries could not be evaluated", len(errors), len(qrels))
    report = EvalReport(
        map_score=_mean(r.average_precision for r in records),
        p_at_1=_mean(r.precision_at_1 for r in records),
        mrr=_mean(r.reciprocal_rank for r in records),
        ndcg=_mean(r.ndcg for r in records),
        mrr_at_10=_mean(r.reciprocal_rank_at_10 for r in records),
        recall=_mean(r.recall for r in records),
        query_count=len(records),
        mean_eval_count=_mean(r.eval_count for r in records),
        k=k,
        per_query=tuple(records),
        errors=tuple(errors),
    )
    logger.info(
        "Evaluated %d queries: MAP=%.4f P@1=%.4f mean_eval_count=%.1f",
        report.query_count, report.map_score, report.p_at_1, report.mean_eval_count,
    )
    return report


def report_row(method: str, report: EvalReport) -> Tuple[str, ...]:
    return (
        method,
        f"{report.map_score:.4f}",
        f"{report.p_at_1:.4f}",
        f"{report.mrr:.4f}",
        f"{report.ndcg:.4f}",
        f"{report.mrr_at_10:.4f}",
        f"{report.mean_eval_count:.1f}",
    )


def format_report_tsv(rows: Sequence[Tuple[str, EvalReport]], timestamp: Optional[str] = None) -> str:
    lines = []
    if timestamp:
        lines.append(f"# generated {timestamp}")
    lines.append("\t".join(REPORT_COLUMNS))
    lines.extend("\t".join(report_row(method, report)) for method, report in rows)
    return "\n".join(lines) + "\n"


def write_report_tsv(
    rows: Sequence[Tuple[str, EvalReport]], path: Union[str, Path], timestamp: Optional[str] = None
) -> None:
    """Write one row per (method, report)."""
    Path(path).write_text(format_report_tsv(rows, timestamp), encoding="utf-8", newline="\n")


def report_to_json(report: EvalReport, method: Optional[str] = None) -> dict:
    """Aggregate metrics plus per-query detail."""
    return {
        "method": method,
        "k": report.k,
        "query_count": report.query_count,
        "MAP": report.map_score,
        "P@1": report.p_at_1,
        "MRR": report.mrr,
        "NDCG": report.ndcg,
        "MRR@10": report.mrr_at_10,
        "recall": report.recall,
        "mean_eval_count": report.mean_eval_count,
        "errors": [{"query_id": q, "message": m} for q, m in report.errors],
        "queries": [
            {
                "query_id": r.query_id,
                "ranked": list(r.ranked),
                "relevant": list(r.relevant),
                "AP": r.average_precision,
                "P@1": r.precision_at_1,
                "RR": r.reciprocal_rank,
                "NDCG": r.ndcg,
                "RR@10": r.reciprocal_rank_at_10,
                "recall": r.recall,
                "eval_count": r.eval_count,
            }
            for r in report.per_query
        ],
    }


def write_report_json(reports: Sequence[Tuple[str, EvalReport]], path: Union[str, Path]) -> None:
    payload = [report_to_json(report, method) for method, report in reports]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
