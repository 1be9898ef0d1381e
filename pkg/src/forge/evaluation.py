"""Scoring and reporting: classification metrics, per-chapter accuracy,
chapter-distribution histograms with missing rates, and normalized
human-rating aggregates.

Everything computes in full precision; `round2` applies half-up display
rounding at the edges.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .errors import EvaluationError
from .frameworks import FRAMEWORKS, Framework, get_framework


def round2(value: float) -> float:
    """Half-up rounding to two decimals (display contract for all tables)."""
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class PredictionRecord:
    case_id: str
    framework: str
    chapter_id: str
    gold: str
    predicted: str | None = None
    raw_response: str | None = None


@dataclass
class ClassStats:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class ClassificationReport:
    accuracy: float          # percent
    per_class: dict[str, ClassStats]
    macro_f1: float          # percent
    total: int
    abstained: int

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "total": self.total,
            "abstained": self.abstained,
            "per_class": {
                label: {
                    "precision": stats.precision,
                    "recall": stats.recall,
                    "f1": stats.f1,
                    "support": stats.support,
                } for label, stats in self.per_class.items()
            },
        }


@dataclass
class ChapterStats:
    count: int
    correct: int
    accuracy: float  # percent


@dataclass
class ChapterReport:
    per_chapter: dict[str, ChapterStats]
    micro_average: float  # percent over all samples, not mean of chapters

    def to_json(self) -> dict:
        return {
            "micro_average": self.micro_average,
            "per_chapter": {
                cid: {"count": s.count, "correct": s.correct, "accuracy": s.accuracy}
                for cid, s in self.per_chapter.items()
            },
        }


@dataclass
class DistributionReport:
    framework: str
    per_chapter_counts: dict[str, int]
    missing_count: int
    total: int

    @property
    def missing_rate(self) -> float:
        return 100.0 * self.missing_count / self.total if self.total else 0.0

    def to_json(self) -> dict:
        return {
            "framework": self.framework,
            "per_chapter_counts": dict(self.per_chapter_counts),
            "missing_count": self.missing_count,
            "total": self.total,
            "missing_rate": round2(self.missing_rate),
        }


@dataclass
class HumanEvalReport:
    per_rater: dict[str, dict[str, float]]       # rater -> dimension -> percent
    dimension_average: dict[str, float]          # dimension -> percent

    def to_json(self) -> dict:
        return {
            "per_rater": {r: dict(d) for r, d in self.per_rater.items()},
            "dimension_average": dict(self.dimension_average),
        }


def score_predictions(records: list[PredictionRecord],
                      include_abstains: bool = True) -> ClassificationReport:
    """Accuracy plus per-class precision/recall/F1 and macro-F1 (percent).

    Missing predictions count as incorrect and show up in the abstain bucket;
    with include_abstains=False they are dropped before scoring instead.
    """
    if not records:
        raise EvaluationError("no prediction records to score")
    for record in records:
        if not record.gold:
            raise EvaluationError(f"record {record.case_id} has no gold label")

    if not include_abstains:
        records = [r for r in records if r.predicted is not None]
        if not records:
            raise EvaluationError("all records abstained")

    labels = sorted({r.gold for r in records}
                    | {r.predicted for r in records if r.predicted is not None})
    correct = sum(1 for r in records if r.predicted == r.gold)
    abstained = sum(1 for r in records if r.predicted is None)
    per_class: dict[str, ClassStats] = {}
    f1s = []
    for label in labels:
        tp = sum(1 for r in records if r.predicted == label and r.gold == label)
        pred_n = sum(1 for r in records if r.predicted == label)
        gold_n = sum(1 for r in records if r.gold == label)
        precision = 100.0 * tp / pred_n if pred_n else 0.0
        recall = 100.0 * tp / gold_n if gold_n else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        per_class[label] = ClassStats(
            precision=precision, recall=recall, f1=f1, support=gold_n)
        f1s.append(f1)

    return ClassificationReport(
        accuracy=100.0 * correct / len(records),
        per_class=per_class,
        macro_f1=sum(f1s) / len(f1s) if f1s else 0.0,
        total=len(records),
        abstained=abstained,
    )


def per_chapter_report(records: list[PredictionRecord]) -> ChapterReport:
    """Per-chapter accuracy with a count-weighted micro average."""
    if not records:
        raise EvaluationError("no prediction records to score")
    buckets: dict[str, list[PredictionRecord]] = {}
    for record in records:
        framework = get_framework(record.framework)
        if record.chapter_id not in framework.chapter_ids():
            raise EvaluationError(
                f"unknown chapter id {record.chapter_id!r} for {record.framework}")
        buckets.setdefault(record.chapter_id, []).append(record)

    per_chapter = {}
    total_correct = 0
    for chapter_id in sorted(buckets):
        chunk = buckets[chapter_id]
        correct = sum(1 for r in chunk if r.predicted == r.gold)
        total_correct += correct
        per_chapter[chapter_id] = ChapterStats(
            count=len(chunk), correct=correct,
            accuracy=100.0 * correct / len(chunk))
    return ChapterReport(
        per_chapter=per_chapter,
        micro_average=100.0 * total_correct / len(records),
    )


def chapter_distribution(allocations: list[str | None],
                         framework: str | Framework) -> DistributionReport:
    """Histogram of chapter allocations; empty or unrecognized entries count
    toward the missing rate."""
    fw = framework if isinstance(framework, Framework) else get_framework(framework)
    known = set(fw.chapter_ids())
    counts: dict[str, int] = {}
    missing = 0
    for allocation in allocations:
        if allocation in known:
            counts[allocation] = counts.get(allocation, 0) + 1
        else:
            missing += 1
    return DistributionReport(
        framework=fw.slug,
        per_chapter_counts=dict(sorted(counts.items())),
        missing_count=missing,
        total=len(allocations),
    )


DIMENSIONS = ("alignment", "coherence", "relevance")


def human_eval_aggregate(ratings: list[dict]) -> HumanEvalReport:
    """Normalize 1-5 ratings to percentages.

    Each rating row is {rater, case_id, dimension, score}. A rater's score on
    a dimension is mean(scores)/5*100; the dimension average is the plain mean
    over raters.
    """
    by_rater_dim: dict[str, dict[str, list[int]]] = {}
    for row in ratings:
        score = row["score"]
        if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
            raise EvaluationError(
                f"score must be an integer in 1..5, got {score!r}")
        by_rater_dim.setdefault(row["rater"], {}).setdefault(
            row["dimension"], []).append(score)

    per_rater: dict[str, dict[str, float]] = {}
    for rater in sorted(by_rater_dim):
        per_rater[rater] = {}
        for dimension in sorted(by_rater_dim[rater]):
            scores = by_rater_dim[rater][dimension]
            per_rater[rater][dimension] = sum(scores) / len(scores) / 5.0 * 100.0

    dimension_average: dict[str, float] = {}
    dims = sorted({d for dd in per_rater.values() for d in dd})
    for dimension in dims:
        values = [per_rater[r][dimension] for r in per_rater if dimension in per_rater[r]]
        dimension_average[dimension] = sum(values) / len(values)

    return HumanEvalReport(per_rater=per_rater, dimension_average=dimension_average)


# --- text/CSV rendering ----------------------------------------------------


def render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(headers[i])), *(len(str(row[i])) for row in rows)) if rows
              else len(str(headers[i])) for i in range(len(headers))]
    def fmt(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)


def classification_table(report: ClassificationReport) -> str:
    rows = [[label,
             f"{round2(stats.precision):.2f}",
             f"{round2(stats.recall):.2f}",
             f"{round2(stats.f1):.2f}",
             str(stats.support)]
            for label, stats in sorted(report.per_class.items())]
    rows.append(["macro", "", "", f"{round2(report.macro_f1):.2f}", str(report.total)])
    table = render_table(["class", "precision", "recall", "f1", "support"], rows)
    extra = f"\naccuracy: {round2(report.accuracy):.2f}  abstained: {report.abstained}"
    return table + extra


def chapter_table(report: ChapterReport) -> str:
    rows = [[cid, str(s.count), str(s.correct), f"{round2(s.accuracy):.2f}"]
            for cid, s in sorted(report.per_chapter.items())]
    rows.append(["micro-average", "", "", f"{round2(report.micro_average):.2f}"])
    return render_table(["chapter", "count", "correct", "accuracy"], rows)


def human_eval_table(report: HumanEvalReport) -> str:
    dims = sorted(report.dimension_average)
    rows = [[rater] + [f"{round2(report.per_rater[rater].get(d, 0.0)):.2f}" for d in dims]
            for rater in sorted(report.per_rater)]
    rows.append(["average"] + [f"{round2(report.dimension_average[d]):.2f}" for d in dims])
    return render_table(["rater"] + list(dims), rows)


def distribution_csv(report: DistributionReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["chapter", "count"])
    for chapter_id, count in report.per_chapter_counts.items():
        writer.writerow([chapter_id, count])
    writer.writerow(["(missing)", report.missing_count])
    return buf.getvalue()


def read_predictions(path: Path) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(PredictionRecord(
                case_id=obj["case_id"],
                framework=obj["framework"],
                chapter_id=obj["chapter_id"],
                gold=obj["gold"],
                predicted=obj.get("predicted"),
                raw_response=obj.get("raw_response"),
            ))
    return records
