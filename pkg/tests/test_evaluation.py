from __future__ import annotations

import random

import pytest

from forge.errors import EvaluationError
from forge.evaluation import (ChapterReport, PredictionRecord,
                              chapter_distribution, chapter_table,
                              classification_table, distribution_csv,
                              human_eval_aggregate, human_eval_table,
                              per_chapter_report, round2, score_predictions)


def pred(case_id, gold, predicted, chapter="eu-ai-act/ch1", framework="eu-ai-act"):
    return PredictionRecord(case_id=case_id, framework=framework,
                            chapter_id=chapter, gold=gold, predicted=predicted)


# --- independent oracle: naive confusion-matrix arithmetic ------------------

def oracle_metrics(pairs: list[tuple[str, str | None]]):
    """Brute-force accuracy / per-class precision, recall, F1 from scratch."""
    labels = sorted({g for g, _ in pairs} | {p for _, p in pairs if p is not None})
    accuracy = 100.0 * sum(1 for g, p in pairs if g == p) / len(pairs)
    per_class = {}
    for label in labels:
        tp = fp = fn = 0
        for gold, predicted in pairs:
            if predicted == label and gold == label:
                tp += 1
            elif predicted == label and gold != label:
                fp += 1
            elif predicted != label and gold == label:
                fn += 1
        precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
        recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = (precision, recall, f1)
    macro = sum(v[2] for v in per_class.values()) / len(per_class) if per_class else 0.0
    return accuracy, per_class, macro


class TestScorePredictions:
    def test_perfect_classifier(self):
        records = [pred(f"c{i}", "PROHIBITED" if i % 2 else "PERMITTED",
                        "PROHIBITED" if i % 2 else "PERMITTED") for i in range(6)]
        report = score_predictions(records)
        assert report.accuracy == 100.0
        assert all(s.f1 == 100.0 for s in report.per_class.values())

    def test_half_right_balanced(self):
        records = [
            pred("a", "PROHIBITED", "PROHIBITED"),
            pred("b", "PROHIBITED", "PERMITTED"),
            pred("c", "PERMITTED", "PERMITTED"),
            pred("d", "PERMITTED", "PROHIBITED"),
        ]
        assert score_predictions(records).accuracy == 50.0

    def test_abstentions_count_as_incorrect(self):
        records = [pred("a", "PROHIBITED", "PROHIBITED"),
                   pred("b", "PROHIBITED", None)]
        report = score_predictions(records)
        assert report.accuracy == 50.0
        assert report.abstained == 1

    def test_exclude_abstains_mode(self):
        records = [pred("a", "PROHIBITED", "PROHIBITED"),
                   pred("b", "PROHIBITED", None)]
        report = score_predictions(records, include_abstains=False)
        assert report.accuracy == 100.0
        assert report.total == 1

    def test_ten_record_fixture_matches_oracle(self):
        pairs = [("PROHIBITED", "PROHIBITED"), ("PROHIBITED", "PERMITTED"),
                 ("PERMITTED", "PERMITTED"), ("PERMITTED", "PERMITTED"),
                 ("PROHIBITED", None), ("PERMITTED", "PROHIBITED"),
                 ("PROHIBITED", "PROHIBITED"), ("PERMITTED", "PERMITTED"),
                 ("PROHIBITED", "PERMITTED"), ("PERMITTED", "PERMITTED")]
        records = [pred(f"c{i}", g, p) for i, (g, p) in enumerate(pairs)]
        report = score_predictions(records)
        accuracy, per_class, macro = oracle_metrics(pairs)
        assert report.accuracy == pytest.approx(accuracy, abs=1e-9)
        assert report.macro_f1 == pytest.approx(macro, abs=1e-9)
        for label, (precision, recall, f1) in per_class.items():
            stats = report.per_class[label]
            assert stats.precision == pytest.approx(precision, abs=1e-9)
            assert stats.recall == pytest.approx(recall, abs=1e-9)
            assert stats.f1 == pytest.approx(f1, abs=1e-9)

    def test_hundred_random_fixtures_match_oracle(self):
        rng = random.Random(20260808)
        label_sets = [("PROHIBITED", "PERMITTED"), ("SAFE", "UNSAFE")]
        for _ in range(100):
            labels = rng.choice(label_sets)
            pairs = [(rng.choice(labels),
                      rng.choice([*labels, None]) if rng.random() < 0.9 else None)
                     for _ in range(rng.randint(1, 60))]
            records = [pred(f"c{i}", g, p) for i, (g, p) in enumerate(pairs)]
            report = score_predictions(records)
            accuracy, per_class, macro = oracle_metrics(pairs)
            assert report.accuracy == pytest.approx(accuracy, abs=1e-9)
            assert report.macro_f1 == pytest.approx(macro, abs=1e-9)
            for label, (precision, recall, f1) in per_class.items():
                stats = report.per_class[label]
                assert (stats.precision, stats.recall, stats.f1) == pytest.approx(
                    (precision, recall, f1), abs=1e-9)

    def test_empty_and_missing_gold_rejected(self):
        with pytest.raises(EvaluationError):
            score_predictions([])
        with pytest.raises(EvaluationError):
            score_predictions([pred("a", "", "PERMITTED")])


class TestPerChapterReport:
    def test_single_chapter_micro_equals_chapter_accuracy(self):
        records = [pred(f"c{i}", "PERMITTED", "PERMITTED" if i < 3 else "PROHIBITED")
                   for i in range(4)]
        report = per_chapter_report(records)
        assert report.micro_average == pytest.approx(75.0)
        assert report.per_chapter["eu-ai-act/ch1"].accuracy == pytest.approx(75.0)

    def test_micro_average_weights_by_count(self):
        # 10 samples at 60% in ch1 plus 2 at 100% in ch2 -> 8/12, not 80%
        records = [pred(f"a{i}", "PERMITTED",
                        "PERMITTED" if i < 6 else "PROHIBITED", chapter="eu-ai-act/ch1")
                   for i in range(10)]
        records += [pred(f"b{i}", "PERMITTED", "PERMITTED", chapter="eu-ai-act/ch2")
                    for i in range(2)]
        report = per_chapter_report(records)
        assert round2(report.micro_average) == 66.67
        unweighted = (60.0 + 100.0) / 2
        assert unweighted == 80.0
        assert report.micro_average != unweighted

    def test_micro_average_permutation_invariant(self):
        rng = random.Random(4)
        records = [pred(f"c{i}", "PERMITTED",
                        rng.choice(["PERMITTED", "PROHIBITED"]),
                        chapter=f"eu-ai-act/ch{rng.randint(1, 13)}")
                   for i in range(60)]
        base = per_chapter_report(records).micro_average
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert per_chapter_report(shuffled).micro_average == base
        pooled = score_predictions(records).accuracy
        assert base == pytest.approx(pooled, abs=1e-9)

    def test_unknown_chapter_named_in_error(self):
        with pytest.raises(EvaluationError) as exc:
            per_chapter_report([pred("a", "PERMITTED", "PERMITTED",
                                     chapter="eu-ai-act/ch99")])
        assert "ch99" in str(exc.value)

    def test_empty_chapters_absent(self):
        records = [pred("a", "PERMITTED", "PERMITTED", chapter="eu-ai-act/ch3")]
        report = per_chapter_report(records)
        assert set(report.per_chapter) == {"eu-ai-act/ch3"}


class TestChapterDistribution:
    def test_three_invalid_of_ten(self):
        allocations = ["eu-ai-act/ch1"] * 7 + [None, "bogus", ""]
        report = chapter_distribution(allocations, "eu-ai-act")
        assert report.missing_count == 3
        assert round2(report.missing_rate) == 30.00

    def test_all_valid(self):
        report = chapter_distribution(["gdpr/ch2", "gdpr/ch9"], "gdpr")
        assert report.missing_rate == 0.0
        assert report.per_chapter_counts == {"gdpr/ch2": 1, "gdpr/ch9": 1}

    def test_counts_conserve_total(self):
        rng = random.Random(8)
        allocations = [rng.choice(["eu-ai-act/ch2", "eu-ai-act/ch12", None, "junk"])
                       for _ in range(200)]
        report = chapter_distribution(allocations, "eu-ai-act")
        assert sum(report.per_chapter_counts.values()) + report.missing_count == 200
        assert report.total == 200

    @pytest.mark.parametrize("source,rate", [
        ("aegis2", 19.86), ("wildguard", 15.73),
        ("openai_mod", 16.19), ("saferlhf", 15.73),
    ])
    def test_recorded_allocation_fixtures(self, fixtures_dir, source, rate):
        from forge.extrapolation import read_allocations
        allocations = read_allocations(
            fixtures_dir / "allocations" / f"{source}_eu_ai_act.jsonl")
        report = chapter_distribution([a.chapter_id for a in allocations], "eu-ai-act")
        assert round2(report.missing_rate) == rate


class TestHumanEvalAggregate:
    @staticmethod
    def ratings_with_mean(rater, dimension, fives, fours):
        rows = []
        for i in range(fives):
            rows.append({"rater": rater, "case_id": f"c{i}",
                         "dimension": dimension, "score": 5})
        for i in range(fours):
            rows.append({"rater": rater, "case_id": f"d{i}",
                         "dimension": dimension, "score": 4})
        return rows

    def test_mean_4_42_normalizes_to_88_40(self):
        rows = self.ratings_with_mean("s1", "alignment", 21, 29)  # mean 4.42
        report = human_eval_aggregate(rows)
        assert round2(report.per_rater["s1"]["alignment"]) == 88.40

    def test_all_fives_ceiling(self):
        rows = []
        for rater in ("a", "b"):
            for dimension in ("alignment", "coherence", "relevance"):
                rows += self.ratings_with_mean(rater, dimension, 10, 0)
        report = human_eval_aggregate(rows)
        assert all(v == 100.0 for d in report.per_rater.values() for v in d.values())
        assert all(v == 100.0 for v in report.dimension_average.values())

    def test_dimension_average_is_mean_over_raters(self):
        rows = (self.ratings_with_mean("s1", "alignment", 21, 29)    # 88.40
                + self.ratings_with_mean("s2", "alignment", 48, 2)   # 99.20
                + self.ratings_with_mean("s3", "alignment", 48, 2))  # 99.20
        report = human_eval_aggregate(rows)
        assert round2(report.dimension_average["alignment"]) == 95.60

    def test_score_out_of_range_rejected(self):
        with pytest.raises(EvaluationError):
            human_eval_aggregate([{"rater": "r", "case_id": "c",
                                   "dimension": "alignment", "score": 6}])
        with pytest.raises(EvaluationError):
            human_eval_aggregate([{"rater": "r", "case_id": "c",
                                   "dimension": "alignment", "score": 0}])
        with pytest.raises(EvaluationError):
            human_eval_aggregate([{"rater": "r", "case_id": "c",
                                   "dimension": "alignment", "score": 4.5}])

    def test_appending_current_mean_keeps_mean(self):
        # metamorphic: appending a rating equal to the current mean (when it
        # is a whole score) leaves the normalized value unchanged
        rows = self.ratings_with_mean("r", "coherence", 10, 0)  # mean 5
        before = human_eval_aggregate(rows).per_rater["r"]["coherence"]
        rows.append({"rater": "r", "case_id": "extra", "dimension": "coherence",
                     "score": 5})
        after = human_eval_aggregate(rows).per_rater["r"]["coherence"]
        assert before == after


class TestRendering:
    def test_round2_half_up(self):
        assert round2(66.665) == 66.67
        assert round2(88.404) == 88.40
        assert round2(95.595) == 95.60

    def test_tables_render(self):
        records = [pred("a", "PERMITTED", "PERMITTED"),
                   pred("b", "PROHIBITED", None)]
        text = classification_table(score_predictions(records))
        assert "accuracy: 50.00" in text
        chapter_text = chapter_table(per_chapter_report(records))
        assert "micro-average" in chapter_text
        rows = [{"rater": "r", "case_id": "c", "dimension": "alignment", "score": 4}]
        human_text = human_eval_table(human_eval_aggregate(rows))
        assert "80.00" in human_text

    def test_distribution_csv(self):
        report = chapter_distribution(["gdpr/ch2", None], "gdpr")
        csv_text = distribution_csv(report)
        assert "chapter,count" in csv_text
        assert "gdpr/ch2,1" in csv_text
        assert "(missing),1" in csv_text
