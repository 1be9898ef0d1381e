from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forge.rewards import (PERMITTED, PROHIBITED, GoldLabel, RewardConfig,
                           check_format, compliance_reward, find_boxed,
                           parse_response, render_training_response,
                           total_reward)

WELL_FORMED = '<think>step by step</think> The practice is banned. \\boxed{"prohibited"}'


class TestParseResponse:
    def test_canonical_response(self):
        parsed = parse_response('<think>A</think> B \\boxed{"prohibited"}')
        assert parsed.think_chain == "A"
        assert "B" in parsed.body
        assert parsed.verdict == PROHIBITED

    def test_no_structure_all_optionals_empty(self):
        parsed = parse_response("just some text with no tags and no box")
        assert parsed.think_chain is None
        assert parsed.boxed_raw is None
        assert parsed.verdict is None

    def test_last_box_wins(self):
        text = "<think>t</think> body \\boxed{prohibited} more \\boxed{permitted}"
        parsed = parse_response(text)
        assert parsed.verdict == PERMITTED
        # oracle: scan every box occurrence independently and keep the last
        spans = [(m.start(), text[m.end():text.index("}", m.end())])
                 for m in re.finditer(re.escape("\\boxed{"), text)]
        assert len(spans) == 2
        last_content = max(spans)[1]
        assert last_content == "permitted"

    def test_quote_and_case_tolerance(self):
        for raw in ('"prohibited"', "'Prohibited'", "PROHIBITED",
                    "“prohibited”", "  prohibited  "):
            parsed = parse_response(f"<think>t</think> b \\boxed{{{raw}}}")
            assert parsed.verdict == PROHIBITED, raw

    def test_unknown_label_gives_no_verdict(self):
        parsed = parse_response("<think>t</think> b \\boxed{forbidden}")
        assert parsed.boxed_raw == "forbidden"
        assert parsed.verdict is None

    def test_total_never_raises(self):
        for junk in ("", "<think>", "</think><think>", "\\boxed{", "\\boxed{}",
                     "<think></think>", "\\boxed{{}}", "a \\boxed{prohibited"):
            parse_response(junk)

    def test_idempotent_on_serialized_form(self):
        original = parse_response(WELL_FORMED)
        rendered = render_training_response(
            original.think_chain, original.body.strip(), original.verdict)
        reparsed = parse_response(rendered)
        assert reparsed.think_chain == original.think_chain
        assert reparsed.verdict == original.verdict
        assert reparsed.body.strip() == original.body.strip()

    def test_trailing_text_flagged_not_fatal(self):
        parsed = parse_response(WELL_FORMED + " trailing commentary")
        assert any("trailing" in w for w in parsed.lint_warnings)
        assert check_format(parsed) == 1

    def test_nested_braces_stay_in_box(self):
        spans = find_boxed('x \\boxed{"a": {"b": 1}} y')
        assert spans[-1][2] == '"a": {"b": 1}'


class TestCheckFormat:
    def test_well_formed(self):
        assert check_format(parse_response(WELL_FORMED)) == 1

    def test_box_without_think(self):
        assert check_format(parse_response('B \\boxed{"prohibited"}')) == 0

    def test_unrecognized_label(self):
        parsed = parse_response("<think>t</think> b \\boxed{forbidden}")
        assert check_format(parsed) == 0

    def test_content_before_think_invalidates(self):
        text = 'preamble <think>t</think> b \\boxed{"prohibited"}'
        assert check_format(parse_response(text)) == 0

    def test_empty_think_chain_invalidates(self):
        assert check_format(parse_response('<think></think> b \\boxed{"prohibited"}')) == 0
        assert check_format(parse_response('<think>   </think> b \\boxed{"prohibited"}')) == 0

    def test_empty_body_invalidates(self):
        assert check_format(parse_response('<think>t</think> \\boxed{"prohibited"}')) == 0

    def test_verdict_from_box_only_never_body_text(self):
        # body says permitted, box says prohibited: the box decides
        text = "<think>t</think> clearly permitted here \\boxed{prohibited}"
        parsed = parse_response(text)
        assert check_format(parsed) == 1
        assert compliance_reward(parsed, GoldLabel(PROHIBITED)) == 1
        assert compliance_reward(parsed, GoldLabel(PERMITTED)) == 0


class TestComplianceReward:
    def test_indicator(self):
        parsed = parse_response(WELL_FORMED)
        assert compliance_reward(parsed, GoldLabel(PROHIBITED)) == 1
        assert compliance_reward(parsed, GoldLabel(PERMITTED)) == 0

    def test_missing_verdict_scores_zero(self):
        parsed = parse_response("<think>t</think> no box at all")
        assert compliance_reward(parsed, GoldLabel(PERMITTED)) == 0


class TestTotalReward:
    def test_canonical_values_with_default_alpha(self):
        gold = GoldLabel(PROHIBITED)
        config = RewardConfig()
        assert total_reward(WELL_FORMED, gold, config).total == pytest.approx(10 / 9, abs=1e-12)
        wrong = WELL_FORMED.replace("prohibited", "permitted")
        assert total_reward(wrong, gold, config).total == pytest.approx(1 / 9, abs=1e-12)
        malformed = "The case is prohibited."  # correct label text, no format
        assert total_reward(malformed, gold, config).total == 0.0

    def test_zero_total_whenever_format_zero(self):
        breakdown = total_reward('\\boxed{"prohibited"}', GoldLabel(PROHIBITED))
        assert breakdown.format_reward == 0
        assert breakdown.total == 0.0

    def test_gold_flip_changes_total_by_exactly_one(self):
        config = RewardConfig()
        right = total_reward(WELL_FORMED, GoldLabel(PROHIBITED), config).total
        wrong = total_reward(WELL_FORMED, GoldLabel(PERMITTED), config).total
        assert right - wrong == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=120, deadline=None)
    @given(st.text(alphabet=st.characters(codec="utf-8"), max_size=200),
           st.sampled_from([PROHIBITED, PERMITTED]),
           st.floats(min_value=0, max_value=2, allow_nan=False))
    def test_reachable_values_property(self, text, gold, alpha):
        config = RewardConfig(alpha=alpha)
        breakdown = total_reward(text, GoldLabel(gold), config)
        assert breakdown.total in (0.0, alpha, 1.0 + alpha)
        assert breakdown.total == breakdown.format_reward * (breakdown.comply_reward + alpha)

    def test_alpha_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            RewardConfig(alpha=-0.1)
