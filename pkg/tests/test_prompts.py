from __future__ import annotations

import pytest

from forge.errors import TemplateError
from forge.frameworks import FRAMEWORKS, chapter_listing
from forge.prompts import (ALLOCATE, BENCHMARK_GEN, COLD_START, EXTRAPOLATE,
                           TEMPLATES, render_prompt)

SEED_TEXT = "EU Artificial Intelligence Act\n- Chapter II: Prohibited AI Practices"


class TestRenderPrompt:
    def test_benchmark_gen_embeds_seed_and_result(self):
        text = render_prompt(TEMPLATES[BENCHMARK_GEN], {
            "law_name": "EU AI Act",
            "result": "prohibited",
            "rules": SEED_TEXT,
        })
        assert SEED_TEXT in text
        assert "prohibited" in text
        assert "Develop a realistic legal case scenario" in text
        assert "{rules}" not in text

    def test_cold_start_contains_reasoning_instruction(self):
        text = render_prompt(TEMPLATES[COLD_START], {
            "law_name": "GDPR",
            "result": "permitted",
            "regulations": SEED_TEXT,
            "case": "A controller shares records.",
        })
        assert "Go through a step-by-step reasoning process" in text
        assert "permitted" in text

    def test_extrapolate_contains_two_section_contract(self):
        text = render_prompt(TEMPLATES[EXTRAPOLATE], {
            "law_name": "GDPR",
            "result": "prohibited",
            "case": "unsafe prompt text",
        })
        assert "Factual Background" in text
        assert "Legal Analyzing" in text

    def test_undeclared_binding_rejected(self):
        with pytest.raises(TemplateError) as exc:
            render_prompt(TEMPLATES[BENCHMARK_GEN], {
                "law_name": "EU AI Act",
                "result": "prohibited",
                "rules": SEED_TEXT,
                "surprise": "nope",
            })
        assert "surprise" in str(exc.value)

    def test_missing_slot_named_in_error(self):
        with pytest.raises(TemplateError) as exc:
            render_prompt(TEMPLATES[BENCHMARK_GEN], {"result": "prohibited"})
        message = str(exc.value)
        assert "law_name" in message and "rules" in message

    def test_rendering_deterministic(self):
        bindings = {"law_name": "EU AI Act", "result": "permitted", "rules": SEED_TEXT}
        assert (render_prompt(TEMPLATES[BENCHMARK_GEN], bindings)
                == render_prompt(TEMPLATES[BENCHMARK_GEN], bindings))

    def test_json_schema_braces_survive(self):
        text = render_prompt(TEMPLATES[BENCHMARK_GEN], {
            "law_name": "EU AI Act", "result": "prohibited", "rules": "r"})
        assert '"parties_involved"' in text
        assert "{\n" in text and "\n}" in text  # literal schema braces intact

    def test_allocate_output_contract_braces_survive(self):
        text = render_prompt(TEMPLATES[ALLOCATE], {
            "law_name": "EU AI Act",
            "case": "c",
            "chapters": chapter_listing(FRAMEWORKS["eu-ai-act"]),
        })
        assert 'boxed{"result"' in text


class TestAllocateChapterListing:
    @pytest.mark.parametrize("slug", ["eu-ai-act", "gdpr"])
    def test_every_canonical_chapter_embedded_exactly_once(self, slug):
        framework = FRAMEWORKS[slug]
        text = render_prompt(TEMPLATES[ALLOCATE], {
            "law_name": framework.short_name,
            "case": "some case",
            "chapters": chapter_listing(framework),
        })
        lines = [line.strip() for line in text.splitlines()]
        for chapter in framework.chapters:
            assert lines.count(chapter.display) == 1
