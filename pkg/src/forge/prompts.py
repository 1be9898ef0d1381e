"""Prompt templates for case synthesis, distillation, extrapolation, and
chapter allocation, with strict named-slot rendering.

Rendering replaces ``{slot}`` markers for the template's declared slots only;
literal braces elsewhere (e.g. the JSON schema in the generation prompt) pass
through untouched. Unknown binding keys and unbound slots both fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import TemplateError

BENCHMARK_GEN = "BENCHMARK_GEN"
COLD_START = "COLD_START"
EXTRAPOLATE = "EXTRAPOLATE"
ALLOCATE = "ALLOCATE"


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str
    slots: tuple[str, ...]


def render_prompt(template: PromptTemplate, bindings: dict[str, str]) -> str:
    declared = set(template.slots)
    provided = set(bindings)
    extra = provided - declared
    if extra:
        raise TemplateError(
            f"{template.name}: undeclared slot(s) {sorted(extra)}")
    missing = declared - provided
    if missing:
        raise TemplateError(
            f"{template.name}: missing binding for slot(s) {sorted(missing)}")
    text = template.body
    for slot in template.slots:
        text = text.replace("{" + slot + "}", str(bindings[slot]))
    return text


_BENCHMARK_GEN_BODY = """\
## Role:
You are a legal expert specializing in EU regulations, tasked with generating realistic legal case scenarios based on the {law_name}. The scenarios can represent {result} samples.

## Rules:
{rules}

## Task:
Develop a realistic legal case scenario of the {law_name}, including:
- Parties Involved: Define the plaintiff(s), defendant(s), and any relevant third parties (e.g., AI developers, users, or regulatory bodies).

- Factual Background: Provide a detailed narrative of events leading to the scenario, ensuring alignment with the {law_name} and real-world plausibility.

- Legal Issues: Identify specific legal questions or issues, referencing relevant articles of the {law_name}.

- Arguments: Outline primary arguments for both plaintiff and defendant (if applicable) or stakeholders, grounded in the {law_name}.
- Jurisdiction: Specify the EU member state or EU-level jurisdiction and relevant context (e.g., industry, AI system type).

## Constraints:
- Ensure the case aligns with the {law_name}'s provisions.
- Create realistic and complex scenarios; focus on clarity and practical applicability.
- Include sufficient details.

## Output Format:
Return the output in JSON format with only one layer, where the value of the dictionary should be in the format of string text:
{
"parties_involved": "plaintiff, defendant, and other third parties",
"factual_background": "Describe the facts. Do not directly states whether the system is compliant with the {law_name} or not. Even do not explicitly mention {law_name}.",
"legal_issues": "Legal questions or issues.",
"arguments": "Primary arguments for involved parties.",
"jurisdiction": "The official power to make legal decisions."
}
"""

_COLD_START_BODY = """\
You are a legal expert to investigate the relation between {law_name}'s regulations and the case.

## Task
- Go through a step-by-step reasoning process.
- Investigate why the case is {result} by the regulations.

## Regulations
{regulations}

## Case (Factual Background)
{case}
"""

_EXTRAPOLATE_BODY = """\
You are a legal expert. Please generate a legal case for {law_name} based on the seed data. The generated case should be {result} by {law_name}.

### Seed
{case}

### Output (in markdown format)
Factual Background: Describe the facts. Do not directly states whether the system is compliant with the {law_name} or not. Even do not explicitly mention {law_name}.
Legal Analyzing: Analyze the factual background and explain why the case is {result} by {law_name}.
"""

_ALLOCATE_BODY = """\
You are a legal expert to determine which chapter in {law_name} is related to the case.

### Case (Factual Background)
{case}

### Chapters
{chapters}

### Task
- Go through a step-by-step reasoning process and then provide the final answer.

### Output Format
- Reasoning Process.
- Final Answer in a Box:
boxed{"result": "the chapter name, e.g. Chapter I: General Provisions"}
"""

TEMPLATES: dict[str, PromptTemplate] = {
    BENCHMARK_GEN: PromptTemplate(
        name=BENCHMARK_GEN,
        body=_BENCHMARK_GEN_BODY,
        slots=("law_name", "result", "rules"),
    ),
    COLD_START: PromptTemplate(
        name=COLD_START,
        body=_COLD_START_BODY,
        slots=("law_name", "result", "regulations", "case"),
    ),
    EXTRAPOLATE: PromptTemplate(
        name=EXTRAPOLATE,
        body=_EXTRAPOLATE_BODY,
        slots=("law_name", "result", "case"),
    ),
    ALLOCATE: PromptTemplate(
        name=ALLOCATE,
        body=_ALLOCATE_BODY,
        slots=("law_name", "case", "chapters"),
    ),
}
