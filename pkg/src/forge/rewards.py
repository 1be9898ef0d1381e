"""Response parsing and the rule-based reward.

A training-format response is a think block, then summarized content, then a
boxed verdict:

    <think>reasoning chain</think> response content \\boxed{"prohibited"}

The reward multiplies a format indicator by the verdict-match indicator plus a
balance weight: total = format * (comply + alpha).
"""

from __future__ import annotations

from dataclasses import dataclass

PROHIBITED = "PROHIBITED"
PERMITTED = "PERMITTED"
VERDICTS = (PROHIBITED, PERMITTED)

_THINK_OPEN = "<think>"
_THINK_CLOSE = "</think>"
_BOX_MARK = r"\boxed{"
_QUOTE_CHARS = "\"'`\u2018\u2019\u201c\u201d"


@dataclass(frozen=True)
class ParsedResponse:
    think_chain: str | None
    body: str
    boxed_raw: str | None
    verdict: str | None
    leading_text: str = ""
    lint_warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class GoldLabel:
    value: str

    def __post_init__(self):
        if self.value not in VERDICTS:
            raise ValueError(f"gold label must be one of {VERDICTS}, got {self.value!r}")


@dataclass(frozen=True)
class RewardConfig:
    alpha: float = 1.0 / 9.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")


@dataclass(frozen=True)
class RewardBreakdown:
    format_reward: int
    comply_reward: int
    total: float


def normalize_verdict(raw: str) -> str | None:
    """Map box content onto a verdict: lowercase, strip quotes/whitespace,
    accept exactly 'prohibited' or 'permitted'."""
    cleaned = raw.strip().strip(_QUOTE_CHARS).strip().lower()
    if cleaned == "prohibited":
        return PROHIBITED
    if cleaned == "permitted":
        return PERMITTED
    return None


def find_boxed(text: str, mark: str = _BOX_MARK) -> list[tuple[int, int, str]]:
    """All ``mark``...\\}`` spans in ``text`` as (start, end, content), with
    balanced-brace scanning so nested braces stay inside the box."""
    spans = []
    search_from = 0
    while True:
        start = text.find(mark, search_from)
        if start < 0:
            break
        depth = 1
        i = start + len(mark)
        while i < len(text) and depth:
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
            i += 1
        if depth == 0:
            spans.append((start, i, text[start + len(mark):i - 1]))
            search_from = i
        else:
            search_from = start + len(mark)
    return spans


def parse_response(text: str) -> ParsedResponse:
    """Split a model response into think chain, body, and boxed verdict.

    Total: never raises. The first <think>...</think> block is the chain, the
    LAST \\boxed{...} holds the verdict, and the body is what sits between the
    closing think tag and that final box. Oddities (text before the think
    block, text after the box, a box inside the think block) surface as lint
    warnings without making parsing fail.
    """
    warnings: list[str] = []
    think_chain = None
    leading = ""
    after_think = text

    open_at = text.find(_THINK_OPEN)
    if open_at >= 0:
        close_at = text.find(_THINK_CLOSE, open_at + len(_THINK_OPEN))
        if close_at >= 0:
            think_chain = text[open_at + len(_THINK_OPEN):close_at]
            leading = text[:open_at]
            after_think = text[close_at + len(_THINK_CLOSE):]
            if leading.strip():
                warnings.append("content before <think> block")

    boxes = find_boxed(text)
    boxed_raw = None
    verdict = None
    body = after_think
    if boxes:
        start, end, boxed_raw = boxes[-1]
        verdict = normalize_verdict(boxed_raw)
        think_end = len(text) - len(after_think)
        if start >= think_end:
            body = text[think_end:start]
        else:
            warnings.append("boxed verdict inside think block")
        if text[end:].strip():
            warnings.append("trailing text after boxed verdict")

    return ParsedResponse(
        think_chain=think_chain,
        body=body,
        boxed_raw=boxed_raw,
        verdict=verdict,
        leading_text=leading,
        lint_warnings=tuple(warnings),
    )


def check_format(parsed: ParsedResponse) -> int:
    """1 iff the response matches the training pattern: a non-empty think
    chain first, non-empty summarized content, and a recognized verdict."""
    if parsed.think_chain is None or not parsed.think_chain.strip():
        return 0
    if parsed.leading_text.strip():
        return 0
    if not parsed.body.strip():
        return 0
    if parsed.verdict is None:
        return 0
    return 1


def compliance_reward(parsed: ParsedResponse, gold: GoldLabel) -> int:
    """Indicator that the extracted verdict equals the ground truth."""
    return int(parsed.verdict is not None and parsed.verdict == gold.value)


def total_reward(text: str, gold: GoldLabel, config: RewardConfig = RewardConfig()) -> RewardBreakdown:
    """total = format * (comply + alpha); zero whenever the format is wrong."""
    parsed = parse_response(text)
    fmt = check_format(parsed)
    comply = compliance_reward(parsed, gold)
    return RewardBreakdown(
        format_reward=fmt,
        comply_reward=comply,
        total=fmt * (comply + config.alpha),
    )


def render_training_response(think: str, body: str, verdict: str) -> str:
    """Compose a response in the training format (the parse inverse)."""
    label = verdict.lower()
    if label not in ("prohibited", "permitted"):
        raise ValueError(f"verdict must be prohibited/permitted, got {verdict!r}")
    return f"{_THINK_OPEN}{think}{_THINK_CLOSE} {body} \\boxed{{\"{label}\"}}"
