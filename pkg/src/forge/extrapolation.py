"""Extrapolating pre-existing safety datasets into compliance cases:
normalized ingestion, chapter allocation via the boxed-answer prompt, and
two-section case generation from safety seeds."""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .client import ClientConfig, request_completion
from .errors import ExtrapolationParseError, IngestionError
from .frameworks import Framework, chapter_listing, get_framework, match_chapter
from .prompts import ALLOCATE, EXTRAPOLATE, TEMPLATES, render_prompt
from .rewards import find_boxed

SAFE = "SAFE"
UNSAFE = "UNSAFE"

PROMPT_SAFETY = "PROMPT_SAFETY"
RESPONSE_SAFETY = "RESPONSE_SAFETY"

AEGIS2 = "aegis2"
WILDGUARD = "wildguard"
OPENAI_MOD = "openai_mod"
SAFERLHF = "saferlhf"

SOURCE_TASKS = {
    AEGIS2: PROMPT_SAFETY,
    WILDGUARD: PROMPT_SAFETY,
    OPENAI_MOD: PROMPT_SAFETY,
    SAFERLHF: RESPONSE_SAFETY,
}

# Per-source label vocabularies, folded onto the binary SAFE/UNSAFE axis.
# The generic entries cover hand-built files; callers can extend via the
# label_vocab argument.
_GENERIC_VOCAB = {
    "safe": SAFE, "unsafe": UNSAFE,
    "benign": SAFE, "harmful": UNSAFE, "unharmful": SAFE,
    "yes": UNSAFE, "no": SAFE,        # "is it flagged?" style columns
    "0": SAFE, "1": UNSAFE,
    "false": SAFE, "true": UNSAFE,
}

LABEL_VOCABS: dict[str, dict[str, str]] = {
    AEGIS2: dict(_GENERIC_VOCAB),
    WILDGUARD: dict(_GENERIC_VOCAB),
    OPENAI_MOD: dict(_GENERIC_VOCAB),
    SAFERLHF: dict(_GENERIC_VOCAB),
}

# Default mapping from the safety label of a seed item to the target label of
# the case generated from it; overridable per run.
DEFAULT_LABEL_MAP = {UNSAFE: "PROHIBITED", SAFE: "PERMITTED"}


@dataclass(frozen=True)
class ExternalSafetyItem:
    item_id: str
    source: str
    task: str
    text: str
    label: str
    category: str | None = None


@dataclass(frozen=True)
class AllocationResult:
    item_ref: str
    chapter_id: str | None
    raw_response: str

    def to_json(self) -> dict:
        return {
            "item_ref": self.item_ref,
            "chapter_id": self.chapter_id,
            "raw_response": self.raw_response,
        }


@dataclass(frozen=True)
class ExtrapolatedCase:
    item_ref: str
    framework: str
    label: str
    factual_background: str
    legal_analysis: str

    def to_json(self) -> dict:
        return {
            "item_ref": self.item_ref,
            "framework": self.framework,
            "label": self.label,
            "factual_background": self.factual_background,
            "legal_analysis": self.legal_analysis,
        }


def _iter_rows(path: Path):
    if path.suffix.lower() == ".csv":
        with open(path, encoding="utf-8", newline="") as fh:
            yield from csv.DictReader(fh)
    else:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield json.loads(line)


def render_item_text(row: dict, mapping: dict[str, str]) -> str | None:
    """Build the item text: either a direct text column or a prompt/response
    pair rendered as two labelled lines."""
    by_canon = {canon: row.get(src) for src, canon in mapping.items()}
    if by_canon.get("text"):
        return str(by_canon["text"])
    prompt = by_canon.get("prompt")
    response = by_canon.get("response")
    if prompt and response:
        return f"PROMPT: {prompt}\nRESPONSE: {response}"
    return None


def ingest_safety_dataset(path: Path, source: str, mapping: dict[str, str],
                          label_vocab: dict[str, str] | None = None,
                          rejects_log: Path | None = None) -> list[ExternalSafetyItem]:
    """Normalize a JSON-Lines or CSV safety file into ExternalSafetyItems.

    ``mapping`` maps source column names onto the canonical fields (text |
    prompt+response, label, category). Rows without usable text are rejected
    (logged, not fatal); an unmapped label value is an ingestion error because
    it usually means the whole file is misdeclared.
    """
    vocab = dict(LABEL_VOCABS.get(source, _GENERIC_VOCAB))
    if label_vocab:
        vocab.update({str(k).strip().lower(): v for k, v in label_vocab.items()})
    label_cols = [src for src, canon in mapping.items() if canon == "label"]
    if not label_cols:
        raise IngestionError("mapping does not assign any column to 'label'")
    category_cols = [src for src, canon in mapping.items() if canon == "category"]

    items: list[ExternalSafetyItem] = []
    rejects: list[dict] = []
    task = SOURCE_TASKS.get(source, PROMPT_SAFETY)
    for index, row in enumerate(_iter_rows(Path(path))):
        raw_label = row.get(label_cols[0])
        if raw_label is None:
            rejects.append({"row": index, "reason": "missing label column"})
            continue
        key = str(raw_label).strip().lower()
        if key not in vocab:
            raise IngestionError(
                f"unmapped label value {raw_label!r} in row {index} of {path}")
        text = render_item_text(row, mapping)
        if not text or not text.strip():
            rejects.append({"row": index, "reason": "missing or empty text"})
            continue
        category = row.get(category_cols[0]) if category_cols else None
        items.append(ExternalSafetyItem(
            item_id=f"{source}-{index:06d}",
            source=source,
            task=task,
            text=text,
            label=vocab[key],
            category=str(category) if category is not None else None,
        ))

    if rejects_log is not None and rejects:
        with open(rejects_log, "w", encoding="utf-8") as fh:
            for reject in rejects:
                fh.write(json.dumps(reject) + "\n")
    return items


def parse_boxed_chapter(raw: str, framework: Framework) -> str | None:
    """Pull the chapter out of the final boxed answer; the box content may be
    a bare name or a {"result": ...} payload, with or without the backslash."""
    boxes = find_boxed(raw, mark="boxed{")  # also matches the \boxed{ form
    if not boxes:
        return None
    content = boxes[-1][2].strip()
    candidate = content
    try:
        obj = json.loads("{" + content + "}")
        if isinstance(obj, dict) and "result" in obj:
            candidate = str(obj["result"])
    except json.JSONDecodeError:
        m = re.search(r'"result"\s*:\s*"([^"]*)"', content)
        if m:
            candidate = m.group(1)
    return match_chapter(candidate, framework)


def allocate_chapter(item: ExternalSafetyItem, framework: str,
                     config: ClientConfig) -> AllocationResult:
    """Ask the backend which chapter covers the item; fuzzy-match the boxed
    answer against the canonical list. No valid match leaves chapter_id empty
    (it then counts toward the missing rate)."""
    fw = get_framework(framework)
    prompt = render_prompt(TEMPLATES[ALLOCATE], {
        "law_name": fw.short_name,
        "case": item.text,
        "chapters": chapter_listing(fw),
    })
    raw = request_completion(prompt, config)
    return AllocationResult(
        item_ref=item.item_id,
        chapter_id=parse_boxed_chapter(raw, fw),
        raw_response=raw,
    )


_SECTION_ALIASES = {
    "factual_background": ("factual background",),
    "legal_analysis": ("legal analyzing", "legal analysis"),
}


def parse_extrapolation_sections(raw: str) -> dict[str, str]:
    """Extract the two markdown sections, accepting '### Heading', '**Heading**',
    and 'Heading:' forms plus the analysis-name alias."""
    pattern = re.compile(
        r"^\s*(?:#{1,6}\s*|\*\*)?(factual background|legal analyzing|legal analysis)"
        r"(?:\*\*)?\s*:?\s*",
        re.IGNORECASE | re.MULTILINE)
    matches = list(pattern.finditer(raw))
    sections: dict[str, str] = {}
    for i, match in enumerate(matches):
        start = match.end()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        heading = match.group(1).lower()
        for canon, aliases in _SECTION_ALIASES.items():
            if heading in aliases:
                sections[canon] = raw[start:end].strip()
    missing = [name for name in _SECTION_ALIASES
               if not sections.get(name)]
    if missing:
        raise ExtrapolationParseError(
            f"missing section(s) {missing} in extrapolation response")
    return sections


def extrapolate_case(item: ExternalSafetyItem, framework: str, label: str,
                     config: ClientConfig,
                     rejects_log: Path | None = None) -> ExtrapolatedCase:
    """Generate a compliance case from a safety seed and parse its two
    sections; parse failures preserve the raw response in the rejects log."""
    fw = get_framework(framework)
    prompt = render_prompt(TEMPLATES[EXTRAPOLATE], {
        "law_name": fw.short_name,
        "result": label.lower(),
        "case": item.text,
    })
    raw = request_completion(prompt, config)
    try:
        sections = parse_extrapolation_sections(raw)
    except ExtrapolationParseError:
        if rejects_log is not None:
            with open(rejects_log, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "item_ref": item.item_id,
                    "framework": fw.slug,
                    "label": label,
                    "raw": raw,
                }, ensure_ascii=False) + "\n")
        raise
    return ExtrapolatedCase(
        item_ref=item.item_id,
        framework=fw.slug,
        label=label,
        factual_background=sections["factual_background"],
        legal_analysis=sections["legal_analysis"],
    )


def read_allocations(path: Path) -> list[AllocationResult]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(AllocationResult(
                item_ref=obj["item_ref"],
                chapter_id=obj.get("chapter_id"),
                raw_response=obj.get("raw_response", ""),
            ))
    return out


def write_allocations(allocations: list[AllocationResult], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for allocation in allocations:
            fh.write(json.dumps(allocation.to_json(), ensure_ascii=False) + "\n")
