"""Framework registry: canonical chapter inventories and numeral helpers.

Chapter keys look like ``eu-ai-act/ch2`` and are the join key used by the
statute model, the evaluation harness, and chapter allocation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

EU_AI_ACT = "eu-ai-act"
GDPR = "gdpr"

_ROMAN_VALUES = [
    ("M", 1000), ("CM", 900), ("D", 500), ("CD", 400),
    ("C", 100), ("XC", 90), ("L", 50), ("XL", 40),
    ("X", 10), ("IX", 9), ("V", 5), ("IV", 4), ("I", 1),
]


def roman_to_int(token: str) -> int | None:
    """Parse a Roman numeral, returning None when the token is not one."""
    s = token.strip().upper()
    if not s or not re.fullmatch(r"[MDCLXVI]+", s):
        return None
    total = 0
    i = 0
    for sym, val in _ROMAN_VALUES:
        while s.startswith(sym, i):
            total += val
            i += len(sym)
    if i != len(s):
        return None
    # Reject non-canonical forms such as "IIII".
    return total if int_to_roman(total) == s else None


def int_to_roman(n: int) -> str:
    out = []
    for sym, val in _ROMAN_VALUES:
        while n >= val:
            out.append(sym)
            n -= val
    return "".join(out)


@dataclass(frozen=True)
class Chapter:
    chapter_id: str     # e.g. "eu-ai-act/ch2"
    number: int
    enumerator: str     # e.g. "Chapter II" or "Chapter 2"
    title: str

    @property
    def display(self) -> str:
        return f"{self.enumerator}: {self.title}"


@dataclass(frozen=True)
class Framework:
    slug: str
    title: str          # formal title, used as the statute root line
    short_name: str     # used in prompt templates
    chapters: tuple[Chapter, ...]

    def chapter_ids(self) -> list[str]:
        return [c.chapter_id for c in self.chapters]

    def chapter_by_number(self, number: int) -> Chapter | None:
        for c in self.chapters:
            if c.number == number:
                return c
        return None


def _chapters(slug: str, numeral_style: str, titles: list[str]) -> tuple[Chapter, ...]:
    out = []
    for i, title in enumerate(titles, start=1):
        numeral = int_to_roman(i) if numeral_style == "roman" else str(i)
        out.append(Chapter(f"{slug}/ch{i}", i, f"Chapter {numeral}", title))
    return tuple(out)


_EU_AI_ACT_CHAPTERS = [
    "General Provisions",
    "Prohibited AI Practices",
    "High-Risk AI System",
    "Transparency Obligations for Providers and Deployers of Certain AI Systems",
    "General-Purpose AI Models",
    "Measures in Support of Innovation",
    "Governance",
    "EU Database for High-Risk AI Systems",
    "Post-Market Monitoring, Information Sharing and Market Surveillance",
    "Codes of Conduct and Guidelines",
    "Delegation of Power and Committee Procedure",
    "Penalties",
    "Final Provisions",
]

_GDPR_CHAPTERS = [
    "General provisions",
    "Principles",
    "Rights of the data subject",
    "Controller and processor",
    "Transfers of personal data to third countries or international organisations",
    "Independent supervisory authorities",
    "Cooperation and consistency",
    "Remedies, liability and penalties",
    "Provisions relating to specific processing situations",
    "Delegated acts and implementing acts",
    "Final provisions",
]

FRAMEWORKS: dict[str, Framework] = {
    EU_AI_ACT: Framework(
        slug=EU_AI_ACT,
        title="EU Artificial Intelligence Act",
        short_name="EU AI Act",
        chapters=_chapters(EU_AI_ACT, "roman", _EU_AI_ACT_CHAPTERS),
    ),
    GDPR: Framework(
        slug=GDPR,
        title="General Data Protection Regulation",
        short_name="GDPR",
        chapters=_chapters(GDPR, "arabic", _GDPR_CHAPTERS),
    ),
}

# Statute root lines we recognize, mapped back to their slug.
KNOWN_TITLES = {fw.title: slug for slug, fw in FRAMEWORKS.items()}


def slugify(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return slug or "x"


def get_framework(slug_or_title: str) -> Framework:
    """Resolve a framework by slug or formal title; unknown names become
    custom frameworks with an empty chapter inventory."""
    if slug_or_title in FRAMEWORKS:
        return FRAMEWORKS[slug_or_title]
    if slug_or_title in KNOWN_TITLES:
        return FRAMEWORKS[KNOWN_TITLES[slug_or_title]]
    slug = slugify(slug_or_title)
    if slug in FRAMEWORKS:
        return FRAMEWORKS[slug]
    return Framework(slug=slug, title=slug_or_title, short_name=slug_or_title, chapters=())


def chapter_listing(framework: Framework) -> str:
    """The framework's chapters, one display name per line (blank-line
    separated, matching the allocation prompt layout)."""
    return "\n\n".join(c.display for c in framework.chapters)


_CHAPTER_REF = re.compile(r"chapter\s+([0-9]+|[mdclxvi]+)\b", re.IGNORECASE)


def _normalize_name(text: str) -> str:
    return " ".join(re.sub(r"[^a-z0-9]+", " ", text.lower()).split())


def match_chapter(candidate: str, framework: Framework) -> str | None:
    """Fuzzy-match free text against the canonical chapter list.

    Accepts Roman or Arabic chapter numbers, ignores case and punctuation,
    and falls back to title matching. Returns the chapter_id or None.
    """
    if not candidate:
        return None
    m = _CHAPTER_REF.search(candidate)
    if m:
        token = m.group(1)
        number = int(token) if token.isdigit() else roman_to_int(token)
        if number is not None:
            chapter = framework.chapter_by_number(number)
            return chapter.chapter_id if chapter else None
    normalized = _normalize_name(candidate)
    if not normalized:
        return None
    for chapter in framework.chapters:
        if normalized in (_normalize_name(chapter.display), _normalize_name(chapter.title)):
            return chapter.chapter_id
    return None
