"""Statute tree model: parse outline documents, enumerate root-to-leaf
regulatory chains, and render them into seed texts.

Canonical statute format (line oriented, UTF-8):

    # <framework title>
    ## Chapter II: <chapter title>
    ### Article 5: <article title>
    1. <clause text>
      (h) <nested clause text>
        (iii) <deeper clause text>

``#``/``##``/``###`` carry the three heading levels; deeper clauses are
indented two spaces per extra level and keep their enumerator token
("1.", "(a)", "(iii)") at the start of the line. Blank lines and trailing
whitespace are ignored.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import StatuteParseError, TreeIntegrityError
from .frameworks import Framework, get_framework, roman_to_int, slugify

HEADING_DEPTHS = 2  # depths 1..2 are chapter/article headings


@dataclass
class LawNode:
    """One regulatory clause in the statute tree."""
    id: str
    depth: int
    enumerator: str | None
    text: str
    children: list["LawNode"] = field(default_factory=list)

    @property
    def display(self) -> str:
        """The clause as it appears on one line of the source document."""
        if self.enumerator is None:
            return self.text
        if not self.text:
            return self.enumerator
        if self.depth <= HEADING_DEPTHS:
            return f"{self.enumerator}: {self.text}"
        return f"{self.enumerator} {self.text}"

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class LawTree:
    framework: str  # framework slug
    root: LawNode
    node_count: int
    edge_count: int

    def nodes_by_id(self) -> dict[str, LawNode]:
        return {node.id: node for node in self.root.walk()}


@dataclass(frozen=True)
class StatutePath:
    node_ids: tuple[str, ...]
    framework: str


@dataclass(frozen=True)
class Seed:
    seed_id: str
    framework: str
    path: StatutePath
    rendered_text: str


_CLAUSE_ENUM = re.compile(r"^(\d+\.|\([a-z0-9]+\))\s+(.*)$", re.IGNORECASE)


def _split_heading(body: str) -> tuple[str | None, str]:
    if ":" in body:
        enum, _, title = body.partition(":")
        return enum.strip(), title.strip()
    return body.strip() or None, ""


def _split_clause(body: str) -> tuple[str | None, str]:
    m = _CLAUSE_ENUM.match(body)
    if m:
        return m.group(1), m.group(2).strip()
    return None, body.strip()


def _enum_slug(node_enum: str | None, depth: int, ordinal: int) -> str:
    if node_enum is None:
        return f"n{ordinal}"
    enum = node_enum.strip()
    m = re.fullmatch(r"Chapter\s+(\S+)", enum, re.IGNORECASE)
    if m:
        token = m.group(1)
        number = int(token) if token.isdigit() else roman_to_int(token)
        return f"ch{number}" if number is not None else f"ch-{slugify(token)}"
    m = re.fullmatch(r"Article\s+(\d+)", enum, re.IGNORECASE)
    if m:
        return f"art{m.group(1)}"
    m = re.fullmatch(r"(\d+)\.", enum)
    if m:
        return f"p{m.group(1)}"
    m = re.fullmatch(r"\(([a-z0-9]+)\)", enum, re.IGNORECASE)
    if m:
        return m.group(1).lower()
    return slugify(enum)


def parse_statute(source: str, framework: str | None = None) -> LawTree:
    """Parse a canonical statute document into a LawTree.

    ``framework`` overrides the slug inferred from the title line. Raises
    StatuteParseError (with a line number) on empty input, a missing or
    repeated title line, or a depth jump greater than one level.
    """
    root: LawNode | None = None
    stack: list[LawNode] = []  # stack[d] = open node at depth d
    fw: Framework | None = None

    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            continue

        if line.lstrip().startswith("#"):
            stripped = line.lstrip()
            hashes = len(stripped) - len(stripped.lstrip("#"))
            body = stripped[hashes:].strip()
            if hashes > 3:
                raise StatuteParseError(f"heading level {hashes} is too deep", lineno)
            if hashes == 1:
                if root is not None:
                    raise StatuteParseError("second framework title line", lineno)
                fw = get_framework(framework or body)
                root = LawNode(id=fw.slug, depth=0, enumerator=None, text=body)
                stack = [root]
                continue
            depth = hashes - 1
            enum, text = _split_heading(body)
        else:
            indent = len(line) - len(line.lstrip())
            if indent % 2:
                raise StatuteParseError(f"odd indentation of {indent} spaces", lineno)
            depth = HEADING_DEPTHS + 1 + indent // 2
            enum, text = _split_clause(line.strip())

        if root is None:
            raise StatuteParseError("content before the '#' framework title", lineno)
        if depth > len(stack):
            raise StatuteParseError(
                f"depth jump from {len(stack) - 1} to {depth}", lineno)

        parent = stack[depth - 1]
        ordinal = len(parent.children) + 1
        slug = _enum_slug(enum, depth, ordinal)
        node_id = f"{parent.id}/{slug}"
        if any(child.id == node_id for child in parent.children):
            node_id = f"{node_id}-{ordinal}"
        node = LawNode(id=node_id, depth=depth, enumerator=enum, text=text)
        parent.children.append(node)
        stack = stack[:depth] + [node]

    if root is None:
        raise StatuteParseError("empty document")

    node_count = sum(1 for _ in root.walk())
    return LawTree(
        framework=root.id,
        root=root,
        node_count=node_count,
        edge_count=node_count - 1,
    )


def serialize_statute(tree: LawTree) -> str:
    """Pretty-print a tree back to the canonical format (parse fixed point)."""
    lines = []
    for node in tree.root.walk():
        if node.depth == 0:
            lines.append(f"# {node.display}")
        elif node.depth <= HEADING_DEPTHS:
            lines.append(f"{'#' * (node.depth + 1)} {node.display}")
        else:
            indent = "  " * (node.depth - HEADING_DEPTHS - 1)
            lines.append(f"{indent}{node.display}")
    return "\n".join(lines) + "\n"


def enumerate_paths(tree: LawTree) -> list[StatutePath]:
    """All root-to-leaf paths in depth-first document order."""
    paths: list[StatutePath] = []

    def descend(node: LawNode, trail: tuple[str, ...]):
        trail = trail + (node.id,)
        if node.is_leaf():
            paths.append(StatutePath(node_ids=trail, framework=tree.framework))
        for child in node.children:
            descend(child, trail)

    descend(tree.root, ())
    return paths


def render_seed(path: StatutePath, tree: LawTree) -> Seed:
    """Concatenate the clauses along a path into the seed text.

    The framework title comes first; every deeper node gets a dash marker
    repeated once per depth level ("- ", "-- ", ...).
    """
    index = tree.nodes_by_id()
    lines = []
    for node_id in path.node_ids:
        node = index.get(node_id)
        if node is None:
            raise TreeIntegrityError(f"path node {node_id!r} is not in the tree")
        marker = "-" * node.depth + " " if node.depth else ""
        lines.append(f"{marker}{node.display}")
    leaf = path.node_ids[-1]
    return Seed(
        seed_id=leaf,
        framework=path.framework,
        path=path,
        rendered_text="\n".join(lines),
    )


def build_seeds(tree: LawTree) -> list[Seed]:
    return [render_seed(path, tree) for path in enumerate_paths(tree)]


def seed_to_json(seed: Seed) -> dict:
    return {
        "seed_id": seed.seed_id,
        "framework": seed.framework,
        "path": list(seed.path.node_ids),
        "rendered_text": seed.rendered_text,
    }


def seed_from_json(obj: dict) -> Seed:
    return Seed(
        seed_id=obj["seed_id"],
        framework=obj["framework"],
        path=StatutePath(node_ids=tuple(obj["path"]), framework=obj["framework"]),
        rendered_text=obj["rendered_text"],
    )


def write_seeds(seeds: list[Seed], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for seed in seeds:
            fh.write(json.dumps(seed_to_json(seed), ensure_ascii=False) + "\n")


def read_seeds(path: Path) -> list[Seed]:
    seeds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                seeds.append(seed_from_json(json.loads(line)))
    return seeds


_BUNDLED = {
    "eu-ai-act": "eu_ai_act.statute",
    "eu-ai-act-ch2": "eu_ai_act_ch2.statute",
    "gdpr": "gdpr.statute",
}


def bundled_statute_text(name: str) -> str:
    """Source text of a bundled statute fixture (eu-ai-act, eu-ai-act-ch2, gdpr)."""
    if name not in _BUNDLED:
        raise KeyError(f"no bundled statute named {name!r}")
    return resources.files("forge").joinpath("data", _BUNDLED[name]).read_text("utf-8")


def load_bundled_tree(name: str) -> LawTree:
    framework = "eu-ai-act" if name.startswith("eu-ai-act") else name
    return parse_statute(bundled_statute_text(name), framework=framework)
