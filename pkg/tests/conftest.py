from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from forge.statutes import LawNode, LawTree, parse_statute

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def tiny_tree() -> LawTree:
    source = """\
# EU Artificial Intelligence Act
## Chapter I: General Provisions
### Article 1: Subject Matter
### Article 2: Scope
## Chapter II: Prohibited AI Practices
### Article 5: Prohibited AI Practices
1. The following AI practices shall be prohibited:
  (a) first point
  (b) second point
"""
    return parse_statute(source, framework="eu-ai-act")


def make_random_tree(rng: random.Random, max_children: int = 3,
                     max_depth: int = 4) -> LawTree:
    """Random statute tree built directly from nodes (bypasses the parser so
    the property tests are independent of the text format)."""
    counter = [0]

    def grow(parent: LawNode, depth: int):
        if depth >= max_depth:
            return
        n_children = rng.randint(0, max_children) if depth else rng.randint(1, max_children)
        for i in range(n_children):
            counter[0] += 1
            child = LawNode(
                id=f"{parent.id}/n{counter[0]}",
                depth=depth + 1,
                enumerator=f"{i + 1}.",
                text=f"clause {counter[0]}",
            )
            parent.children.append(child)
            grow(child, depth + 1)

    root = LawNode(id="custom-fw", depth=0, enumerator=None, text="Custom Framework")
    grow(root, 0)
    node_count = sum(1 for _ in root.walk())
    return LawTree(framework="custom-fw", root=root,
                   node_count=node_count, edge_count=node_count - 1)
