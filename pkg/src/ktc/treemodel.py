"""Left-to-right taxonomy trees: sized wrap-box nodes, linkage styles, fusions.

Node widths come from a fixed size ladder. Fusion annotations draw a curly
brace over a contiguous sibling span and attach a description (optionally a
two-cell split box).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union

from .diagnostics import Diagnostic, error
from .palette import PaletteRegistry, resolve, split_color_name


class SizeTag(str, Enum):
    XS = "xs"
    S = "s"
    M = "m"
    L = "l"
    XL = "xl"
    XXL = "xxl"
    XXXL = "xxxl"


# Widths in em. The ladder is strictly increasing.
SIZE_WIDTHS_EM = {
    SizeTag.XS: 6.0,
    SizeTag.S: 7.5,
    SizeTag.M: 9.0,
    SizeTag.L: 11.0,
    SizeTag.XL: 13.0,
    SizeTag.XXL: 15.0,
    SizeTag.XXXL: 25.0,
}

DEFAULT_SIZE = SizeTag.M
DEFAULT_FILL = "ktgray-bg"

# Brace offset used when a fusion does not specify one (the showcase figure
# uses the default for one brace and 18pt for the other).
DEFAULT_CURL_OFFSET_PT = 10.0


def size_width(tag: SizeTag) -> float:
    """Ladder width in em for a size tag."""
    return SIZE_WIDTHS_EM[tag]


@dataclass(frozen=True)
class TreeNode:
    """One taxonomy node.

    label_lines and the optional sub_annotation are LaTeX passthrough text;
    citation keys are opaque and rendered by the backends. fill is a
    registry color name (e.g. "ktred-bg").
    """

    label_lines: tuple[str, ...]
    sub_annotation: str | None = None
    citation_keys: tuple[str, ...] = ()
    size: SizeTag = DEFAULT_SIZE
    fill: str = DEFAULT_FILL
    anchor: str | None = None
    children: tuple["TreeNode", ...] = ()


@dataclass(frozen=True)
class SplitBox:
    """Side-by-side two-cell annotation; both halves must be non-empty."""

    left: str
    right: str


@dataclass(frozen=True)
class FusionAnnotation:
    """Curly brace over siblings first..last (inclusive) plus attached content.

    offset_pt None means the default brace offset.
    """

    id: str
    first: str
    last: str
    content: Union[SplitBox, str]
    offset_pt: float | None = None


class LinkStyle(str, Enum):
    ARROW_UNIFIED = "arrow_unified"
    PLAIN = "plain"


@dataclass(frozen=True)
class Taxonomy:
    root: TreeNode
    style: LinkStyle = LinkStyle.ARROW_UNIFIED
    fusions: tuple[FusionAnnotation, ...] = ()
    scale: float = 1.0


def walk(node: TreeNode, depth: int = 0) -> Iterator[tuple[TreeNode, int]]:
    """Pre-order traversal yielding (node, depth)."""
    yield node, depth
    for child in node.children:
        yield from walk(child, depth + 1)


def node_count(t: Taxonomy) -> int:
    return sum(1 for _ in walk(t.root))


def _node_paths(node: TreeNode, path: str) -> Iterator[tuple[TreeNode, str]]:
    yield node, path
    for i, child in enumerate(node.children):
        yield from _node_paths(child, f"{path}.children[{i}]")


def validate_taxonomy(
    t: Taxonomy, registry: PaletteRegistry, path: str = "tree"
) -> list[Diagnostic]:
    """Anchor uniqueness, fill resolvability, and fusion span rules.

    Deterministic and independent of fusion list order.
    """
    diags: list[Diagnostic] = []
    anchors: dict[str, TreeNode] = {}
    parent_of: dict[int, TreeNode | None] = {id(t.root): None}

    for node, node_path in _node_paths(t.root, f"{path}.root"):
        for child in node.children:
            parent_of[id(child)] = node
        if node.anchor is not None:
            if node.anchor in anchors:
                diags.append(error(
                    "duplicate-anchor", node_path,
                    f"anchor {node.anchor!r} is already used by another node"))
            else:
                anchors[node.anchor] = node
        if not node.label_lines or not any(node.label_lines):
            diags.append(error("empty-label", node_path, "node needs at least one label line"))
        try:
            theme, role, mode = split_color_name(node.fill)
            resolve(registry, theme, role, mode)
        except (ValueError, KeyError, LookupError):
            diags.append(error(
                "unresolved-fill", node_path,
                f"fill {node.fill!r} does not resolve against the palette"))

    if t.scale <= 0:
        diags.append(error("bad-scale", path, f"scale must be positive, got {t.scale}"))

    seen_fusion_ids: set[str] = set()
    for i, fusion in enumerate(t.fusions):
        fpath = f"{path}.fusions[{i}]"
        if fusion.id in seen_fusion_ids or fusion.id in anchors:
            diags.append(error(
                "duplicate-anchor", fpath,
                f"fusion id {fusion.id!r} collides with another anchor or fusion"))
        seen_fusion_ids.add(fusion.id)
        if isinstance(fusion.content, SplitBox):
            if not fusion.content.left or not fusion.content.right:
                diags.append(error("empty-split-half", fpath, "both split box halves must be non-empty"))
        elif not fusion.content:
            diags.append(error("empty-fusion-content", fpath, "fusion content must be non-empty"))
        if fusion.offset_pt is not None and fusion.offset_pt <= 0:
            diags.append(error("bad-offset", fpath, "brace offset must be positive"))

        missing = [a for a in (fusion.first, fusion.last) if a not in anchors]
        if missing:
            for name in missing:
                diags.append(error("unknown-anchor", fpath, f"fusion references unknown anchor {name!r}"))
            continue
        first_node, last_node = anchors[fusion.first], anchors[fusion.last]
        parent = parent_of.get(id(first_node))
        if parent is None or parent is not parent_of.get(id(last_node)):
            diags.append(error(
                "fusion-not-siblings", fpath,
                f"anchors {fusion.first!r} and {fusion.last!r} are not siblings"))
            continue
        siblings = parent.children
        if _index_of(siblings, first_node) >= _index_of(siblings, last_node):
            diags.append(error(
                "fusion-span-order", fpath,
                f"anchor {fusion.first!r} must precede {fusion.last!r} in sibling order"))
    return diags


def _index_of(siblings: tuple[TreeNode, ...], target: TreeNode) -> int:
    # identity, not equality: sibling nodes may be equal-valued duplicates
    return next(i for i, c in enumerate(siblings) if c is target)


def fusion_span(t: Taxonomy, fusion: FusionAnnotation) -> tuple[TreeNode, ...]:
    """The covered siblings, first..last inclusive. Assumes a validated tree."""
    anchors = {n.anchor: n for n, _ in walk(t.root) if n.anchor is not None}
    first_node, last_node = anchors[fusion.first], anchors[fusion.last]
    parent = next(
        n for n, _ in walk(t.root) if any(c is first_node for c in n.children))
    i, j = _index_of(parent.children, first_node), _index_of(parent.children, last_node)
    return parent.children[i:j + 1]
