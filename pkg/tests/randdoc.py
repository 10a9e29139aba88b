"""Seeded random generators for valid documents and taxonomies."""
import random

from ktc.boxmodel import (
    BoxKind,
    BoxSpec,
    CodeBlock,
    ColumnLayout,
    Itemize,
    Paragraph,
    make_box,
    make_columns,
)
from ktc.frontend import DocumentIR
from ktc.orcid import AuthorMeta, parse_orcid
from ktc.palette import Mode, Role, color_name
from ktc.treemodel import (
    FusionAnnotation,
    LinkStyle,
    SizeTag,
    SplitBox,
    Taxonomy,
    TreeNode,
)

WORDS = (
    "feature module insight metric latency encoder decoder pipeline cache "
    "layout palette anchor branch leaf survey counter column emphasis "
    "theme contrast corpus fixture manifest digest"
).split()

LIGHT_THEMES = ("gray", "blue", "green", "yellow", "orange", "red",
                "cyan", "purple", "magenta", "white")
DUAL_THEMES = ("gray", "blue", "green", "yellow", "orange", "red")

VALID_ORCIDS = ("0000-0002-8126-3528", "0000-0002-3576-0275")


def words(rng: random.Random, lo=1, hi=5) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def random_body(rng: random.Random, allow_columns: bool, doc_mode: Mode,
                no_numbered: bool) -> tuple:
    blocks = []
    for _ in range(rng.randint(0, 3)):
        roll = rng.random()
        if roll < 0.6:
            blocks.append(Paragraph(words(rng, 2, 8)))
        elif roll < 0.8:
            blocks.append(Itemize(tuple(words(rng, 1, 4) for _ in range(rng.randint(1, 3)))))
        elif roll < 0.95 or not allow_columns:
            blocks.append(CodeBlock(tuple(words(rng, 1, 6) for _ in range(rng.randint(1, 3)))))
        else:
            blocks.append(random_columns(rng, doc_mode, no_numbered=no_numbered))
    return tuple(blocks)


def random_box(rng: random.Random, doc_mode: Mode, kind: BoxKind | None = None,
               allow_columns: bool = False, no_numbered: bool = False) -> BoxSpec:
    if kind is None:
        pool = (BoxKind.STANDARD, BoxKind.STANDARD, BoxKind.WIDE)
        if not no_numbered:
            pool += (BoxKind.NUMBERED,)
        kind = rng.choice(pool)
    if rng.random() < 0.2:
        mode = rng.choice((Mode.LIGHT, Mode.DARK))
    else:
        mode = doc_mode
    theme_pool = DUAL_THEMES if mode is Mode.DARK else LIGHT_THEMES
    theme = rng.choice((None,) + theme_pool)
    if theme is None and mode is Mode.DARK:
        theme = rng.choice(DUAL_THEMES)
    title = None
    if kind is BoxKind.NUMBERED:
        title = words(rng, 1, 3).title()
    elif kind is BoxKind.STANDARD and rng.random() < 0.7:
        title = words(rng, 1, 3).title()
    return make_box(kind, title=title, theme=theme, mode=mode,
                    body=random_body(rng, allow_columns, doc_mode, no_numbered))


def random_columns(rng: random.Random, doc_mode: Mode,
                   no_numbered: bool = False) -> ColumnLayout:
    n = rng.randint(2, 4)
    boxes = [random_box(rng, doc_mode, no_numbered=no_numbered) for _ in range(n)]
    return make_columns(boxes, n)


def random_node(rng: random.Random, depth: int, max_depth: int, max_fanout: int,
                counter: list[int]) -> TreeNode:
    n_children = 0
    if depth < max_depth:
        n_children = rng.randint(0, max_fanout)
        if depth == 0 and n_children == 0:
            n_children = rng.randint(1, max_fanout)
    children = tuple(
        random_node(rng, depth + 1, max_depth, max_fanout, counter)
        for _ in range(n_children))
    theme = rng.choice(LIGHT_THEMES)
    role = rng.choice((Role.BG, Role.TITLEBOX))
    counter[0] += 1
    return TreeNode(
        label_lines=tuple(words(rng, 1, 3) for _ in range(rng.randint(1, 3))),
        sub_annotation=words(rng, 1, 2) if rng.random() < 0.3 else None,
        citation_keys=tuple(f"key-{rng.randint(1000, 9999)}"
                            for _ in range(rng.randint(0, 2))) if rng.random() < 0.3 else (),
        size=rng.choice(tuple(SizeTag)),
        fill=color_name(theme, role, Mode.LIGHT),
        anchor=f"n{counter[0]}" if rng.random() < 0.5 else None,
        children=children,
    )


def random_taxonomy(rng: random.Random, max_depth: int = 5, max_fanout: int = 4) -> Taxonomy:
    counter = [0]
    root = random_node(rng, 0, max_depth, max_fanout, counter)
    fusions = []
    anchored = [c for c in root.children if c.anchor]
    if len(anchored) >= 2 and rng.random() < 0.5:
        picks = sorted(rng.sample(range(len(anchored)), 2))
        first, last = anchored[picks[0]], anchored[picks[1]]
        if rng.random() < 0.5:
            content = SplitBox(left=words(rng, 2, 5), right=words(rng, 2, 5))
        else:
            content = words(rng, 2, 6)
        fusions.append(FusionAnnotation(
            id="f1", first=first.anchor, last=last.anchor, content=content,
            offset_pt=rng.choice((None, 14.0, 18.0))))
    return Taxonomy(
        root=root,
        style=rng.choice((LinkStyle.ARROW_UNIFIED, LinkStyle.PLAIN)),
        fusions=tuple(fusions),
        scale=rng.choice((1.0, 0.7, 0.45, 1.25)),
    )


def random_document(rng: random.Random, max_items: int = 8,
                    numbered_boxes: int | None = None) -> DocumentIR:
    """A valid document. With numbered_boxes set, exactly that many numbered
    boxes appear (some top-level, some inside column layouts)."""
    doc_mode = Mode.DARK if rng.random() < 0.2 else Mode.LIGHT
    no_numbered = numbered_boxes is not None
    items = []
    for _ in range(rng.randint(0, max_items)):
        roll = rng.random()
        if roll < 0.5:
            items.append(random_box(rng, doc_mode, allow_columns=True,
                                    no_numbered=no_numbered))
        elif roll < 0.7:
            items.append(random_columns(rng, doc_mode, no_numbered=no_numbered))
        elif roll < 0.85:
            items.append(random_taxonomy(rng, max_depth=3, max_fanout=3))
        else:
            items.append(AuthorMeta(
                display_name=words(rng, 2, 3).title(),
                orcid=parse_orcid(rng.choice(VALID_ORCIDS)) if rng.random() < 0.7 else None,
                orcid_style=rng.choice(("icon", "full")),
            ))
    if numbered_boxes is not None:
        for _ in range(numbered_boxes):
            box = random_box(rng, doc_mode, kind=BoxKind.NUMBERED)
            if rng.random() < 0.3:
                partner = random_box(rng, doc_mode,
                                     kind=rng.choice((BoxKind.STANDARD, BoxKind.WIDE)),
                                     no_numbered=True)
                pair = [box, partner] if rng.random() < 0.5 else [partner, box]
                items.insert(rng.randint(0, len(items)), make_columns(pair, 2))
            else:
                items.insert(rng.randint(0, len(items)), box)
    return DocumentIR(items=tuple(items), mode=doc_mode)
