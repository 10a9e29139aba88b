"""Standalone SVG backend: explicit layered left-to-right layout plus rendering.

The layout stacks leaves top-to-bottom and vertically centers every parent on
its children. When a node is taller than its children's span and would
collide with an earlier subtree at the same depth, its whole subtree shifts
down, so v_gap is a minimum gap and overlap-freedom is guaranteed while
parent centering stays exact. Columns are left-aligned: x depends only on
depth and the widest node of each shallower depth.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .diagnostics import Diagnostic, ValidationFailedError, warn
from .palette import Mode, PaletteRegistry, Role, resolve, resolve_name, split_color_name
from .treemodel import (
    DEFAULT_CURL_OFFSET_PT,
    LinkStyle,
    SplitBox,
    Taxonomy,
    TreeNode,
    fusion_span,
    size_width,
    validate_taxonomy,
    walk,
)


@dataclass(frozen=True)
class LayoutConfig:
    """Pixel calibration for the SVG backend; all lengths strictly positive."""

    em_px: float = 12.0
    h_gap: float = 36.0
    v_gap: float = 10.0
    corner_radius: float = 6.0
    font_px_by_depth: tuple[float, ...] = (12.0, 11.0, 10.0)
    sub_font_scale: float = 0.8
    line_height_factor: float = 1.4
    padding_px: float = 6.0
    margin_px: float = 10.0
    char_width_factor: float = 0.5
    brace_px: float = 8.0
    split_half_em: float = 14.0
    split_gap_px: float = 10.0

    def __post_init__(self):
        for name in ("em_px", "h_gap", "v_gap", "corner_radius", "sub_font_scale",
                     "line_height_factor", "padding_px", "margin_px",
                     "char_width_factor", "brace_px", "split_half_em", "split_gap_px"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.font_px_by_depth or any(f <= 0 for f in self.font_px_by_depth):
            raise ValueError("font_px_by_depth must be non-empty and positive")

    def font_px(self, depth: int) -> float:
        return self.font_px_by_depth[min(depth, len(self.font_px_by_depth) - 1)]

    def line_height(self, depth: int) -> float:
        return self.font_px(depth) * self.line_height_factor

    @property
    def px_per_pt(self) -> float:
        # pt-denominated brace offsets scale with the em calibration
        return self.em_px / 12.0


@dataclass(frozen=True)
class PositionedNode:
    node: TreeNode
    depth: int
    x: float
    y: float
    width: float
    height: float

    @property
    def center_y(self) -> float:
        return self.y + self.height / 2.0

    @property
    def right(self) -> float:
        return self.x + self.width


@dataclass
class _Entry:
    node: TreeNode
    depth: int
    width: float
    height: float
    y: float = 0.0
    x: float = 0.0
    children: list["_Entry"] = field(default_factory=list)


_BREAK_AFTER = ("-", ":", ",")


def _fragments(word: str) -> list[str]:
    """Unbreakable pieces of a word; breaks are allowed after - : , only."""
    pieces: list[str] = []
    current = ""
    for ch in word:
        current += ch
        if ch in _BREAK_AFTER:
            pieces.append(current)
            current = ""
    if current:
        pieces.append(current)
    return pieces or [word]


def wrap_text(text: str, max_chars: int) -> list[str]:
    """Greedy soft wrap at spaces and intra-word break characters; fragments
    that still exceed the limit hard-break at the character boundary."""
    max_chars = max(1, max_chars)
    lines: list[str] = []
    current = ""
    for word in text.split():
        for j, piece in enumerate(_fragments(word)):
            sep = " " if current and j == 0 else ""
            if current and len(current) + len(sep) + len(piece) > max_chars:
                lines.append(current)
                current = piece
            else:
                current = current + sep + piece
            while len(current) > max_chars:
                lines.append(current[:max_chars])
                current = current[max_chars:]
    if current:
        lines.append(current)
    return lines or [""]


def _max_chars(cfg: LayoutConfig, node: TreeNode, font_px: float) -> int:
    available = size_width(node.size) * cfg.em_px - 2 * cfg.padding_px
    return max(1, int(available / (font_px * cfg.char_width_factor)))


def _node_display(node: TreeNode, depth: int, cfg: LayoutConfig) -> list[tuple[str, str]]:
    """Rendered text slots as (text, style) with style in label|cite|sub.

    Label and sub lines wrap to the box width; the citation key list gets
    its own small-font line(s).
    """
    font = cfg.font_px(depth)
    sub_font = font * cfg.sub_font_scale
    slots: list[tuple[str, str]] = []
    for line in node.label_lines:
        for wrapped in wrap_text(latex_to_plain(line), _max_chars(cfg, node, font)):
            slots.append((wrapped, "label"))
    if node.citation_keys:
        cite = f"[{', '.join(node.citation_keys)}]"
        for wrapped in wrap_text(cite, _max_chars(cfg, node, sub_font)):
            slots.append((wrapped, "cite"))
    if node.sub_annotation is not None:
        sub = f"({latex_to_plain(node.sub_annotation)})"
        for wrapped in wrap_text(sub, _max_chars(cfg, node, sub_font)):
            slots.append((wrapped, "sub"))
    return slots


def layout(t: Taxonomy, cfg: LayoutConfig | None = None) -> list[PositionedNode]:
    """Positions for every node, pre-order. A lone root sits at (0, 0)."""
    cfg = cfg or LayoutConfig()
    entries: list[_Entry] = []
    next_free: dict[int, float] = {}

    def place(node: TreeNode, depth: int) -> tuple[_Entry, int]:
        entry = _Entry(
            node=node,
            depth=depth,
            width=size_width(node.size) * cfg.em_px,
            height=(len(_node_display(node, depth, cfg)) * cfg.line_height(depth)
                    + 2 * cfg.padding_px),
        )
        index = len(entries)
        entries.append(entry)
        deepest = depth
        if not node.children:
            entry.y = next_free.get(depth, 0.0)
        else:
            for child in node.children:
                child_entry, child_deepest = place(child, depth + 1)
                entry.children.append(child_entry)
                deepest = max(deepest, child_deepest)
            center = sum(c.y + c.height / 2 for c in entry.children) / len(entry.children)
            y = center - entry.height / 2
            free = next_free.get(depth, 0.0)
            if y < free:
                # too tall for its children's span: push the whole subtree down
                delta = free - y
                for sub in entries[index + 1:]:
                    sub.y += delta
                for d in range(depth + 1, deepest + 1):
                    next_free[d] = next_free.get(d, 0.0) + delta
                y += delta
            entry.y = y
        next_free[depth] = entry.y + entry.height + cfg.v_gap
        return entry, deepest

    place(t.root, 0)

    max_width: dict[int, float] = {}
    for e in entries:
        max_width[e.depth] = max(max_width.get(e.depth, 0.0), e.width)
    x_at_depth: dict[int, float] = {}
    x = 0.0
    for depth in range(max(max_width) + 1):
        x_at_depth[depth] = x
        x += max_width[depth] + cfg.h_gap
    for e in entries:
        e.x = x_at_depth[e.depth]

    return [PositionedNode(e.node, e.depth, e.x, e.y, e.width, e.height) for e in entries]


_TEX_ARG_COMMANDS = re.compile(r"\\(?:textbf|texttt|textit|emph|mbox)\{([^{}]*)\}")
_TEX_CITE = re.compile(r"\\cite\{([^{}]*)\}")
_TEX_REF = re.compile(r"\\ref\{([^{}]*)\}")
_TEX_COLOR = re.compile(r"\\color\{[^{}]*\}")
_TEX_SWITCH = re.compile(
    r"\\(?:scriptsize|footnotesize|small|tiny|normalsize|large|Large|bfseries|itshape|ttfamily)\b")
_TEX_COMMAND = re.compile(r"\\[a-zA-Z]+\s*")
_TEX_CHAR = re.compile(r"\\(.)")


def latex_to_plain(text: str) -> str:
    """Best-effort plain text for labels that carry LaTeX markup."""
    for _ in range(3):  # peel shallow nesting
        text, n = _TEX_ARG_COMMANDS.subn(r"\1", text)
        if not n:
            break
    text = _TEX_CITE.sub(r"[\1]", text)
    text = _TEX_REF.sub(r"\1", text)
    text = _TEX_COLOR.sub("", text)
    text = _TEX_SWITCH.sub("", text)
    text = _TEX_COMMAND.sub("", text)
    text = _TEX_CHAR.sub(r"\1", text)
    text = text.replace("{", "").replace("}", "")
    text = text.replace("~", " ").replace("--", "\u2013")
    return text.strip()


def text_overflow_warnings(
    t: Taxonomy, cfg: LayoutConfig | None = None, path: str = "tree"
) -> list[Diagnostic]:
    """Warn where an unbreakable label fragment is estimated wider than its
    wrap box; such fragments get hard-broken mid-token when rendered.
    Citation key lines are identifier data and always hard-wrap silently.
    """
    cfg = cfg or LayoutConfig()
    diags: list[Diagnostic] = []
    for node, depth in walk(t.root):
        available = size_width(node.size) * cfg.em_px - 2 * cfg.padding_px
        checked = [(line, cfg.font_px(depth)) for line in node.label_lines]
        if node.sub_annotation is not None:
            checked.append((node.sub_annotation, cfg.font_px(depth) * cfg.sub_font_scale))
        for raw, font in checked:
            plain = latex_to_plain(raw)
            widest = max((len(f) for w in plain.split() for f in _fragments(w)), default=0)
            estimated = widest * font * cfg.char_width_factor
            if estimated > available:
                diags.append(warn(
                    "text-overflow", path,
                    f"label {plain[:40]!r} has a fragment about {estimated:.0f}px wide "
                    f"but the {node.size.value} box offers {available:.0f}px"))
                break
    return diags


def _fmt(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return s if s != "-0" else "0"


def _hex_of(registry: PaletteRegistry, name: str) -> str:
    return f"#{resolve_name(registry, name).hex}"


def _stroke_for_fill(registry: PaletteRegistry, fill_name: str) -> str:
    theme, _, mode = split_color_name(fill_name)
    return f"#{resolve(registry, theme, Role.BORDER, mode).hex}"


def render_svg(
    t: Taxonomy, registry: PaletteRegistry, cfg: LayoutConfig | None = None
) -> str:
    """Standalone SVG for a validated taxonomy.

    One rounded rect per node (fill = its palette color, stroke = that
    theme's border), straight parent-to-child edges (arrowheads unless the
    link style is plain), a cubic-Bezier double-curve brace per fusion, and
    two adjacent rectangles per split box. Deterministic byte output.
    """
    cfg = cfg or LayoutConfig()
    diags = validate_taxonomy(t, registry)
    if diags:
        raise ValidationFailedError(diags)

    positioned = layout(t, cfg)
    by_node = {id(p.node): p for p in positioned}

    edge_color = f"#{resolve(registry, 'gray', Role.BORDER, Mode.LIGHT).hex}"
    split_fill = f"#{resolve(registry, 'gray', Role.TITLEBOX, Mode.LIGHT).hex}"
    text_color = f"#{resolve(registry, 'gray', Role.TITLE, Mode.LIGHT).hex}"
    try:
        sub_color = f"#{resolve(registry, 'orange', Role.BG, Mode.DARK).hex}"
    except (KeyError, LookupError):
        sub_color = edge_color

    edges: list[str] = []
    node_shapes: list[str] = []
    texts: list[str] = []
    overlays: list[str] = []
    max_x = max(p.right for p in positioned)
    max_y = max(p.y + p.height for p in positioned)

    arrow = t.style is LinkStyle.ARROW_UNIFIED
    marker_ref = ' marker-end="url(#kt-arrow)"' if arrow else ""
    for p in positioned:
        for child in p.node.children:
            c = by_node[id(child)]
            edges.append(
                f'<path class="edge" d="M {_fmt(p.right)},{_fmt(p.center_y)} '
                f'L {_fmt(c.x)},{_fmt(c.center_y)}" stroke="{edge_color}" '
                f'stroke-width="1.5" fill="none"{marker_ref}/>')

    for p in positioned:
        fill_hex = _hex_of(registry, p.node.fill)
        stroke_hex = _stroke_for_fill(registry, p.node.fill)
        node_shapes.append(
            f'<rect class="node" x="{_fmt(p.x)}" y="{_fmt(p.y)}" '
            f'width="{_fmt(p.width)}" height="{_fmt(p.height)}" '
            f'rx="{_fmt(cfg.corner_radius)}" fill="{fill_hex}" '
            f'stroke="{stroke_hex}" stroke-width="1"/>')
        cx = p.x + p.width / 2
        line_h = cfg.line_height(p.depth)
        font = cfg.font_px(p.depth)
        for i, (line, style) in enumerate(_node_display(p.node, p.depth, cfg)):
            ly = p.y + cfg.padding_px + (i + 0.5) * line_h
            size = font if style == "label" else font * cfg.sub_font_scale
            color = sub_color if style == "sub" else text_color
            texts.append(
                f'<text class="{style}" x="{_fmt(cx)}" y="{_fmt(ly)}" '
                f'text-anchor="middle" dominant-baseline="middle" '
                f'font-family="Helvetica, Arial, sans-serif" '
                f'font-size="{_fmt(size)}" fill="{color}">{escape(line)}</text>')

    sub_font = cfg.font_px_by_depth[-1]
    sub_line_h = sub_font * cfg.line_height_factor
    for fusion in t.fusions:
        span = [by_node[id(n)] for n in fusion_span(t, fusion)]
        offset_pt = fusion.offset_pt if fusion.offset_pt is not None else DEFAULT_CURL_OFFSET_PT
        bx = max(p.right for p in span) + offset_pt * cfg.px_per_pt
        y0 = min(p.y for p in span)
        y1 = max(p.y + p.height for p in span)
        ym = (y0 + y1) / 2
        amp = cfg.brace_px
        # double cubic curve: out to the middle tip and back
        overlays.append(
            f'<path class="brace" d="M {_fmt(bx)},{_fmt(y0)} '
            f'C {_fmt(bx + amp)},{_fmt(y0)} {_fmt(bx)},{_fmt(ym)} {_fmt(bx + amp)},{_fmt(ym)} '
            f'C {_fmt(bx)},{_fmt(ym)} {_fmt(bx + amp)},{_fmt(y1)} {_fmt(bx)},{_fmt(y1)}" '
            f'stroke="{edge_color}" stroke-width="1.5" fill="none"/>')

        if isinstance(fusion.content, SplitBox):
            halves = [fusion.content.left, fusion.content.right]
        else:
            halves = [fusion.content]
        half_w = cfg.split_half_em * cfg.em_px
        half_chars = max(1, int((half_w - 2 * cfg.padding_px)
                                / (sub_font * cfg.char_width_factor)))
        half_lines = [
            [wrapped
             for part in half.split("\\\\")
             for wrapped in wrap_text(latex_to_plain(part), half_chars)]
            for half in halves
        ]
        box_h = max(len(ls) for ls in half_lines) * sub_line_h + 2 * cfg.padding_px
        sx = bx + amp + cfg.split_gap_px
        sy = ym - box_h / 2
        for hi, lines in enumerate(half_lines):
            hx = sx + hi * half_w
            overlays.append(
                f'<rect class="split" x="{_fmt(hx)}" y="{_fmt(sy)}" '
                f'width="{_fmt(half_w)}" height="{_fmt(box_h)}" '
                f'fill="{split_fill}" stroke="{edge_color}" stroke-width="1"/>')
            for i, line in enumerate(lines):
                ly = sy + cfg.padding_px + (i + 0.5) * sub_line_h
                overlays.append(
                    f'<text class="split-text" x="{_fmt(hx + half_w / 2)}" y="{_fmt(ly)}" '
                    f'text-anchor="middle" dominant-baseline="middle" '
                    f'font-family="Helvetica, Arial, sans-serif" '
                    f'font-size="{_fmt(sub_font)}" fill="{text_color}">{escape(line)}</text>')
        max_x = max(max_x, sx + len(halves) * half_w)
        max_y = max(max_y, sy + box_h)

    m = cfg.margin_px
    total_w = max_x * t.scale + 2 * m
    total_h = max_y * t.scale + 2 * m

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(total_w)}" '
        f'height="{_fmt(total_h)}" viewBox="0 0 {_fmt(total_w)} {_fmt(total_h)}">',
    ]
    if arrow:
        parts.append(
            '<defs><marker id="kt-arrow" viewBox="0 0 10 10" refX="9" refY="5" '
            'markerWidth="7" markerHeight="7" orient="auto">'
            f'<path d="M 0,0 L 10,5 L 0,10 z" fill="{edge_color}"/></marker></defs>')
    parts.append(f'<g transform="translate({_fmt(m)} {_fmt(m)}) scale({_fmt(t.scale)})">')
    parts.extend(edges)
    parts.extend(node_shapes)
    parts.extend(texts)
    parts.extend(overlays)
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
