"""Deterministic LaTeX backend: preamble, box environments, columns, trees.

All generators are pure text transforms; identical inputs give byte-identical
output. Fragment conventions: two-space indent steps, verbatim code block
content is never re-indented, option key order inside [...] is fixed as
(title, theme).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import palette
from .boxmodel import (
    BoxKind,
    BoxSpec,
    CodeBlock,
    ColumnLayout,
    Itemize,
    NumberedAssignment,
    Paragraph,
)
from .diagnostics import ValidationFailedError
from .orcid import AuthorMeta, render_orcid_latex
from .palette import Mode, PaletteRegistry, Role
from .treemodel import (
    DEFAULT_CURL_OFFSET_PT,
    FusionAnnotation,
    LinkStyle,
    SIZE_WIDTHS_EM,
    SplitBox,
    Taxonomy,
    TreeNode,
)

PREAMBLE = "preamble"
BODY_SNIPPET = "body_snippet"

LINKED_PREAMBLE = "\\usepackage{ktcolor,ktbox,ktlrtree,ktorcid}\n"

COLUMN_CONTAINER_OPTIONS = (
    "enhanced, sharp corners=south, colframe=white, colback=white, "
    "boxrule=0pt, top=0pt, bottom=0pt, left=0pt, right=0pt"
)

_ENV_BY_KIND = {
    BoxKind.STANDARD: "ktbox",
    BoxKind.NUMBERED: "ktboxnumbered",
    BoxKind.WIDE: "ktboxwide",
}

_FOREST_STYLE = {
    LinkStyle.ARROW_UNIFIED: "ktlrtree-arrow-unified",
    LinkStyle.PLAIN: "ktlrtree-plain-unified",
}


class MissingNumberError(KeyError):
    """A numbered box was generated without an entry in the assignment."""


@dataclass(frozen=True)
class LatexFragment:
    text: str
    kind: str


def fmt_num(x: float) -> str:
    """Trailing-zero-free decimal (7.5 -> "7.5", 6.0 -> "6")."""
    return f"{x:g}"


def gen_preamble(registry: PaletteRegistry, link_packages: bool = False) -> LatexFragment:
    """Self-contained preamble: colors, box environments, wrap-box ladder,
    tree styles, fusion helpers, and author metadata commands.

    With link_packages, emit a thin \\usepackage line instead and let the
    installed style files supply the definitions.
    """
    if link_packages:
        return LatexFragment(text=LINKED_PREAMBLE, kind=PREAMBLE)

    colors = palette.emit_palette_definitions(registry)  # raises on a broken palette

    lines: list[str] = []
    out = lines.append
    out("% Generated preamble: semantic colors, highlight boxes, taxonomy trees,")
    out("% and author metadata helpers. Self-contained; do not edit by hand.")
    out("\\usepackage[table,dvipsnames]{xcolor}")
    out("\\usepackage[most]{tcolorbox}")
    out("\\usepackage{fancyvrb}")
    out("\\usepackage{forest}")
    out("\\usetikzlibrary{arrows.meta,decorations.pathreplacing}")
    out("\\usepackage{hyperref}")
    out("\\usepackage{orcidlink}")
    out("")
    out("% Semantic color palette.")
    lines.extend(colors.splitlines())
    out("")
    out("% theme=<name>[-dark] selects the palette roles for a box.")
    out("\\tcbset{theme/.code={\\pgfkeysalso{/tcb/kttheme/#1}}}")
    for name, theme in registry.themes.items():
        for mode in (Mode.LIGHT, Mode.DARK):
            if theme.colors(mode) is None:
                continue
            key = name if mode is Mode.LIGHT else f"{name}-dark"
            opts = [
                f"colback={palette.color_name(name, Role.BG, mode)}",
                f"colframe={palette.color_name(name, Role.BORDER, mode)}",
                f"coltitle={palette.color_name(name, Role.TITLE, mode)}",
                f"colbacktitle={palette.color_name(name, Role.TITLEBOX, mode)}",
            ]
            if mode is Mode.DARK:
                opts.append(f"coltext={palette.color_name(name, Role.TEXT, mode)}")
            out(f"\\tcbset{{kttheme/{key}/.style={{{', '.join(opts)}}}}}")
    out("")
    out("% Highlight box environments; the numbered variant shares one")
    out("% document-global counter.")
    out("\\newtcolorbox{ktbox}[1][]{enhanced, rounded corners, boxrule=0.8pt,"
        " fonttitle=\\bfseries, attach boxed title to top left={xshift=4mm, yshift=-2mm},"
        " boxed title style={rounded corners, boxrule=0.4pt}, theme=blue, #1}")
    out("\\newtcolorbox[auto counter]{ktboxnumbered}[2][]{enhanced, rounded corners,"
        " boxrule=0.8pt, fonttitle=\\bfseries,"
        " attach boxed title to top left={xshift=4mm, yshift=-2mm},"
        " boxed title style={rounded corners, boxrule=0.4pt}, theme=blue,"
        " title={\\thetcbcounter.~#2}, #1}")
    out("\\newtcolorbox{ktboxwide}[1][]{enhanced, breakable, sharp corners=north,"
        " boxrule=0.8pt, theme=blue, #1}")
    out("\\newenvironment{codeblock}"
        "{\\VerbatimEnvironment\\begin{Verbatim}[fontsize=\\small]}{\\end{Verbatim}}")
    out("")
    out("% Tree node wrap boxes: the fixed-width size ladder.")
    out("\\newcommand{\\ktwrapbox}[2]{\\parbox{#1}{\\centering\\strut #2\\strut}}")
    for tag, width_em in SIZE_WIDTHS_EM.items():
        out(f"\\newcommand{{\\ktwrapbox{tag.value}}}[1]{{\\ktwrapbox{{{fmt_num(width_em)}em}}{{#1}}}}")
    out("")
    out("% Left-to-right tree styles (arrow and plain linkages).")
    out("\\forestset{")
    out("  ktlrtree-base/.style={")
    out("    for tree={")
    out("      grow'=east,")
    out("      parent anchor=east,")
    out("      child anchor=west,")
    out("      anchor=west,")
    out("      l sep=9mm,")
    out("      s sep=2mm,")
    out("      edge={draw=ktgray-border, thick},")
    out("    },")
    out("  },")
    out("  ktlrtree-arrow-unified/.style={")
    out("    ktlrtree-base,")
    out("    for tree={edge={draw=ktgray-border, thick, -{Latex[length=2.5mm, width=1.8mm]}}},")
    out("  },")
    out("  ktlrtree-plain-unified/.style={ktlrtree-base},")
    out("}")
    out("")
    out("% Fusion helpers: curly brace over a sibling span plus an annotation box.")
    out(f"\\newcommand{{\\ktcurl}}[5][{fmt_num(DEFAULT_CURL_OFFSET_PT)}pt]{{%")
    out("  \\draw[decorate, decoration={brace, amplitude=6pt}, thick, draw=ktgray-border]")
    out("    ([xshift=#1]#3.north east) -- ([xshift=#1]#4.south east)")
    out("    node[midway, right=14pt, anchor=west, name=#2] {#5};%")
    out("}")
    out("\\newcommand{\\ktfusionboxsplit}[2]{%")
    out("  \\begin{tabular}{@{}p{14em}@{\\hspace{1em}}p{14em}@{}}#1 & #2\\end{tabular}%")
    out("}")
    out("")
    out("% Author metadata commands.")
    out("\\providecommand{\\orcidicon}[1]{\\,\\orcidlink{#1}}")
    out("\\providecommand{\\orcid}[1]{\\href{https://orcid.org/#1}{#1}\\,\\orcidlink{#1}}")
    return LatexFragment(text="\n".join(lines) + "\n", kind=PREAMBLE)


def _theme_key(spec: BoxSpec) -> str | None:
    """Option value for the theme key, or None when the key is omitted."""
    if spec.mode is Mode.DARK:
        return f"{spec.effective_theme}-dark"
    return spec.theme  # None when defaulted


def _box_lines(spec: BoxSpec, numbers: NumberedAssignment | None, indent: int) -> list[str]:
    env = _ENV_BY_KIND[spec.kind]
    if spec.kind is BoxKind.NUMBERED:
        if numbers is None or numbers.get(spec) is None:
            raise MissingNumberError(f"numbered box {spec.title!r} missing from assignment")

    opts: list[str] = []
    if spec.kind is BoxKind.STANDARD and spec.title is not None:
        opts.append(f"title={{{spec.title}}}")
    theme_key = _theme_key(spec)
    if theme_key is not None:
        opts.append(f"theme={theme_key}")

    pad = " " * indent
    begin = f"{pad}\\begin{{{env}}}"
    if opts:
        begin += f"[{', '.join(opts)}]"
    if spec.kind is BoxKind.NUMBERED:
        begin += f"{{{spec.title}}}"

    lines = [begin]
    for block in spec.body:
        lines.extend(_block_lines(block, numbers, indent + 2))
    lines.append(f"{pad}\\end{{{env}}}")
    return lines


def _block_lines(block, numbers: NumberedAssignment | None, indent: int) -> list[str]:
    pad = " " * indent
    if isinstance(block, Paragraph):
        return [f"{pad}{line}" if line else "" for line in block.text.splitlines() or [""]]
    if isinstance(block, Itemize):
        lines = [f"{pad}\\begin{{itemize}}"]
        lines.extend(f"{pad}  \\item {item}" for item in block.items)
        lines.append(f"{pad}\\end{{itemize}}")
        return lines
    if isinstance(block, CodeBlock):
        # verbatim content keeps its own column positions
        return [f"{pad}\\begin{{codeblock}}", *block.lines, f"{pad}\\end{{codeblock}}"]
    if isinstance(block, ColumnLayout):
        return _columns_lines(block, numbers, indent)
    raise TypeError(f"unknown body block: {block!r}")


def _columns_lines(layout: ColumnLayout, numbers: NumberedAssignment | None, indent: int) -> list[str]:
    pad = " " * indent
    width = f"{layout.width_fraction:.2f}"
    lines = [f"{pad}\\begin{{tcolorbox}}[{COLUMN_CONTAINER_OPTIONS}]"]
    last = len(layout.columns) - 1
    for i, box in enumerate(layout.columns):
        lines.append(f"{pad}  \\begin{{minipage}}[t]{{{width}\\textwidth}}")
        lines.extend(_box_lines(box, numbers, indent + 4))
        closing = f"{pad}  \\end{{minipage}}"
        lines.append(closing + ("\\hfill" if i != last else ""))
    lines.append(f"{pad}\\end{{tcolorbox}}")
    return lines


def gen_box(spec: BoxSpec, numbers: NumberedAssignment | None = None) -> LatexFragment:
    """Environment code for one box; numbered boxes must be in the assignment."""
    return LatexFragment(text="\n".join(_box_lines(spec, numbers, 0)) + "\n", kind=BODY_SNIPPET)


def gen_columns(layout: ColumnLayout, numbers: NumberedAssignment | None = None) -> LatexFragment:
    """Zero-padding container with one top-aligned minipage per column."""
    return LatexFragment(text="\n".join(_columns_lines(layout, numbers, 0)) + "\n", kind=BODY_SNIPPET)


def gen_author(author: AuthorMeta) -> LatexFragment:
    return LatexFragment(text=f"\\author{{{render_orcid_latex(author)}}}\n", kind=BODY_SNIPPET)


def _node_label(node: TreeNode) -> str:
    lines = list(node.label_lines)
    if node.citation_keys:
        lines[-1] += f"~\\cite{{{','.join(node.citation_keys)}}}"
    if node.sub_annotation is not None:
        lines.append(f"{{\\color{{ktorange-bg-dark}}\\scriptsize({node.sub_annotation})}}")
    return "\\\\".join(lines)


def _fusion_lines(fusion: FusionAnnotation, indent: int) -> list[str]:
    pad = " " * indent
    offset = "" if fusion.offset_pt is None else f"[{fmt_num(fusion.offset_pt)}pt]"
    head = f"{pad}\\ktcurl{offset}{{{fusion.id}}}{{{fusion.first}}}{{{fusion.last}}}{{"
    if isinstance(fusion.content, SplitBox):
        return [
            head,
            f"{pad}  \\ktfusionboxsplit",
            f"{pad}    {{{fusion.content.left}}}",
            f"{pad}    {{{fusion.content.right}}}",
            f"{pad}}}",
        ]
    return [f"{head}{fusion.content}}}"]


def _tree_node_lines(node: TreeNode, fusions_by_last: dict[str, list[FusionAnnotation]],
                     indent: int) -> list[str]:
    pad = " " * indent
    head = f"{pad}[\\ktwrapbox{node.size.value}{{{_node_label(node)}}}, fill={node.fill}"
    if node.anchor is not None:
        head += f", name={node.anchor}"
    attached = fusions_by_last.get(node.anchor or "", [])

    if not attached and not node.children:
        return [head + "]"]

    lines = [head + ("," if attached else "")]
    if attached:
        lines.append(f"{pad}  tikz+={{")
        for fusion in attached:
            lines.extend(_fusion_lines(fusion, indent + 4))
        lines.append(f"{pad}  }}")
    for child in node.children:
        lines.extend(_tree_node_lines(child, fusions_by_last, indent + 2))
    lines.append(f"{pad}]")
    return lines


def gen_tree(t: Taxonomy, registry: PaletteRegistry) -> LatexFragment:
    """Scaled forest block; fusions ride in the last spanned node's tikz layer."""
    from .treemodel import validate_taxonomy  # local import avoids cycle at module load

    diags = validate_taxonomy(t, registry)
    if diags:
        raise ValidationFailedError(diags)

    fusions_by_last: dict[str, list[FusionAnnotation]] = {}
    for fusion in t.fusions:
        fusions_by_last.setdefault(fusion.last, []).append(fusion)

    lines = [f"\\scalebox{{{fmt_num(t.scale)}}}{{"]
    lines.append(f"  \\begin{{forest}} {_FOREST_STYLE[t.style]}")
    lines.extend(_tree_node_lines(t.root, fusions_by_last, 4))
    lines.append("  \\end{forest}")
    lines.append("}")
    return LatexFragment(text="\n".join(lines) + "\n", kind=BODY_SNIPPET)


_CODEBLOCK_SPAN = re.compile(r"\\begin\{codeblock\}.*?\\end\{codeblock\}", re.DOTALL)


def check_balance(text: str) -> list[str]:
    """Token-scan a fragment for unbalanced braces or environment pairs.

    Codeblock content is verbatim and skipped; escaped characters and
    %-comments are ignored.
    """
    problems: list[str] = []
    text = _CODEBLOCK_SPAN.sub("\\\\begin{codeblock}\\\\end{codeblock}", text)
    depth = 0
    env_stack: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            j = i + 1
            if j < n and text[j].isalpha():
                while j < n and text[j].isalpha():
                    j += 1
                command = text[i + 1:j]
                if command in ("begin", "end"):
                    m = re.match(r"\s*\{([^}]*)\}", text[j:])
                    if m:
                        name = m.group(1)
                        if command == "begin":
                            env_stack.append(name)
                        elif not env_stack:
                            problems.append(f"\\end{{{name}}} without matching begin")
                        elif env_stack[-1] != name:
                            problems.append(
                                f"\\end{{{name}}} closes \\begin{{{env_stack[-1]}}}")
                            env_stack.pop()
                        else:
                            env_stack.pop()
                        j += m.end()
                i = j
            else:
                i = j + 1  # escaped single character, brace included
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                problems.append("closing brace without opener")
                depth = 0
        i += 1
    if depth != 0:
        problems.append(f"{depth} unclosed brace(s)")
    for name in env_stack:
        problems.append(f"\\begin{{{name}}} never closed")
    return problems
