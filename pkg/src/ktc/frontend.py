"""Document front end: JSON parsing, whole-document validation, compilation.

The input format is a JSON document (see SCHEMA.md). Parsing reports
missing/mistyped fields as errors and unknown fields as warnings (forward
compatibility); `check` re-validates a built IR and is pure; `compile`
stages all output files and moves them into place only when everything
succeeded.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from . import latexgen, palette, svgrender
from .boxmodel import (
    BoxKind,
    BoxSpec,
    CodeBlock,
    ColumnLayout,
    CountMismatchError,
    Itemize,
    NumberedAssignment,
    NumberedWithoutTitleError,
    Paragraph,
    WideWithTitleError,
    assign_numbers,
    column_width,
    make_box,
    make_columns,
)
from .diagnostics import Diagnostic, ValidationFailedError, error, has_errors, warn
from .orcid import (
    RENDER_STYLES,
    AuthorMeta,
    OrcidChecksumError,
    OrcidFormatError,
    checksum_char,
    parse_orcid,
)
from .palette import Mode, PaletteRegistry, Role, builtin_registry
from .treemodel import (
    FusionAnnotation,
    LinkStyle,
    SizeTag,
    SplitBox,
    Taxonomy,
    TreeNode,
    validate_taxonomy,
)

Item = Union[BoxSpec, ColumnLayout, Taxonomy, AuthorMeta]

TARGETS = ("latex", "svg", "both")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INTERNAL = 2


class DocumentSyntaxError(ValueError):
    """Malformed JSON, with position info."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SchemaError(ValueError):
    """Structurally invalid document; carries the aggregated diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))


@dataclass(frozen=True)
class DocumentIR:
    """Validated whole-document IR consumed by both backends."""

    items: tuple[Item, ...] = ()
    mode: Mode = Mode.LIGHT
    palette_overrides: dict | None = None
    parse_warnings: tuple[Diagnostic, ...] = field(default=(), compare=False)


def effective_registry(doc: DocumentIR) -> PaletteRegistry:
    registry = builtin_registry()
    if doc.palette_overrides:
        registry = palette.apply_overrides(registry, doc.palette_overrides)
    return registry


def default_fill(mode: Mode) -> str:
    return palette.color_name("gray", Role.BG, mode)


class _Collector:
    def __init__(self):
        self.diags: list[Diagnostic] = []

    def error(self, code: str, path: str, message: str) -> None:
        self.diags.append(error(code, path, message))

    def warn(self, code: str, path: str, message: str) -> None:
        self.diags.append(warn(code, path, message))

    def unknown_fields(self, obj: dict, known: tuple[str, ...], path: str) -> None:
        for key in obj:
            if key not in known:
                self.warn("unknown-field", f"{path}.{key}", f"field {key!r} is not recognized")

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diags if d.severity == "Error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diags if d.severity == "Warn"]


def _get_str(obj: dict, key: str, path: str, col: _Collector,
             required: bool = False, default=None):
    if key not in obj:
        if required:
            col.error("missing-field", f"{path}.{key}", f"required field {key!r} is missing")
        return default
    value = obj[key]
    if not isinstance(value, str):
        col.error("bad-type", f"{path}.{key}", f"{key!r} must be a string")
        return default
    return value


def _get_enum(obj: dict, key: str, enum_cls, path: str, col: _Collector, default):
    raw = obj.get(key)
    if raw is None:
        return default
    if not isinstance(raw, str):
        col.error("bad-type", f"{path}.{key}", f"{key!r} must be a string")
        return default
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        col.error("bad-value", f"{path}.{key}", f"{raw!r} is not one of: {allowed}")
        return default


def _parse_body(raw, path: str, mode: Mode, col: _Collector) -> tuple:
    if not isinstance(raw, list):
        col.error("bad-type", path, "body must be a list of blocks")
        return ()
    blocks = []
    for i, entry in enumerate(raw):
        bpath = f"{path}[{i}]"
        if isinstance(entry, str):
            blocks.append(Paragraph(entry))
        elif isinstance(entry, dict):
            if "text" in entry:
                col.unknown_fields(entry, ("text",), bpath)
                if isinstance(entry["text"], str):
                    blocks.append(Paragraph(entry["text"]))
                else:
                    col.error("bad-type", f"{bpath}.text", "text must be a string")
            elif "itemize" in entry:
                col.unknown_fields(entry, ("itemize",), bpath)
                items = entry["itemize"]
                if isinstance(items, list) and all(isinstance(s, str) for s in items):
                    blocks.append(Itemize(tuple(items)))
                else:
                    col.error("bad-type", f"{bpath}.itemize", "itemize must be a list of strings")
            elif "code" in entry:
                col.unknown_fields(entry, ("code",), bpath)
                code = entry["code"]
                if isinstance(code, str):
                    blocks.append(CodeBlock(tuple(code.splitlines())))
                elif isinstance(code, list) and all(isinstance(s, str) for s in code):
                    blocks.append(CodeBlock(tuple(code)))
                else:
                    col.error("bad-type", f"{bpath}.code", "code must be a string or list of lines")
            elif "columns" in entry:
                col.unknown_fields(entry, ("columns",), bpath)
                layout = _parse_columns(entry["columns"], f"{bpath}.columns", mode, col)
                if layout is not None:
                    blocks.append(layout)
            else:
                col.error("unknown-block", bpath,
                          "block must be a string or carry one of: text, itemize, code, columns")
        else:
            col.error("bad-type", bpath, "body block must be a string or an object")
    return tuple(blocks)


def _parse_box(obj, path: str, doc_mode: Mode, col: _Collector) -> BoxSpec | None:
    if not isinstance(obj, dict):
        col.error("bad-type", path, "box must be an object")
        return None
    col.unknown_fields(obj, ("kind", "title", "theme", "mode", "body"), path)
    kind = _get_enum(obj, "kind", BoxKind, path, col, None)
    if "kind" not in obj:
        col.error("missing-field", f"{path}.kind", "required field 'kind' is missing")
    title = _get_str(obj, "title", path, col)
    theme = _get_str(obj, "theme", path, col)
    mode = _get_enum(obj, "mode", Mode, path, col, doc_mode)
    body = _parse_body(obj.get("body", []), f"{path}.body", doc_mode, col)
    if kind is None:
        return None
    try:
        return make_box(kind, title=title, theme=theme, mode=mode, body=body)
    except NumberedWithoutTitleError:
        col.error("numbered-without-title", path, "numbered box requires title")
    except WideWithTitleError:
        col.error("wide-with-title", path, "wide box cannot carry a title")
    return None


def _parse_columns(obj, path: str, doc_mode: Mode, col: _Collector) -> ColumnLayout | None:
    if not isinstance(obj, dict):
        col.error("bad-type", path, "columns must be an object")
        return None
    col.unknown_fields(obj, ("boxes", "count"), path)
    raw_boxes = obj.get("boxes")
    if not isinstance(raw_boxes, list):
        col.error("missing-field", f"{path}.boxes", "columns need a 'boxes' list")
        return None
    boxes = []
    for i, raw in enumerate(raw_boxes):
        box = _parse_box(raw, f"{path}.boxes[{i}]", doc_mode, col)
        if box is not None:
            boxes.append(box)
    if len(boxes) != len(raw_boxes):
        return None  # per-box diagnostics already recorded
    count = obj.get("count", len(boxes))
    if not isinstance(count, int):
        col.error("bad-type", f"{path}.count", "count must be an integer")
        return None
    try:
        return make_columns(boxes, count)
    except CountMismatchError as e:
        col.error("column-count-mismatch", path, str(e))
        return None


def _parse_fill(raw, path: str, doc_mode: Mode, col: _Collector) -> str:
    if isinstance(raw, str):
        return raw
    if isinstance(raw, dict):
        col.unknown_fields(raw, ("theme", "role"), path)
        theme = _get_str(raw, "theme", path, col, required=True, default="gray")
        role = _get_enum(raw, "role", Role, path, col, Role.BG)
        try:
            return palette.color_name(theme, role, doc_mode)
        except ValueError as e:
            col.error("bad-value", path, str(e))
            return default_fill(doc_mode)
    col.error("bad-type", path, "fill must be a color name or {theme, role}")
    return default_fill(doc_mode)


def _parse_node(obj, path: str, doc_mode: Mode, col: _Collector) -> TreeNode | None:
    if not isinstance(obj, dict):
        col.error("bad-type", path, "tree node must be an object")
        return None
    col.unknown_fields(obj, ("label", "sub", "cite", "size", "fill", "anchor", "children"), path)
    raw_label = obj.get("label")
    if isinstance(raw_label, str):
        label = (raw_label,)
    elif isinstance(raw_label, list) and raw_label and all(isinstance(s, str) for s in raw_label):
        label = tuple(raw_label)
    else:
        col.error("missing-field", f"{path}.label",
                  "node needs a 'label' string or non-empty list of strings")
        return None
    sub = _get_str(obj, "sub", path, col)
    raw_cite = obj.get("cite", [])
    if isinstance(raw_cite, str):
        cite = (raw_cite,)
    elif isinstance(raw_cite, list) and all(isinstance(s, str) for s in raw_cite):
        cite = tuple(raw_cite)
    else:
        col.error("bad-type", f"{path}.cite", "cite must be a key or list of keys")
        cite = ()
    size = _get_enum(obj, "size", SizeTag, path, col, SizeTag.M)
    fill = _parse_fill(obj.get("fill", default_fill(doc_mode)), f"{path}.fill", doc_mode, col)
    anchor = _get_str(obj, "anchor", path, col)
    children = []
    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        col.error("bad-type", f"{path}.children", "children must be a list")
        raw_children = []
    for i, raw in enumerate(raw_children):
        child = _parse_node(raw, f"{path}.children[{i}]", doc_mode, col)
        if child is not None:
            children.append(child)
    return TreeNode(
        label_lines=label, sub_annotation=sub, citation_keys=cite,
        size=size, fill=fill, anchor=anchor, children=tuple(children),
    )


def _parse_fusion(obj, path: str, col: _Collector) -> FusionAnnotation | None:
    if not isinstance(obj, dict):
        col.error("bad-type", path, "fusion must be an object")
        return None
    col.unknown_fields(obj, ("id", "first", "last", "offset_pt", "split", "text"), path)
    fid = _get_str(obj, "id", path, col, required=True)
    first = _get_str(obj, "first", path, col, required=True)
    last = _get_str(obj, "last", path, col, required=True)
    offset = obj.get("offset_pt")
    if offset is not None and not isinstance(offset, (int, float)):
        col.error("bad-type", f"{path}.offset_pt", "offset_pt must be a number")
        offset = None
    has_split = "split" in obj
    has_text = "text" in obj
    content = None
    if has_split == has_text:
        col.error("bad-value", path, "fusion needs exactly one of 'split' or 'text'")
    elif has_split:
        raw = obj["split"]
        if isinstance(raw, dict):
            col.unknown_fields(raw, ("left", "right"), f"{path}.split")
            left = _get_str(raw, "left", f"{path}.split", col, required=True, default="")
            right = _get_str(raw, "right", f"{path}.split", col, required=True, default="")
            content = SplitBox(left=left or "", right=right or "")
        else:
            col.error("bad-type", f"{path}.split", "split must carry 'left' and 'right'")
    else:
        text = obj["text"]
        if isinstance(text, str):
            content = text
        else:
            col.error("bad-type", f"{path}.text", "text must be a string")
    if None in (fid, first, last) or content is None:
        return None
    return FusionAnnotation(
        id=fid, first=first, last=last, content=content,
        offset_pt=float(offset) if offset is not None else None,
    )


def _parse_tree(obj, path: str, doc_mode: Mode, col: _Collector) -> Taxonomy | None:
    if not isinstance(obj, dict):
        col.error("bad-type", path, "tree must be an object")
        return None
    col.unknown_fields(obj, ("style", "scale", "root", "fusions"), path)
    style = _get_enum(obj, "style", LinkStyle, path, col, LinkStyle.ARROW_UNIFIED)
    scale = obj.get("scale", 1.0)
    if not isinstance(scale, (int, float)) or scale <= 0:
        col.error("bad-value", f"{path}.scale", "scale must be a positive number")
        scale = 1.0
    if "root" not in obj:
        col.error("missing-field", f"{path}.root", "tree needs a 'root' node")
        return None
    root = _parse_node(obj["root"], f"{path}.root", doc_mode, col)
    if root is None:
        return None
    fusions = []
    raw_fusions = obj.get("fusions", [])
    if not isinstance(raw_fusions, list):
        col.error("bad-type", f"{path}.fusions", "fusions must be a list")
        raw_fusions = []
    for i, raw in enumerate(raw_fusions):
        fusion = _parse_fusion(raw, f"{path}.fusions[{i}]", col)
        if fusion is not None:
            fusions.append(fusion)
    return Taxonomy(root=root, style=style, fusions=tuple(fusions), scale=float(scale))


def _parse_author(obj, path: str, col: _Collector) -> AuthorMeta | None:
    if not isinstance(obj, dict):
        col.error("bad-type", path, "author must be an object")
        return None
    col.unknown_fields(obj, ("name", "orcid", "style"), path)
    name = _get_str(obj, "name", path, col, required=True)
    if not name:
        if name == "":
            col.error("bad-value", f"{path}.name", "author name must be non-empty")
        return None
    style = obj.get("style", "icon")
    if style not in RENDER_STYLES:
        col.error("bad-value", f"{path}.style", f"{style!r} is not one of: icon, full")
        style = "icon"
    oid = None
    raw_orcid = _get_str(obj, "orcid", path, col)
    if raw_orcid is not None:
        try:
            oid = parse_orcid(raw_orcid)
        except OrcidFormatError as e:
            col.error("bad-orcid-format", f"{path}.orcid", str(e))
            return None
        except OrcidChecksumError as e:
            col.error("bad-orcid-checksum", f"{path}.orcid", str(e))
            return None
    return AuthorMeta(display_name=name, orcid=oid, orcid_style=style)


def _parse_palette(obj, path: str, col: _Collector) -> dict | None:
    if not isinstance(obj, dict):
        col.error("bad-type", path, "palette must map theme names to mode sets")
        return None
    overrides: dict[str, dict[str, dict[str, str]]] = {}
    for theme, modes in obj.items():
        tpath = f"{path}.{theme}"
        if not isinstance(modes, dict):
            col.error("bad-type", tpath, "theme entry must carry 'light' and/or 'dark' sets")
            continue
        col.unknown_fields(modes, ("light", "dark"), tpath)
        entry: dict[str, dict[str, str]] = {}
        for mode_key in ("light", "dark"):
            if mode_key not in modes:
                continue
            roles = modes[mode_key]
            mpath = f"{tpath}.{mode_key}"
            if not isinstance(roles, dict):
                col.error("bad-type", mpath, "mode set must map roles to hex colors")
                continue
            role_map: dict[str, str] = {}
            for role_key, hex_value in roles.items():
                rpath = f"{mpath}.{role_key}"
                try:
                    Role(role_key)
                except ValueError:
                    col.error("bad-value", rpath, f"{role_key!r} is not a role")
                    continue
                if not isinstance(hex_value, str):
                    col.error("bad-type", rpath, "color must be a hex string")
                    continue
                try:
                    role_map[role_key] = palette.ColorValue.from_hex(hex_value).hex
                except ValueError as e:
                    col.error("bad-color", rpath, str(e))
            entry[mode_key] = role_map
        overrides[theme] = entry
    return overrides


_ITEM_KEYS = ("box", "columns", "tree", "author")


def parse_document(text: str, mode_override: Mode | None = None) -> DocumentIR:
    """Parse a JSON document into an IR.

    Raises DocumentSyntaxError on malformed JSON and SchemaError when any
    structural error was found; unknown fields become warnings carried on
    the returned IR (surfaced again by `check`).
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(e.msg, e.lineno, e.colno) from None

    col = _Collector()
    if not isinstance(raw, dict):
        col.error("bad-type", "$", "document must be a JSON object")
        raise SchemaError(col.diags)

    col.unknown_fields(raw, ("mode", "palette", "items"), "$")
    mode = _get_enum(raw, "mode", Mode, "$", col, Mode.LIGHT)
    if mode_override is not None:
        mode = mode_override
    overrides = None
    if "palette" in raw:
        overrides = _parse_palette(raw["palette"], "palette", col)

    items: list[Item] = []
    raw_items = raw.get("items")
    if not isinstance(raw_items, list):
        col.error("missing-field", "$.items", "document needs an 'items' list")
        raw_items = []
    for i, raw_item in enumerate(raw_items):
        path = f"items[{i}]"
        if not isinstance(raw_item, dict):
            col.error("bad-type", path, "item must be an object")
            continue
        keys = [k for k in _ITEM_KEYS if k in raw_item]
        if len(keys) != 1:
            col.error("bad-item", path, "item must carry exactly one of: box, columns, tree, author")
            continue
        col.unknown_fields(raw_item, (keys[0],), path)
        key = keys[0]
        parsed: Item | None
        if key == "box":
            parsed = _parse_box(raw_item["box"], f"{path}.box", mode, col)
        elif key == "columns":
            parsed = _parse_columns(raw_item["columns"], f"{path}.columns", mode, col)
        elif key == "tree":
            parsed = _parse_tree(raw_item["tree"], f"{path}.tree", mode, col)
        else:
            parsed = _parse_author(raw_item["author"], f"{path}.author", col)
        if parsed is not None:
            items.append(parsed)

    if col.errors:
        raise SchemaError(col.diags)
    return DocumentIR(
        items=tuple(items),
        mode=mode,
        palette_overrides=overrides,
        parse_warnings=tuple(col.warnings),
    )


def _serialize_block(block, doc: DocumentIR):
    if isinstance(block, Paragraph):
        return block.text
    if isinstance(block, Itemize):
        return {"itemize": list(block.items)}
    if isinstance(block, CodeBlock):
        return {"code": list(block.lines)}
    if isinstance(block, ColumnLayout):
        return {"columns": _serialize_columns(block, doc)}
    raise TypeError(f"unknown block: {block!r}")


def _serialize_box(box: BoxSpec, doc: DocumentIR) -> dict:
    out: dict = {"kind": box.kind.value}
    if box.title is not None:
        out["title"] = box.title
    if box.theme is not None:
        out["theme"] = box.theme
    if box.mode is not doc.mode:
        out["mode"] = box.mode.value
    if box.body:
        out["body"] = [_serialize_block(b, doc) for b in box.body]
    return out


def _serialize_columns(layout: ColumnLayout, doc: DocumentIR) -> dict:
    return {"boxes": [_serialize_box(b, doc) for b in layout.columns]}


def _serialize_node(node: TreeNode, doc: DocumentIR) -> dict:
    out: dict = {}
    out["label"] = node.label_lines[0] if len(node.label_lines) == 1 else list(node.label_lines)
    if node.sub_annotation is not None:
        out["sub"] = node.sub_annotation
    if node.citation_keys:
        out["cite"] = list(node.citation_keys)
    if node.size is not SizeTag.M:
        out["size"] = node.size.value
    if node.fill != default_fill(doc.mode):
        out["fill"] = node.fill
    if node.anchor is not None:
        out["anchor"] = node.anchor
    if node.children:
        out["children"] = [_serialize_node(c, doc) for c in node.children]
    return out


def _serialize_item(item: Item, doc: DocumentIR) -> dict:
    if isinstance(item, BoxSpec):
        return {"box": _serialize_box(item, doc)}
    if isinstance(item, ColumnLayout):
        return {"columns": _serialize_columns(item, doc)}
    if isinstance(item, Taxonomy):
        tree: dict = {}
        if item.style is not LinkStyle.ARROW_UNIFIED:
            tree["style"] = item.style.value
        if item.scale != 1.0:
            tree["scale"] = item.scale
        tree["root"] = _serialize_node(item.root, doc)
        if item.fusions:
            fusions = []
            for f in item.fusions:
                entry: dict = {"id": f.id, "first": f.first, "last": f.last}
                if f.offset_pt is not None:
                    entry["offset_pt"] = f.offset_pt
                if isinstance(f.content, SplitBox):
                    entry["split"] = {"left": f.content.left, "right": f.content.right}
                else:
                    entry["text"] = f.content
                fusions.append(entry)
            tree["fusions"] = fusions
        return {"tree": tree}
    if isinstance(item, AuthorMeta):
        author: dict = {"name": item.display_name}
        if item.orcid is not None:
            author["orcid"] = item.orcid.digits
        if item.orcid_style != "icon":
            author["style"] = item.orcid_style
        return {"author": author}
    raise TypeError(f"unknown item: {item!r}")


def serialize_document(doc: DocumentIR) -> str:
    """Canonical JSON for an IR; parse(serialize(doc)) == doc."""
    out: dict = {}
    if doc.mode is not Mode.LIGHT:
        out["mode"] = doc.mode.value
    if doc.palette_overrides:
        out["palette"] = doc.palette_overrides
    out["items"] = [_serialize_item(item, doc) for item in doc.items]
    return json.dumps(out, indent=2) + "\n"


def _check_box(box: BoxSpec, registry: PaletteRegistry, path: str,
               doc: DocumentIR, diags: list[Diagnostic], in_column: bool) -> None:
    if box.kind is BoxKind.NUMBERED and box.title is None:
        diags.append(error("numbered-without-title", path, "numbered box requires title"))
    if box.kind is BoxKind.WIDE and box.title is not None:
        diags.append(error("wide-with-title", path, "wide box cannot carry a title"))
    theme = box.effective_theme
    if theme not in registry:
        diags.append(error("unknown-theme", f"{path}.theme", f"theme {theme!r} is not defined"))
    elif registry.theme(theme).colors(box.mode) is None:
        diags.append(error(
            "role-unavailable", f"{path}.theme",
            f"theme {theme!r} has no {box.mode.value} colors"))
    for i, block in enumerate(box.body):
        if isinstance(block, ColumnLayout):
            bpath = f"{path}.body[{i}].columns"
            if in_column:
                diags.append(error(
                    "nesting-too-deep", bpath,
                    "columns inside a box that already sits in a column"))
            else:
                _check_columns(block, registry, bpath, doc, diags, nested=True)


def _check_columns(layout: ColumnLayout, registry: PaletteRegistry, path: str,
                   doc: DocumentIR, diags: list[Diagnostic], nested: bool = False) -> None:
    n = len(layout.columns)
    if n < 2:
        diags.append(error("column-count-mismatch", path, "column layout needs at least 2 boxes"))
    elif layout.width_fraction != column_width(n):
        diags.append(error(
            "bad-column-width", path,
            f"width fraction {layout.width_fraction} should be {column_width(n)} for {n} columns"))
    for i, box in enumerate(layout.columns):
        _check_box(box, registry, f"{path}.boxes[{i}]", doc, diags, in_column=True)


def check(doc: DocumentIR) -> list[Diagnostic]:
    """All palette, box, tree, and author validations plus cross-cutting checks.

    Pure and idempotent; an empty list means compile will succeed.
    """
    diags: list[Diagnostic] = list(doc.parse_warnings)
    registry = effective_registry(doc)
    diags.extend(palette.validate_registry(registry))
    for i, item in enumerate(doc.items):
        path = f"items[{i}]"
        if isinstance(item, BoxSpec):
            _check_box(item, registry, f"{path}.box", doc, diags, in_column=False)
        elif isinstance(item, ColumnLayout):
            _check_columns(item, registry, f"{path}.columns", doc, diags)
        elif isinstance(item, Taxonomy):
            diags.extend(validate_taxonomy(item, registry, f"{path}.tree"))
            diags.extend(svgrender.text_overflow_warnings(item, path=f"{path}.tree"))
        elif isinstance(item, AuthorMeta):
            if item.orcid is not None:
                compact = item.orcid.compact
                if len(compact) != 16 or checksum_char(compact[:15]) != compact[15]:
                    diags.append(error(
                        "bad-orcid-checksum", f"{path}.author.orcid",
                        f"iD {item.orcid.digits} fails its checksum"))
    return diags


def _item_slug(item: Item) -> str:
    if isinstance(item, BoxSpec):
        return "box"
    if isinstance(item, ColumnLayout):
        return "columns"
    if isinstance(item, Taxonomy):
        return "tree"
    return "author"


def generate_fragments(doc: DocumentIR, numbers: NumberedAssignment | None = None
                       ) -> list[tuple[str, latexgen.LatexFragment]]:
    """(file name, body fragment) per item, in document order."""
    registry = effective_registry(doc)
    if numbers is None:
        numbers = assign_numbers(doc)
    fragments = []
    for i, item in enumerate(doc.items, start=1):
        name = f"body-{i:03d}-{_item_slug(item)}.tex"
        if isinstance(item, BoxSpec):
            fragment = latexgen.gen_box(item, numbers)
        elif isinstance(item, ColumnLayout):
            fragment = latexgen.gen_columns(item, numbers)
        elif isinstance(item, Taxonomy):
            fragment = latexgen.gen_tree(item, registry)
        else:
            fragment = latexgen.gen_author(item)
        fragments.append((name, fragment))
    return fragments


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def compile(doc: DocumentIR, target: str = "both", out_dir=None,
            link_packages: bool = False,
            layout_cfg: svgrender.LayoutConfig | None = None) -> list[dict]:
    """Emit output files atomically and return the manifest.

    latex: preamble.tex plus one body fragment per item; svg: one .svg per
    taxonomy item. All-or-nothing: files are staged to a temp directory and
    moved into out_dir only after everything rendered.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
    if out_dir is None:
        raise ValueError("out_dir is required")

    diags = check(doc)
    if has_errors(diags):
        raise ValidationFailedError([d for d in diags if d.severity == "Error"])

    registry = effective_registry(doc)
    files: list[tuple[str, str]] = []
    if target in ("latex", "both"):
        files.append(("preamble.tex", latexgen.gen_preamble(registry, link_packages).text))
        for name, fragment in generate_fragments(doc):
            files.append((name, fragment.text))
    if target in ("svg", "both"):
        for i, item in enumerate(doc.items, start=1):
            if isinstance(item, Taxonomy):
                files.append((f"tree-{i:03d}.svg", svgrender.render_svg(item, registry, layout_cfg)))

    manifest = [{"path": name, "sha256": _sha256(content)} for name, content in files]

    out = Path(out_dir)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".ktc-stage-", dir=out.parent))
    try:
        for name, content in files:
            with open(stage / name, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(content)
        with open(stage / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(manifest, indent=2) + "\n")
        if not out.exists():
            os.replace(stage, out)
        else:
            for entry in sorted(p.name for p in stage.iterdir()):
                os.replace(stage / entry, out / entry)
            stage.rmdir()
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    return manifest


def _read_balanced(text: str, start: int, open_ch: str, close_ch: str) -> tuple[str, int]:
    """Content between start's opener and its matching closer, brace-aware."""
    assert text[start] == open_ch
    depth_brace = 0
    i = start + 1
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "{":
            depth_brace += 1
        elif ch == "}":
            if close_ch == "}" and depth_brace == 0:
                return text[start + 1:i], i + 1
            depth_brace -= 1
        elif ch == close_ch and depth_brace == 0:
            return text[start + 1:i], i + 1
        i += 1
    raise ValueError(f"unterminated {open_ch}...{close_ch}")


def _split_options(option_text: str) -> dict[str, str]:
    parts: list[str] = []
    depth = 0
    current = []
    for ch in option_text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if current:
        parts.append("".join(current))
    options: dict[str, str] = {}
    for part in parts:
        if "=" in part:
            key, value = part.split("=", 1)
            value = value.strip()
            if value.startswith("{") and value.endswith("}"):
                value = value[1:-1]
            options[key.strip()] = value
    return options


_BOX_BEGIN = re.compile(r"\\begin\{(ktbox|ktboxnumbered|ktboxwide)\}")


def scan_latex_boxes(text: str) -> list[dict]:
    """Shape-check a generated fragment: recover kind/title/theme/mode of
    every box environment it opens (verbatim code block content ignored)."""
    text = latexgen._CODEBLOCK_SPAN.sub("", text)
    kind_of = {"ktbox": BoxKind.STANDARD, "ktboxnumbered": BoxKind.NUMBERED,
               "ktboxwide": BoxKind.WIDE}
    results = []
    for m in _BOX_BEGIN.finditer(text):
        env = m.group(1)
        i = m.end()
        options: dict[str, str] = {}
        if i < len(text) and text[i] == "[":
            option_text, i = _read_balanced(text, i, "[", "]")
            options = _split_options(option_text)
        if env == "ktboxnumbered" and i < len(text) and text[i] == "{":
            title, i = _read_balanced(text, i, "{", "}")
        else:
            title = options.get("title")
        theme_value = options.get("theme")
        mode = Mode.LIGHT
        theme = theme_value
        if theme_value is not None and theme_value.endswith("-dark"):
            mode = Mode.DARK
            theme = theme_value[:-len("-dark")]
        results.append({"kind": kind_of[env], "title": title, "theme": theme, "mode": mode})
    return results


def with_mode(doc: DocumentIR, mode: Mode) -> DocumentIR:
    """Round-trip helper: re-parse the document under a different default mode."""
    return parse_document(serialize_document(doc), mode_override=mode)


__all__ = [
    "AuthorMeta", "DocumentIR", "DocumentSyntaxError", "SchemaError",
    "check", "compile", "effective_registry", "generate_fragments",
    "parse_document", "scan_latex_boxes", "serialize_document", "with_mode",
]
