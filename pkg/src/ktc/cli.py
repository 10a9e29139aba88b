"""ktc command line: compile documents, check them, export palettes, render
trees, and validate ORCID iDs.

Exit codes: 0 success, 1 validation errors, 2 I/O or internal errors.
Diagnostics go to stderr, one per line; set KTC_NO_COLOR to disable ANSI
coloring of the severity word.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__, frontend, palette, svgrender
from .diagnostics import ERROR, Diagnostic, ValidationFailedError, has_errors
from .frontend import EXIT_INTERNAL, EXIT_OK, EXIT_VALIDATION
from .orcid import OrcidChecksumError, OrcidFormatError, parse_orcid
from .palette import Mode
from .treemodel import Taxonomy

_COLORS = {ERROR: "\033[31m", "Warn": "\033[33m"}
_RESET = "\033[0m"


def _use_color(stream) -> bool:
    return "KTC_NO_COLOR" not in os.environ and getattr(stream, "isatty", lambda: False)()


def print_diagnostics(diags: list[Diagnostic], stream=None) -> None:
    stream = stream or sys.stderr
    colorize = _use_color(stream)
    for d in diags:
        line = d.format()
        if colorize:
            line = f"{_COLORS.get(d.severity, '')}{d.severity}{_RESET}" + line[len(d.severity):]
        print(line, file=stream)


def _load_document(path: str, mode_override: Mode | None = None) -> frontend.DocumentIR | int:
    """Parsed IR, or an exit code after printing what went wrong."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"Error io {path}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    try:
        return frontend.parse_document(text, mode_override=mode_override)
    except frontend.DocumentSyntaxError as e:
        print(f"Error syntax-error {path}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except frontend.SchemaError as e:
        print_diagnostics(e.diagnostics)
        return EXIT_VALIDATION


def cmd_compile(args) -> int:
    mode = Mode(args.mode) if args.mode else None
    doc = _load_document(args.document, mode_override=mode)
    if isinstance(doc, int):
        return doc
    diags = frontend.check(doc)
    print_diagnostics(diags)
    if has_errors(diags):
        return EXIT_VALIDATION
    manifest = frontend.compile(
        doc, target=args.target, out_dir=args.out, link_packages=args.link_packages)
    for entry in manifest:
        print(entry["path"])
    return EXIT_OK


def cmd_check(args) -> int:
    doc = _load_document(args.document)
    if isinstance(doc, int):
        return doc
    diags = frontend.check(doc)
    print_diagnostics(diags)
    return EXIT_VALIDATION if has_errors(diags) else EXIT_OK


def cmd_palette(args) -> int:
    registry = palette.builtin_registry()
    if args.export == "latex":
        text = palette.emit_palette_definitions(registry)
    else:
        text = palette.registry_to_json(registry)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_tree(args) -> int:
    doc = _load_document(args.document)
    if isinstance(doc, int):
        return doc
    diags = frontend.check(doc)
    print_diagnostics(diags)
    if has_errors(diags):
        return EXIT_VALIDATION
    if not 0 <= args.index < len(doc.items):
        print(f"Error bad-index items[{args.index}]: document has {len(doc.items)} item(s)",
              file=sys.stderr)
        return EXIT_VALIDATION
    item = doc.items[args.index]
    if not isinstance(item, Taxonomy):
        print(f"Error not-a-tree items[{args.index}]: item is not a taxonomy", file=sys.stderr)
        return EXIT_VALIDATION
    cfg = svgrender.LayoutConfig(
        em_px=args.em_px, h_gap=args.h_gap, v_gap=args.v_gap)
    svg = svgrender.render_svg(item, frontend.effective_registry(doc), cfg)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    print(args.out)
    return EXIT_OK


def cmd_orcid(args) -> int:
    try:
        oid = parse_orcid(args.id)
    except OrcidFormatError as e:
        print(f"Error bad-orcid-format orcid: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OrcidChecksumError as e:
        print(f"Error bad-orcid-checksum orcid: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    print(oid.digits)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktc",
        description="Compile highlight-box documents to LaTeX and taxonomy trees to SVG.")
    parser.add_argument("--version", action="version", version=f"ktc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a document to LaTeX and/or SVG")
    p.add_argument("document")
    p.add_argument("--target", choices=frontend.TARGETS, default="both")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None,
                   help="override the document's default mode")
    p.add_argument("--link-packages", action="store_true",
                   help="emit a thin \\usepackage preamble instead of inlining definitions")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("check", help="validate a document and print diagnostics")
    p.add_argument("document")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("palette", help="export the builtin palette")
    p.add_argument("--export", choices=["latex", "json"], required=True)
    p.add_argument("--out", default=None, help="write to a file instead of stdout")
    p.set_defaults(func=cmd_palette)

    p = sub.add_parser("tree", help="render one taxonomy item to SVG")
    p.add_argument("document")
    p.add_argument("--index", type=int, required=True, help="item index of the taxonomy")
    p.add_argument("--out", required=True, help="output .svg path")
    p.add_argument("--em-px", type=float, default=12.0)
    p.add_argument("--h-gap", type=float, default=36.0)
    p.add_argument("--v-gap", type=float, default=10.0)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("orcid", help="validate an ORCID iD and print its canonical form")
    p.add_argument("id")
    p.set_defaults(func=cmd_orcid)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailedError as e:
        print_diagnostics(e.diagnostics)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"Error io: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:  # stable exit contract over tracebacks
        print(f"Error internal: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
