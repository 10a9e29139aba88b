#!/usr/bin/env python3
"""Regenerate the golden outputs in fixtures/golden/ from fixtures/docs/.

Run after an intentional generator change, then review the diff carefully:
the goldens are the regression surface for all emitted code.
"""
from pathlib import Path

from ktc.frontend import effective_registry, generate_fragments, parse_document
from ktc.latexgen import gen_preamble
from ktc.svgrender import render_svg
from ktc.treemodel import Taxonomy

ROOT = Path(__file__).resolve().parent.parent
DOCS = ROOT / "fixtures" / "docs"
GOLDEN = ROOT / "fixtures" / "golden"

# Fixtures whose rendered SVG is pinned byte-for-byte.
SVG_PINNED = ("tree-fusion",)


def document_body(doc) -> str:
    fragments = generate_fragments(doc)
    return "\n\n".join(f.text.rstrip("\n") for _, f in fragments) + "\n"


def main() -> None:
    (GOLDEN / "latex").mkdir(parents=True, exist_ok=True)
    (GOLDEN / "svg").mkdir(parents=True, exist_ok=True)

    for doc_path in sorted(DOCS.glob("*.json")):
        doc = parse_document(doc_path.read_text(encoding="utf-8"))
        name = doc_path.stem
        out = GOLDEN / "latex" / f"{name}.tex"
        out.write_text(document_body(doc), encoding="utf-8")
        print("wrote", out.relative_to(ROOT))
        if name in SVG_PINNED:
            registry = effective_registry(doc)
            for item in doc.items:
                if isinstance(item, Taxonomy):
                    svg_out = GOLDEN / "svg" / f"{name}.svg"
                    svg_out.write_text(render_svg(item, registry), encoding="utf-8")
                    print("wrote", svg_out.relative_to(ROOT))

    preamble = GOLDEN / "preamble.tex"
    preamble.write_text(gen_preamble(effective_registry(
        parse_document('{"items": []}'))).text, encoding="utf-8")
    print("wrote", preamble.relative_to(ROOT))


if __name__ == "__main__":
    main()
