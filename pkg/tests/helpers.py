"""Shared test utilities: fixture paths, whitespace normalization, oracles.

The oracle functions are deliberately independent re-implementations; they
never call into ktc.
"""
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
FIXTURE_DOCS = REPO / "fixtures" / "docs"
GOLDEN_LATEX = REPO / "fixtures" / "golden" / "latex"
GOLDEN_SVG = REPO / "fixtures" / "golden" / "svg"
GOLDEN_PREAMBLE = REPO / "fixtures" / "golden" / "preamble.tex"

FIXTURE_NAMES = sorted(p.stem for p in FIXTURE_DOCS.glob("*.json"))


def normalize_lines(text: str) -> list[str]:
    """Line-level whitespace normalization: strip each line's leading
    indentation and trailing spaces, drop blank lines at both ends."""
    lines = [line.strip() for line in text.splitlines()]
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return lines


def load_doc_text(name: str) -> str:
    return (FIXTURE_DOCS / f"{name}.json").read_text(encoding="utf-8")


def load_doc(name: str):
    from ktc.frontend import parse_document

    return parse_document(load_doc_text(name))


def document_body(doc) -> str:
    """All body fragments of a document joined by blank lines."""
    from ktc.frontend import generate_fragments

    fragments = generate_fragments(doc)
    return "\n\n".join(f.text.rstrip("\n") for _, f in fragments) + "\n"


# WCAG 2.x contrast oracle.

def oracle_luminance(hex6: str) -> float:
    r, g, b = (int(hex6[i:i + 2], 16) / 255.0 for i in (0, 2, 4))

    def lin(c):
        return c / 12.92 if c <= 0.03928 else ((c + 0.055) / 1.055) ** 2.4

    return 0.2126 * lin(r) + 0.7152 * lin(g) + 0.0722 * lin(b)


def oracle_contrast(a_hex: str, b_hex: str) -> float:
    la, lb = oracle_luminance(a_hex), oracle_luminance(b_hex)
    hi, lo = max(la, lb), min(la, lb)
    return (hi + 0.05) / (lo + 0.05)


# ISO 7064 MOD 11-2 oracle.

def oracle_check_char(base15: str) -> str:
    total = 0
    for ch in base15:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    return "X" if result == 10 else str(result)
