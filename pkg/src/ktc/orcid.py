"""ORCID iD parsing, ISO 7064 MOD 11-2 checksum validation, and LaTeX rendering."""
from __future__ import annotations

import re
from dataclasses import dataclass

CANONICAL_RE = re.compile(r"^\d{4}-\d{4}-\d{4}-\d{3}[\dX]$")
COMPACT_RE = re.compile(r"^\d{15}[\dX]$")

ICON_STYLE = "icon"
FULL_STYLE = "full"
RENDER_STYLES = (ICON_STYLE, FULL_STYLE)


class OrcidFormatError(ValueError):
    """Input is not a 16-character iD in canonical or compact form."""


class OrcidChecksumError(ValueError):
    """Well-formed iD whose final character fails the MOD 11-2 check."""


def checksum_char(base15: str) -> str:
    """ISO 7064 MOD 11-2 check character over the 15 leading digits."""
    total = 0
    for ch in base15:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    return "X" if result == 10 else str(result)


@dataclass(frozen=True)
class OrcidId:
    """Canonical 4-4-4-4 hyphenated iD with a verified check character."""

    digits: str

    def __str__(self) -> str:
        return self.digits

    @property
    def compact(self) -> str:
        return self.digits.replace("-", "")


def parse_orcid(raw: str) -> OrcidId:
    """Canonicalize and verify an iD.

    Accepts the hyphenated form or the bare 16-character form; mixed or
    partial hyphenation is rejected. The trailing X may be lowercase.
    """
    text = raw.strip()
    upper = text[:-1] + text[-1:].upper() if text else text
    if CANONICAL_RE.match(upper):
        compact = upper.replace("-", "")
    elif COMPACT_RE.match(upper):
        compact = upper
    else:
        raise OrcidFormatError(f"not an ORCID iD: {raw!r}")
    expected = checksum_char(compact[:15])
    if compact[15] != expected:
        raise OrcidChecksumError(
            f"checksum mismatch for {raw!r}: expected final character {expected}")
    return OrcidId("-".join(compact[i:i + 4] for i in range(0, 16, 4)))


def orcid_url(oid: OrcidId) -> str:
    return f"https://orcid.org/{oid.digits}"


@dataclass(frozen=True)
class AuthorMeta:
    """Author display name plus optional verified iD and rendering style."""

    display_name: str
    orcid: OrcidId | None = None
    orcid_style: str = ICON_STYLE

    def __post_init__(self):
        if not self.display_name:
            raise ValueError("author display name must be non-empty")
        if self.orcid_style not in RENDER_STYLES:
            raise ValueError(f"unknown orcid render style: {self.orcid_style!r}")


def render_orcid_latex(author: AuthorMeta, style: str | None = None) -> str:
    """`<name>\\orcidicon{<id>}` or `<name>\\orcid{<id>}`; bare name without an iD."""
    style = style or author.orcid_style
    if style not in RENDER_STYLES:
        raise ValueError(f"unknown orcid render style: {style!r}")
    if author.orcid is None:
        return author.display_name
    command = "orcidicon" if style == ICON_STYLE else "orcid"
    return f"{author.display_name}\\{command}{{{author.orcid.digits}}}"
