"""Highlight box model: standard/numbered/wide boxes, rich bodies, column layouts.

Backend-independent. Numbering walks a whole document in pre-order so
auto-numbered boxes count consistently, including boxes nested in columns.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from .palette import Mode, PaletteRegistry, UnknownThemeError

DEFAULT_THEME = "blue"

# Total horizontal gap budget for a column row, as a fraction of \textwidth.
COLUMN_GAP_BUDGET = 0.04


class BoxKind(str, Enum):
    STANDARD = "standard"
    NUMBERED = "numbered"
    WIDE = "wide"


class NumberedWithoutTitleError(ValueError):
    """Auto-numbered boxes require a title."""


class WideWithTitleError(ValueError):
    """Wide boxes drop the bubble title and cannot carry one."""


class CountMismatchError(ValueError):
    """Column count does not match the number of boxes (or is below 2)."""


@dataclass(frozen=True)
class Paragraph:
    text: str


@dataclass(frozen=True)
class Itemize:
    items: tuple[str, ...]


@dataclass(frozen=True)
class CodeBlock:
    lines: tuple[str, ...]


# A box body is a sequence of blocks; ColumnLayout may appear as a block
# (one nesting level deep, enforced by the document checker).
Block = Union[Paragraph, Itemize, CodeBlock, "ColumnLayout"]


@dataclass(frozen=True)
class BoxSpec:
    """One highlight box. theme=None means "author did not pick one": the
    blue default applies and the theme key is omitted from generated code."""

    kind: BoxKind
    title: str | None = None
    theme: str | None = None
    mode: Mode = Mode.LIGHT
    body: tuple[Block, ...] = ()

    @property
    def effective_theme(self) -> str:
        return self.theme if self.theme is not None else DEFAULT_THEME


@dataclass(frozen=True)
class ColumnLayout:
    """n >= 2 boxes side by side, equal width fractions of \\textwidth."""

    columns: tuple[BoxSpec, ...]
    width_fraction: float


def column_width(n: int) -> float:
    """Equal per-column fraction: (1 - gap budget) / n, at 2 decimals.

    Floored rather than rounded half-up so n * width + gap budget never
    exceeds the full text width, for any n.
    """
    budget_hundredths = round((1.0 - COLUMN_GAP_BUDGET) * 100)
    return budget_hundredths // n / 100


def make_box(
    kind: BoxKind,
    title: str | None = None,
    theme: str | None = None,
    mode: Mode = Mode.LIGHT,
    body: tuple[Block, ...] = (),
    registry: PaletteRegistry | None = None,
) -> BoxSpec:
    """Construct a BoxSpec, enforcing the kind/title rules.

    With a registry, also rejects unknown themes up front.
    """
    if kind is BoxKind.NUMBERED and title is None:
        raise NumberedWithoutTitleError("numbered box requires a title")
    if kind is BoxKind.WIDE and title is not None:
        raise WideWithTitleError("wide box cannot carry a title")
    if registry is not None and theme is not None and theme not in registry:
        raise UnknownThemeError(theme)
    return BoxSpec(kind=kind, title=title, theme=theme, mode=mode, body=tuple(body))


def make_columns(boxes, n: int | None = None) -> ColumnLayout:
    """Lay out boxes side by side; n defaults to len(boxes) and must match it."""
    boxes = tuple(boxes)
    if n is None:
        n = len(boxes)
    if n != len(boxes):
        raise CountMismatchError(f"expected {n} boxes, got {len(boxes)}")
    if n < 2:
        raise CountMismatchError("column layout needs at least 2 boxes")
    return ColumnLayout(columns=boxes, width_fraction=column_width(n))


def iter_boxes(items) -> Iterator[BoxSpec]:
    """All boxes in document pre-order: item order, then column order, then
    blocks of each box body (descending into nested column layouts)."""
    for item in items:
        if isinstance(item, BoxSpec):
            yield from _walk_box(item)
        elif isinstance(item, ColumnLayout):
            yield from _walk_columns(item)


def _walk_box(box: BoxSpec) -> Iterator[BoxSpec]:
    yield box
    for block in box.body:
        if isinstance(block, ColumnLayout):
            yield from _walk_columns(block)


def _walk_columns(layout: ColumnLayout) -> Iterator[BoxSpec]:
    for box in layout.columns:
        yield from _walk_box(box)


@dataclass
class NumberedAssignment:
    """Document-order numbering of auto-numbered boxes, keyed by box identity."""

    boxes: tuple[BoxSpec, ...] = ()
    _by_id: dict[int, int] = field(default_factory=dict, repr=False)

    def get(self, box: BoxSpec) -> int | None:
        return self._by_id.get(id(box))

    def __len__(self) -> int:
        return len(self.boxes)

    def pairs(self) -> Iterator[tuple[BoxSpec, int]]:
        for i, box in enumerate(self.boxes, start=1):
            yield box, i


def assign_numbers(doc) -> NumberedAssignment:
    """Number the numbered boxes 1..n in pre-order over doc.items."""
    numbered = tuple(b for b in iter_boxes(doc.items) if b.kind is BoxKind.NUMBERED)
    return NumberedAssignment(
        boxes=numbered,
        _by_id={id(b): i for i, b in enumerate(numbered, start=1)},
    )
