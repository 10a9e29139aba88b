"""ktc: a compiler for themed highlight boxes, taxonomy trees, and author
metadata. JSON documents in; LaTeX fragments and standalone SVG out."""

__version__ = "0.1.0"

from .boxmodel import (
    BoxKind,
    BoxSpec,
    ColumnLayout,
    NumberedAssignment,
    assign_numbers,
    column_width,
    make_box,
    make_columns,
)
from .diagnostics import Diagnostic, ValidationFailedError
from .frontend import (
    DocumentIR,
    DocumentSyntaxError,
    SchemaError,
    check,
    compile,
    parse_document,
    serialize_document,
)
from .latexgen import LatexFragment, gen_box, gen_columns, gen_preamble, gen_tree
from .orcid import AuthorMeta, OrcidId, orcid_url, parse_orcid, render_orcid_latex
from .palette import (
    ColorValue,
    Mode,
    PaletteRegistry,
    Role,
    Theme,
    builtin_registry,
    color_name,
    contrast_ratio,
    emit_palette_definitions,
    resolve,
    validate_registry,
)
from .svgrender import LayoutConfig, PositionedNode, layout, render_svg
from .treemodel import (
    FusionAnnotation,
    LinkStyle,
    SizeTag,
    SplitBox,
    Taxonomy,
    TreeNode,
    node_count,
    size_width,
    validate_taxonomy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
