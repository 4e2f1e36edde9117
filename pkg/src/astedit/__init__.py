"""Grammar-driven structure editing: spec-defined ASTs with typed
placeholders, pretty printing, concrete-syntax roundtrips, box layout,
aliases, a document store, and a line-delimited editing protocol."""

from .astcore import AstDoc, CutBuffer, Display, Position, new_program
from .concretesyntax import (
    parse_subtree,
    parse_text,
    roundtrip_check,
    unparse,
)
from .layoutbox import LayoutMode, LayoutParams, layout_tree, pretty_print
from .specgrammar import (
    GrammarSpec,
    builtin_demo_spec,
    class_members,
    completions_of_class,
    parse_spec,
    print_spec,
    validate_spec,
)

__version__ = "0.1.0"

__all__ = [
    "AstDoc",
    "CutBuffer",
    "Display",
    "GrammarSpec",
    "LayoutMode",
    "LayoutParams",
    "Position",
    "builtin_demo_spec",
    "class_members",
    "completions_of_class",
    "layout_tree",
    "new_program",
    "parse_spec",
    "parse_subtree",
    "parse_text",
    "pretty_print",
    "print_spec",
    "roundtrip_check",
    "unparse",
    "validate_spec",
    "__version__",
]
