import io
import json

import pytest

from astedit.service import Session, run_external, serve_stdio
from astedit.errors import ExternalFailure, IncompleteDocument
from astedit import concretesyntax as cs


def call(session, op, **args):
    line = json.dumps({"id": 1, "op": op, "args": args})
    return json.loads(session.handle_line(line))


def ok(session, op, **args):
    resp = call(session, op, **args)
    assert resp["status"] == "OK", resp
    return resp["payload"]


def build_complete_if(session):
    """new program -> `b if a otherwise c` through protocol ops only."""
    p = ok(session, "new_program")
    doc = p["doc"]
    geo = {g["node"]: g for g in p["geometry"]["primitives"]
           if g["type"] == "rect"}
    ph = next(n for n, g in geo.items() if g["label"] == "expression*")
    ok(session, "expand", doc=doc, node=ph, choice="if")
    for name in "abc":
        phs = [n for n, g in _rects(session, doc).items()
               if g["label"] == "expression"]
        ok(session, "expand", doc=doc, node=phs[0], choice="variable")
        leaf_ph = [n for n, g in _rects(session, doc).items()
                   if g["label"] == "ident"][0]
        ok(session, "set_terminal", doc=doc, node=leaf_ph, text=name)
    for n, g in list(_rects(session, doc).items()):
        if g["label"].endswith("*"):
            ok(session, "expand", doc=doc, node=n, choice="end list")
    return doc


def _rects(session, doc):
    geo = ok(session, "layout", doc=doc)
    return {g["node"]: g for g in geo["primitives"] if g["type"] == "rect"}


def test_new_program_smoke(spec):
    s = Session(spec)
    p = ok(s, "new_program")
    assert p["doc"] == 1
    rects = [g for g in p["geometry"]["primitives"] if g["type"] == "rect"]
    assert len(rects) == 3


def test_full_edit_flow(spec):
    s = Session(spec)
    doc = build_complete_if(s)
    text = ok(s, "pretty", doc=doc)["text"]
    assert text == "b if a\n  otherwise c"


def test_paste_mismatch_is_err_and_state_unchanged(spec):
    s = Session(spec)
    doc = build_complete_if(s)
    # copy an ident leaf, then try to paste it over an expression
    rects = _rects(s, doc)
    ident = next(n for n, g in rects.items() if g["label"] == "a")
    variable = next(n for n, g in rects.items() if g["label"] == "variable")
    ok(s, "copy", doc=doc, node=ident)
    before = ok(s, "serialize", doc=doc)["text"]
    resp = call(s, "replace", doc=doc, node=variable)
    assert resp["status"] == "ERR"
    assert resp["error"]["kind"] == "TYPE_MISMATCH"
    assert ok(s, "serialize", doc=doc)["text"] == before


def test_undo_restores_serialization(spec):
    s = Session(spec)
    doc = build_complete_if(s)
    rects = _rects(s, doc)
    target = next(n for n, g in rects.items() if g["label"] == "if")
    before = ok(s, "serialize", doc=doc)["text"]
    ok(s, "collapse", doc=doc, node=target)
    assert ok(s, "serialize", doc=doc)["text"] != before
    ok(s, "undo", doc=doc)
    assert ok(s, "serialize", doc=doc)["text"] == before


def test_undo_depth(spec):
    s = Session(spec)
    p = ok(s, "new_program")
    doc = p["doc"]
    serials = []
    for i in range(40):
        serials.append(ok(s, "serialize", doc=doc)["text"])
        ph = next(n for n, g in _rects(s, doc).items()
                  if g["label"] == "expression*")
        ok(s, "expand", doc=doc, node=ph, choice="variable")
    for i in range(32):
        ok(s, "undo", doc=doc)
    assert ok(s, "serialize", doc=doc)["text"] == serials[-32]


def test_malformed_json(spec):
    s = Session(spec)
    resp = json.loads(s.handle_line("{nope"))
    assert resp["status"] == "ERR"
    assert resp["error"]["kind"] == "PROTOCOL"


def test_unknown_op(spec):
    s = Session(spec)
    resp = call(s, "frobnicate")
    assert resp["status"] == "ERR"
    assert resp["error"]["kind"] == "PROTOCOL"


def test_err_preserves_state_for_bad_requests(spec):
    s = Session(spec)
    doc = build_complete_if(s)
    before = ok(s, "serialize", doc=doc)["text"]
    bad_requests = [
        {"id": 9, "op": "expand", "args": {"doc": doc, "node": 99999,
                                           "choice": "if"}},
        {"id": 9, "op": "expand", "args": {"doc": doc, "node": 1,
                                           "choice": "if"}},
        {"id": 9, "op": "set_display", "args": {"doc": doc, "node": 1,
                                                "state": "sideways"}},
        {"id": 9, "op": "paste", "args": {"doc": doc, "node": 1}},
        {"id": 9, "op": "store_save", "args": {"doc": doc}},
    ]
    for req in bad_requests:
        resp = json.loads(s.handle_line(json.dumps(req)))
        assert resp["status"] == "ERR", req
        assert ok(s, "serialize", doc=doc)["text"] == before


def test_cut_buffer_shared_across_docs(spec):
    s = Session(spec)
    doc1 = build_complete_if(s)
    rects = _rects(s, doc1)
    target = next(n for n, g in rects.items() if g["label"] == "if")
    ok(s, "copy", doc=doc1, node=target)
    p2 = ok(s, "new_program")
    doc2 = p2["doc"]
    ph = next(n for n, g in _rects(s, doc2).items()
              if g["label"] == "expression*")
    ok(s, "paste", doc=doc2, node=ph)
    assert "if" in ok(s, "serialize", doc=doc2)["text"]


def test_store_ops(spec, tmp_path):
    s = Session(spec, store_path=tmp_path / "docs")
    doc = build_complete_if(s)
    name = ok(s, "store_save", doc=doc)["name"]
    assert name == "prog-1"
    assert ok(s, "store_list")["names"] == ["prog-1"]
    loaded = ok(s, "store_load", name="prog-1")
    assert ok(s, "serialize", doc=loaded["doc"])["text"] == \
        ok(s, "serialize", doc=doc)["text"]
    ok(s, "store_delete", name="prog-1")
    assert ok(s, "store_list")["names"] == []


def test_alias_ops(spec):
    s = Session(spec)
    assert ok(s, "alias_learn", word="CreateSimpleWindow")["learned"]
    m = ok(s, "alias_expand", prefix="Cre")
    assert m["kind"] == "UNIQUE"
    assert m["expansion"] == "CreateSimpleWindow"
    assert ok(s, "alias_import", text="f x = x;")["added"] == 1


def test_parse_subtree_op(spec):
    s = Session(spec)
    p = ok(s, "new_program")
    doc = p["doc"]
    ph = next(n for n, g in _rects(s, doc).items()
              if g["label"] == "expression*")
    assert ok(s, "parse_subtree", doc=doc, node=ph, text="f 1",
              dry_run=True) == {"ok": True}
    ok(s, "parse_subtree", doc=doc, node=ph, text="f 1")
    assert "application" in ok(s, "serialize", doc=doc)["text"]


def test_node_info_op(spec):
    s = Session(spec)
    doc = ok(s, "new_program")["doc"]
    ph = next(n for n, g in _rects(s, doc).items()
              if g["label"] == "expression*")
    info = ok(s, "node_info", doc=doc, node=ph)
    assert info["kind"] == "placeholder"
    assert info["expected_type"] == "expression"
    nid = ok(s, "expand", doc=doc, node=ph, choice="variable")["node"]
    info = ok(s, "node_info", doc=doc, node=nid)
    assert info["kind"] == "operator"
    assert info["operator"] == "variable"
    leaf_ph = next(n for n, g in _rects(s, doc).items()
                   if g["label"] == "ident")
    ok(s, "set_terminal", doc=doc, node=leaf_ph, text="v")
    leaf = next(n for n, g in _rects(s, doc).items() if g["label"] == "v")
    info = ok(s, "node_info", doc=doc, node=leaf)
    assert info == {"kind": "leaf", "operator": "ident",
                    "expected_type": None, "text": "v",
                    "display": "expanded"}


def test_roundtrip_op(spec):
    s = Session(spec)
    p = ok(s, "roundtrip", text="(x)")
    assert not p["identical"]
    assert p["differences"][0]["category"] == "REDUNDANT_PARENS"


def test_serve_stdio_loop(spec):
    s = Session(spec)
    reqs = "\n".join([
        json.dumps({"id": 1, "op": "new_program", "args": {}}),
        json.dumps({"id": 2, "op": "shutdown", "args": {}}),
        json.dumps({"id": 3, "op": "new_program", "args": {}}),
    ]) + "\n"
    out = io.StringIO()
    serve_stdio(s, stdin=io.StringIO(reqs), stdout=out)
    lines = out.getvalue().strip().split("\n")
    assert len(lines) == 2  # shutdown stops the loop
    assert json.loads(lines[0])["id"] == 1


def test_run_external_cat(spec):
    s = Session(spec)
    doc_handle = build_complete_if(s)
    doc = s.docs[doc_handle]
    out = run_external(doc, "cat {}", spec)
    assert out.rstrip("\n") == cs.unparse(doc, spec)


def test_run_external_failure(spec):
    s = Session(spec)
    doc = s.docs[build_complete_if(s)]
    with pytest.raises(ExternalFailure) as exc:
        run_external(doc, "ls /definitely/not/here/{}", spec)
    assert exc.value.exit_code != 0


def test_run_external_incomplete(spec):
    from astedit.astcore import new_program

    with pytest.raises(IncompleteDocument):
        run_external(new_program(spec), "cat {}", spec)
