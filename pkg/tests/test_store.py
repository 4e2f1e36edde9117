import os
import random

import pytest

import astedit.store as store_mod
from astedit.astcore import AstDoc, new_program
from astedit.errors import IncompleteDocument, StoreError, UnknownName
from astedit.store import FileForm, Store, export_file, import_file
from genutil import decorate_randomly, random_complete_doc


@pytest.fixture
def st(tmp_path):
    return Store(tmp_path / "docs")


def make_doc(spec, seed=1):
    rng = random.Random(seed)
    return random_complete_doc(spec, rng, 4)


def test_save_load_roundtrip(spec, st):
    doc = make_doc(spec)
    st.save("one", doc, spec)
    again = st.load("one", spec)
    assert doc.structurally_equal(again)


def test_save_writes_text_repr_for_complete(spec, st):
    from astedit.concretesyntax import unparse

    doc = make_doc(spec)
    st.save("one", doc, spec)
    assert (st.root / "one.txt").read_text().rstrip("\n") == unparse(doc, spec)


def test_incomplete_doc_saves_without_text(spec, st):
    doc = new_program(spec)
    st.save("draft", doc, spec)
    assert not (st.root / "draft.txt").exists()
    assert st.load("draft", spec).structurally_equal(doc)


def test_overwrite_is_not_an_error(spec, st):
    a = make_doc(spec, 1)
    b = make_doc(spec, 2)
    st.save("same", a, spec)
    st.save("same", b, spec)
    assert st.load("same", spec).structurally_equal(b)


def test_load_missing(spec, st):
    with pytest.raises(UnknownName):
        st.load("missing", spec)


def test_delete(spec, st):
    st.save("gone", make_doc(spec), spec)
    st.delete("gone")
    assert st.list_entries() == []
    with pytest.raises(UnknownName):
        st.delete("gone")


def test_invalid_name(spec, st):
    with pytest.raises(StoreError):
        st.save("no/slashes", make_doc(spec), spec)


def test_listing_lexicographic(spec, st):
    for name in ["b", "a", "c10", "c2"]:
        st.save(name, make_doc(spec), spec)
    assert st.list_entries() == ["a", "b", "c10", "c2"]


def test_default_name_skips_taken(spec, st):
    assert st.default_name() == "prog-1"
    st.save("prog-1", make_doc(spec), spec)
    st.save("prog-3", make_doc(spec), spec)
    assert st.default_name() == "prog-2"


def test_index_has_spec_and_timestamp(spec, st):
    st.save("x", make_doc(spec), spec)
    entries = st._read_index()
    assert entries["x"].spec_name == spec.name
    assert "T" in entries["x"].saved_at  # ISO-8601


def test_decorations_and_display_survive(spec, st):
    rng = random.Random(5)
    doc = decorate_randomly(make_doc(spec, 5), rng)
    st.save("dec", doc, spec)
    again = st.load("dec", spec)
    assert doc.structurally_equal(again)
    assert again.to_text() == doc.to_text()


def test_crash_between_write_and_rename(spec, st, monkeypatch):
    doc = make_doc(spec, 1)
    st.save("safe", doc, spec)
    before = (st.root / "safe.ast").read_text()

    real_replace = os.replace
    calls = {"n": 0}

    def boom(src, dst):
        calls["n"] += 1
        raise OSError("simulated crash before rename")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(StoreError):
        st.save("safe", make_doc(spec, 2), spec)
    monkeypatch.setattr(os, "replace", real_replace)

    assert calls["n"] >= 1
    assert (st.root / "safe.ast").read_text() == before
    assert st.load("safe", spec).structurally_equal(doc)
    # lock was released; the store still works
    st.save("safe2", make_doc(spec, 3), spec)


def test_lock_blocks_second_writer(spec, st):
    st._acquire_lock()
    try:
        with pytest.raises(StoreError):
            st.save("x", make_doc(spec), spec)
    finally:
        st._release_lock()


def test_export_import_ast(spec, tmp_path):
    doc = make_doc(spec)
    path = tmp_path / "out.ast"
    export_file(doc, path, FileForm.AST, spec)
    again = import_file(path, FileForm.AST, spec)
    assert doc.structurally_equal(again)


def test_export_import_text(spec, tmp_path):
    doc = make_doc(spec)
    path = tmp_path / "out.stm"
    export_file(doc, path, FileForm.TEXT, spec)
    again = import_file(path, FileForm.TEXT, spec)
    assert doc.structurally_equal(again)


def test_export_text_requires_complete(spec, tmp_path):
    with pytest.raises(IncompleteDocument):
        export_file(new_program(spec), tmp_path / "x.stm", FileForm.TEXT, spec)


def test_interleaved_saves_and_deletes(spec, st):
    rng = random.Random(0)
    alive = {}
    for i in range(40):
        if alive and rng.random() < 0.3:
            name = rng.choice(sorted(alive))
            st.delete(name)
            del alive[name]
        else:
            name = f"d{rng.randrange(10)}"
            doc = make_doc(spec, i)
            st.save(name, doc, spec)
            alive[name] = doc
        assert st.list_entries() == sorted(alive)
    for name, doc in alive.items():
        assert st.load(name, spec).structurally_equal(doc)
