"""Editing sessions and the line-delimited request protocol.

A session owns the open documents, the cut buffer shared by every
window, the alias table, an optional document store, and one bounded
undo stack per document.  Requests and responses are single-line JSON
records; every request gets exactly one response carrying its id.
"""

from __future__ import annotations

import json
import socketserver
import subprocess
import sys
import tempfile
from pathlib import Path

from . import aliases as al
from . import concretesyntax as cs
from . import specgrammar as sg
from .astcore import AstDoc, CutBuffer, Display, Position, new_program
from .errors import (
    AsteditError,
    ExternalFailure,
    IncompleteDocument,
    ProtocolError,
)
from .layoutbox import LayoutMode, LayoutParams, layout_tree, pretty_print
from .store import Store

UNDO_DEPTH = 64


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True)


class Session:
    """One client's editing state; requests are handled strictly in order."""

    def __init__(self, spec: sg.GrammarSpec, store_path=None,
                 tab_width=2, hspace=12.0, vspace=16.0):
        self.spec = spec
        self.docs: dict[int, AstDoc] = {}
        self.next_handle = 1
        self.cut_buffer = CutBuffer()
        self.aliases = al.builtin_table(spec)
        self.store = Store(store_path) if store_path is not None else None
        self.undo_stacks: dict[int, list[str]] = {}
        self.tab_width = tab_width
        self.hspace = hspace
        self.vspace = vspace
        self.external_template = None
        self.closed = False

    # -- plumbing --

    def handle_line(self, line: str) -> str:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            return _json_line({
                "id": None, "status": "ERR",
                "error": {"message": "request is not valid JSON",
                          "kind": "PROTOCOL"},
            })
        return _json_line(self.handle_request(obj))

    def handle_request(self, obj) -> dict:
        rid = obj.get("id") if isinstance(obj, dict) else None
        try:
            if not isinstance(obj, dict):
                raise ProtocolError("request must be an object")
            op = obj.get("op")
            if not isinstance(op, str):
                raise ProtocolError("missing op")
            args = obj.get("args", {})
            if not isinstance(args, dict):
                raise ProtocolError("args must be an object")
            method = getattr(self, f"op_{op}", None)
            if method is None:
                raise ProtocolError(f"unknown op: {op}")
            payload = method(args)
            return {"id": rid, "status": "OK", "payload": payload}
        except AsteditError as err:
            return {"id": rid, "status": "ERR",
                    "error": {"message": str(err), "kind": err.kind}}

    # -- helpers --

    def _doc(self, args) -> tuple[int, AstDoc]:
        handle = args.get("doc")
        if handle not in self.docs:
            raise ProtocolError(f"unknown document handle: {handle}")
        return handle, self.docs[handle]

    def _register(self, doc: AstDoc) -> int:
        handle = self.next_handle
        self.next_handle += 1
        self.docs[handle] = doc
        self.undo_stacks[handle] = []
        return handle

    def _node_arg(self, doc: AstDoc, args, key="node"):
        nid = args.get(key)
        doc.node(nid)
        return nid

    def _mutate(self, handle, doc, fn):
        """Run a mutating edit; a failing edit restores the document and
        records nothing on the undo stack."""
        snapshot = doc.to_text()
        try:
            result = fn()
        except AsteditError:
            restored = AstDoc.from_text(snapshot, self.spec)
            doc.nodes = restored.nodes
            doc.root = restored.root
            doc.next_id = restored.next_id
            raise
        stack = self.undo_stacks[handle]
        stack.append(snapshot)
        del stack[:-UNDO_DEPTH]
        return result

    def _layout_params(self, args) -> LayoutParams:
        mode = args.get("mode", LayoutMode.VERTICAL_CENTERED.value)
        try:
            mode = LayoutMode(mode)
        except ValueError:
            raise ProtocolError(f"unknown layout mode: {mode}") from None
        try:
            return LayoutParams(
                mode=mode,
                hspace=float(args.get("hspace", self.hspace)),
                vspace=float(args.get("vspace", self.vspace)),
            )
        except (TypeError, ValueError) as err:
            raise ProtocolError(f"bad layout parameters: {err}") from None

    def _geometry(self, doc: AstDoc, params=None):
        params = params or LayoutParams(hspace=self.hspace, vspace=self.vspace)
        geo = layout_tree(doc, doc.root, params)
        return {"primitives": geo.to_wire(),
                "width": round(geo.bounds[0]), "height": round(geo.bounds[1])}

    # -- document ops --

    def op_new_program(self, args):
        doc = new_program(self.spec)
        handle = self._register(doc)
        return {"doc": handle, "root": doc.root,
                "geometry": self._geometry(doc)}

    def op_list_completions(self, args):
        _, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        return {"items": doc.list_completions(nid)}

    def op_node_info(self, args):
        _, doc = self._doc(args)
        n = doc.node(self._node_arg(doc, args))
        return {"kind": n.kind.value, "operator": n.operator,
                "expected_type": n.expected_type, "text": n.text,
                "display": n.display.value}

    def op_expand(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        choice = args.get("choice")
        new_id = self._mutate(handle, doc,
                              lambda: doc.expand_placeholder(nid, choice))
        return {"node": new_id}

    def op_set_terminal(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        self._mutate(handle, doc,
                     lambda: doc.set_terminal(nid, args.get("text", "")))
        return {}

    def op_copy(self, args):
        _, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        doc.copy(self.cut_buffer, nid)
        return {"root_type": self.cut_buffer.root_type}

    def op_cut(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        result = self._mutate(handle, doc,
                              lambda: doc.cut(self.cut_buffer, nid))
        return {"node": result, "root_type": self.cut_buffer.root_type}

    def op_paste(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        new_id = self._mutate(handle, doc,
                              lambda: doc.paste(self.cut_buffer, nid))
        return {"node": new_id}

    def op_replace(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        new_id = self._mutate(handle, doc,
                              lambda: doc.replace(self.cut_buffer, nid))
        return {"node": new_id}

    def op_collapse(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        result = self._mutate(
            handle, doc, lambda: doc.collapse_to_placeholder(nid)[0]
        )
        return {"node": result}

    def op_set_display(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        try:
            state = Display(args.get("state"))
        except ValueError:
            raise ProtocolError(f"unknown display state: {args.get('state')}") \
                from None
        scope = args.get("scope", "SIMPLE")
        if scope not in ("SIMPLE", "GLOBAL"):
            raise ProtocolError(f"unknown scope: {scope}")
        self._mutate(handle, doc, lambda: doc.set_display(nid, state, scope))
        return {}

    def op_attach_comment(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        try:
            position = Position(args.get("position"))
        except ValueError:
            raise ProtocolError(
                f"unknown position: {args.get('position')}") from None
        self._mutate(
            handle, doc,
            lambda: doc.attach_comment(nid, position, args.get("text", "")),
        )
        return {}

    def op_layout(self, args):
        _, doc = self._doc(args)
        return self._geometry(doc, self._layout_params(args))

    def op_pretty(self, args):
        _, doc = self._doc(args)
        text = pretty_print(doc, doc.root, self.spec,
                            tab_width=int(args.get("tab_width", self.tab_width)),
                            parenthesize=cs.demo_paren_policy)
        return {"text": text}

    def op_serialize(self, args):
        _, doc = self._doc(args)
        return {"text": doc.to_text()}

    def op_parse_subtree(self, args):
        handle, doc = self._doc(args)
        nid = self._node_arg(doc, args)
        text = args.get("text", "")
        if args.get("dry_run"):
            cs.parse_subtree(self.spec, doc, nid, text, dry_run=True)
            return {"ok": True}
        outcome = self._mutate(
            handle, doc, lambda: cs.parse_subtree(self.spec, doc, nid, text)
        )
        return {"sugar": [name for name, _ in outcome.sugar_events]}

    def op_roundtrip(self, args):
        report = cs.roundtrip_check(self.spec, args.get("text", ""))
        return {
            "identical": report.identical,
            "canonical": report.canonical,
            "differences": [
                {"category": d.category.value,
                 "span_original": list(d.span_original),
                 "span_canonical": list(d.span_canonical)}
                for d in report.differences
            ],
        }

    def op_undo(self, args):
        handle, doc = self._doc(args)
        stack = self.undo_stacks[handle]
        if not stack:
            raise ProtocolError("nothing to undo")
        restored = AstDoc.from_text(stack.pop(), self.spec)
        doc.nodes = restored.nodes
        doc.root = restored.root
        doc.next_id = restored.next_id
        return {"depth": len(stack)}

    # -- aliases --

    def op_alias_learn(self, args):
        return {"learned": al.learn_word(self.aliases, args.get("word", ""))}

    def op_alias_expand(self, args):
        prefix = args.get("prefix", "")
        if not prefix:
            raise ProtocolError("empty prefix")
        match = al.expand_prefix(self.aliases, prefix)
        out = {"kind": match.kind.value}
        if match.expansion is not None:
            out["expansion"] = match.expansion
        if match.candidates:
            out["candidates"] = list(match.candidates)
        return out

    def op_alias_import(self, args):
        added = al.import_module_aliases(self.aliases, args.get("text", ""),
                                         self.spec)
        return {"added": added}

    # -- store --

    def _store(self) -> Store:
        if self.store is None:
            raise ProtocolError("no store configured")
        return self.store

    def op_store_save(self, args):
        store = self._store()
        _, doc = self._doc(args)
        name = args.get("name") or store.default_name()
        store.save(name, doc, self.spec)
        return {"name": name}

    def op_store_load(self, args):
        store = self._store()
        doc = store.load(args.get("name", ""), self.spec)
        handle = self._register(doc)
        return {"doc": handle, "root": doc.root,
                "geometry": self._geometry(doc)}

    def op_store_list(self, args):
        return {"names": self._store().list_entries()}

    def op_store_delete(self, args):
        self._store().delete(args.get("name", ""))
        return {}

    def op_default_name(self, args):
        return {"name": self._store().default_name()}

    # -- misc --

    def op_run_external(self, args):
        _, doc = self._doc(args)
        template = args.get("template") or self.external_template
        if not template:
            raise ProtocolError("no external command configured")
        return {"output": run_external(doc, template, self.spec)}

    def op_shutdown(self, args):
        self.closed = True
        return {}


def run_external(doc: AstDoc, command_template: str,
                 spec: sg.GrammarSpec) -> str:
    """Write the unparsed text to a temp file, substitute its path for
    `{}` in the template, run it, and return the combined output."""
    if not doc.is_complete():
        raise IncompleteDocument("cannot run an incomplete document")
    text = cs.unparse(doc, spec)
    with tempfile.NamedTemporaryFile(
        "w", suffix=".stm", delete=False, encoding="utf-8"
    ) as fh:
        fh.write(text + "\n")
        path = fh.name
    try:
        proc = subprocess.run(
            command_template.replace("{}", path),
            shell=True, capture_output=True, text=True,
        )
    finally:
        Path(path).unlink(missing_ok=True)
    output = proc.stdout + proc.stderr
    if proc.returncode != 0:
        raise ExternalFailure(proc.returncode, output)
    return output


def serve_stdio(session: Session, stdin=None, stdout=None):
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(session.handle_line(line) + "\n")
        stdout.flush()
        if session.closed:
            break


def serve_tcp(spec, host, port, store_path=None, **session_kw):
    """One client at a time; each connection gets a fresh session."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = Session(spec, store_path=store_path, **session_kw)
            for raw in self.rfile:
                line = raw.decode("utf-8").strip()
                if not line:
                    continue
                self.wfile.write(
                    (session.handle_line(line) + "\n").encode("utf-8")
                )
                if session.closed:
                    break

    with socketserver.TCPServer((host, port), Handler) as server:
        server.allow_reuse_address = True
        server.serve_forever()
