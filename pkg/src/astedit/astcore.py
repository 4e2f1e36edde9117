"""The editable decorated-AST document.

A document is a tree of operator nodes, terminal leaves and typed
placeholders.  Placeholders are expanded from completion menus; list
slots stay open through a trailing list placeholder until the user picks
the synthetic "end list" entry.  All structural edits go through the
methods here so the grammar invariants hold after every operation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from . import specgrammar as sg
from .errors import (
    EmptyBuffer,
    InvalidChoice,
    InvalidSpec,
    IsRoot,
    LexicalError,
    NotAPlaceholder,
    ParseError,
    TypeMismatch,
    UnknownNode,
)

END_LIST = "end list"


class NodeKind(Enum):
    PLACEHOLDER = "placeholder"
    OPERATOR = "operator"
    LEAF = "leaf"


class Display(Enum):
    EXPANDED = "expanded"
    ICONIFIED_GRAPHIC = "iconified_graphic"
    ICONIFIED_TEXT = "iconified_text"


class DecorationKind(Enum):
    COMMENT = "comment"
    ANNOTATION = "annotation"


class Position(Enum):
    BEFORE = "before"
    ONTO = "onto"
    AFTER = "after"


@dataclass
class Decoration:
    kind: DecorationKind
    position: Position
    payload: str


@dataclass
class AstNode:
    id: int
    kind: NodeKind
    operator: str | None = None  # OPERATOR / LEAF
    expected_type: str | None = None  # PLACEHOLDER
    multiplicity: sg.Multiplicity = sg.Multiplicity.ONE
    text: str | None = None  # LEAF; None while terminal entry is pending
    slots: list[list[int]] = field(default_factory=list)
    display: Display = Display.EXPANDED
    decorations: list[Decoration] = field(default_factory=list)

    @property
    def children(self) -> list[int]:
        return [c for group in self.slots for c in group]


@dataclass
class CutBuffer:
    """Session-wide buffer; holds a detached subtree in serialized form."""

    content: str | None = None
    root_type: str | None = None

    def fill(self, content, root_type):
        self.content = content
        self.root_type = root_type


class AstDoc:
    def __init__(self, spec: sg.GrammarSpec):
        self.spec = spec
        self.spec_name = spec.name
        self.nodes: dict[int, AstNode] = {}
        self.root: int | None = None
        self.next_id = 1

    # -- basic plumbing ----------------------------------------------------

    def _new_id(self):
        nid = self.next_id
        self.next_id += 1
        return nid

    def node(self, nid) -> AstNode:
        n = self.nodes.get(nid)
        if n is None:
            raise UnknownNode(f"no node {nid}")
        return n

    def _add(self, node: AstNode):
        self.nodes[node.id] = node
        return node.id

    def _placeholder(self, expected, mult=sg.Multiplicity.ONE):
        return self._add(
            AstNode(self._new_id(), NodeKind.PLACEHOLDER, expected_type=expected,
                    multiplicity=mult)
        )

    def parent_of(self, nid):
        """(parent_id, slot_index, position) or None for the root."""
        for p in self.nodes.values():
            for si, group in enumerate(p.slots):
                if nid in group:
                    return p.id, si, group.index(nid)
        return None

    def slot_type_of(self, nid):
        """Declared (type_name, multiplicity) of the slot holding nid."""
        loc = self.parent_of(nid)
        if loc is None:
            return self.spec.start_class, sg.Multiplicity.ONE
        pid, si, _ = loc
        prod = self.spec.production_map[self.node(pid).operator]
        slot = prod.slots[si]
        return slot.type_name, slot.multiplicity

    def subtree_ids(self, nid):
        out = [nid]
        for c in self.node(nid).children:
            out.extend(self.subtree_ids(c))
        return out

    def _delete_subtree(self, nid):
        for i in self.subtree_ids(nid):
            del self.nodes[i]

    def is_complete(self):
        return all(
            n.kind is not NodeKind.PLACEHOLDER
            and not (n.kind is NodeKind.LEAF and n.text is None)
            for n in self.nodes.values()
        )

    def placeholder_ids(self):
        return [n.id for n in self.nodes.values() if n.kind is NodeKind.PLACEHOLDER]

    # -- editing operations ------------------------------------------------

    def list_completions(self, target):
        n = self.node(target)
        if n.kind is not NodeKind.PLACEHOLDER:
            raise NotAPlaceholder(f"node {target} is a {n.kind.value}")
        items = sg.completions_of_class(self.spec, n.expected_type)
        if n.multiplicity is sg.Multiplicity.LIST:
            items = items + [END_LIST]
        return items

    def _instantiate(self, choice):
        """Fresh node for a menu choice: operator with slot placeholders,
        pending leaf, or a retyped placeholder for a class choice."""
        if choice in self.spec.production_map:
            prod = self.spec.production_map[choice]
            groups = []
            for slot in prod.slots:
                if slot.multiplicity is sg.Multiplicity.LIST:
                    groups.append([self._placeholder(slot.type_name, sg.Multiplicity.LIST)])
                else:
                    groups.append([self._placeholder(slot.type_name)])
            return self._add(AstNode(self._new_id(), NodeKind.OPERATOR,
                                     operator=choice, slots=groups))
        if choice in self.spec.leaf_map:
            return self._add(AstNode(self._new_id(), NodeKind.LEAF, operator=choice))
        # class choice: placeholder narrows to the chosen class (submenu)
        return self._placeholder(choice)

    def expand_placeholder(self, target, choice):
        n = self.node(target)
        if n.kind is not NodeKind.PLACEHOLDER:
            raise NotAPlaceholder(f"node {target} is a {n.kind.value}")
        menu = self.list_completions(target)
        if choice not in menu:
            raise InvalidChoice(f"{choice!r} is not a completion of {n.expected_type}")
        loc = self.parent_of(target)
        if choice == END_LIST:
            pid, si, pos = loc
            self.node(pid).slots[si].pop(pos)
            del self.nodes[target]
            return pid
        new_id = self._instantiate(choice)
        if n.multiplicity is sg.Multiplicity.LIST:
            pid, si, pos = loc
            self.node(pid).slots[si].insert(pos, new_id)
            return new_id
        if loc is None:
            self.root = new_id
        else:
            pid, si, pos = loc
            self.node(pid).slots[si][pos] = new_id
        del self.nodes[target]
        return new_id

    def set_terminal(self, target, text):
        n = self.node(target)
        if n.kind is NodeKind.PLACEHOLDER and n.expected_type in self.spec.leaf_map:
            # leaf-typed placeholder: expand implicitly, then set the text
            target = self.expand_placeholder(target, n.expected_type)
            n = self.node(target)
        if n.kind is not NodeKind.LEAF:
            raise NotAPlaceholder(f"node {target} is not a terminal")
        rule = self.spec.leaf_map[n.operator]
        if not rule.accepts(text):
            raise LexicalError(
                f"{text!r} is not a valid {rule.lexical_kind.value} for {n.operator}"
            )
        n.text = text

    def _remove_or_collapse(self, target):
        """Shared removal logic for cut/collapse.  List elements are
        removed outright; ONE slots get a fresh placeholder back."""
        loc = self.parent_of(target)
        if loc is None:
            raise IsRoot("cannot remove the document root")
        pid, si, pos = loc
        parent = self.node(pid)
        prod = self.spec.production_map[parent.operator]
        slot = prod.slots[si]
        removed = self.serialize_subtree(target)
        if slot.multiplicity is sg.Multiplicity.LIST:
            parent.slots[si].pop(pos)
            self._delete_subtree(target)
            return pid, removed
        ph = self._placeholder(slot.type_name)
        parent.slots[si][pos] = ph
        self._delete_subtree(target)
        return ph, removed

    def copy(self, buffer: CutBuffer, target):
        n = self.node(target)
        buffer.fill(self.serialize_subtree(target), self._root_type_of(n))

    def cut(self, buffer: CutBuffer, target):
        n = self.node(target)
        content = self.serialize_subtree(target)
        root_type = self._root_type_of(n)
        result, _ = self._remove_or_collapse(target)
        buffer.fill(content, root_type)
        return result

    def _root_type_of(self, n: AstNode):
        if n.kind is NodeKind.PLACEHOLDER:
            return n.expected_type
        return n.operator

    def _accepts(self, expected, root_type):
        return root_type == expected or root_type in sg.class_members(self.spec, expected)

    def paste(self, buffer: CutBuffer, target):
        n = self.node(target)
        if n.kind is not NodeKind.PLACEHOLDER:
            raise NotAPlaceholder(f"node {target} is a {n.kind.value}")
        if buffer.content is None:
            raise EmptyBuffer("cut buffer is empty")
        if not self._accepts(n.expected_type, buffer.root_type):
            raise TypeMismatch(
                f"buffer holds a {buffer.root_type}, slot expects {n.expected_type}"
            )
        new_id = self._read_fragment(buffer.content)
        loc = self.parent_of(target)
        if n.multiplicity is sg.Multiplicity.LIST:
            pid, si, pos = loc
            self.node(pid).slots[si].insert(pos, new_id)
            return new_id
        if loc is None:
            self.root = new_id
        else:
            pid, si, pos = loc
            self.node(pid).slots[si][pos] = new_id
        del self.nodes[target]
        return new_id

    def replace(self, buffer: CutBuffer, target):
        n = self.node(target)
        if buffer.content is None:
            raise EmptyBuffer("cut buffer is empty")
        expected, _ = self.slot_type_of(target)
        if not self._accepts(expected, buffer.root_type):
            raise TypeMismatch(
                f"buffer holds a {buffer.root_type}, slot expects {expected}"
            )
        new_id = self._read_fragment(buffer.content)
        loc = self.parent_of(target)
        if loc is None:
            self.root = new_id
        else:
            pid, si, pos = loc
            self.node(pid).slots[si][pos] = new_id
        self._delete_subtree(target)
        return new_id

    def collapse_to_placeholder(self, target):
        """Destructive removal; returns (result id, removed subtree text)
        so callers can offer undo."""
        return self._remove_or_collapse(target)

    def set_display(self, target, state: Display, scope="SIMPLE"):
        ids = [target] if scope == "SIMPLE" else self.subtree_ids(target)
        for nid in ids:
            self.node(nid).display = state

    def attach_comment(self, target, position: Position, text):
        self.node(target).decorations.append(
            Decoration(DecorationKind.COMMENT, position, text)
        )

    # -- integrity ---------------------------------------------------------

    def validate(self):
        """Check every document invariant; returns a list of problems."""
        problems = []
        if self.root not in self.nodes:
            return ["root missing"]
        seen = set()

        def walk(nid):
            if nid in seen:
                problems.append(f"node {nid} reachable twice")
                return
            seen.add(nid)
            n = self.nodes.get(nid)
            if n is None:
                problems.append(f"dangling child id {nid}")
                return
            if n.kind in (NodeKind.PLACEHOLDER, NodeKind.LEAF) and n.children:
                problems.append(f"{n.kind.value} node {nid} has children")
            if n.kind is NodeKind.LEAF:
                rule = self.spec.leaf_map.get(n.operator)
                if rule is None:
                    problems.append(f"unknown leaf operator {n.operator}")
                elif n.text is not None and not rule.accepts(n.text):
                    problems.append(f"leaf {nid} text {n.text!r} fails predicate")
            if n.kind is NodeKind.OPERATOR:
                prod = self.spec.production_map.get(n.operator)
                if prod is None:
                    problems.append(f"unknown operator {n.operator}")
                elif len(n.slots) != len(prod.slots):
                    problems.append(f"node {nid} slot group count mismatch")
                else:
                    for slot, group in zip(prod.slots, n.slots):
                        if slot.multiplicity is sg.Multiplicity.ONE and len(group) != 1:
                            problems.append(
                                f"node {nid} slot {slot.name} holds {len(group)} children"
                            )
                        for cid in group:
                            c = self.nodes.get(cid)
                            if c is None:
                                problems.append(f"dangling child id {cid}")
                                continue
                            t = self._root_type_of(c)
                            if not self._accepts(slot.type_name, t) and not (
                                c.kind is NodeKind.PLACEHOLDER
                                and self._accepts(slot.type_name, c.expected_type)
                            ):
                                problems.append(
                                    f"node {cid} ({t}) not valid in slot {slot.name}"
                                )
            for cid in n.children:
                walk(cid)

        walk(self.root)
        unreachable = set(self.nodes) - seen
        if unreachable:
            problems.append(f"unreachable nodes {sorted(unreachable)}")
        return problems

    # -- canonical text form ----------------------------------------------

    def to_text(self):
        return _write_form(self, self.root)

    def serialize_subtree(self, nid):
        return _write_form(self, nid)

    def _read_fragment(self, text):
        """Materialize serialized form into this doc with fresh ids."""
        return _Reader(text, self).read_into()

    @classmethod
    def from_text(cls, text, spec):
        doc = cls(spec)
        doc.root = doc._read_fragment(text.strip())
        return doc

    def structurally_equal(self, other):
        return self.to_text() == other.to_text()


def new_program(spec: sg.GrammarSpec) -> AstDoc:
    """Fresh document: the start production with one placeholder per slot."""
    if sg.validate_spec(spec):
        raise InvalidSpec("; ".join(str(d) for d in sg.validate_spec(spec)))
    doc = AstDoc(spec)
    start = spec.start_class
    if start in spec.leaf_map:
        doc.root = doc._placeholder(start)
        return doc
    if start in spec.production_map:
        doc.root = doc._instantiate(start)
        return doc
    doc.root = doc._placeholder(start)
    return doc


# ---------------------------------------------------------------------------
# Canonical parenthesized text form
# ---------------------------------------------------------------------------

_FLAGS = {Display.ICONIFIED_GRAPHIC: "!g", Display.ICONIFIED_TEXT: "!t"}


def _quote(text):
    body = (
        text.replace("\\", "\\\\").replace('"', '\\"')
        .replace("\n", "\\n").replace("\t", "\\t")
    )
    return f'"{body}"'


def _dec_form(d: Decoration):
    return f"@({d.kind.value} {d.position.value} {_quote(d.payload)})"


def _write_form(doc: AstDoc, nid):
    n = doc.node(nid)
    decs = [_dec_form(d) for d in n.decorations]
    flag = [_FLAGS[n.display]] if n.display in _FLAGS else []
    if n.kind is NodeKind.PLACEHOLDER:
        star = "*" if n.multiplicity is sg.Multiplicity.LIST else ""
        inner = " ".join([f"?{n.expected_type}{star}"] + flag + decs)
        return f"({inner})"
    if n.kind is NodeKind.LEAF:
        payload = "?" if n.text is None else _quote(n.text)
        inner = " ".join([n.operator] + flag + decs + [payload])
        return f"({inner})"
    prod = doc.spec.production_map[n.operator]
    parts = [n.operator] + flag + decs
    for slot, group in zip(prod.slots, n.slots):
        if slot.multiplicity is sg.Multiplicity.LIST:
            items = " ".join(_write_child(doc, c, slot) for c in group)
            parts.append(f"(list {items})" if items else "(list)")
        else:
            parts.append(_write_child(doc, group[0], slot))
    return f"({' '.join(parts)})"


def _write_child(doc: AstDoc, cid, slot: sg.Slot):
    # leaf-typed slots inline plain leaves as a bare quoted string
    c = doc.node(cid)
    if (
        c.kind is NodeKind.LEAF
        and slot.type_name in doc.spec.leaf_map
        and not c.decorations
        and c.display is Display.EXPANDED
    ):
        return "?" if c.text is None else _quote(c.text)
    return _write_form(doc, cid)


_AST_TOKEN = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<open>\()
    | (?P<close>\))
    | (?P<dec>@\()
    | (?P<string>"(?:[^"\\]|\\.)*")
    | (?P<atom>[?!]?[A-Za-z_][A-Za-z0-9_]*\*?|\?)
    """,
    re.VERBOSE,
)


def _unquote(tok):
    body = tok[1:-1]
    out, i = [], 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append({"n": "\n", "t": "\t"}.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Reader:
    def __init__(self, text, doc: AstDoc):
        self.doc = doc
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _AST_TOKEN.match(text, pos)
            if m is None:
                raise ParseError("bad AST text form", (pos, pos + 1))
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group()))
            pos = m.end()
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self, kind=None):
        k, t = self.peek()
        if k is None or (kind and k != kind):
            raise ParseError(f"expected {kind or 'token'} in AST form", (self.pos, self.pos))
        self.pos += 1
        return k, t

    def read_into(self):
        nid = self.read_form()
        if self.pos != len(self.toks):
            raise ParseError("trailing tokens in AST form", (self.pos, self.pos))
        return nid

    def read_decorations(self, node: AstNode):
        while self.peek()[0] == "dec":
            self.take()
            _, kind = self.take("atom")
            _, position = self.take("atom")
            _, payload = self.take("string")
            self.take("close")
            node.decorations.append(
                Decoration(DecorationKind(kind), Position(position), _unquote(payload))
            )

    def read_flags(self, node: AstNode):
        while self.peek() == ("atom", "!g") or self.peek() == ("atom", "!t"):
            _, t = self.take()
            node.display = (
                Display.ICONIFIED_GRAPHIC if t == "!g" else Display.ICONIFIED_TEXT
            )

    def read_form(self):
        doc = self.doc
        self.take("open")
        _, head = self.take("atom")
        if head.startswith("?"):
            expected = head[1:]
            mult = sg.Multiplicity.ONE
            if expected.endswith("*"):
                expected = expected[:-1]
                mult = sg.Multiplicity.LIST
            if not doc.spec.is_defined(expected):
                raise ParseError(f"unknown placeholder type {expected}", (0, 0))
            node = AstNode(doc._new_id(), NodeKind.PLACEHOLDER,
                           expected_type=expected, multiplicity=mult)
            doc.nodes[node.id] = node
            self.read_flags(node)
            self.read_decorations(node)
            self.take("close")
            return node.id
        if head in doc.spec.leaf_map:
            node = AstNode(doc._new_id(), NodeKind.LEAF, operator=head)
            doc.nodes[node.id] = node
            self.read_flags(node)
            self.read_decorations(node)
            k, t = self.take()
            if k == "string":
                node.text = _unquote(t)
                rule = doc.spec.leaf_map[head]
                if not rule.accepts(node.text):
                    raise ParseError(f"leaf text {node.text!r} fails predicate", (0, 0))
            elif (k, t) != ("atom", "?"):
                raise ParseError("expected leaf payload", (0, 0))
            self.take("close")
            return node.id
        prod = doc.spec.production_map.get(head)
        if prod is None:
            raise ParseError(f"unknown operator {head}", (0, 0))
        node = AstNode(doc._new_id(), NodeKind.OPERATOR, operator=head)
        doc.nodes[node.id] = node
        self.read_flags(node)
        self.read_decorations(node)
        for slot in prod.slots:
            if slot.multiplicity is sg.Multiplicity.LIST:
                self.take("open")
                k, t = self.take("atom")
                if t != "list":
                    raise ParseError("expected (list ...) for list slot", (0, 0))
                group = []
                while self.peek()[0] != "close":
                    group.append(self.read_slot_item(slot))
                self.take("close")
                node.slots.append(group)
            else:
                node.slots.append([self.read_slot_item(slot)])
        self.take("close")
        return node.id

    def read_slot_item(self, slot: sg.Slot):
        doc = self.doc
        k, t = self.peek()
        if k in ("string",) or (k, t) == ("atom", "?"):
            # bare leaf shorthand in a leaf-typed slot
            if slot.type_name not in doc.spec.leaf_map:
                raise ParseError(f"bare leaf in non-leaf slot {slot.name}", (0, 0))
            self.take()
            node = AstNode(doc._new_id(), NodeKind.LEAF, operator=slot.type_name)
            if k == "string":
                node.text = _unquote(t)
                if not doc.spec.leaf_map[slot.type_name].accepts(node.text):
                    raise ParseError(f"leaf text {node.text!r} fails predicate", (0, 0))
            doc.nodes[node.id] = node
            return node.id
        return self.read_form()
