"""Document generators shared by the test modules.

Random documents are grown top-down through the same placeholder menus
the editor exposes, so everything they produce is reachable by real
edits.  The exhaustive enumerator is bounded by a list-length cap, since
depth alone does not bound list width.
"""

from __future__ import annotations

import itertools

import astedit.specgrammar as sg
from astedit.astcore import (
    END_LIST,
    AstDoc,
    AstNode,
    Decoration,
    DecorationKind,
    Display,
    NodeKind,
    Position,
    new_program,
)

IDENT_POOL = ["x", "y", "f", "g", "acc", "n"]
INT_POOL = ["0", "1", "2", "42"]
STRING_POOL = ["s", "hello", "a b"]


def leaf_sample(rng, kind: sg.LexicalKind) -> str:
    if kind is sg.LexicalKind.INTEGER:
        return rng.choice(INT_POOL)
    if kind is sg.LexicalKind.IDENTIFIER:
        return rng.choice(IDENT_POOL)
    return rng.choice(STRING_POOL)


def min_heights(spec: sg.GrammarSpec) -> dict[str, int]:
    """Minimal completed-subtree height per grammar name (leaves = 1;
    empty list slots cost nothing)."""
    big = 10 ** 6
    h = {name: big for name in
         list(spec.class_map) + list(spec.production_map) + list(spec.leaf_map)}
    for name in spec.leaf_map:
        h[name] = 1
    changed = True
    while changed:
        changed = False
        for prod in spec.productions:
            worst = 0
            for slot in prod.slots:
                if slot.multiplicity is sg.Multiplicity.ONE:
                    worst = max(worst, h[slot.type_name])
            new = min(1 + worst, big)
            if new < h[prod.operator]:
                h[prod.operator] = new
                changed = True
        for cls in spec.classes:
            new = min(h[a] for a in cls.alternatives)
            if new < h[cls.name]:
                h[cls.name] = new
                changed = True
    return h


def node_depth(doc: AstDoc, nid) -> int:
    depth = 1
    loc = doc.parent_of(nid)
    while loc is not None:
        depth += 1
        loc = doc.parent_of(loc[0])
    return depth


def random_complete_doc(spec, rng, max_depth=6) -> AstDoc:
    doc = new_program(spec)
    mh = min_heights(spec)
    while True:
        phs = doc.placeholder_ids()
        if not phs:
            break
        pid = phs[0]
        node = doc.node(pid)
        depth = node_depth(doc, pid)
        menu = doc.list_completions(pid)
        choices = [c for c in menu if c != END_LIST]
        if END_LIST in menu:
            loc = doc.parent_of(pid)
            siblings = len(doc.node(loc[0]).slots[loc[1]]) - 1
            if depth >= max_depth or rng.random() < 0.35 + 0.25 * siblings:
                doc.expand_placeholder(pid, END_LIST)
                continue
        if depth >= max_depth:
            best = min(mh[c] for c in choices)
            choice = rng.choice([c for c in choices if mh[c] == best])
        else:
            choice = rng.choice(choices)
        new_id = doc.expand_placeholder(pid, choice)
        fresh = doc.node(new_id)
        if fresh.kind is NodeKind.LEAF and fresh.text is None:
            kind = spec.leaf_map[fresh.operator].lexical_kind
            doc.set_terminal(new_id, leaf_sample(rng, kind))
    return doc


def decorate_randomly(doc: AstDoc, rng, comment_rate=0.2, icon_rate=0.1):
    for nid in list(doc.nodes):
        if rng.random() < comment_rate:
            doc.node(nid).decorations.append(Decoration(
                rng.choice(list(DecorationKind)),
                rng.choice(list(Position)),
                rng.choice(["note", "todo", "v2 only", ""]),
            ))
        if nid != doc.root and rng.random() < icon_rate:
            doc.node(nid).display = rng.choice(list(Display))
    return doc


# -- exhaustive enumeration --------------------------------------------------

_LEAF_TEXT = {
    sg.LexicalKind.IDENTIFIER: "x",
    sg.LexicalKind.INTEGER: "1",
    sg.LexicalKind.STRING: "x",
}


def _structures(spec, name, depth, max_depth, list_cap, top_cap):
    if depth > max_depth:
        return []
    if name in spec.leaf_map:
        text = _LEAF_TEXT[spec.leaf_map[name].lexical_kind]
        return [("leaf", name, text)]
    if name in spec.class_map:
        out = []
        for alt in spec.class_map[name].alternatives:
            out.extend(_structures(spec, alt, depth, max_depth,
                                   list_cap, top_cap))
        return out
    prod = spec.production_map[name]
    per_slot = []
    for slot in prod.slots:
        options = _structures(spec, slot.type_name, depth + 1,
                              max_depth, list_cap, top_cap)
        if slot.multiplicity is sg.Multiplicity.ONE:
            per_slot.append([(opt,) for opt in options])
        else:
            cap = top_cap if name == spec.start_class else list_cap
            groups = [()]
            for k in range(1, cap + 1):
                groups.extend(itertools.product(options, repeat=k))
            per_slot.append(groups)
    out = []
    for combo in itertools.product(*per_slot):
        out.append(("op", name, combo))
    return out


def build_doc(spec, structure) -> AstDoc:
    doc = AstDoc(spec)

    def mk(s):
        if s[0] == "leaf":
            node = AstNode(doc._new_id(), NodeKind.LEAF,
                           operator=s[1], text=s[2])
            doc.nodes[node.id] = node
            return node.id
        node = AstNode(doc._new_id(), NodeKind.OPERATOR, operator=s[1])
        doc.nodes[node.id] = node
        node.slots = [[mk(c) for c in group] for group in s[2]]
        return node.id

    doc.root = mk(structure)
    return doc


def exhaustive_docs(spec, max_depth=3, list_cap=2, top_cap=1):
    """Every complete document of bounded height; list slots are capped
    (1 element at the program level, 2 inside) to keep the set finite."""
    for s in _structures(spec, spec.start_class, 1, max_depth,
                         list_cap, top_cap):
        yield build_doc(spec, s)
