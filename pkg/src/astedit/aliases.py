"""Alias tables for text-mode acceleration.

Three origins of aliases: keyword templates derived from the grammar's
pretty rules, words learned from whatever the user types, and function
signatures imported from a module.  Expansion is by case-sensitive
prefix, with an exact name match winning outright.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from . import specgrammar as sg
from .layoutbox import Emitter


class AliasOrigin(Enum):
    BUILTIN_KEYWORD = "builtin"
    LEARNED_WORD = "learned"
    MODULE_SIGNATURE = "module"


class MatchKind(Enum):
    UNIQUE = "UNIQUE"
    AMBIGUOUS = "AMBIGUOUS"
    NONE = "NONE"


@dataclass(frozen=True)
class AliasEntry:
    name: str
    expansion: str
    origin: AliasOrigin


@dataclass(frozen=True)
class Match:
    kind: MatchKind
    expansion: str | None = None
    candidates: tuple[str, ...] = ()


@dataclass
class AliasTable:
    entries: dict[str, AliasEntry] = field(default_factory=dict)

    def add(self, entry: AliasEntry):
        self.entries[entry.name] = entry


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

# Single letters never become aliases: they are almost always loop
# variables and would drown the table.
_MIN_LEARNED = 2


def _skeleton(spec: sg.GrammarSpec, rule: sg.PrettyRule) -> str:
    """The rule's surface shape with children blanked to slot marks."""
    prod = spec.production_map[rule.operator]
    slot_types = {s.name: s for s in prod.slots}
    out = Emitter(tab_width=2)
    for atom in rule.format:
        if atom.kind is sg.AtomKind.KEYWORD:
            out.token(atom.text)
        elif atom.kind is sg.AtomKind.CHILD:
            out.token(f"\u27e8{slot_types[atom.metavar].type_name}\u27e9")
        elif atom.kind is sg.AtomKind.LIST_SEP:
            out.token(f"\u27e8{slot_types[atom.metavar].type_name}*\u27e9")
        elif atom.kind is sg.AtomKind.NEWLINE:
            out.newline()
        elif atom.kind is sg.AtomKind.SPACE:
            out.space()
        elif atom.kind is sg.AtomKind.TAB_PUSH:
            out.indent += 1
        elif atom.kind is sg.AtomKind.TAB_POP:
            out.indent -= 1
        # singleton marks are a list-rendering nicety; skip
    return out.result()


def builtin_table(spec: sg.GrammarSpec) -> AliasTable:
    """One template alias per production that has concrete keywords,
    filed under the operator name and under every identifier-shaped
    keyword of its pretty rule."""
    table = AliasTable()
    for rule in spec.pretty_rules:
        keywords = [a.text for a in rule.format if a.kind is sg.AtomKind.KEYWORD]
        if not keywords:
            continue
        expansion = _skeleton(spec, rule)
        names = [rule.operator]
        for kw in keywords:
            for word in _IDENT.findall(kw):
                if word not in names:
                    names.append(word)
        for name in names:
            if name not in table.entries:
                table.add(AliasEntry(name, expansion, AliasOrigin.BUILTIN_KEYWORD))
    return table


def learn_word(table: AliasTable, word: str) -> bool:
    """Record a typed word as its own expansion.  Short or non-identifier
    words are ignored; builtins are never shadowed."""
    if len(word) < _MIN_LEARNED or not _IDENT.fullmatch(word):
        return False
    existing = table.entries.get(word)
    if existing is not None:
        return False
    table.add(AliasEntry(word, word, AliasOrigin.LEARNED_WORD))
    return True


def expand_prefix(table: AliasTable, prefix: str) -> Match:
    if prefix in table.entries:
        return Match(MatchKind.UNIQUE, table.entries[prefix].expansion)
    hits = [name for name in table.entries if name.startswith(prefix)]
    if not hits:
        return Match(MatchKind.NONE)
    if len(hits) == 1:
        return Match(MatchKind.UNIQUE, table.entries[hits[0]].expansion)
    return Match(MatchKind.AMBIGUOUS, candidates=tuple(hits))


def import_module_aliases(table: AliasTable, module_text: str,
                          spec: sg.GrammarSpec) -> int:
    """One signature alias per definition in the module: the name plus
    one argument mark per parameter.  Atomic: parse errors add nothing."""
    from .concretesyntax import parse_text

    outcome = parse_text(spec, module_text)
    doc = outcome.doc
    start = spec.production_map[spec.start_class]
    additions = []
    root = doc.node(doc.root)
    for si, slot in enumerate(start.slots):
        if slot.type_name != "define":
            continue
        for did in root.slots[si]:
            node = doc.node(did)
            dprod = spec.production_map["define"]
            idx = {s.name: i for i, s in enumerate(dprod.slots)}
            name = doc.node(node.slots[idx["name"]][0]).text
            params = node.slots[idx["params"]]
            expansion = " ".join([name] + ["\u27e8arg\u27e9"] * len(params))
            additions.append(AliasEntry(name, expansion,
                                        AliasOrigin.MODULE_SIGNATURE))
    added = 0
    for entry in additions:
        existing = table.entries.get(entry.name)
        if existing is not None and existing.origin is AliasOrigin.BUILTIN_KEYWORD:
            continue
        if existing is None:
            added += 1
        table.add(entry)
    return added


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out, i = [], 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text):
            out.append({"n": "\n", "t": "\t", "\\": "\\"}.get(text[i + 1],
                                                             text[i + 1]))
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def save_table(table: AliasTable, path) -> None:
    lines = [
        f"{e.origin.value}\t{_escape(e.name)}\t{_escape(e.expansion)}"
        for e in table.entries.values()
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def load_table(path) -> AliasTable:
    table = AliasTable()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            origin, name, expansion = line.split("\t", 2)
            table.add(AliasEntry(_unescape(name), _unescape(expansion),
                                 AliasOrigin(origin)))
    return table
