"""Language-specification format: parsing, validation, completion menus.

A ``.absyn`` file declares one language: its syntactic classes, node
productions, terminal leaves, pretty rules and sugar rules.  The surface
syntax is line oriented::

    language staple-mini start prog
    class expression = literal | variable | if ;
    node if (cond: expression, then: expression, else: expression) ;
    leaf intlit : integer ;
    pretty if (#cond,#then,#else) -> #then '\\sp' "if" '\\sp' #cond '\\n'
        '\\tab+' "otherwise" '\\sp' #else '\\tab-' ;
    sugar elsevariant keyword_variant target if keywords "else" "otherwise" ;

``#`` starts a comment to end of line, except when immediately followed
by a letter (then it is a metavariable such as ``#cond``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .errors import SpecSyntaxError, UnknownClass


class Multiplicity(Enum):
    ONE = "one"
    LIST = "list"


class LexicalKind(Enum):
    INTEGER = "integer"
    IDENTIFIER = "identifier"
    STRING = "string"


class AtomKind(Enum):
    KEYWORD = "keyword"
    CHILD = "child"
    NEWLINE = "newline"
    TAB_PUSH = "tab_push"
    TAB_POP = "tab_pop"
    SPACE = "space"
    LIST_SEP = "list_sep"
    # Emits its text only when the referenced list slot holds exactly one
    # element.  Needed so one-element tuples print as "(x,)" and stay
    # distinguishable from redundant parentheses on re-parse.
    SINGLETON_MARK = "singleton_mark"


class SugarKind(Enum):
    GUARD_CASCADE = "guard_cascade"
    MULTI_DECL = "multi_decl"
    KEYWORD_VARIANT = "keyword_variant"
    REDUNDANT_PARENS = "redundant_parens"


@dataclass(frozen=True)
class Slot:
    name: str
    type_name: str
    multiplicity: Multiplicity


@dataclass(frozen=True)
class ClassRule:
    name: str
    alternatives: tuple[str, ...]


@dataclass(frozen=True)
class ProductionRule:
    operator: str
    slots: tuple[Slot, ...]

    def slot_index(self, name):
        for i, s in enumerate(self.slots):
            if s.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class LeafRule:
    operator: str
    lexical_kind: LexicalKind

    def accepts(self, text: str) -> bool:
        if self.lexical_kind is LexicalKind.INTEGER:
            return re.fullmatch(r"[0-9]+", text) is not None
        if self.lexical_kind is LexicalKind.IDENTIFIER:
            return re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", text) is not None
        return "\x00" not in text


@dataclass(frozen=True)
class FormatAtom:
    kind: AtomKind
    text: str | None = None
    metavar: str | None = None

    @staticmethod
    def keyword(text):
        return FormatAtom(AtomKind.KEYWORD, text=text)

    @staticmethod
    def child(metavar):
        return FormatAtom(AtomKind.CHILD, metavar=metavar)


NEWLINE = FormatAtom(AtomKind.NEWLINE)
TAB_PUSH = FormatAtom(AtomKind.TAB_PUSH)
TAB_POP = FormatAtom(AtomKind.TAB_POP)
SPACE = FormatAtom(AtomKind.SPACE)


@dataclass(frozen=True)
class PrettyRule:
    operator: str
    metavars: tuple[str, ...]
    format: tuple[FormatAtom, ...]


@dataclass(frozen=True)
class SugarRule:
    name: str
    kind: SugarKind
    target_operator: str
    surface_keywords: tuple[str, ...] = ()


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    reason: str

    def __str__(self):
        return f"{self.rule}: {self.reason}"


@dataclass
class GrammarSpec:
    """Immutable once constructed; lookup tables are built eagerly."""

    name: str
    classes: list[ClassRule]
    productions: list[ProductionRule]
    leaves: list[LeafRule]
    pretty_rules: list[PrettyRule]
    sugar_rules: list[SugarRule]
    start_class: str

    class_map: dict = field(init=False, repr=False, compare=False)
    production_map: dict = field(init=False, repr=False, compare=False)
    leaf_map: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.class_map = {c.name: c for c in self.classes}
        self.production_map = {p.operator: p for p in self.productions}
        self.leaf_map = {l.operator: l for l in self.leaves}

    def pretty_rule_for(self, operator):
        for r in self.pretty_rules:
            if r.operator == operator:
                return r
        return None

    def sugar_of_kind(self, kind: SugarKind):
        for r in self.sugar_rules:
            if r.kind is kind:
                return r
        return None

    def is_defined(self, name):
        return (
            name in self.class_map
            or name in self.production_map
            or name in self.leaf_map
        )


# ---------------------------------------------------------------------------
# Spec-file lexer
# ---------------------------------------------------------------------------

_SPEC_TOKEN = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>\#(?![A-Za-z_])[^\n]*)
    | (?P<metavar>\#[A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<badstring>")
    | (?P<quoted>'(?:[^'\\\n]|\\.)*')
    | (?P<arrow>->)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_-]*)
    | (?P<punct>[=|(),:;*])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex_spec(text):
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _SPEC_TOKEN.match(text, pos)
        if m is None:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group()
        if kind == "badstring":
            raise SpecSyntaxError("unterminated string", line, col)
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, raw, line, col))
        nl = raw.count("\n")
        if nl:
            line += nl
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    return toks


def _unescape(body):
    return body.encode().decode("unicode_escape")


def _escape(body):
    return body.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


# ---------------------------------------------------------------------------
# Spec-file parser
# ---------------------------------------------------------------------------


class _SpecParser:
    def __init__(self, text):
        self.toks = _lex_spec(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def error(self, message):
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else None
            raise SpecSyntaxError(
                message, last.line if last else 1, last.col if last else 1
            )
        raise SpecSyntaxError(message, t.line, t.col)

    def take(self, kind=None, text=None):
        t = self.peek()
        if t is None or (kind and t.kind != kind) or (text and t.text != text):
            want = text or kind or "token"
            self.error(f"expected {want}")
        self.pos += 1
        return t

    def at(self, kind=None, text=None):
        t = self.peek()
        return t is not None and (kind is None or t.kind == kind) and (
            text is None or t.text == text
        )

    def parse(self):
        name = None
        start = None
        classes, productions, leaves, pretties, sugars = [], [], [], [], []
        while self.peek() is not None:
            head = self.take("ident")
            if head.text == "language":
                name = self.take("ident").text
                self.take("ident", "start")
                start = self.take("ident").text
            elif head.text == "class":
                classes.append(self.parse_class())
            elif head.text == "node":
                productions.append(self.parse_node())
            elif head.text == "leaf":
                leaves.append(self.parse_leaf())
            elif head.text == "pretty":
                pretties.append(self.parse_pretty())
            elif head.text == "sugar":
                sugars.append(self.parse_sugar())
            else:
                self.pos -= 1
                self.error(f"unknown declaration {head.text!r}")
        if name is None or start is None:
            raise SpecSyntaxError("missing start declaration")
        return GrammarSpec(name, classes, productions, leaves, pretties, sugars, start)

    def parse_class(self):
        cname = self.take("ident").text
        self.take("punct", "=")
        alts = [self.take("ident").text]
        while self.at("punct", "|"):
            self.take()
            alts.append(self.take("ident").text)
        self.take("punct", ";")
        return ClassRule(cname, tuple(alts))

    def parse_node(self):
        op = self.take("ident").text
        self.take("punct", "(")
        slots = []
        if not self.at("punct", ")"):
            while True:
                sname = self.take("ident").text
                self.take("punct", ":")
                stype = self.take("ident").text
                mult = Multiplicity.ONE
                if self.at("punct", "*"):
                    self.take()
                    mult = Multiplicity.LIST
                slots.append(Slot(sname, stype, mult))
                if self.at("punct", ","):
                    self.take()
                    continue
                break
        self.take("punct", ")")
        self.take("punct", ";")
        return ProductionRule(op, tuple(slots))

    def parse_leaf(self):
        op = self.take("ident").text
        self.take("punct", ":")
        kind_tok = self.take("ident")
        try:
            kind = LexicalKind(kind_tok.text)
        except ValueError:
            self.pos -= 1
            self.error(f"unknown lexical kind {kind_tok.text!r}")
        self.take("punct", ";")
        return LeafRule(op, kind)

    def parse_pretty(self):
        op = self.take("ident").text
        self.take("punct", "(")
        metavars = []
        if not self.at("punct", ")"):
            while True:
                metavars.append(self.take("metavar").text[1:])
                if self.at("punct", ","):
                    self.take()
                    continue
                break
        self.take("punct", ")")
        self.take("arrow")
        atoms = []
        while not self.at("punct", ";"):
            atoms.append(self.parse_atom(metavars))
        self.take("punct", ";")
        return PrettyRule(op, tuple(metavars), tuple(atoms))

    def parse_atom(self, metavars):
        if self.at("string"):
            t = self.take()
            return FormatAtom.keyword(_unescape(t.text[1:-1]))
        if self.at("metavar"):
            t = self.take()
            mv = t.text[1:]
            if mv not in metavars:
                self.pos -= 1
                self.error(f"undeclared metavar #{mv}")
            return FormatAtom.child(mv)
        if self.at("quoted"):
            t = self.take()
            body = t.text[1:-1]
            table = {
                "\\n": NEWLINE,
                "\\tab+": TAB_PUSH,
                "\\tab-": TAB_POP,
                "\\sp": SPACE,
            }
            if body not in table:
                self.pos -= 1
                self.error(f"unknown format directive '{body}'")
            return table[body]
        if self.at("ident", "sep") or self.at("ident", "mark1"):
            which = self.take().text
            self.take("punct", "(")
            sep = _unescape(self.take("string").text[1:-1])
            self.take("punct", ",")
            mv = self.take("metavar").text[1:]
            if mv not in metavars:
                self.pos -= 1
                self.error(f"undeclared metavar #{mv}")
            self.take("punct", ")")
            kind = AtomKind.LIST_SEP if which == "sep" else AtomKind.SINGLETON_MARK
            return FormatAtom(kind, text=sep, metavar=mv)
        self.error("expected format atom")

    def parse_sugar(self):
        sname = self.take("ident").text
        kind_tok = self.take("ident")
        try:
            kind = SugarKind(kind_tok.text)
        except ValueError:
            self.pos -= 1
            self.error(f"unknown sugar kind {kind_tok.text!r}")
        self.take("ident", "target")
        target = self.take("ident").text
        keywords = []
        if self.at("ident", "keywords"):
            self.take()
            while self.at("string"):
                keywords.append(_unescape(self.take().text[1:-1]))
        self.take("punct", ";")
        return SugarRule(sname, kind, target, tuple(keywords))


def parse_spec(text: str) -> GrammarSpec:
    """Parse ``.absyn`` source into a :class:`GrammarSpec`.

    Raises :class:`SpecSyntaxError` on malformed input; never returns a
    partial spec.
    """
    return _SpecParser(text).parse()


# ---------------------------------------------------------------------------
# Canonical writer
# ---------------------------------------------------------------------------


def _atom_text(atom: FormatAtom) -> str:
    k = atom.kind
    if k is AtomKind.KEYWORD:
        return f'"{_escape(atom.text)}"'
    if k is AtomKind.CHILD:
        return f"#{atom.metavar}"
    if k is AtomKind.NEWLINE:
        return "'\\n'"
    if k is AtomKind.TAB_PUSH:
        return "'\\tab+'"
    if k is AtomKind.TAB_POP:
        return "'\\tab-'"
    if k is AtomKind.SPACE:
        return "'\\sp'"
    if k is AtomKind.LIST_SEP:
        return f'sep("{_escape(atom.text)}", #{atom.metavar})'
    return f'mark1("{_escape(atom.text)}", #{atom.metavar})'


def print_spec(spec: GrammarSpec) -> str:
    """Canonical writer: one declaration per line, single spaces, LF."""
    lines = [f"language {spec.name} start {spec.start_class}"]
    for c in spec.classes:
        lines.append(f"class {c.name} = {' | '.join(c.alternatives)} ;")
    for p in spec.productions:
        slots = ", ".join(
            f"{s.name}: {s.type_name}{'*' if s.multiplicity is Multiplicity.LIST else ''}"
            for s in p.slots
        )
        lines.append(f"node {p.operator} ({slots}) ;")
    for l in spec.leaves:
        lines.append(f"leaf {l.operator} : {l.lexical_kind.value} ;")
    for r in spec.pretty_rules:
        mvs = ",".join(f"#{m}" for m in r.metavars)
        atoms = " ".join(_atom_text(a) for a in r.format)
        lines.append(f"pretty {r.operator} ({mvs}) -> {atoms} ;")
    for s in spec.sugar_rules:
        kw = ""
        if s.surface_keywords:
            kw = " keywords " + " ".join(f'"{_escape(k)}"' for k in s.surface_keywords)
        lines.append(f"sugar {s.name} {s.kind.value} target {s.target_operator}{kw} ;")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _check_tab_balance(rule):
    depth = 0
    for atom in rule.format:
        if atom.kind is AtomKind.TAB_PUSH:
            depth += 1
        elif atom.kind is AtomKind.TAB_POP:
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def validate_spec(spec: GrammarSpec) -> list[Diagnostic]:
    """Check every GrammarSpec invariant; empty result means well formed."""
    out = []

    def diag(rule, reason):
        out.append(Diagnostic(rule, reason))

    seen = {}
    for kind, items in (
        ("class", spec.classes),
        ("node", spec.productions),
        ("leaf", spec.leaves),
    ):
        for item in items:
            nm = item.name if kind == "class" else item.operator
            if nm in seen:
                diag(nm, f"duplicate definition (already a {seen[nm]})")
            seen[nm] = kind

    for c in spec.classes:
        if not c.alternatives:
            diag(c.name, "class has no alternatives")
        dupes = {a for a in c.alternatives if c.alternatives.count(a) > 1}
        for d in sorted(dupes):
            diag(c.name, f"duplicate alternative {d}")
        for a in c.alternatives:
            if not spec.is_defined(a):
                diag(c.name, f"undefined alternative {a}")

    # cyclic class chains would make menus non-terminating
    def reaches(name, seen_classes):
        if name in seen_classes:
            return True
        c = spec.class_map.get(name)
        if c is None:
            return False
        return any(reaches(a, seen_classes | {name}) for a in c.alternatives)

    for c in spec.classes:
        if any(reaches(a, {c.name}) for a in c.alternatives):
            diag(c.name, "cyclic class chain")

    for p in spec.productions:
        names = [s.name for s in p.slots]
        if len(set(names)) != len(names):
            diag(p.operator, "duplicate slot names")
        for s in p.slots:
            if not spec.is_defined(s.type_name):
                diag(p.operator, f"undefined slot type {s.type_name}")

    by_op = {}
    for r in spec.pretty_rules:
        by_op.setdefault(r.operator, []).append(r)
    for op, rules in by_op.items():
        if len(rules) > 1:
            diag(op, f"duplicate pretty rule: {op}")
        prod = spec.production_map.get(op)
        if prod is None:
            diag(op, f"pretty rule for unknown production {op}")
            continue
        rule = rules[0]
        if len(rule.metavars) != len(prod.slots):
            diag(op, "metavar count does not match slot count")
        used = set()
        for atom in rule.format:
            if atom.metavar is not None:
                used.add(atom.metavar)
                if atom.kind in (AtomKind.LIST_SEP, AtomKind.SINGLETON_MARK):
                    idx = rule.metavars.index(atom.metavar) if atom.metavar in rule.metavars else -1
                    if 0 <= idx < len(prod.slots) and prod.slots[idx].multiplicity is not Multiplicity.LIST:
                        diag(op, f"sep references non-list slot #{atom.metavar}")
        for mv in rule.metavars:
            if mv not in used:
                diag(op, f"metavar #{mv} never used in format")
        if not _check_tab_balance(rule):
            diag(op, "unbalanced tab push/pop")
    for p in spec.productions:
        if p.operator not in by_op:
            diag(p.operator, "missing pretty rule")

    for s in spec.sugar_rules:
        if s.target_operator not in spec.production_map:
            diag(s.name, f"sugar target {s.target_operator} is not a production")

    if not spec.is_defined(spec.start_class):
        diag(spec.start_class, "start class undefined")
    return out


# ---------------------------------------------------------------------------
# Completion menus and class membership
# ---------------------------------------------------------------------------


def completions_of_class(spec: GrammarSpec, class_name: str) -> list[str]:
    """Menu entries for a syntactic category, in declaration order.

    A production or leaf name is its own single-entry menu.  Class
    alternatives are listed as declared; an alternative that is itself a
    class shows up under its class name and opens a submenu when chosen.
    """
    if class_name in spec.class_map:
        return list(spec.class_map[class_name].alternatives)
    if class_name in spec.production_map or class_name in spec.leaf_map:
        return [class_name]
    raise UnknownClass(class_name)


def class_members(spec: GrammarSpec, class_name: str) -> set[str]:
    """Transitive membership: every name acceptable where ``class_name``
    is expected, including intermediate class names and the name itself.
    """
    if not spec.is_defined(class_name):
        raise UnknownClass(class_name)
    members = set()
    stack = [class_name]
    while stack:
        n = stack.pop()
        if n in members:
            continue
        members.add(n)
        c = spec.class_map.get(n)
        if c is not None:
            stack.extend(c.alternatives)
    return members


# ---------------------------------------------------------------------------
# Bundled demo language
# ---------------------------------------------------------------------------

_demo_cache = None


def demo_spec_text() -> str:
    return (
        resources.files("astedit").joinpath("data/staple_mini.absyn").read_text("utf-8")
    )


def builtin_demo_spec() -> GrammarSpec:
    """The bundled "staple-mini" language (Miranda-like expressions)."""
    global _demo_cache
    if _demo_cache is None:
        _demo_cache = parse_spec(demo_spec_text())
    return _demo_cache
