"""Concrete text <-> AST for the bundled demo language.

The parser is spec guided: keywords come from the pretty rules, sugar
forms are enabled by the spec's sugar rules.  Unparsing delegates to the
pretty printer with a hand-specified parenthesization policy, so parsing
the canonical text of any complete document reproduces the document.
The roundtrip checker reports and classifies everything the canonical
form loses: redundant parentheses, guard cascades, multi-identifier
declarations, keyword variants and trivia.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from enum import Enum

from . import specgrammar as sg
from .astcore import (
    AstDoc,
    AstNode,
    Decoration,
    DecorationKind,
    NodeKind,
    Position,
)
from .errors import ClassMismatch, IncompleteDocument, LexicalError, ParseError
from .layoutbox import pretty_print


# ---------------------------------------------------------------------------
# Tokens and trivia
# ---------------------------------------------------------------------------


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    INT = "int"
    STRING = "string"
    PUNCT = "punct"


class TriviaKind(Enum):
    COMMENT = "comment"
    BLANK_RUN = "blank_run"
    NEWLINE_RUN = "newline_run"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: tuple[int, int]


@dataclass(frozen=True)
class Trivia:
    kind: TriviaKind
    text: str
    span: tuple[int, int]
    anchor: int  # index of the token this trivia precedes; len(tokens) = END


_LEX = re.compile(
    r"""
      (?P<comment>\|\|[^\n]*)
    | (?P<newlines>\n+)
    | (?P<blanks>[ \t\r]+)
    | (?P<punct2>->|<-|//)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<badstring>"(?:[^"\\\n]|\\.)*)
    | (?P<int>[0-9]+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>[()\[\],;:=|])
    """,
    re.VERBOSE,
)

_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def keywords_of(spec: sg.GrammarSpec) -> set[str]:
    """Reserved words: identifier-shaped pieces of pretty-rule keywords
    plus identifier-shaped sugar surface keywords."""
    words = set()
    for rule in spec.pretty_rules:
        for atom in rule.format:
            if atom.kind is sg.AtomKind.KEYWORD:
                words.update(_WORD.findall(atom.text))
    for s in spec.sugar_rules:
        for k in s.surface_keywords:
            if _WORD.fullmatch(k):
                words.add(k)
    return words


def tokenize(text: str, spec: sg.GrammarSpec | None = None):
    """Lossless scan: (tokens, trivia); concatenating both in span order
    reproduces the input byte for byte."""
    keywords = keywords_of(spec) if spec is not None else set()
    tokens, trivia = [], []
    pos = 0
    pending = []  # (kind, text, span) awaiting their anchor
    while pos < len(text):
        m = _LEX.match(text, pos)
        if m is None:
            raise LexicalError(
                f"unexpected character {text[pos]!r}", (pos, pos + 1)
            )
        kind = m.lastgroup
        raw = m.group()
        span = (pos, m.end())
        if kind == "badstring":
            raise LexicalError("unterminated string", span)
        if kind == "comment":
            pending.append((TriviaKind.COMMENT, raw, span))
        elif kind == "newlines":
            pending.append((TriviaKind.NEWLINE_RUN, raw, span))
        elif kind == "blanks":
            pending.append((TriviaKind.BLANK_RUN, raw, span))
        else:
            for tk, tt, ts in pending:
                trivia.append(Trivia(tk, tt, ts, len(tokens)))
            pending = []
            if kind == "int":
                tokens.append(Token(TokenKind.INT, raw, span))
            elif kind == "string":
                tokens.append(Token(TokenKind.STRING, raw, span))
            elif kind == "ident":
                tk = TokenKind.KEYWORD if raw in keywords else TokenKind.IDENT
                tokens.append(Token(tk, raw, span))
            else:
                tokens.append(Token(TokenKind.PUNCT, raw, span))
        pos = m.end()
    for tk, tt, ts in pending:
        trivia.append(Trivia(tk, tt, ts, len(tokens)))
    return tokens, trivia


def _unquote_string(raw):
    body = raw[1:-1]
    out, i = [], 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            out.append({"n": "\n", "t": "\t"}.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# Parse results
# ---------------------------------------------------------------------------


class DiffCategory(Enum):
    REDUNDANT_PARENS = "REDUNDANT_PARENS"
    SUGAR_GUARD = "SUGAR_GUARD"
    SUGAR_MULTI_DECL = "SUGAR_MULTI_DECL"
    KEYWORD_VARIANT = "KEYWORD_VARIANT"
    TRIVIA = "TRIVIA"


_EVENT_CATEGORY = {
    sg.SugarKind.GUARD_CASCADE: DiffCategory.SUGAR_GUARD,
    sg.SugarKind.MULTI_DECL: DiffCategory.SUGAR_MULTI_DECL,
    sg.SugarKind.KEYWORD_VARIANT: DiffCategory.KEYWORD_VARIANT,
    sg.SugarKind.REDUNDANT_PARENS: DiffCategory.REDUNDANT_PARENS,
}


@dataclass
class ParseOutcome:
    doc: AstDoc
    sugar_events: list = field(default_factory=list)  # (rule name, char span)
    trivia_attachments: list = field(default_factory=list)  # (node id, Decoration)
    errors: list = field(default_factory=list)


@dataclass
class Difference:
    span_original: tuple[int, int]
    span_canonical: tuple[int, int]
    category: DiffCategory


@dataclass
class RoundtripReport:
    original: str
    canonical: str
    identical: bool
    differences: list[Difference]

    def counts(self):
        out = {}
        for d in self.differences:
            out[d.category.value] = out.get(d.category.value, 0) + 1
        return out

    def to_text(self):
        lines = []
        for d in self.differences:
            a, b = d.span_original
            c, e = d.span_canonical
            lines.append(f"{d.category.value}  orig[{a}..{b}] -> canon[{c}..{e}]")
        for cat in sorted(self.counts()):
            lines.append(f"total {cat}: {self.counts()[cat]}")
        lines.append("identical" if self.identical else "different")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Recursive-descent parser
# ---------------------------------------------------------------------------


@dataclass
class _PNode:
    op: str
    kind: str  # "op" | "leaf"
    groups: list = field(default_factory=list)
    text: str | None = None
    t0: int = 0
    t1: int = 0


_LOW = {"if", "abstraction", "block"}


def demo_paren_policy(parent_op, slot, child_op):
    """Minimal grouping parentheses for the demo expression grammar."""
    if parent_op == "application":
        if slot == "fn":
            return child_op in _LOW
        if slot == "arg":
            return child_op in _LOW or child_op == "application"
    if parent_op == "if" and slot in ("then", "cond"):
        return child_op in _LOW
    return False


class _Parser:
    def __init__(self, spec: sg.GrammarSpec, text: str):
        self.spec = spec
        self.text = text
        self.tokens, self.trivia = tokenize(text, spec)
        self.pos = 0
        self.events = []  # (SugarKind, char span)
        self.guard_sugar = spec.sugar_of_kind(sg.SugarKind.GUARD_CASCADE)
        self.multi_sugar = spec.sugar_of_kind(sg.SugarKind.MULTI_DECL)
        self.variant_sugar = spec.sugar_of_kind(sg.SugarKind.KEYWORD_VARIANT)
        self.parens_sugar = spec.sugar_of_kind(sg.SugarKind.REDUNDANT_PARENS)

    # -- token helpers --

    def peek(self, off=0):
        i = self.pos + off
        return self.tokens[i] if i < len(self.tokens) else None

    def eof(self):
        return self.pos >= len(self.tokens)

    def at(self, text):
        t = self.peek()
        return t is not None and t.text == text

    def at_kind(self, kind):
        t = self.peek()
        return t is not None and t.kind is kind

    def span_here(self):
        t = self.peek()
        if t is not None:
            return t.span
        end = len(self.text)
        return (end, end)

    def error(self, message):
        raise ParseError(message, self.span_here())

    def take(self):
        t = self.peek()
        if t is None:
            self.error("unexpected end of input")
        self.pos += 1
        return t

    def expect(self, text):
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.take()

    def char_span(self, t0, t1):
        if t0 >= len(self.tokens):
            end = len(self.text)
            return (end, end)
        a = self.tokens[t0].span[0]
        b = self.tokens[min(t1, len(self.tokens)) - 1].span[1]
        return (a, b)

    # -- leaves --

    def ident_leaf(self):
        if not self.at_kind(TokenKind.IDENT):
            self.error("expected identifier")
        i = self.pos
        t = self.take()
        return _PNode("ident", "leaf", text=t.text, t0=i, t1=i + 1)

    # -- entry points --

    def parse_program(self):
        t0 = self.pos
        defs = []
        while self.at_define_start():
            defs.append(self.parse_define())
        exprs = []
        while not self.eof():
            exprs.append(self.parse_stmt_expr())
            if self.at(";"):
                self.take()
            else:
                break
        if not self.eof():
            self.error("unexpected token after program")
        return _PNode("prog", "op", groups=[defs, exprs], t0=t0, t1=self.pos)

    def at_define_start(self):
        i = self.pos
        t = self.peek()
        if t is None or t.kind is not TokenKind.IDENT:
            return False
        i += 1
        while i < len(self.tokens) and self.tokens[i].kind is TokenKind.IDENT:
            i += 1
        return i < len(self.tokens) and self.tokens[i].text == "="

    def parse_define(self):
        t0 = self.pos
        name = self.ident_leaf()
        params = []
        while self.at_kind(TokenKind.IDENT):
            params.append(self.ident_leaf())
        self.expect("=")
        body = self.parse_stmt_expr()
        self.expect(";")
        return _PNode("define", "op", groups=[[name], params, [body]],
                      t0=t0, t1=self.pos)

    def at_decl_start(self):
        i = self.pos
        if not (i < len(self.tokens) and self.tokens[i].kind is TokenKind.IDENT):
            return False
        i += 1
        while (
            i + 1 < len(self.tokens)
            and self.tokens[i].text == ","
            and self.tokens[i + 1].kind is TokenKind.IDENT
        ):
            i += 2
        return i < len(self.tokens) and self.tokens[i].text == ":"

    def parse_decls(self):
        """One declaration line; multi-identifier sugar yields several."""
        t0 = self.pos
        names = [self.ident_leaf()]
        while self.at(","):
            if self.multi_sugar is None:
                self.error("multi-identifier declarations not allowed")
            self.take()
            names.append(self.ident_leaf())
        self.expect(":")
        tname = self.peek()
        typename = self.ident_leaf()
        self.expect(";")
        if len(names) > 1:
            self.events.append(
                (sg.SugarKind.MULTI_DECL, self.char_span(t0, self.pos))
            )
        out = []
        for nm in names:
            ty = _PNode("ident", "leaf", text=typename.text,
                        t0=typename.t0, t1=typename.t1)
            out.append(_PNode("decl", "op", groups=[[nm], [ty]],
                              t0=t0, t1=self.pos))
        return out

    def parse_stmt_expr(self):
        """Expression with guard sugar allowed (statement positions)."""
        t0 = self.pos
        e = self.parse_expr()
        if not self.at(","):
            return e
        if self.guard_sugar is None:
            self.error("guards not allowed here")
        pairs = []
        self.take()
        pairs.append((e, self.parse_expr()))
        default = None
        while default is None:
            self.expect(";")
            v = self.parse_expr()
            if self.at(","):
                self.take()
                pairs.append((v, self.parse_expr()))
                continue
            if self.at("otherwise") or self.at("else"):
                self.take()
                default = v
            else:
                self.error("expected ',' or 'otherwise' in guard")
        result = default
        for val, cond in reversed(pairs):
            result = _PNode("if", "op", groups=[[cond], [val], [result]],
                            t0=t0, t1=self.pos)
        self.events.append((sg.SugarKind.GUARD_CASCADE, self.char_span(t0, self.pos)))
        return result

    def parse_expr(self):
        t0 = self.pos
        left = self.parse_app()
        if not self.at("if"):
            return left
        self.take()
        cond = self.parse_app()
        if self.at("otherwise"):
            self.take()
        elif self.at("else") and self.variant_sugar is not None:
            t = self.take()
            self.events.append((sg.SugarKind.KEYWORD_VARIANT, t.span))
        else:
            self.error("expected 'otherwise'")
        els = self.parse_expr()
        return _PNode("if", "op", groups=[[cond], [left], [els]],
                      t0=t0, t1=self.pos)

    _ATOM_KEYWORDS = {"fun", "case", "let"}

    def at_atom_start(self):
        t = self.peek()
        if t is None:
            return False
        if t.kind in (TokenKind.INT, TokenKind.STRING, TokenKind.IDENT):
            return True
        if t.kind is TokenKind.KEYWORD:
            return t.text in self._ATOM_KEYWORDS
        return t.text in ("(", "[")

    def parse_app(self):
        f = self.parse_atom()
        while self.at_atom_start():
            arg = self.parse_atom()
            f = _PNode("application", "op", groups=[[f], [arg]],
                       t0=f.t0, t1=self.pos)
        return f

    def parse_atom(self):
        t0 = self.pos
        t = self.peek()
        if t is None:
            self.error("expected expression")
        if t.text == "(":
            self.take()
            if self.at(")"):
                self.take()
                return _PNode("tuple", "op", groups=[[]], t0=t0, t1=self.pos)
            e = self.parse_expr()
            if self.at(")"):
                self.take()
                if self.parens_sugar is not None:
                    self.events.append(
                        (sg.SugarKind.REDUNDANT_PARENS, self.char_span(t0, self.pos))
                    )
                return e
            if self.at(","):
                self.take()
                if self.at(")"):  # "(x,)": one-element tuple
                    self.take()
                    return _PNode("tuple", "op", groups=[[e]], t0=t0, t1=self.pos)
                items = [e, self.parse_expr()]
                while self.at(","):
                    self.take()
                    items.append(self.parse_expr())
                self.expect(")")
                return _PNode("tuple", "op", groups=[items], t0=t0, t1=self.pos)
            self.error("expected ',' or ')'")
        if t.text == "[":
            self.take()
            if self.at("]"):
                self.take()
                return _PNode("list", "op", groups=[[]], t0=t0, t1=self.pos)
            h = self.parse_expr()
            if self.at("|") or self.at("//"):
                op = "comprehension" if self.take().text == "|" else "diagonalization"
                var = self.ident_leaf()
                self.expect("<-")
                src = self.parse_expr()
                self.expect("]")
                return _PNode(op, "op", groups=[[h], [var], [src]],
                              t0=t0, t1=self.pos)
            items = [h]
            while self.at(","):
                self.take()
                items.append(self.parse_expr())
            self.expect("]")
            return _PNode("list", "op", groups=[items], t0=t0, t1=self.pos)
        if t.kind is TokenKind.INT:
            self.take()
            return _PNode("intlit", "leaf", text=t.text, t0=t0, t1=self.pos)
        if t.kind is TokenKind.STRING:
            self.take()
            return _PNode("strlit", "leaf", text=_unquote_string(t.text),
                          t0=t0, t1=self.pos)
        if t.kind is TokenKind.IDENT:
            name = self.ident_leaf()
            return _PNode("variable", "op", groups=[[name]], t0=t0, t1=self.pos)
        if t.text == "fun":
            self.take()
            param = self.ident_leaf()
            self.expect("->")
            body = self.parse_expr()
            return _PNode("abstraction", "op", groups=[[param], [body]],
                          t0=t0, t1=self.pos)
        if t.text == "case":
            self.take()
            scrut = self.parse_expr()
            self.expect("of")
            arms = []
            if not self.at("end"):
                arms.append(self.parse_arm())
                while self.at(";"):
                    self.take()
                    arms.append(self.parse_arm())
            self.expect("end")
            return _PNode("case", "op", groups=[[scrut], arms], t0=t0, t1=self.pos)
        if t.text == "let":
            self.take()
            decls = []
            while self.at_decl_start():
                decls.extend(self.parse_decls())
            defs = []
            while self.at_define_start():
                defs.append(self.parse_define())
            self.expect("in")
            body = self.parse_expr()
            return _PNode("block", "op", groups=[decls, defs, [body]],
                          t0=t0, t1=self.pos)
        self.error("expected expression")

    def parse_arm(self):
        t0 = self.pos
        pat = self.ident_leaf()
        self.expect("->")
        body = self.parse_expr()
        return _PNode("arm", "op", groups=[[pat], [body]], t0=t0, t1=self.pos)


# ---------------------------------------------------------------------------
# Materialization and comment attachment
# ---------------------------------------------------------------------------


def _materialize(doc: AstDoc, pnode: _PNode, spans: dict):
    if pnode.kind == "leaf":
        node = AstNode(doc._new_id(), NodeKind.LEAF, operator=pnode.op,
                       text=pnode.text)
        doc.nodes[node.id] = node
    else:
        node = AstNode(doc._new_id(), NodeKind.OPERATOR, operator=pnode.op)
        doc.nodes[node.id] = node
        for group in pnode.groups:
            node.slots.append([_materialize(doc, c, spans) for c in group])
    spans[node.id] = (pnode.t0, pnode.t1)
    return node.id


def _attach_comments(doc, root_id, spans, trivia, n_tokens):
    """BEFORE the outermost construct starting at the comment's anchor
    token; ONTO the innermost enclosing construct otherwise; AFTER the
    root for trailing comments."""
    attachments = []
    for tv in trivia:
        if tv.kind is not TriviaKind.COMMENT:
            continue
        payload = tv.text[2:].strip()
        anchor = tv.anchor
        if anchor >= n_tokens:
            dec = Decoration(DecorationKind.COMMENT, Position.AFTER, payload)
            doc.node(root_id).decorations.append(dec)
            attachments.append((root_id, dec))
            continue
        starting = [
            nid for nid, (a, b) in spans.items()
            if a == anchor and nid != root_id and nid in doc.nodes
        ]
        if starting:
            target = max(starting, key=lambda nid: spans[nid][1] - spans[nid][0])
            dec = Decoration(DecorationKind.COMMENT, Position.BEFORE, payload)
        else:
            containing = [
                nid for nid, (a, b) in spans.items()
                if a <= anchor < b and nid in doc.nodes
            ]
            target = (
                min(containing, key=lambda nid: spans[nid][1] - spans[nid][0])
                if containing else root_id
            )
            dec = Decoration(DecorationKind.COMMENT, Position.ONTO, payload)
        doc.node(target).decorations.append(dec)
        attachments.append((target, dec))
    return attachments


def parse_text(spec: sg.GrammarSpec, text: str) -> ParseOutcome:
    """CtoA: full program text to a complete document."""
    parser = _Parser(spec, text)
    pnode = parser.parse_program()
    doc = AstDoc(spec)
    spans = {}
    doc.root = _materialize(doc, pnode, spans)
    attachments = _attach_comments(
        doc, doc.root, spans, parser.trivia, len(parser.tokens)
    )
    events = [
        (_sugar_name(spec, kind), span) for kind, span in parser.events
    ]
    return ParseOutcome(doc, events, attachments)


def _sugar_name(spec, kind):
    rule = spec.sugar_of_kind(kind)
    return rule.name if rule else kind.value


_SUBTREE_ENTRIES = ("prog", "define", "decl", "arm", "expression")


def _parse_category(spec, text, category):
    parser = _Parser(spec, text)
    if category in spec.leaf_map:
        t = parser.take()
        kind_map = {
            sg.LexicalKind.INTEGER: TokenKind.INT,
            sg.LexicalKind.IDENTIFIER: TokenKind.IDENT,
            sg.LexicalKind.STRING: TokenKind.STRING,
        }
        want = kind_map[spec.leaf_map[category].lexical_kind]
        if t.kind is not want:
            raise ParseError(f"expected {category}", t.span)
        txt = _unquote_string(t.text) if want is TokenKind.STRING else t.text
        pnode = _PNode(category, "leaf", text=txt, t0=0, t1=1)
    elif category == "prog":
        pnode = parser.parse_program()
    elif category == "define":
        pnode = parser.parse_define()
    elif category == "decl":
        decls = parser.parse_decls()
        if len(decls) != 1:
            raise ParseError("expected a single declaration", (0, len(text)))
        pnode = decls[0]
    elif category == "arm":
        pnode = parser.parse_arm()
    else:
        pnode = parser.parse_stmt_expr()
    if not parser.eof():
        parser.error("unexpected trailing input")
    return parser, pnode


def parse_subtree(spec, doc: AstDoc, target, text,
                  dry_run=False) -> ParseOutcome:
    """Parse free text back into the slot holding ``target`` (the hybrid
    model's commit).  On any failure the document is untouched."""
    node = doc.node(target)
    if node.kind is NodeKind.PLACEHOLDER:
        expected = node.expected_type
    else:
        expected, _ = doc.slot_type_of(target)
    entry = expected if expected in _SUBTREE_ENTRIES or expected in spec.leaf_map \
        else "expression"
    try:
        parser, pnode = _parse_category(spec, text, entry)
    except ParseError as err:
        for other in _SUBTREE_ENTRIES:
            if other == entry:
                continue
            try:
                _parse_category(spec, text, other)
            except ParseError:
                continue
            raise ClassMismatch(
                f"text parses as {other}, slot expects {expected}"
            ) from err
        raise
    members = sg.class_members(spec, expected)
    if pnode.op not in members:
        raise ClassMismatch(
            f"text parses as {pnode.op}, slot expects {expected}"
        )
    if dry_run:
        events = [(_sugar_name(spec, k), s) for k, s in parser.events]
        return ParseOutcome(doc, events, [])
    spans = {}
    new_id = _materialize(doc, pnode, spans)
    attachments = _attach_comments(
        doc, new_id, spans, parser.trivia, len(parser.tokens)
    )
    loc = doc.parent_of(target)
    if (
        node.kind is NodeKind.PLACEHOLDER
        and node.multiplicity is sg.Multiplicity.LIST
    ):
        pid, si, pos = loc
        doc.node(pid).slots[si].insert(pos, new_id)
    elif loc is None:
        old = doc.root
        doc.root = new_id
        doc._delete_subtree(old)
    else:
        pid, si, pos = loc
        doc.node(pid).slots[si][pos] = new_id
        doc._delete_subtree(target)
    events = [(_sugar_name(spec, k), s) for k, s in parser.events]
    return ParseOutcome(doc, events, attachments)


# ---------------------------------------------------------------------------
# Unparse and roundtrip
# ---------------------------------------------------------------------------


def unparse(doc: AstDoc, spec: sg.GrammarSpec, tab_width=2) -> str:
    """AtoC: canonical concrete text of a complete document."""
    if not doc.is_complete():
        raise IncompleteDocument("document still has placeholders")
    return pretty_print(doc, doc.root, spec, tab_width=tab_width,
                        parenthesize=demo_paren_policy)


def _gap_differences(text_a, text_b, toks_a, toks_b, blocks):
    """TRIVIA differences: unequal inter-token gaps at aligned tokens."""
    diffs = []

    def gap(text, toks, i):
        start = toks[i - 1].span[1] if i > 0 else 0
        end = toks[i].span[0] if i < len(toks) else len(text)
        return (start, end)

    pairs = []
    for a, b, size in blocks:
        for k in range(size):
            pairs.append((a + k, b + k))
    pairs.append((len(toks_a), len(toks_b)))
    prev = (-1, -1)
    for ia, ib in pairs:
        if (ia, ib) == prev:
            continue
        prev = (ia, ib)
        ga = gap(text_a, toks_a, ia)
        gb = gap(text_b, toks_b, ib)
        if text_a[ga[0]:ga[1]] != text_b[gb[0]:gb[1]]:
            diffs.append(Difference(ga, gb, DiffCategory.TRIVIA))
    return diffs


def roundtrip_check(spec: sg.GrammarSpec, text: str) -> RoundtripReport:
    outcome = parse_text(spec, text)
    canonical = unparse(outcome.doc, spec)
    if canonical == text:
        return RoundtripReport(text, canonical, True, [])

    toks_a, _ = tokenize(text, spec)
    toks_b, _ = tokenize(canonical, spec)
    sm = SequenceMatcher(a=[t.text for t in toks_a], b=[t.text for t in toks_b],
                         autojunk=False)

    def span_a(i1, i2):
        if i1 == i2:
            p = toks_a[i1].span[0] if i1 < len(toks_a) else len(text)
            return (p, p)
        return (toks_a[i1].span[0], toks_a[i2 - 1].span[1])

    def span_b(j1, j2):
        if j1 == j2:
            p = toks_b[j1].span[0] if j1 < len(toks_b) else len(canonical)
            return (p, p)
        return (toks_b[j1].span[0], toks_b[j2 - 1].span[1])

    kinds_by_name = {s.name: s.kind for s in spec.sugar_rules}
    events = [
        (kinds_by_name.get(name), span) for name, span in outcome.sugar_events
    ]

    buckets = {}  # event index -> list of (orig span, canon span)
    loose = []
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            continue
        sa, sb = span_a(i1, i2), span_b(j1, j2)
        owner = None
        for idx, (kind, espan) in enumerate(events):
            if kind is None:
                continue
            if sa[0] < espan[1] and espan[0] < sa[1] or (
                sa[0] == sa[1] and espan[0] <= sa[0] <= espan[1]
            ):
                owner = idx
                break
        if owner is not None:
            buckets.setdefault(owner, []).append((sa, sb))
            continue
        a_texts = [t.text for t in toks_a[i1:i2]]
        b_texts = [t.text for t in toks_b[j1:j2]]
        if set(a_texts) | set(b_texts) <= {"(", ")"}:
            loose.append(Difference(sa, sb, DiffCategory.REDUNDANT_PARENS))
        elif "else" in a_texts or "otherwise" in b_texts:
            loose.append(Difference(sa, sb, DiffCategory.KEYWORD_VARIANT))
        else:
            loose.append(Difference(sa, sb, DiffCategory.TRIVIA))

    diffs = list(loose)
    for idx, parts in buckets.items():
        kind, espan = events[idx]
        c0 = min(s[0] for _, s in parts)
        c1 = max(s[1] for _, s in parts)
        diffs.append(Difference(espan, (c0, c1), _EVENT_CATEGORY[kind]))
    covered = [espan for kind, espan in events if kind is not None]
    covered += [d.span_original for d in loose]
    for gd in _gap_differences(text, canonical, toks_a, toks_b,
                               sm.get_matching_blocks()[:-1]):
        a, b = gd.span_original
        if any(c0 <= a and b <= c1 for c0, c1 in covered):
            continue  # whitespace shifted by a rewrite already reported
        diffs.append(gd)
    diffs.sort(key=lambda d: (d.span_original, d.category.value))
    if not diffs:
        diffs.append(Difference((0, len(text)), (0, len(canonical)),
                                DiffCategory.TRIVIA))
    return RoundtripReport(text, canonical, False, diffs)
