"""Box meta-language: measurement, composition, tree layout, pretty text.

Boxes are atomic (text, labeled rectangle, or a segment with one zero
dimension) or compound (children stacked on one axis with an alignment
and a gap).  Tree layout builds a compound box per subtree and then
resolves offsets, so geometry bounds always agree with ``measure``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import specgrammar as sg
from .astcore import AstDoc, Display, NodeKind, Position
from .errors import IllegalAlignment, NoRule


class Axis(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class Align(Enum):
    TOP = "top"
    MIDDLE = "middle"
    BOTTOM = "bottom"
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"


_H_ALIGNS = {Align.TOP, Align.MIDDLE, Align.BOTTOM}
_V_ALIGNS = {Align.LEFT, Align.CENTER, Align.RIGHT}


@dataclass
class Box:
    """Atomic box (w, h, content) or compound box (children, axis, align, gap)."""

    width: float = 0.0
    height: float = 0.0
    content: object = None  # for atomic boxes: Rect/Text/Seg template
    children: list["Box"] | None = None
    axis: Axis | None = None
    align: Align | None = None
    gap: float = 0.0

    @property
    def is_atomic(self):
        return self.children is None


def text_box(text, char_width, line_height, font_ref="mono"):
    return Box(len(text) * char_width, line_height, content=("text", text, font_ref))


def rect_box(label, node_id, char_width, line_height, padding, fill="none"):
    w = len(label) * char_width + 2 * padding
    h = line_height + 2 * padding
    return Box(w, h, content=("rect", label, node_id, fill))


def hseg(length):
    return Box(length, 0.0, content=("seg",))


def vseg(length):
    return Box(0.0, length, content=("seg",))


def measure(box: Box):
    """(width, height): sums along the axis plus gaps, max across it."""
    if box.is_atomic:
        return box.width, box.height
    dims = [measure(c) for c in box.children]
    n = len(dims)
    gap_total = box.gap * (n - 1) if n > 1 else 0.0
    if not dims:
        return 0.0, 0.0
    if box.axis is Axis.HORIZONTAL:
        return sum(w for w, _ in dims) + gap_total, max(h for _, h in dims)
    return max(w for w, _ in dims), sum(h for _, h in dims) + gap_total


def compose(children, axis: Axis, align: Align, gap=0.0) -> Box:
    legal = _H_ALIGNS if axis is Axis.HORIZONTAL else _V_ALIGNS
    if align not in legal:
        raise IllegalAlignment(f"{align.value} is not legal for {axis.value}")
    w, h = measure(Box(children=list(children), axis=axis, align=align, gap=gap))
    box = Box(width=w, height=h, children=list(children), axis=axis,
              align=align, gap=gap)
    return box


# -- geometry ---------------------------------------------------------------


@dataclass
class Rect:
    x: float
    y: float
    w: float
    h: float
    label: str = ""
    fill: str = "none"


@dataclass
class Text:
    x: float
    y: float
    text: str


@dataclass
class Seg:
    x1: float
    y1: float
    x2: float
    y2: float


@dataclass
class Primitive:
    node_id: int | None
    shape: object  # Rect | Text | Seg


@dataclass
class Geometry:
    primitives: list[Primitive] = field(default_factory=list)
    bounds: tuple[float, float] = (0.0, 0.0)

    def rect_of(self, node_id):
        for p in self.primitives:
            if p.node_id == node_id and isinstance(p.shape, Rect):
                return p.shape
        return None

    def to_wire(self):
        out = []
        for p in self.primitives:
            s = p.shape
            if isinstance(s, Rect):
                out.append({
                    "type": "rect", "node": p.node_id,
                    "x": round(s.x), "y": round(s.y),
                    "w": round(s.w), "h": round(s.h),
                    "label": s.label, "fill": s.fill,
                })
            elif isinstance(s, Text):
                out.append({"type": "text", "node": p.node_id,
                            "x": round(s.x), "y": round(s.y), "text": s.text})
            else:
                out.append({"type": "seg", "node": p.node_id,
                            "x1": round(s.x1), "y1": round(s.y1),
                            "x2": round(s.x2), "y2": round(s.y2)})
        return out


def place(box: Box, origin=(0.0, 0.0)) -> Geometry:
    """Resolve child offsets into positioned primitives."""
    geo = Geometry(bounds=measure(box))
    _place_into(box, origin[0], origin[1], geo)
    return geo


def _place_into(box: Box, x, y, geo: Geometry):
    if box.is_atomic:
        if box.content is None:
            return
        kind = box.content[0]
        if kind == "text":
            geo.primitives.append(Primitive(None, Text(x, y, box.content[1])))
        elif kind == "rect":
            _, label, node_id, fill = box.content
            geo.primitives.append(
                Primitive(node_id, Rect(x, y, box.width, box.height, label, fill))
            )
        else:
            geo.primitives.append(
                Primitive(None, Seg(x, y, x + box.width, y + box.height))
            )
        return
    w, h = measure(box)
    cursor = 0.0
    for child in box.children:
        cw, ch = measure(child)
        if box.axis is Axis.HORIZONTAL:
            if box.align is Align.TOP:
                off = 0.0
            elif box.align is Align.MIDDLE:
                off = (h - ch) / 2
            else:
                off = h - ch
            _place_into(child, x + cursor, y + off, geo)
            cursor += cw + box.gap
        else:
            if box.align is Align.LEFT:
                off = 0.0
            elif box.align is Align.CENTER:
                off = (w - cw) / 2
            else:
                off = w - cw
            _place_into(child, x + off, y + cursor, geo)
            cursor += ch + box.gap


# -- tree layout ------------------------------------------------------------


class LayoutMode(Enum):
    VERTICAL_CENTERED = "vertical_centered"
    HORIZONTAL_CENTERED = "horizontal_centered"
    HORIZONTAL_SIMPLE = "horizontal_simple"


@dataclass
class LayoutParams:
    mode: LayoutMode = LayoutMode.VERTICAL_CENTERED
    hspace: float = 12.0
    vspace: float = 16.0
    char_width: float = 7.0
    line_height: float = 12.0
    box_padding: float = 4.0

    def __post_init__(self):
        if min(self.hspace, self.vspace, self.char_width,
               self.line_height, self.box_padding) < 0:
            raise ValueError("layout spacings must be >= 0")


def _node_label(doc: AstDoc, nid):
    n = doc.node(nid)
    if n.kind is NodeKind.PLACEHOLDER:
        star = "*" if n.multiplicity is sg.Multiplicity.LIST else ""
        return f"{n.expected_type}{star}"
    if n.kind is NodeKind.LEAF:
        return n.text if n.text is not None else n.operator
    return n.operator


def _node_box(doc, nid, params: LayoutParams):
    n = doc.node(nid)
    if n.display is Display.ICONIFIED_GRAPHIC:
        return rect_box("", nid, params.char_width * 2, params.line_height,
                        params.box_padding, fill="gray")
    if n.display is Display.ICONIFIED_TEXT:
        return rect_box("T", nid, params.char_width, params.line_height,
                        params.box_padding)
    return rect_box(_node_label(doc, nid), nid, params.char_width,
                    params.line_height, params.box_padding)


def _subtree_box(doc, nid, params: LayoutParams):
    n = doc.node(nid)
    own = _node_box(doc, nid, params)
    children = [] if n.display is not Display.EXPANDED else n.children
    if not children:
        return own
    blocks = [_subtree_box(doc, c, params) for c in children]
    if params.mode is LayoutMode.VERTICAL_CENTERED:
        row = compose(blocks, Axis.HORIZONTAL, Align.TOP, gap=params.hspace)
        return compose([own, row], Axis.VERTICAL, Align.CENTER, gap=params.vspace)
    column = compose(blocks, Axis.VERTICAL, Align.LEFT, gap=params.vspace)
    if params.mode is LayoutMode.HORIZONTAL_CENTERED:
        return compose([own, column], Axis.HORIZONTAL, Align.MIDDLE, gap=params.hspace)
    return compose([own, column], Axis.HORIZONTAL, Align.TOP, gap=params.hspace)


def layout_tree(doc: AstDoc, root, params: LayoutParams) -> Geometry:
    """Figure-2 style graphic layout; segments join box centers and come
    before rects in the primitive list so they render behind them."""
    box = _subtree_box(doc, root, params)
    geo = place(box)
    segs = []
    visible = {p.node_id for p in geo.primitives if isinstance(p.shape, Rect)}

    def centers(nid):
        r = geo.rect_of(nid)
        return (r.x + r.w / 2, r.y + r.h / 2)

    def walk(nid):
        n = doc.node(nid)
        if n.display is not Display.EXPANDED:
            return
        for c in n.children:
            if c in visible:
                px, py = centers(nid)
                cx, cy = centers(c)
                segs.append(Primitive(c, Seg(px, py, cx, cy)))
                walk(c)

    walk(root)
    labels = []
    for p in geo.primitives:
        if isinstance(p.shape, Rect) and p.shape.label:
            r = p.shape
            labels.append(Primitive(p.node_id, Text(
                r.x + (r.w - len(r.label) * params.char_width) / 2,
                r.y + (r.h - params.line_height) / 2,
                r.label,
            )))
    geo.primitives = segs + [p for p in geo.primitives
                             if isinstance(p.shape, Rect)] + labels
    return geo


# -- pretty printing --------------------------------------------------------


def select_rule(rules, operator) -> sg.PrettyRule:
    """First matching rule wins (single-rule regime under validation)."""
    for r in rules:
        if r.operator == operator:
            return r
    raise NoRule(operator)


def _wordy(ch):
    return ch.isalnum() or ch == "_"


class Emitter:
    """Token stream to text with lazy indentation and spacing.

    Newlines and spaces are pending flags, flushed just before the next
    visible token; this guarantees no trailing whitespace and indents
    that are always a multiple of the tab width.
    """

    def __init__(self, tab_width):
        self.tab_width = tab_width
        self.parts = []
        self.indent = 0
        self.pending_newline = False
        self.pending_space = False
        self.eol_comments = []

    def _line_has_content(self):
        return bool(self.parts) and not self.parts[-1].startswith("\n")

    def _flush_eol_comments(self):
        for c in self.eol_comments:
            self.parts.append(f" || {c}")
        self.eol_comments = []

    def _flush(self):
        if self.pending_newline:
            if self._line_has_content():
                self._flush_eol_comments()
            if self.parts:
                self.parts.append("\n" + " " * (self.indent * self.tab_width))
            self.pending_newline = False
            self.pending_space = False
            return
        if self.pending_space:
            if self.parts and not self.parts[-1].endswith("\n"):
                self.parts.append(" ")
            self.pending_space = False

    def token(self, text):
        if not text:
            return
        if (
            not self.pending_newline
            and not self.pending_space
            and self.parts
            and not self.parts[-1].endswith(("\n",))
            and _wordy(self.parts[-1][-1])
            and _wordy(text[0])
        ):
            self.pending_space = True
        self._flush()
        self.parts.append(text)

    def newline(self):
        self.pending_newline = True

    def space(self):
        if not self.pending_newline:
            self.pending_space = True

    def comment_line(self, payload):
        self.newline()
        self.token(f"|| {payload}")
        self.newline()

    def onto_comment(self, payload):
        self.eol_comments.append(payload)

    def result(self):
        self._flush_eol_comments()
        return "".join(self.parts)


def _emit_sep_text(em: Emitter, text):
    first = True
    for part in text.split("\n"):
        if not first:
            em.newline()
        first = False
        stripped = part.strip()
        if part.startswith(" ") and not stripped:
            em.space()
            continue
        if stripped:
            em.token(stripped)
        if part.endswith(" ") and stripped:
            em.space()


def pretty_print(doc: AstDoc, root, spec: sg.GrammarSpec, tab_width=2,
                 parenthesize=None) -> str:
    """Rule-driven unparse of a subtree.  Placeholders print as
    ``<expected_type>``; ``parenthesize(parent_op, slot, child_op)`` may
    request grouping parentheses around a child."""
    em = Emitter(tab_width)
    _emit_node(doc, root, spec, em, None, None, parenthesize)
    return em.result()


def _emit_node(doc, nid, spec, em, parent_op, slot_name, parenthesize):
    n = doc.node(nid)
    for d in n.decorations:
        if d.position is Position.BEFORE:
            em.comment_line(d.payload)
    for d in n.decorations:
        if d.position is Position.ONTO:
            em.onto_comment(d.payload)
    if n.kind is NodeKind.PLACEHOLDER:
        em.token(f"<{n.expected_type}>")
    elif n.kind is NodeKind.LEAF:
        if n.text is None:
            em.token(f"<{n.operator}>")
        elif spec.leaf_map[n.operator].lexical_kind is sg.LexicalKind.STRING:
            body = n.text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
            em.token(f'"{body}"')
        else:
            em.token(n.text)
    else:
        rule = select_rule(spec.pretty_rules, n.operator)
        prod = spec.production_map[n.operator]
        needs = bool(
            parenthesize and parent_op is not None
            and parenthesize(parent_op, slot_name, n.operator)
        )
        if needs:
            em.token("(")
        for atom in rule.format:
            _emit_atom(doc, n, atom, rule, prod, spec, em, parenthesize)
        if needs:
            em.token(")")
    for d in n.decorations:
        if d.position is Position.AFTER:
            em.comment_line(d.payload)


def _emit_atom(doc, n, atom, rule, prod, spec, em, parenthesize):
    k = atom.kind
    if k is sg.AtomKind.KEYWORD:
        _emit_sep_text(em, atom.text)
    elif k is sg.AtomKind.NEWLINE:
        em.newline()
    elif k is sg.AtomKind.TAB_PUSH:
        em.indent += 1
    elif k is sg.AtomKind.TAB_POP:
        em.indent -= 1
    elif k is sg.AtomKind.SPACE:
        em.space()
    else:
        idx = rule.metavars.index(atom.metavar)
        slot = prod.slots[idx]
        group = n.slots[idx]
        if k is sg.AtomKind.CHILD:
            for cid in group:
                _emit_node(doc, cid, spec, em, n.operator, slot.name, parenthesize)
        elif k is sg.AtomKind.LIST_SEP:
            for i, cid in enumerate(group):
                if i:
                    _emit_sep_text(em, atom.text)
                _emit_node(doc, cid, spec, em, n.operator, slot.name, parenthesize)
        else:  # SINGLETON_MARK
            if len(group) == 1:
                _emit_sep_text(em, atom.text)
