"""Command line front end.

Batch subcommands for spec checking, parsing, pretty printing, roundtrip
reports, completion menus, and tree layout (delimited geometry plus an
optional rendered image), and a `serve` subcommand that runs the session
protocol over stdio or a TCP socket.
"""

from __future__ import annotations

import argparse
import sys

from . import concretesyntax as cs
from . import specgrammar as sg
from .astcore import AstDoc
from .errors import AsteditError
from .layoutbox import LayoutMode, LayoutParams, layout_tree
from .service import Session, serve_stdio, serve_tcp


def _load_spec(path) -> sg.GrammarSpec:
    with open(path, encoding="utf-8") as fh:
        spec = sg.parse_spec(fh.read())
    problems = sg.validate_spec(spec)
    if problems:
        for d in problems:
            print(f"{path}: {d.rule}: {d.reason}", file=sys.stderr)
        raise AsteditError(f"spec {path} failed validation")
    return spec


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_check(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        spec = sg.parse_spec(fh.read())
    problems = sg.validate_spec(spec)
    for d in problems:
        print(f"{d.rule}: {d.reason}", file=sys.stderr)
    if problems:
        return 1
    print(f"ok: {spec.name} ({len(spec.productions)} productions)")
    return 0


def cmd_parse(args) -> int:
    spec = _load_spec(args.spec)
    outcome = cs.parse_text(spec, _read(args.file).rstrip("\n"))
    print(outcome.doc.to_text())
    return 0


def cmd_pretty(args) -> int:
    spec = _load_spec(args.spec)
    doc = AstDoc.from_text(_read(args.astfile).rstrip("\n"), spec)
    print(cs.unparse(doc, spec, tab_width=args.tab_width))
    return 0


def cmd_roundtrip(args) -> int:
    spec = _load_spec(args.spec)
    report = cs.roundtrip_check(spec, _read(args.file).rstrip("\n"))
    sys.stdout.write(report.to_text())
    return 0 if report.identical else 1


def cmd_complete(args) -> int:
    spec = _load_spec(args.spec)
    for item in sg.completions_of_class(spec, args.cls):
        print(item)
    return 0


def cmd_layout(args) -> int:
    spec = _load_spec(args.spec)
    doc = AstDoc.from_text(_read(args.astfile).rstrip("\n"), spec)
    params = LayoutParams(mode=LayoutMode(args.mode),
                          hspace=args.hspace, vspace=args.vspace)
    geo = layout_tree(doc, doc.root, params)
    out = sys.stdout if args.out == "-" else open(args.out, "w",
                                                  encoding="utf-8")
    try:
        out.write("type\tnode\tx\ty\tw\th\tlabel\tfill\n")
        for prim in geo.to_wire():
            if prim["type"] == "rect":
                row = [prim["x"], prim["y"], prim["w"], prim["h"],
                       prim["label"], prim["fill"]]
            elif prim["type"] == "text":
                row = [prim["x"], prim["y"], "", "", prim["text"], ""]
            else:
                row = [prim["x1"], prim["y1"], prim["x2"], prim["y2"], "", ""]
            node = "" if prim["node"] is None else prim["node"]
            out.write("\t".join(str(v) for v in
                                [prim["type"], node, *row]) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if args.png:
        from .render import render_png

        render_png(geo, args.png)
    return 0


def cmd_serve(args) -> int:
    spec = _load_spec(args.spec)
    kw = dict(tab_width=args.tab_width, hspace=args.hspace,
              vspace=args.vspace)
    if args.stdio:
        serve_stdio(Session(spec, store_path=args.store, **kw))
        return 0
    host, _, port = args.listen.rpartition(":")
    serve_tcp(spec, host or "127.0.0.1", int(port),
              store_path=args.store, **kw)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="astedit",
        description="grammar-driven structure editor toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a grammar spec")
    p.add_argument("spec")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("parse", help="parse program text to AST form")
    p.add_argument("spec")
    p.add_argument("file")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("pretty", help="unparse an AST file to program text")
    p.add_argument("spec")
    p.add_argument("astfile")
    p.add_argument("--tab-width", type=int, default=2)
    p.set_defaults(fn=cmd_pretty)

    p = sub.add_parser("roundtrip",
                       help="report differences between a text and its "
                            "canonical form")
    p.add_argument("spec")
    p.add_argument("file")
    p.set_defaults(fn=cmd_roundtrip)

    p = sub.add_parser("complete", help="list the completion menu of a class")
    p.add_argument("spec")
    p.add_argument("cls", metavar="class")
    p.set_defaults(fn=cmd_complete)

    p = sub.add_parser("layout",
                       help="emit tree geometry as tab-separated rows, "
                            "optionally rendering an image")
    p.add_argument("spec")
    p.add_argument("astfile")
    p.add_argument("--mode", default=LayoutMode.VERTICAL_CENTERED.value,
                   choices=[m.value for m in LayoutMode])
    p.add_argument("--hspace", type=float, default=12.0)
    p.add_argument("--vspace", type=float, default=16.0)
    p.add_argument("--out", default="-")
    p.add_argument("--png")
    p.set_defaults(fn=cmd_layout)

    p = sub.add_parser("serve", help="run the session protocol")
    p.add_argument("--spec", required=True)
    p.add_argument("--store")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true")
    mode.add_argument("--listen", metavar="HOST:PORT")
    p.add_argument("--tab-width", type=int, default=2)
    p.add_argument("--hspace", type=float, default=12.0)
    p.add_argument("--vspace", type=float, default=16.0)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except AsteditError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
