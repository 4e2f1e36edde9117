"""Named persistence of documents in a plain directory.

Each entry is one `<name>.ast` file in the canonical parenthesized form,
with an optional `<name>.txt` holding the unparsed text when the
document is complete, and a regenerable `index` file carrying per-entry
metadata.  Writes go through a temp file and an atomic rename, guarded
by an exclusive lock file, so an interrupted save never damages an
existing entry.
"""

from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from . import specgrammar as sg
from .astcore import AstDoc
from .errors import IncompleteDocument, StoreError, UnknownName

_NAME = re.compile(r"[A-Za-z0-9_.-]+")

INDEX_FILE = "index"
LOCK_FILE = ".lock"


class FileForm(Enum):
    AST = "ast"
    TEXT = "text"


@dataclass(frozen=True)
class StoreEntry:
    name: str
    spec_name: str
    saved_at: str  # ISO-8601 UTC


class Store:
    def __init__(self, root_path):
        self.root = Path(root_path)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths --

    def _check_name(self, name):
        if not _NAME.fullmatch(name):
            raise StoreError(f"invalid entry name: {name!r}")

    def _ast_path(self, name):
        return self.root / f"{name}.ast"

    def _txt_path(self, name):
        return self.root / f"{name}.txt"

    # -- locking --

    def _acquire_lock(self):
        try:
            fd = os.open(self.root / LOCK_FILE, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreError("store is locked by another writer") from None
        os.close(fd)

    def _release_lock(self):
        try:
            os.unlink(self.root / LOCK_FILE)
        except FileNotFoundError:
            pass

    def _atomic_write(self, path: Path, data: str):
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(data)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    # -- index --

    def _read_index(self) -> dict[str, StoreEntry]:
        path = self.root / INDEX_FILE
        entries = {}
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line:
                    continue
                name, spec_name, saved_at = line.split("\t", 2)
                entries[name] = StoreEntry(name, spec_name, saved_at)
        return entries

    def _write_index(self, entries: dict[str, StoreEntry]):
        lines = [
            f"{e.name}\t{e.spec_name}\t{e.saved_at}"
            for e in sorted(entries.values(), key=lambda e: e.name)
        ]
        self._atomic_write(self.root / INDEX_FILE,
                           "\n".join(lines) + ("\n" if lines else ""))

    def rebuild_index(self, spec_name=""):
        """Reconstruct the index from the directory contents."""
        entries = {}
        stamp = _now()
        for name in self.list_entries():
            entries[name] = StoreEntry(name, spec_name, stamp)
        self._write_index(entries)

    # -- operations --

    def save(self, name: str, doc: AstDoc, spec: sg.GrammarSpec):
        """Overwrites an existing entry of the same name silently."""
        from .concretesyntax import unparse

        self._check_name(name)
        blob = doc.to_text()
        text_repr = unparse(doc, spec) if doc.is_complete() else None
        self._acquire_lock()
        try:
            self._atomic_write(self._ast_path(name), blob + "\n")
            txt = self._txt_path(name)
            if text_repr is not None:
                self._atomic_write(txt, text_repr + "\n")
            elif txt.exists():
                txt.unlink()
            entries = self._read_index()
            entries[name] = StoreEntry(name, spec.name, _now())
            self._write_index(entries)
        except OSError as err:
            raise StoreError(f"save failed: {err}") from err
        finally:
            self._release_lock()

    def load(self, name: str, spec: sg.GrammarSpec) -> AstDoc:
        self._check_name(name)
        path = self._ast_path(name)
        if not path.exists():
            raise UnknownName(f"no stored entry named {name!r}")
        try:
            blob = path.read_text(encoding="utf-8")
        except OSError as err:
            raise StoreError(f"load failed: {err}") from err
        return AstDoc.from_text(blob.rstrip("\n"), spec)

    def delete(self, name: str):
        self._check_name(name)
        path = self._ast_path(name)
        if not path.exists():
            raise UnknownName(f"no stored entry named {name!r}")
        self._acquire_lock()
        try:
            path.unlink()
            txt = self._txt_path(name)
            if txt.exists():
                txt.unlink()
            entries = self._read_index()
            entries.pop(name, None)
            self._write_index(entries)
        except OSError as err:
            raise StoreError(f"delete failed: {err}") from err
        finally:
            self._release_lock()

    def list_entries(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.ast"))

    def default_name(self) -> str:
        """Smallest unused prog-N, proposed by the save dialog."""
        taken = set(self.list_entries())
        n = 1
        while f"prog-{n}" in taken:
            n += 1
        return f"prog-{n}"


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def export_file(doc: AstDoc, path, form: FileForm, spec: sg.GrammarSpec):
    from .concretesyntax import unparse

    if form is FileForm.AST:
        data = doc.to_text()
    else:
        if not doc.is_complete():
            raise IncompleteDocument("cannot export text of an incomplete document")
        data = unparse(doc, spec)
    try:
        Path(path).write_text(data + "\n", encoding="utf-8", newline="\n")
    except OSError as err:
        raise StoreError(f"export failed: {err}") from err


def import_file(path, form: FileForm, spec: sg.GrammarSpec) -> AstDoc:
    from .concretesyntax import parse_text

    try:
        data = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise StoreError(f"import failed: {err}") from err
    if form is FileForm.AST:
        return AstDoc.from_text(data.rstrip("\n"), spec)
    return parse_text(spec, data.rstrip("\n")).doc
