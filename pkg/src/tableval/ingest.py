"""Reading and writing tables: an HTML table subset and the JSON document format.

JSON document format (UTF-8)::

    {"tables": [
        {"id": "t1",
         "html": "<table>...</table>",            # optional
         "cells": [{"row": 0, "col": 0, "rowspan": 1, "colspan": 1,
                    "text": "A", "bbox": [x1, y1, x2, y2]}],
         "row_groups": [{"kind": "thead", "rows": [0]}]}   # optional
    ]}

Either ``cells`` or ``html`` must be given. When both are present the
cells are authoritative and the HTML must describe the same grid.
"""

from __future__ import annotations

import html as _html
import json
from dataclasses import dataclass
from html.parser import HTMLParser
from typing import IO, Iterator, Optional, Union

import jsonschema

from .model import (
    ROW_GROUP_LABELS,
    TABLE,
    TD,
    TR,
    BBox,
    Cell,
    RowGroup,
    TableError,
    TableTree,
    build_grid,
    build_tree,
)


class IngestError(ValueError):
    pass


class MalformedHtml(IngestError):
    pass


class BadSpan(IngestError):
    pass


class NoTable(IngestError):
    pass


class MultipleTables(IngestError):
    pass


class SchemaError(IngestError):
    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


class IdCollision(SchemaError):
    pass


_NAMED_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "nbsp": " "}
_STRUCTURE_TAGS = {TABLE, "thead", "tbody", TR, TD, "th"}


class _TableParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=False)
        self.stack: list[str] = []
        self.tables_seen = 0
        self.rows: list[list[tuple[int, int, str]]] = []
        self.groups: list[tuple[str, int, int]] = []  # (kind, first_row, n_rows)
        self._text: Optional[list[str]] = None
        self._span: tuple[int, int] = (1, 1)

    def error(self, message):  # pragma: no cover - abstract in older Pythons
        raise MalformedHtml(message)

    def handle_starttag(self, tag, attrs):
        if tag not in _STRUCTURE_TAGS:
            raise MalformedHtml(f"unsupported tag <{tag}> at line {self.getpos()[0]}")
        parent = self.stack[-1] if self.stack else None
        if tag == TABLE:
            if parent is not None:
                raise MalformedHtml("nested <table>")
            self.tables_seen += 1
            if self.tables_seen > 1:
                raise MultipleTables("input contains more than one <table>")
        elif tag in ROW_GROUP_LABELS:
            if parent != TABLE:
                raise MalformedHtml(f"<{tag}> must be a child of <table>")
            self.groups.append((tag, len(self.rows), 0))
        elif tag == TR:
            if parent not in (TABLE, *ROW_GROUP_LABELS):
                raise MalformedHtml("<tr> outside of a table or row group")
            if parent in ROW_GROUP_LABELS:
                kind, first, count = self.groups[-1]
                self.groups[-1] = (kind, first, count + 1)
            self.rows.append([])
        else:
            if parent != TR:
                raise MalformedHtml(f"<{tag}> outside of a <tr>")
            self._span = (_span_attr(attrs, "rowspan"), _span_attr(attrs, "colspan"))
            self._text = []
            tag = TD
        self.stack.append(tag)

    def handle_startendtag(self, tag, attrs):
        raise MalformedHtml(f"self-closing <{tag}/> is not allowed")

    def handle_endtag(self, tag):
        if tag == "th":
            tag = TD
        if not self.stack or self.stack[-1] != tag:
            open_tag = self.stack[-1] if self.stack else None
            raise MalformedHtml(f"unbalanced </{tag}> (open element: {open_tag!r})")
        self.stack.pop()
        if tag == TD:
            text = "".join(self._text).strip()
            self.rows[-1].append((*self._span, text))
            self._text = None

    def handle_data(self, data):
        if self._text is not None:
            self._text.append(data)
        elif self.stack and data.strip():
            raise MalformedHtml(f"text {data.strip()[:20]!r} outside of a cell")

    def handle_entityref(self, name):
        if name not in _NAMED_ENTITIES:
            raise MalformedHtml(f"unsupported entity &{name};")
        self.handle_data(_NAMED_ENTITIES[name])

    def handle_charref(self, name):
        try:
            code = int(name[1:], 16) if name[:1] in ("x", "X") else int(name)
            char = chr(code)
        except (ValueError, OverflowError):
            raise MalformedHtml(f"invalid character reference &#{name};") from None
        self.handle_data(char)

    def handle_comment(self, data):
        pass

    def handle_decl(self, decl):
        pass

    def unknown_decl(self, data):
        raise MalformedHtml(f"unsupported declaration {data[:20]!r}")

    def handle_pi(self, data):
        raise MalformedHtml("processing instructions are not supported")


def _span_attr(attrs, name) -> int:
    values = [v for k, v in attrs if k == name]
    if not values:
        return 1
    raw = (values[-1] or "").strip()
    if not raw.isdigit():
        raise BadSpan(f"{name}={raw!r} is not a positive integer")
    value = int(raw)
    if value < 1:
        raise BadSpan(f"{name}={value} must be >= 1")
    return value


def _place(rows: list[list[tuple[int, int, str]]]) -> tuple[list[Cell], int]:
    """HTML grid filling: each cell takes the leftmost free slot of its row."""
    taken: set[tuple[int, int]] = set()
    cells = []
    n_rows = len(rows)
    for r, row in enumerate(rows):
        c = 0
        for rowspan, colspan, text in row:
            while (r, c) in taken:
                c += 1
            cells.append(Cell(r, c, rowspan, colspan, text))
            for rr in range(r, r + rowspan):
                for cc in range(c, c + colspan):
                    taken.add((rr, cc))
            n_rows = max(n_rows, r + rowspan)
            c += colspan
    return cells, n_rows


def parse_html_table(source: str) -> TableTree:
    parser = _TableParser()
    parser.feed(source)
    parser.close()
    if parser.stack:
        raise MalformedHtml(f"unclosed <{parser.stack[-1]}>")
    if parser.tables_seen == 0:
        raise NoTable("input contains no <table>")
    cells, n_rows = _place(parser.rows)
    groups = [RowGroup(kind, tuple(range(first, first + count))) for kind, first, count in parser.groups if count]
    try:
        return build_tree(cells, groups, n_rows)
    except TableError as exc:
        raise MalformedHtml(str(exc)) from exc


def to_html(tree: TableTree) -> str:
    """Canonical HTML: no whitespace between tags, spans only when > 1."""
    out = ["<table>"]

    def emit_row(tr):
        out.append("<tr>")
        for td in tr.children:
            cell = td.cell
            attrs = ""
            if cell.rowspan > 1:
                attrs += f' rowspan="{cell.rowspan}"'
            if cell.colspan > 1:
                attrs += f' colspan="{cell.colspan}"'
            out.append(f"<td{attrs}>{_html.escape(cell.clean_text, quote=False)}</td>")
        out.append("</tr>")

    for child in tree.root.children:
        if child.label == TR:
            emit_row(child)
        else:
            out.append(f"<{child.label}>")
            for tr in child.children:
                emit_row(tr)
            out.append(f"</{child.label}>")
    out.append("</table>")
    return "".join(out)


_INT0 = {"type": "integer", "minimum": 0}
_INT1 = {"type": "integer", "minimum": 1}

DOCUMENT_SCHEMA = {
    "type": "object",
    "required": ["tables"],
    "properties": {
        "tables": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "anyOf": [{"required": ["cells"]}, {"required": ["html"]}],
                "properties": {
                    "id": {"type": "string"},
                    "html": {"type": "string"},
                    "cells": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["row", "col"],
                            "properties": {
                                "row": _INT0,
                                "col": _INT0,
                                "rowspan": _INT1,
                                "colspan": _INT1,
                                "text": {"type": ["string", "null"]},
                                "bbox": {
                                    "oneOf": [
                                        {"type": "null"},
                                        {
                                            "type": "array",
                                            "items": {"type": "number"},
                                            "minItems": 4,
                                            "maxItems": 4,
                                        },
                                    ]
                                },
                            },
                        },
                    },
                    "row_groups": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["kind", "rows"],
                            "properties": {
                                "kind": {"enum": list(ROW_GROUP_LABELS)},
                                "rows": {"type": "array", "items": _INT0},
                            },
                        },
                    },
                },
            },
        }
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(DOCUMENT_SCHEMA)


@dataclass(frozen=True)
class Document:
    tables: tuple[tuple[str, TableTree], ...]
    source_format: str = "json"

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        seen = set()
        for table_id, _ in self.tables:
            if table_id in seen:
                raise IdCollision(f"duplicate table id {table_id!r}")
            seen.add(table_id)

    def __iter__(self) -> Iterator[tuple[str, TableTree]]:
        return iter(self.tables)

    def __len__(self):
        return len(self.tables)

    @property
    def ids(self) -> list[str]:
        return [table_id for table_id, _ in self.tables]

    def as_dict(self) -> dict[str, TableTree]:
        return dict(self.tables)


def _table_from_json(entry: dict, path: str) -> TableTree:
    html_tree = None
    if "html" in entry:
        try:
            html_tree = parse_html_table(entry["html"])
        except IngestError as exc:
            raise SchemaError(f"invalid html: {exc}", f"{path}.html") from exc

    groups = None
    if "row_groups" in entry:
        groups = []
        for g, group in enumerate(entry["row_groups"]):
            try:
                groups.append(RowGroup(group["kind"], tuple(group["rows"])))
            except TableError as exc:
                raise SchemaError(str(exc), f"{path}.row_groups[{g}]") from exc
    elif html_tree is not None:
        groups = list(html_tree.row_groups)

    if "cells" not in entry:
        return html_tree if groups is None else build_tree(html_tree.cells, groups, html_tree.n_rows)

    cells = []
    for i, raw in enumerate(entry["cells"]):
        bbox = raw.get("bbox")
        try:
            cells.append(
                Cell(
                    raw["row"],
                    raw["col"],
                    raw.get("rowspan", 1),
                    raw.get("colspan", 1),
                    raw.get("text"),
                    None if bbox is None else BBox.of(bbox),
                )
            )
        except TableError as exc:
            raise SchemaError(str(exc), f"{path}.cells[{i}]") from exc
    cells.sort(key=lambda c: (c.row, c.col))
    # OverlapError is deliberately not wrapped; the caller adds the table id
    build_grid(cells)
    tree = build_tree(cells, groups, None if html_tree is None else html_tree.n_rows)

    if html_tree is not None:
        ours = [(c.row, c.col, c.rowspan, c.colspan) for c in tree.cells]
        theirs = [(c.row, c.col, c.rowspan, c.colspan) for c in html_tree.cells]
        if ours != theirs or tree.n_rows != html_tree.n_rows:
            raise SchemaError("html and cells describe different grids", f"{path}.html")
    return tree


def parse_json_document(source: Union[bytes, str, IO]) -> Document:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc

    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, err.json_path)

    tables = []
    seen: set[str] = set()
    for t, entry in enumerate(data["tables"]):
        path = f"$.tables[{t}]"
        if entry["id"] in seen:
            raise IdCollision(f"duplicate table id {entry['id']!r}", f"{path}.id")
        seen.add(entry["id"])
        try:
            tree = _table_from_json(entry, path)
        except TableError as exc:
            raise _with_table(exc, entry["id"])
        tables.append((entry["id"], tree))
    return Document(tuple(tables), "json")


def _with_table(exc: TableError, table_id: str) -> TableError:
    exc.table_id = table_id
    exc.args = (f"table {table_id!r}: {exc.args[0]}",)
    return exc


def document_to_dict(doc: Document) -> dict:
    tables = []
    for table_id, tree in doc:
        cells = []
        for c in tree.cells:
            cells.append(
                {
                    "row": c.row,
                    "col": c.col,
                    "rowspan": c.rowspan,
                    "colspan": c.colspan,
                    "text": c.text,
                    "bbox": None if c.bbox is None else c.bbox.as_list(),
                }
            )
        entry = {"id": table_id, "cells": cells}
        if tree.n_rows > tree.grid.n_rows:
            # trailing cell-less rows only survive through the html field
            entry["html"] = to_html(tree)
        if tree.row_groups:
            entry["row_groups"] = [{"kind": g.kind, "rows": list(g.rows)} for g in tree.row_groups]
        tables.append(entry)
    return {"tables": tables}


def dump_json_document(doc: Document) -> str:
    return json.dumps(document_to_dict(doc), ensure_ascii=False, indent=1)


def read_document(path) -> Document:
    with open(path, "rb") as fh:
        return parse_json_document(fh.read())


def write_document(doc: Document, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json_document(doc))
        fh.write("\n")
