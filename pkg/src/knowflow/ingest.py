"""Raw record parsing, period aggregation and the aggregates.json format."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
import numpy as np

from .domains import (
    DomainTable,
    PeriodWindow,
    _read_text,
    validate_windows,
    windows_from_records,
)
from .errors import ConflictError, ParseError, SchemaError, UnknownPeriodError


@dataclass(frozen=True, order=True)
class PatentRecord:
    patent_id: str
    domain_abbrev: str
    grant_year: int


@dataclass(frozen=True, order=True)
class CitationRecord:
    citing_patent_id: str
    cited_patent_id: str


class PeriodAggregates:
    """Per-period citation and patent counts over a fixed domain table.

    ``c`` has shape (T, n, n), symmetric with a zero diagonal; ``p`` has
    shape (T, n); ``c_total`` and ``p_total`` have shape (T,). All arrays
    are int64 and read-only.
    """

    def __init__(self, domain_table, windows, c, p, c_total, p_total, metadata=None):
        self.domain_table = domain_table
        self.windows = validate_windows(windows)
        T, n = len(self.windows), len(domain_table)
        c = np.array(c, dtype=np.int64).reshape(T, n, n)
        p = np.array(p, dtype=np.int64).reshape(T, n)
        c_total = np.array(c_total, dtype=np.int64).reshape(T)
        p_total = np.array(p_total, dtype=np.int64).reshape(T)
        if not np.array_equal(c, c.transpose(0, 2, 1)):
            raise ValueError("citation matrices must be symmetric")
        if np.any(np.diagonal(c, axis1=1, axis2=2) != 0):
            raise ValueError("citation matrices must have a zero diagonal")
        for name, arr in (("c", c), ("p", p), ("c_total", c_total), ("p_total", p_total)):
            if np.any(arr < 0):
                raise ValueError(f"{name} has negative counts")
        for a in (c, p, c_total, p_total):
            a.setflags(write=False)
        self.c, self.p, self.c_total, self.p_total = c, p, c_total, p_total
        self.metadata = dict(metadata or {})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(w.label for w in self.windows)

    def period_index(self, label: str) -> int:
        for k, w in enumerate(self.windows):
            if w.label == label:
                return k
        raise UnknownPeriodError(f"unknown period {label!r}; known: {', '.join(self.labels)}")

    def count(self, label: str, a: str, b: str) -> int:
        t = self.period_index(label)
        return int(self.c[t, self.domain_table.index(a), self.domain_table.index(b)])

    def __eq__(self, other):
        if not isinstance(other, PeriodAggregates):
            return NotImplemented
        return (
            self.domain_table == other.domain_table
            and self.windows == other.windows
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.c_total, other.c_total)
            and np.array_equal(self.p_total, other.p_total)
        )

    def __repr__(self):
        return f"PeriodAggregates(n={len(self.domain_table)}, periods={list(self.labels)})"

    def to_json_dict(self) -> dict:
        out = {
            "domains": self.domain_table.to_records(),
            "windows": [w.to_dict() for w in self.windows],
            "c": {w.label: self.c[t].tolist() for t, w in enumerate(self.windows)},
            "p": {w.label: self.p[t].tolist() for t, w in enumerate(self.windows)},
            "c_total": {w.label: int(self.c_total[t]) for t, w in enumerate(self.windows)},
            "p_total": {w.label: int(self.p_total[t]) for t, w in enumerate(self.windows)},
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out


# -- parsing ---------------------------------------------------------------


def _csv_rows(source, header: list[str]):
    text, name = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise ParseError("empty file (missing header)", name, 1) from None
    if [h.strip() for h in first] != header:
        raise ParseError(f"expected header {','.join(header)}, got {','.join(first)}", name, 1)
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", name, reader.line_num)
        yield reader.line_num, [cell.strip() for cell in row], name


def parse_patents(source, domain_table: DomainTable) -> tuple[PatentRecord, ...]:
    years: dict[str, int] = {}
    records = set()
    for line, (pid, abbrev, year), name in _csv_rows(source, ["patent_id", "domain_abbrev", "grant_year"]):
        if not pid:
            raise ParseError("empty patent_id", name, line)
        if abbrev not in domain_table:
            raise ParseError(f"unknown domain abbrev {abbrev!r}", name, line)
        try:
            y = int(year)
        except ValueError:
            raise ParseError(f"grant_year {year!r} is not an integer", name, line) from None
        if years.setdefault(pid, y) != y:
            raise ConflictError(f"patent {pid!r} listed with grant years {years[pid]} and {y}", name, line)
        records.add(PatentRecord(pid, abbrev, y))
    return tuple(sorted(records))


def parse_citations(source) -> tuple[CitationRecord, ...]:
    records = set()
    for line, (citing, cited), name in _csv_rows(source, ["citing_patent_id", "cited_patent_id"]):
        if not citing or not cited:
            raise ParseError("empty patent id", name, line)
        if citing == cited:
            raise ParseError(f"patent {citing!r} cites itself", name, line)
        records.add(CitationRecord(citing, cited))
    return tuple(sorted(records))


def parse_inputs(citations_stream, patents_stream, domains_stream, keep_domain_order: bool = False):
    """Parse the three CSV inputs into deduplicated, sorted record tuples."""
    table = DomainTable.from_csv(domains_stream, keep_order=keep_domain_order)
    patents = parse_patents(patents_stream, table)
    citations = parse_citations(citations_stream)
    return table, patents, citations


# -- aggregation -----------------------------------------------------------


def aggregate(
    patents: Iterable[PatentRecord],
    citations: Iterable[CitationRecord],
    domain_table: DomainTable,
    windows: Sequence[PeriodWindow],
) -> PeriodAggregates:
    """Count citations and patents per window.

    A citation belongs to the window holding the citing patent's grant
    year. Each unordered cross-domain pair spanned by (citing domains x
    cited domains) is incremented once; the citation also counts once
    towards ``c_total`` when both endpoints are domain patents.
    """
    windows = validate_windows(windows)
    T, n = len(windows), len(domain_table)

    def window_of(year):
        for k, w in enumerate(windows):
            if year in w:
                return k
        return None

    year_of: dict[str, int] = {}
    members: dict[str, set[int]] = {}
    for rec in patents:
        year_of[rec.patent_id] = rec.grant_year
        members.setdefault(rec.patent_id, set()).add(domain_table.index(rec.domain_abbrev))

    p = np.zeros((T, n), dtype=np.int64)
    p_total = np.zeros(T, dtype=np.int64)
    for pid, doms in members.items():
        t = window_of(year_of[pid])
        if t is None:
            continue
        p_total[t] += 1
        for i in doms:
            p[t, i] += 1

    c = np.zeros((T, n, n), dtype=np.int64)
    c_total = np.zeros(T, dtype=np.int64)
    for rec in set(citations):
        src = members.get(rec.citing_patent_id)
        dst = members.get(rec.cited_patent_id)
        if src is None or dst is None:
            continue
        t = window_of(year_of[rec.citing_patent_id])
        if t is None:
            continue
        c_total[t] += 1
        pairs = {(min(i, j), max(i, j)) for i in src for j in dst if i != j}
        for i, j in pairs:
            c[t, i, j] += 1
            c[t, j, i] += 1
    return PeriodAggregates(domain_table, windows, c, p, c_total, p_total)


# -- aggregates.json -------------------------------------------------------

_COUNT_MAP = {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}}

AGGREGATES_SCHEMA = {
    "type": "object",
    "required": ["domains", "windows", "c", "p", "c_total", "p_total"],
    "properties": {
        "domains": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["abbrev", "name", "operand", "operation"],
                "properties": {
                    "abbrev": {"type": "string", "minLength": 1},
                    "name": {"type": "string"},
                    "operand": {"enum": ["information", "energy", "material"]},
                    "operation": {"enum": ["storage", "transportation", "transformation"]},
                },
            },
        },
        "windows": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "start", "end"],
                "properties": {
                    "label": {"type": "string"},
                    "start": {"type": "integer"},
                    "end": {"type": "integer"},
                },
            },
        },
        "c": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            },
        },
        "p": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
        "c_total": _COUNT_MAP,
        "p_total": _COUNT_MAP,
        "metadata": {"type": "object"},
    },
}


def aggregates_from_dict(payload: dict) -> PeriodAggregates:
    try:
        jsonschema.validate(payload, AGGREGATES_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(x) for x in exc.absolute_path)
        if exc.validator == "required":
            missing = [k for k in exc.validator_value if k not in exc.instance]
            path = "/".join(filter(None, [path, missing[0] if missing else ""]))
        raise SchemaError(exc.message, field=path or "<root>") from None
    try:
        table = DomainTable.from_records(payload["domains"])
        windows = windows_from_records(payload["windows"])
    except ValueError as exc:
        raise SchemaError(str(exc), field="domains/windows") from None
    n = len(table)
    c, p, c_total, p_total = [], [], [], []
    for w in windows:
        for key in ("c", "p", "c_total", "p_total"):
            if w.label not in payload[key]:
                raise SchemaError(f"missing period {w.label!r}", field=f"{key}/{w.label}")
        mat = payload["c"][w.label]
        if len(mat) != n or any(len(row) != n for row in mat):
            raise SchemaError(f"expected a {n}x{n} matrix", field=f"c/{w.label}")
        if len(payload["p"][w.label]) != n:
            raise SchemaError(f"expected {n} counts", field=f"p/{w.label}")
        c.append(mat)
        p.append(payload["p"][w.label])
        c_total.append(payload["c_total"][w.label])
        p_total.append(payload["p_total"][w.label])
    try:
        return PeriodAggregates(table, windows, c, p, c_total, p_total, payload.get("metadata"))
    except ValueError as exc:
        raise SchemaError(str(exc), field="c") from None


def dumps_aggregates(agg: PeriodAggregates) -> str:
    # one matrix row per line keeps files diffable
    d = agg.to_json_dict()
    lines = ["{"]
    lines.append(f'  "domains": {json.dumps(d["domains"])},')
    lines.append(f'  "windows": {json.dumps(d["windows"])},')
    lines.append('  "c": {')
    for k, label in enumerate(agg.labels):
        rows = ",\n      ".join(json.dumps(r) for r in d["c"][label])
        sep = "," if k < len(agg.labels) - 1 else ""
        lines.append(f'    "{label}": [\n      {rows}\n    ]{sep}')
    lines.append("  },")
    lines.append(f'  "p": {json.dumps(d["p"])},')
    lines.append(f'  "c_total": {json.dumps(d["c_total"])},')
    tail = "," if "metadata" in d else ""
    lines.append(f'  "p_total": {json.dumps(d["p_total"])}{tail}')
    if "metadata" in d:
        lines.append(f'  "metadata": {json.dumps(d["metadata"], sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_aggregates(agg: PeriodAggregates, path) -> None:
    Path(path).write_text(dumps_aggregates(agg), encoding="utf-8", newline="\n")


def load_aggregates(source) -> PeriodAggregates:
    text, name = _read_text(source)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", name, exc.lineno) from None
    return aggregates_from_dict(payload)
