"""Technological domains, period windows and the shared link vocabulary."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import InvalidPairError, ParseError


class Operand(str, Enum):
    INFORMATION = "information"
    ENERGY = "energy"
    MATERIAL = "material"


class Operation(str, Enum):
    STORAGE = "storage"
    TRANSPORTATION = "transportation"
    TRANSFORMATION = "transformation"


class LinkClass(str, Enum):
    STRONG = "Strong"
    WEAK = "Weak"
    ZERO = "Zero"


class FunctionalClass(str, Enum):
    SAME_FUNCTION = "SameFunction"
    DIFFERENT_OPERAND = "DifferentOperand"
    DIFFERENT_OPERATION = "DifferentOperation"
    DIFFERENT_BOTH = "DifferentBoth"


@dataclass(frozen=True)
class Domain:
    abbrev: str
    name: str
    operand: Operand
    operation: Operation

    def __post_init__(self):
        if not self.abbrev:
            raise ValueError("domain abbrev must be nonempty")
        object.__setattr__(self, "operand", Operand(self.operand))
        object.__setattr__(self, "operation", Operation(self.operation))

    def to_dict(self) -> dict:
        return {
            "abbrev": self.abbrev,
            "name": self.name,
            "operand": self.operand.value,
            "operation": self.operation.value,
        }


@dataclass(frozen=True)
class DomainTable:
    """Ordered, immutable set of domains.

    The position of a domain in ``domains`` is its row/column index in
    every matrix built downstream.
    """

    domains: tuple[Domain, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        domains = tuple(self.domains)
        object.__setattr__(self, "domains", domains)
        if len(domains) < 2:
            raise ValueError("a DomainTable needs at least 2 domains")
        index = {}
        for i, d in enumerate(domains):
            if d.abbrev in index:
                raise ValueError(f"duplicate domain abbrev {d.abbrev!r}")
            index[d.abbrev] = i
        object.__setattr__(self, "_index", index)

    @classmethod
    def sorted(cls, domains: Iterable[Domain]) -> "DomainTable":
        return cls(tuple(sorted(domains, key=lambda d: d.abbrev)))

    def __len__(self) -> int:
        return len(self.domains)

    def __iter__(self) -> Iterator[Domain]:
        return iter(self.domains)

    def __getitem__(self, key) -> Domain:
        if isinstance(key, str):
            return self.domains[self.index(key)]
        return self.domains[key]

    def __contains__(self, abbrev) -> bool:
        return abbrev in self._index

    def index(self, abbrev: str) -> int:
        try:
            return self._index[abbrev]
        except KeyError:
            raise KeyError(f"unknown domain {abbrev!r}") from None

    @property
    def abbrevs(self) -> tuple[str, ...]:
        return tuple(d.abbrev for d in self.domains)

    @property
    def n_pairs(self) -> int:
        n = len(self.domains)
        return n * (n - 1) // 2

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Index pairs ``(i, j)`` with ``i < j`` in table order."""
        return combinations(range(len(self.domains)), 2)

    def lexicographic_pairs(self) -> list[tuple[int, int]]:
        """Index pairs ordered by abbrev, each oriented so abbrev_a < abbrev_b."""
        out = []
        for i, j in self.pairs():
            a, b = self.domains[i].abbrev, self.domains[j].abbrev
            out.append((i, j) if a < b else (j, i))
        out.sort(key=lambda ij: (self.domains[ij[0]].abbrev, self.domains[ij[1]].abbrev))
        return out

    def to_records(self) -> list[dict]:
        return [d.to_dict() for d in self.domains]

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "DomainTable":
        return cls(tuple(Domain(**r) for r in records))

    @classmethod
    def from_csv(cls, source, keep_order: bool = False) -> "DomainTable":
        """Read ``abbrev,name,operand,operation`` rows.

        Domains are sorted by abbrev unless ``keep_order`` is set, in which
        case file order defines the matrix index order.
        """
        text, name = _read_text(source)
        reader = csv.DictReader(io.StringIO(text))
        expected = ["abbrev", "name", "operand", "operation"]
        if reader.fieldnames != expected:
            raise ParseError(f"expected header {','.join(expected)}", name, 1)
        domains = []
        seen = set()
        for row in reader:
            line = reader.line_num
            if None in row or any(v is None for v in row.values()):
                raise ParseError("wrong number of columns", name, line)
            abbrev = row["abbrev"].strip()
            if not abbrev:
                raise ParseError("empty abbrev", name, line)
            if abbrev in seen:
                raise ParseError(f"duplicate abbrev {abbrev!r}", name, line)
            seen.add(abbrev)
            try:
                domains.append(
                    Domain(abbrev, row["name"].strip(), row["operand"].strip(), row["operation"].strip())
                )
            except ValueError as exc:
                raise ParseError(str(exc), name, line) from None
        if len(domains) < 2:
            raise ParseError("need at least 2 domains", name)
        return cls(tuple(domains)) if keep_order else cls.sorted(domains)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["abbrev", "name", "operand", "operation"])
        for d in self.domains:
            w.writerow([d.abbrev, d.name, d.operand.value, d.operation.value])
        return buf.getvalue()


def bundled_domains(keep_order: bool = False) -> DomainTable:
    """The 29-domain table shipped as package data."""
    ref = resources.files("knowflow.data").joinpath("domains_29.csv")
    return DomainTable.from_csv(ref.read_text(encoding="utf-8"), keep_order=keep_order)


@dataclass(frozen=True)
class PeriodWindow:
    label: str
    start_year: int
    end_year: int

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ValueError(f"window {self.label}: start {self.start_year} > end {self.end_year}")

    def __contains__(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    def to_dict(self) -> dict:
        return {"label": self.label, "start": self.start_year, "end": self.end_year}


def validate_windows(windows: Sequence[PeriodWindow]) -> tuple[PeriodWindow, ...]:
    windows = tuple(windows)
    if not windows:
        raise ValueError("window schedule is empty")
    labels = [w.label for w in windows]
    if len(set(labels)) != len(labels):
        raise ValueError("window labels must be unique")
    for prev, cur in zip(windows, windows[1:]):
        if cur.start_year <= prev.end_year:
            raise ValueError(f"windows {prev.label} and {cur.label} overlap or are not ascending")
    return windows


def windows_from_records(records: Sequence[dict]) -> tuple[PeriodWindow, ...]:
    return validate_windows(PeriodWindow(r["label"], int(r["start"]), int(r["end"])) for r in records)


def load_windows(source) -> tuple[PeriodWindow, ...]:
    text, name = _read_text(source)
    try:
        payload = json.loads(text)
        return windows_from_records(payload["windows"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad windows file: {exc}", name) from None


def default_windows() -> tuple[PeriodWindow, ...]:
    """The eight 1976-2013 windows (T1..T8)."""
    ref = resources.files("knowflow.data").joinpath("windows_1976_2013.json")
    return load_windows(ref.read_text(encoding="utf-8"))


def functional_class(a: Domain, b: Domain) -> FunctionalClass:
    if a.abbrev == b.abbrev:
        raise InvalidPairError(f"functional_class needs two distinct domains, got {a.abbrev!r} twice")
    same_operand = a.operand == b.operand
    same_operation = a.operation == b.operation
    if same_operand and same_operation:
        return FunctionalClass.SAME_FUNCTION
    if same_operation:
        return FunctionalClass.DIFFERENT_OPERAND
    if same_operand:
        return FunctionalClass.DIFFERENT_OPERATION
    return FunctionalClass.DIFFERENT_BOTH


def _read_text(source) -> tuple[str, str | None]:
    """Accept a path, an open text stream, or literal CSV/JSON text."""
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8"), str(source)
    if hasattr(source, "read"):
        return source.read(), getattr(source, "name", None)
    if isinstance(source, str) and "\n" not in source and _is_file(source):
        return Path(source).read_text(encoding="utf-8"), source
    return str(source), None


def _is_file(text: str) -> bool:
    try:
        return Path(text).is_file()
    except (OSError, ValueError):
        return False
