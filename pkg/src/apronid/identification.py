"""Nearest-length aircraft type lookup."""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from pathlib import Path

from apronid.errors import DuplicateCode, NonPositiveLength, ParseError

HEADER = ("code", "full_name", "actual_length_m")

DEFAULT_TYPES_CSV = """\
code,full_name,actual_length_m
LM100J,Lockheed-Martin-LM100J,35
G-280,GULFSTREAM-G-280,20
G-550,GULFSTREAM-G-550,29
G-650,GULFSTREAM-G-650,30
CJ4,Cessna-Citation CJ4,16
CM2,Cessna-Citation M2,13
Bo787,Boeing 787-8,57
A-380,Airbus A-380,73
A-320,Airbus A-320,38
"""


@dataclass(frozen=True)
class AircraftType:
    code: str
    full_name: str
    actual_length_m: float


class TypeDatabase:
    """Immutable collection of aircraft types.

    ``entries`` keeps the source order (used for report rows and confusion
    matrix axes); ``by_length`` is the same set sorted by length, then code,
    and drives classification.
    """

    def __init__(self, entries):
        entries = tuple(entries)
        if not entries:
            raise ValueError("type database must not be empty")
        seen = set()
        for e in entries:
            if e.code in seen:
                raise DuplicateCode(f"duplicate type code {e.code!r}")
            seen.add(e.code)
            if not e.actual_length_m > 0:
                raise NonPositiveLength(f"{e.code}: length must be positive, got {e.actual_length_m}")
        self.entries = entries
        self.by_length = tuple(sorted(entries, key=lambda e: (e.actual_length_m, e.code)))
        self._index = {e.code: e for e in entries}

    @property
    def codes(self) -> list[str]:
        return [e.code for e in self.entries]

    def __getitem__(self, code: str) -> AircraftType:
        return self._index[code]

    def __contains__(self, code) -> bool:
        return code in self._index

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self):
        return f"TypeDatabase({len(self)} types)"


def parse_type_db(text: str) -> TypeDatabase:
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = list(reader)
    if not rows or tuple(c.strip() for c in rows[0]) != HEADER:
        raise ParseError(f"header must be {','.join(HEADER)}", line=1)
    entries = []
    seen = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
        code, name, raw_len = (c.strip() for c in row)
        if not code:
            raise ParseError("empty type code", line=lineno)
        try:
            length = float(raw_len)
        except ValueError:
            raise ParseError(f"bad length {raw_len!r}", line=lineno) from None
        if not math.isfinite(length):
            raise ParseError(f"bad length {raw_len!r}", line=lineno)
        if code in seen:
            raise DuplicateCode(f"line {lineno}: duplicate type code {code!r}")
        if length <= 0:
            raise NonPositiveLength(f"line {lineno}: length must be positive, got {raw_len}")
        seen.add(code)
        entries.append(AircraftType(code, name, length))
    if not entries:
        raise ParseError("no type rows", line=len(rows) + 1)
    return TypeDatabase(entries)


def load_type_db(source=None) -> TypeDatabase:
    """Load a type CSV from a path, or the built-in table when ``source`` is None."""
    if source is None:
        return parse_type_db(DEFAULT_TYPES_CSV)
    if isinstance(source, (str, os.PathLike)) and "\n" not in str(source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    return parse_type_db(text)


def default_type_db() -> TypeDatabase:
    return parse_type_db(DEFAULT_TYPES_CSV)


def classify_by_length(length_m: float, db: TypeDatabase) -> str:
    """Code of the type whose actual length is closest to ``length_m``.

    Equidistant candidates resolve to the shorter type; equal lengths to the
    lexicographically smaller code.
    """
    best = None
    best_gap = math.inf
    for entry in db.by_length:
        gap = abs(length_m - entry.actual_length_m)
        if gap < best_gap:
            best, best_gap = entry, gap
    return best.code
