"""Touchstone v1 one-port (.s1p) reading and writing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..netcore import ComplexTrace, FrequencyGrid

UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
UNIT_NAMES = {"HZ": "Hz", "KHZ": "kHz", "MHZ": "MHz", "GHZ": "GHz"}
FORMATS = ("RI", "MA", "DB")
PARAMETERS = ("S", "Y", "Z", "H", "G")
# zero magnitude has no dB value; written as this floor instead
DB_FLOOR = -400.0


class ParseError(ValueError):
    """Malformed input; ``line`` is the 1-based line number (None if not line-bound)."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source}:" if source else ""
        where += f"line {line}: " if line is not None else (" " if source else "")
        super().__init__(f"{where}{message}")


@dataclass
class TouchstoneDocument:
    unit: str = "GHZ"
    parameter: str = "S"
    fmt: str = "MA"
    r_ref: float = 50.0
    comments: list[str] = field(default_factory=list)
    freqs_hz: np.ndarray = field(default_factory=lambda: np.empty(0))
    values: np.ndarray = field(default_factory=lambda: np.empty(0, complex))


def _parse_option_line(body: str, lineno: int, doc: TouchstoneDocument, source) -> None:
    tokens = body.split()
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in UNITS:
            doc.unit = tok
        elif tok in FORMATS:
            doc.fmt = tok
        elif tok in PARAMETERS:
            if tok != "S":
                raise ParseError(f"only S-parameter files are supported, got {tokens[i]!r}", lineno, source)
            doc.parameter = tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise ParseError("option 'R' needs a reference resistance", lineno, source)
            try:
                doc.r_ref = float(tokens[i + 1])
            except ValueError:
                raise ParseError(f"bad reference resistance {tokens[i + 1]!r}", lineno, source) from None
            if not (math.isfinite(doc.r_ref) and doc.r_ref > 0):
                raise ParseError(f"reference resistance must be > 0, got {tokens[i + 1]!r}", lineno, source)
            i += 1
        elif tok.endswith("HZ"):
            raise ParseError(f"unknown frequency unit {tokens[i]!r}", lineno, source)
        else:
            raise ParseError(f"unrecognised option token {tokens[i]!r}", lineno, source)
        i += 1


def _pair_to_complex(fmt: str, x: float, y: float) -> complex:
    if fmt == "RI":
        return complex(x, y)
    mag = x if fmt == "MA" else 10 ** (x / 20)
    return mag * complex(math.cos(math.radians(y)), math.sin(math.radians(y)))


def parse_touchstone(text: str, source: str | None = None) -> TouchstoneDocument:
    doc = TouchstoneDocument()
    seen_option = False
    freqs, values = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("!")
        if _:
            doc.comments.append(comment.strip())
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if seen_option:
                raise ParseError("second option line", lineno, source)
            _parse_option_line(line[1:], lineno, doc, source)
            seen_option = True
            continue
        if not seen_option:
            raise ParseError("missing option line before data", lineno, source)
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"one-port data row needs 3 numeric fields, found {len(fields)}", lineno, source)
        try:
            f, x, y = (float(v) for v in fields)
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", lineno, source) from None
        if not all(math.isfinite(v) for v in (f, x, y)):
            raise ParseError(f"non-finite value in {line!r}", lineno, source)
        f_hz = f * UNITS[doc.unit]
        if f_hz <= 0:
            raise ParseError(f"frequency must be > 0, got {fields[0]}", lineno, source)
        if freqs and f_hz <= freqs[-1]:
            raise ParseError(f"frequency {fields[0]} does not increase", lineno, source)
        freqs.append(f_hz)
        values.append(_pair_to_complex(doc.fmt, x, y))
    if not seen_option:
        raise ParseError("missing option line", len(text.splitlines()) or 1, source)
    doc.freqs_hz = np.array(freqs, dtype=float)
    doc.values = np.array(values, dtype=complex)
    return doc


def parse_touchstone_1port(text: str, source: str | None = None) -> ComplexTrace:
    """Parse a one-port file into a trace of linear complex values over Hz."""
    doc = parse_touchstone(text, source)
    grid = FrequencyGrid(doc.freqs_hz) if doc.freqs_hz.size else FrequencyGrid.empty()
    meta = {"comments": doc.comments, "format": doc.fmt, "r_ref": doc.r_ref, "unit": UNIT_NAMES[doc.unit]}
    if source:
        meta["source"] = source
    return ComplexTrace(grid, doc.values, metadata=meta)


def _num(x: float) -> str:
    """Shortest text that parses back to exactly ``x``; integral values lose the '.0'."""
    text = repr(float(x) + 0.0)
    return text[:-2] if text.endswith(".0") else text


def format_pair(fmt: str, v: complex) -> tuple[str, str]:
    fmt = fmt.upper()
    if fmt == "RI":
        return _num(v.real), _num(v.imag)
    mag = abs(v)
    ang = math.degrees(math.atan2(v.imag, v.real))
    if fmt == "MA":
        return _num(mag), _num(ang)
    if fmt == "DB":
        return _num(20 * math.log10(mag) if mag > 0 else DB_FLOOR), _num(ang)
    raise ValueError(f"unknown Touchstone format {fmt!r}; expected one of {FORMATS}")


def write_touchstone_1port(
    trace: ComplexTrace, fmt: str = "RI", unit: str = "Hz", r_ref: float | None = None, comments=()
) -> str:
    fmt = fmt.upper()
    if fmt not in FORMATS:
        raise ValueError(f"unknown Touchstone format {fmt!r}; expected one of {FORMATS}")
    unit_key = unit.upper()
    if unit_key not in UNITS:
        raise ValueError(f"unknown frequency unit {unit!r}")
    if not np.all(np.isfinite(trace.values)):
        raise ValueError("Touchstone output needs finite values at every point")
    if r_ref is None:
        r_ref = trace.metadata.get("r_ref", 50.0)
    lines = [f"! {c}" for c in comments]
    lines.append(f"# {UNIT_NAMES[unit_key]} S {fmt} R {_num(float(r_ref))}")
    scale = UNITS[unit_key]
    for f, v in zip(trace.grid.points, trace.values):
        x, y = format_pair(fmt, complex(v))
        lines.append(f"{_num(f / scale)} {x} {y}")
    return "\n".join(lines) + "\n"
