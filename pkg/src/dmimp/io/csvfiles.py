"""Plot-ready CSV files: extracted impedance, plain complex traces, compare reports.

Optional leading ``# key: value`` lines carry metadata; the column header
follows them.
"""
from __future__ import annotations

import csv
import io
import math

import numpy as np

from ..extract import ImpedanceTrace
from ..netcore import ComplexTrace, FrequencyGrid, Status
from .touchstone import ParseError, _num

IMPEDANCE_HEADER = ("freq_hz", "z_re_ohm", "z_im_ohm", "z_mag_ohm", "z_phase_deg", "status")
TRACE_HEADER = ("freq_hz", "re", "im")


def phase_deg(z) -> np.ndarray:
    """Angle in degrees folded into (-180, 180]."""
    ph = np.degrees(np.angle(z))
    return np.where(ph <= -180.0, ph + 360.0, ph)


def _meta_lines(metadata) -> list[str]:
    out = []
    for key in sorted(metadata):
        value = metadata[key]
        if isinstance(value, (str, int, float, bool)):
            out.append(f"# {key}: {value}")
    return out


def _split_meta(text: str, source):
    """Yield (lineno, row) for data lines; collect metadata from leading comments."""
    meta = {}
    rows = []
    reader_lines = text.splitlines()
    for lineno, line in enumerate(reader_lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        rows.append((lineno, next(csv.reader([line]))))
    return meta, rows


def _float(text: str, lineno: int, source, allow_nan: bool = False) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"non-numeric field {text!r}", lineno, source) from None
    if not allow_nan and not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", lineno, source)
    return v


def _check_header(rows, expected, source):
    if not rows:
        raise ParseError(f"missing header {','.join(expected)}", 1, source)
    lineno, header = rows[0]
    if tuple(h.strip() for h in header) != expected:
        raise ParseError(f"expected header {','.join(expected)}, got {','.join(header)}", lineno, source)
    return rows[1:]


def _grid(freqs) -> FrequencyGrid:
    return FrequencyGrid(freqs) if len(freqs) else FrequencyGrid.empty()


def _check_freq(f: float, freqs: list, lineno: int, source) -> None:
    if f <= 0:
        raise ParseError("frequency must be > 0", lineno, source)
    if freqs and f <= freqs[-1]:
        raise ParseError(f"frequency {f!r} does not increase", lineno, source)


def write_impedance_csv(t: ImpedanceTrace) -> str:
    buf = io.StringIO()
    for line in _meta_lines(t.metadata):
        buf.write(line + "\n")
    buf.write(",".join(IMPEDANCE_HEADER) + "\n")
    mags = np.abs(t.z)
    phases = phase_deg(t.z)
    for f, z, mag, ph, st in zip(t.grid.points, t.z, mags, phases, t.status):
        label = Status(int(st)).label
        buf.write(f"{_num(f)},{_num(z.real)},{_num(z.imag)},{_num(mag)},{_num(ph)},{label}\n")
    return buf.getvalue()


def parse_impedance_csv(text: str, source: str | None = None) -> ImpedanceTrace:
    meta, rows = _split_meta(text, source)
    rows = _check_header(rows, IMPEDANCE_HEADER, source)
    freqs, zs, status = [], [], []
    for lineno, row in rows:
        if len(row) != len(IMPEDANCE_HEADER):
            raise ParseError(f"expected {len(IMPEDANCE_HEADER)} fields, found {len(row)}", lineno, source)
        try:
            st = Status.from_label(row[5])
        except ValueError as exc:
            raise ParseError(str(exc), lineno, source) from None
        f = _float(row[0], lineno, source)
        ok = st == Status.OK
        re_, im_ = (_float(row[i], lineno, source, allow_nan=not ok) for i in (1, 2))
        for i in (3, 4):
            _float(row[i], lineno, source, allow_nan=not ok)
        _check_freq(f, freqs, lineno, source)
        freqs.append(f)
        zs.append(complex(re_, im_))
        status.append(st)
    if "resampled" in meta:
        meta["resampled"] = meta["resampled"] == "True"
    if source:
        meta.setdefault("file", source)
    return ImpedanceTrace(_grid(freqs), zs, np.array(status, dtype=np.uint8), meta)


def write_trace_csv(trace: ComplexTrace) -> str:
    lines = [",".join(TRACE_HEADER)]
    for f, v in zip(trace.grid.points, trace.values):
        lines.append(f"{_num(f)},{_num(v.real)},{_num(v.imag)}")
    return "\n".join(lines) + "\n"


def parse_trace_csv(text: str, source: str | None = None) -> ComplexTrace:
    meta, rows = _split_meta(text, source)
    rows = _check_header(rows, TRACE_HEADER, source)
    freqs, values = [], []
    for lineno, row in rows:
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, found {len(row)}", lineno, source)
        f, re_, im_ = (_float(x, lineno, source) for x in row)
        _check_freq(f, freqs, lineno, source)
        freqs.append(f)
        values.append(complex(re_, im_))
    if source:
        meta["source"] = source
    return ComplexTrace(_grid(freqs), values, metadata=meta)
