"""JSON calibration files.

Layout (version 1)::

    {"format": "dmimp-calibration", "version": 1,
     "z0": 50.0, "r_load": 50.0,
     "freq_hz": [...],
     "k1": [[re, im], ...], "k2": [...], "k3": [...],
     "status": ["ok", ...],
     "metadata": {...}}

Non-finite coefficients (only at flagged points) are written as ``null``.
"""
from __future__ import annotations

import json
import math

import numpy as np

from ..calib import CalibrationSet
from ..netcore import FrequencyGrid, Status
from .touchstone import ParseError

CAL_FORMAT = "dmimp-calibration"
CAL_VERSION = 1


def _pairs(arr) -> list:
    return [
        [float(v.real), float(v.imag)] if math.isfinite(v.real) and math.isfinite(v.imag) else None
        for v in arr
    ]


def write_calibration(cal: CalibrationSet) -> str:
    doc = {
        "format": CAL_FORMAT,
        "version": CAL_VERSION,
        "z0": cal.z0,
        "r_load": cal.r_load,
        "freq_hz": [float(f) for f in cal.grid.points],
        "k1": _pairs(cal.k1),
        "k2": _pairs(cal.k2),
        "k3": _pairs(cal.k3),
        "status": [Status(int(s)).label for s in cal.status],
        "metadata": {k: v for k, v in cal.metadata.items() if isinstance(v, (str, int, float, bool, list))},
    }
    return json.dumps(doc, indent=1) + "\n"


def read_calibration(text: str, source: str | None = None) -> CalibrationSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, source) from None
    if not isinstance(doc, dict) or doc.get("format") != CAL_FORMAT:
        raise ParseError(f"not a calibration file (format must be {CAL_FORMAT!r})", None, source)
    if doc.get("version") != CAL_VERSION:
        raise ParseError(f"unsupported calibration version {doc.get('version')!r}", None, source)
    missing = [k for k in ("z0", "r_load", "freq_hz", "k1", "k2", "k3", "status") if k not in doc]
    if missing:
        raise ParseError(f"calibration file lacks {', '.join(missing)}", None, source)
    n = len(doc["freq_hz"])
    for key in ("k1", "k2", "k3", "status"):
        if len(doc[key]) != n:
            raise ParseError(f"{key} has {len(doc[key])} entries for {n} frequencies", None, source)
    try:
        status = np.array([Status.from_label(s) for s in doc["status"]], dtype=np.uint8)
        ks = [
            np.array([complex(*p) if p is not None else complex("nan") for p in doc[key]])
            for key in ("k1", "k2", "k3")
        ]
        grid = FrequencyGrid(doc["freq_hz"])
        meta = dict(doc.get("metadata", {}))
        if source:
            meta.setdefault("id", source)
        return CalibrationSet(grid, *ks, status, r_load=float(doc["r_load"]), z0=float(doc["z0"]), metadata=meta)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid calibration content: {exc}", None, source) from None
