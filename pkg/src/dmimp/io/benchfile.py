"""JSON bench description files.

Example::

    {
      "version": 1,
      "probe": {"l_lk_h": 1e-6, "c_p_f": 10e-12, "n": 1.0,
                "topology": ["shunt_cp", "series_llk", "transformer"]},
      "lisn":  {"elements": [{"kind": "resistor", "value": 50}]},
      "cable": {"elements": []},
      "dut":   {"elements": [{"kind": "resistor", "value": 50, "label": "r"}]},
      "sweep": {"f_start_hz": 150e3, "f_stop_hz": 30e6, "n_points": 201, "spacing": "log"},
      "z0": 50,
      "noise": {"sigma": 0, "seed": 0},
      "sap": {"attenuation_db": 0}
    }

Element kinds: ``resistor``, ``inductor``, ``capacitor`` (``value`` in SI),
``series`` / ``parallel`` (``elements``), and ``tline`` (``l_per_m``,
``c_per_m``, ``length_m``, optional ``r_per_m``, ``g_per_m``, ``sections``).
Every element takes an optional ``label``.
"""
from __future__ import annotations

import json
import numbers

from ..benchsim import (
    BenchModel,
    Capacitor,
    Inductor,
    NoiseModel,
    Parallel,
    ProbeModel,
    Resistor,
    Series,
    TransmissionLine,
)
from ..netcore import FrequencyGrid

BENCH_VERSION = 1

TOP_KEYS = {"version", "probe", "lisn", "cable", "dut", "sweep", "z0", "noise", "sap"}
REQUIRED_TOP = ("version", "probe", "lisn", "cable", "dut", "sweep")
PROBE_KEYS = {"l_lk_h", "c_p_f", "n", "topology"}
SWEEP_KEYS = {"f_start_hz", "f_stop_hz", "n_points", "spacing"}
NOISE_KEYS = {"sigma", "seed"}
SAP_KEYS = {"attenuation_db"}
BLOCK_KEYS = {"elements"}
LEAF_KINDS = {"resistor": Resistor, "inductor": Inductor, "capacitor": Capacitor}
GROUP_KINDS = {"series": Series, "parallel": Parallel}
LINE_KEYS = {"l_per_m", "c_per_m", "length_m", "r_per_m", "g_per_m", "sections"}


class BenchConfigError(ValueError):
    """Schema violation; ``path`` is the dotted key path of the offending entry."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class _Reader:
    def __init__(self, strict: bool):
        self.strict = strict

    def mapping(self, obj, path: str, allowed: set, required=()) -> dict:
        if not isinstance(obj, dict):
            raise BenchConfigError(path, f"expected an object, got {type(obj).__name__}")
        for key in required:
            if key not in obj:
                raise BenchConfigError(_join(path, key), "required key is missing")
        if self.strict:
            unknown = sorted(set(obj) - allowed)
            if unknown:
                raise BenchConfigError(_join(path, unknown[0]), "unknown key")
        return obj

    def number(self, obj: dict, key: str, path: str, default=None, integer=False):
        if key not in obj:
            if default is None:
                raise BenchConfigError(_join(path, key), "required key is missing")
            return default
        v = obj[key]
        ok = isinstance(v, numbers.Integral) if integer else isinstance(v, numbers.Real)
        if isinstance(v, bool) or not ok:
            kind = "an integer" if integer else "a number"
            raise BenchConfigError(_join(path, key), f"expected {kind}, got {v!r}")
        return int(v) if integer else float(v)

    def element(self, obj, path: str):
        if not isinstance(obj, dict) or "kind" not in obj:
            raise BenchConfigError(path, "element needs a 'kind'")
        kind = obj["kind"]
        label = obj.get("label")
        if label is not None and not isinstance(label, str):
            raise BenchConfigError(_join(path, "label"), "label must be a string")
        try:
            if kind in LEAF_KINDS:
                self.mapping(obj, path, {"kind", "label", "value"}, ("value",))
                return LEAF_KINDS[kind](self.number(obj, "value", path), label)
            if kind in GROUP_KINDS:
                self.mapping(obj, path, {"kind", "label", "elements"}, ("elements",))
                children = self.elements(obj["elements"], _join(path, "elements"))
                if not children:
                    raise BenchConfigError(_join(path, "elements"), f"empty {kind} group")
                return GROUP_KINDS[kind](children, label)
            if kind == "tline":
                self.mapping(obj, path, LINE_KEYS | {"kind", "label"}, ("l_per_m", "c_per_m", "length_m"))
                sections = obj.get("sections")
                if sections is not None:
                    sections = self.number(obj, "sections", path, integer=True)
                return TransmissionLine(
                    self.number(obj, "l_per_m", path),
                    self.number(obj, "c_per_m", path),
                    self.number(obj, "length_m", path),
                    self.number(obj, "r_per_m", path, 0.0),
                    self.number(obj, "g_per_m", path, 0.0),
                    sections,
                    label,
                )
        except BenchConfigError:
            raise
        except ValueError as exc:
            raise BenchConfigError(path, str(exc)) from None
        raise BenchConfigError(_join(path, "kind"), f"unknown element kind {kind!r}")

    def elements(self, obj, path: str) -> tuple:
        if not isinstance(obj, list):
            raise BenchConfigError(path, "expected a list of elements")
        return tuple(self.element(e, f"{path}[{i}]") for i, e in enumerate(obj))

    def block(self, obj, name: str):
        self.mapping(obj, name, BLOCK_KEYS, ("elements",))
        return Series(self.elements(obj["elements"], f"{name}.elements"), name)


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def read_bench_config(text: str, strict: bool = True) -> BenchModel:
    """Parse and validate a bench file; ``strict=False`` ignores unknown keys."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BenchConfigError("", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    r = _Reader(strict)
    r.mapping(doc, "", TOP_KEYS, REQUIRED_TOP)
    if doc["version"] != BENCH_VERSION:
        raise BenchConfigError("version", f"unsupported bench version {doc['version']!r}")

    p = r.mapping(doc["probe"], "probe", PROBE_KEYS, ("n",))
    topology = p.get("topology", list(ProbeModel().topology))
    if not isinstance(topology, list) or not all(isinstance(t, str) for t in topology):
        raise BenchConfigError("probe.topology", "expected a list of part names")
    values = (r.number(p, "l_lk_h", "probe", 0.0), r.number(p, "c_p_f", "probe", 0.0), r.number(p, "n", "probe"))
    try:
        probe = ProbeModel(*values, topology)
    except ValueError as exc:
        raise BenchConfigError("probe", str(exc)) from None

    s = r.mapping(doc["sweep"], "sweep", SWEEP_KEYS, ("f_start_hz", "f_stop_hz", "n_points"))
    spacing = s.get("spacing", "log")
    if spacing not in ("log", "linear"):
        raise BenchConfigError("sweep.spacing", f"expected 'log' or 'linear', got {spacing!r}")
    f0, f1 = r.number(s, "f_start_hz", "sweep"), r.number(s, "f_stop_hz", "sweep")
    npts = r.number(s, "n_points", "sweep", integer=True)
    if npts < 1 or (npts > 1 and not 0 < f0 < f1) or f0 <= 0:
        raise BenchConfigError("sweep", "need 0 < f_start_hz < f_stop_hz and n_points >= 1")
    grid = (FrequencyGrid.logspace if spacing == "log" else FrequencyGrid.linspace)(f0, f1, npts)

    noise_doc = r.mapping(doc.get("noise", {}), "noise", NOISE_KEYS)
    sap_doc = r.mapping(doc.get("sap", {}), "sap", SAP_KEYS)
    z0 = r.number(doc, "z0", "", 50.0)
    sigma, seed = r.number(noise_doc, "sigma", "noise", 0.0), r.number(noise_doc, "seed", "noise", 0, integer=True)
    try:
        noise = NoiseModel(sigma, seed)
    except ValueError as exc:
        raise BenchConfigError("noise", str(exc)) from None

    blocks = {name: r.block(doc[name], name) for name in ("lisn", "cable", "dut")}
    if not blocks["dut"].elements:
        raise BenchConfigError("dut.elements", "the DUT needs at least one element")
    attenuation = r.number(sap_doc, "attenuation_db", "sap", 0.0)
    try:
        return BenchModel(probe=probe, grid=grid, z0=z0, noise=noise, sap_attenuation_db=attenuation, **blocks)
    except ValueError as exc:
        raise BenchConfigError("", str(exc)) from None


def _element_doc(e) -> dict:
    out: dict = {}
    if isinstance(e, (Resistor, Inductor, Capacitor)):
        kind = {Resistor: "resistor", Inductor: "inductor", Capacitor: "capacitor"}[type(e)]
        out = {"kind": kind, "value": e.value}
    elif isinstance(e, (Series, Parallel)):
        out = {"kind": "series" if isinstance(e, Series) else "parallel", "elements": [_element_doc(c) for c in e.elements]}
    elif isinstance(e, TransmissionLine):
        out = {"kind": "tline", "l_per_m": e.l_per_m, "c_per_m": e.c_per_m, "length_m": e.length_m}
        if e.r_per_m:
            out["r_per_m"] = e.r_per_m
        if e.g_per_m:
            out["g_per_m"] = e.g_per_m
        if e.sections is not None:
            out["sections"] = e.sections
    else:
        raise TypeError(f"not a loop element: {e!r}")
    if e.label is not None:
        out["label"] = e.label
    return out


def _block_doc(e, name: str) -> dict:
    if isinstance(e, Series) and e.label == name:
        return {"elements": [_element_doc(c) for c in e.elements]}
    return {"elements": [_element_doc(e)]}


def write_bench_config(b: BenchModel, spacing: str | None = None) -> str:
    f = b.grid.points
    if spacing is None:
        spacing = "linear" if len(f) > 2 and abs((f[1] - f[0]) - (f[2] - f[1])) <= 1e-9 * f[-1] else "log"
    doc = {
        "version": BENCH_VERSION,
        "probe": {"l_lk_h": b.probe.l_lk_h, "c_p_f": b.probe.c_p_f, "n": b.probe.n, "topology": list(b.probe.topology)},
        "lisn": _block_doc(b.lisn, "lisn"),
        "cable": _block_doc(b.cable, "cable"),
        "dut": _block_doc(b.dut, "dut"),
        "sweep": {"f_start_hz": float(f[0]), "f_stop_hz": float(f[-1]), "n_points": len(f), "spacing": spacing},
        "z0": b.z0,
        "noise": {"sigma": b.noise.sigma, "seed": b.noise.seed},
    }
    if b.sap_attenuation_db:
        doc["sap"] = {"attenuation_db": b.sap_attenuation_db}
    return json.dumps(doc, indent=2) + "\n"
