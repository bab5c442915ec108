"""Software stand-in for the probe / LISN / cable / DUT measurement bench.

The bench is a single differential-mode loop seen through a clamp-on probe.
The probe is a two-port (parasitic shunt capacitance, leakage inductance and
an ideal transformer, in a configurable order); the LISN and cable are series
elements of the loop; the DUT terminates the chain. Everything is linear, so
the reflection at the analyser plane is computed exactly and serves as the
oracle for calibration and extraction.
"""
from __future__ import annotations

import dataclasses
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .calib import DEFAULT_R_LOAD, StandardsTriple
from .netcore import (
    DEFAULT_Z0,
    AbcdNetwork,
    ComplexTrace,
    FrequencyGrid,
    as_z0,
    cascade,
    input_impedance,
    make_attenuator,
    make_series,
    make_shunt,
    make_transformer,
    reflection_from_impedance,
)

# -- loop elements -----------------------------------------------------------


@dataclass(frozen=True)
class Resistor:
    value: float
    label: str | None = None

    def __post_init__(self):
        _check_positive(self, "value")

    def impedance(self, omega: np.ndarray) -> np.ndarray:
        return np.full(omega.shape, self.value, dtype=complex)


@dataclass(frozen=True)
class Inductor:
    value: float
    label: str | None = None

    def __post_init__(self):
        _check_positive(self, "value")

    def impedance(self, omega: np.ndarray) -> np.ndarray:
        return 1j * omega * self.value


@dataclass(frozen=True)
class Capacitor:
    value: float
    label: str | None = None

    def __post_init__(self):
        _check_positive(self, "value")

    def impedance(self, omega: np.ndarray) -> np.ndarray:
        return 1 / (1j * omega * self.value)


@dataclass(frozen=True)
class Series:
    elements: tuple = ()
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))


@dataclass(frozen=True)
class Parallel:
    elements: tuple = ()
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))


@dataclass(frozen=True)
class TransmissionLine:
    """Two-wire line given by per-metre constants.

    ``sections=None`` uses the exact distributed solution; an integer uses that
    many lumped pi sections instead.
    """

    l_per_m: float
    c_per_m: float
    length_m: float
    r_per_m: float = 0.0
    g_per_m: float = 0.0
    sections: int | None = None
    label: str | None = None

    def __post_init__(self):
        for name in ("l_per_m", "c_per_m", "length_m"):
            _check_positive(self, name)
        if self.r_per_m < 0 or self.g_per_m < 0:
            raise ValueError("line losses must be >= 0")
        if self.sections is not None and self.sections < 1:
            raise ValueError("sections must be >= 1")

    @property
    def characteristic_impedance(self) -> float:
        return float(np.sqrt(self.l_per_m / self.c_per_m))

    def abcd(self, grid: FrequencyGrid) -> AbcdNetwork:
        w = grid.omega
        z = self.r_per_m + 1j * w * self.l_per_m
        y = self.g_per_m + 1j * w * self.c_per_m
        if self.sections is None:
            zc = np.sqrt(z / y)
            gl = np.sqrt(z * y) * self.length_m
            m = np.empty((len(grid), 2, 2), dtype=complex)
            m[:, 0, 0] = m[:, 1, 1] = np.cosh(gl)
            m[:, 0, 1] = zc * np.sinh(gl)
            m[:, 1, 0] = np.sinh(gl) / zc
            return AbcdNetwork(grid, m)
        dl = self.length_m / self.sections
        half_shunt = make_shunt(y * dl / 2, grid)
        section = cascade(cascade(half_shunt, make_series(z * dl, grid)), half_shunt)
        out = section
        for _ in range(self.sections - 1):
            out = cascade(out, section)
        return out


LoopElement = Union[Resistor, Inductor, Capacitor, Series, Parallel, TransmissionLine]
_LEAVES = (Resistor, Inductor, Capacitor)


def _check_positive(obj, name):
    v = getattr(obj, name)
    if not (np.isfinite(v) and v > 0):
        raise ValueError(f"{type(obj).__name__}.{name} must be finite and > 0, got {v!r}")


def _has_line(e: LoopElement) -> bool:
    if isinstance(e, TransmissionLine):
        return True
    if isinstance(e, (Series, Parallel)):
        return any(_has_line(c) for c in e.elements)
    return False


def _impedance(e: LoopElement, omega: np.ndarray) -> np.ndarray:
    if isinstance(e, _LEAVES):
        return e.impedance(omega)
    if isinstance(e, TransmissionLine):
        raise ValueError("a transmission line is a two-port; it has no one-port impedance")
    if not e.elements:
        raise ValueError(f"empty {type(e).__name__.lower()} group{_label_suffix(e)}")
    if isinstance(e, Series):
        return sum((_impedance(c, omega) for c in e.elements), np.zeros(omega.shape, complex))
    if isinstance(e, Parallel):
        return 1 / sum(1 / _impedance(c, omega) for c in e.elements)
    raise TypeError(f"not a loop element: {e!r}")


def _label_suffix(e) -> str:
    return f" {e.label!r}" if getattr(e, "label", None) else ""


def eval_element_impedance(e: LoopElement, grid: FrequencyGrid) -> ComplexTrace:
    """One-port impedance of an element tree over ``grid``."""
    return ComplexTrace(grid, _impedance(e, grid.omega), metadata={"element": e.label or type(e).__name__})


def element_abcd(e: LoopElement, grid: FrequencyGrid) -> AbcdNetwork:
    """The element as a series two-port in the loop (lines contribute their own ABCD)."""
    if isinstance(e, TransmissionLine):
        return e.abcd(grid)
    if isinstance(e, Series) and _has_line(e):
        out = AbcdNetwork.identity(grid)
        for child in e.elements:
            out = cascade(out, element_abcd(child, grid))
        return out
    if isinstance(e, Parallel) and _has_line(e):
        raise ValueError("transmission lines cannot sit inside a parallel group")
    return make_series(_impedance(e, grid.omega), grid)


def halve(e: LoopElement) -> LoopElement:
    """Element whose series impedance is exactly half of ``e``'s."""
    if isinstance(e, (Resistor, Inductor)):
        return dataclasses.replace(e, value=e.value / 2)
    if isinstance(e, Capacitor):
        return dataclasses.replace(e, value=e.value * 2)
    if isinstance(e, TransmissionLine):
        return dataclasses.replace(e, length_m=e.length_m / 2)
    return dataclasses.replace(e, elements=tuple(halve(c) for c in e.elements))


def iter_elements(e: LoopElement) -> Iterable[LoopElement]:
    yield e
    if isinstance(e, (Series, Parallel)):
        for c in e.elements:
            yield from iter_elements(c)


# -- bench -------------------------------------------------------------------

PROBE_PARTS = ("shunt_cp", "series_llk", "transformer")


@dataclass(frozen=True)
class ProbeModel:
    """Clamp-on probe two-port; ``topology`` lists parts from the analyser side."""

    l_lk_h: float = 0.0
    c_p_f: float = 0.0
    n: float = 1.0
    topology: tuple = PROBE_PARTS

    def __post_init__(self):
        object.__setattr__(self, "topology", tuple(self.topology))
        if self.l_lk_h < 0 or self.c_p_f < 0:
            raise ValueError("probe leakage inductance and parasitic capacitance must be >= 0")
        if not (np.isfinite(self.n) and self.n > 0):
            raise ValueError("probe turns ratio must be > 0")
        if not self.topology:
            raise ValueError("probe topology must not be empty")
        unknown = set(self.topology) - set(PROBE_PARTS)
        if unknown:
            raise ValueError(f"unknown probe parts {sorted(unknown)}; expected {PROBE_PARTS}")

    def abcd(self, grid: FrequencyGrid) -> AbcdNetwork:
        parts = {
            "shunt_cp": lambda: make_shunt(1j * grid.omega * self.c_p_f, grid),
            "series_llk": lambda: make_series(1j * grid.omega * self.l_lk_h, grid),
            "transformer": lambda: make_transformer(self.n, grid),
        }
        out = AbcdNetwork.identity(grid)
        for name in self.topology:
            out = cascade(out, parts[name]())
        return out


@dataclass(frozen=True)
class NoiseModel:
    """I.i.d. circular complex Gaussian added to every reflection sample.

    ``sigma`` is the RMS magnitude, so each quadrature gets ``sigma/sqrt(2)``.
    """

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("noise sigma must be >= 0")

    def sample(self, n: int, role: str) -> np.ndarray:
        # stream keyed by (seed, role); index i is always the i-th draw
        ss = np.random.SeedSequence([int(self.seed) & 0xFFFFFFFF, zlib.crc32(role.encode())])
        z = np.random.default_rng(ss).standard_normal((n, 2))
        return self.sigma / np.sqrt(2) * (z[:, 0] + 1j * z[:, 1])


@dataclass(frozen=True)
class BenchModel:
    probe: ProbeModel
    lisn: LoopElement
    cable: LoopElement
    dut: LoopElement
    grid: FrequencyGrid
    z0: float = DEFAULT_Z0
    noise: NoiseModel = field(default_factory=NoiseModel)
    sap_attenuation_db: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z0", as_z0(self.z0))
        if _has_line(self.dut):
            raise ValueError("the DUT must be a one-port (no transmission lines)")
        _impedance(self.dut, self.grid.omega[:1])
        for name in ("lisn", "cable"):
            block = getattr(self, name)
            if not _is_empty(block):
                element_abcd(block, FrequencyGrid(self.grid.points[:1]))

    def replace(self, **changes) -> "BenchModel":
        return dataclasses.replace(self, **changes)


def _is_empty(e: LoopElement) -> bool:
    return isinstance(e, Series) and not e.elements


def build_chain(b: BenchModel) -> AbcdNetwork:
    """Analyser plane to DUT port.

    Order: [SAP pad] . probe . cable/2 . LISN . cable/2, each loop block as a
    series two-port on the transformer secondary.
    """
    grid = b.grid
    out = b.probe.abcd(grid)
    if b.sap_attenuation_db:
        out = cascade(make_attenuator(b.sap_attenuation_db, b.z0, grid), out)
    half_cable = None if _is_empty(b.cable) else element_abcd(halve(b.cable), grid)
    for block in (half_cable, None if _is_empty(b.lisn) else element_abcd(b.lisn, grid), half_cable):
        if block is not None:
            out = cascade(out, block)
    return out


def dut_impedance(b: BenchModel) -> ComplexTrace:
    return eval_element_impedance(b.dut, b.grid)


OPEN = "open"
DutOverride = Union[LoopElement, ComplexTrace, str, None]


def _load_trace(b: BenchModel, dut: DutOverride) -> ComplexTrace:
    if dut is None:
        return dut_impedance(b)
    if isinstance(dut, str):
        if dut != OPEN:
            raise ValueError(f"unknown symbolic load {dut!r}")
        return ComplexTrace.open_circuit(b.grid)
    if isinstance(dut, ComplexTrace):
        return dut
    return eval_element_impedance(dut, b.grid)


def synth_gamma(
    b: BenchModel, dut_override: DutOverride = None, role: str = "measurement", chain: AbcdNetwork | None = None
) -> ComplexTrace:
    """Reflection at the analyser plane with the bench DUT (or an override) attached."""
    if chain is None:
        chain = build_chain(b)
    g = reflection_from_impedance(input_impedance(chain, _load_trace(b, dut_override)), b.z0)
    values = g.values
    if b.noise.sigma > 0:
        values = values + b.noise.sample(len(values), role)
    return ComplexTrace(b.grid, values, g.status, {"name": role, "seed": b.noise.seed, "sigma": b.noise.sigma})


def synth_standards(
    b: BenchModel, r_load: float = DEFAULT_R_LOAD, open_resistance: float | None = None
) -> StandardsTriple:
    """Open/short/load reflections; the open is the analytic limit unless a finite value is given."""
    chain = build_chain(b)
    grid = b.grid
    open_load = OPEN if open_resistance is None else ComplexTrace.constant(grid, open_resistance)
    return StandardsTriple(
        synth_gamma(b, open_load, "open", chain),
        synth_gamma(b, ComplexTrace.constant(grid, 0.0), "short", chain),
        synth_gamma(b, ComplexTrace.constant(grid, r_load), "load", chain),
    )


# -- operating-mode variants -------------------------------------------------

Edit = tuple[str, float]


def scale_element(tree: LoopElement, label: str, scale: float) -> LoopElement:
    """Copy of ``tree`` with the leaf labelled ``label`` scaled by ``scale``."""
    if not scale > 0:
        raise ValueError(f"scale for {label!r} must be > 0")
    found = []

    def visit(e):
        if isinstance(e, (Series, Parallel)):
            if e.label == label:
                raise ValueError(f"label {label!r} names a group; only leaf elements can be scaled")
            return dataclasses.replace(e, elements=tuple(visit(c) for c in e.elements))
        if e.label != label:
            return e
        found.append(e)
        if isinstance(e, TransmissionLine):
            return dataclasses.replace(e, length_m=e.length_m * scale)
        return dataclasses.replace(e, value=e.value * scale)

    out = visit(tree)
    if not found:
        raise KeyError(f"no element labelled {label!r} in the tree")
    return out


def mode_variants(base_dut: LoopElement, edits: Sequence) -> list[LoopElement]:
    """``[base, variant_1, ...]``, one variant per edit set.

    Each edit set is a sequence of ``(label, scale)`` pairs, or a single pair.
    """
    out = [base_dut]
    for edit_set in edits:
        if len(edit_set) == 2 and isinstance(edit_set[0], str):
            edit_set = [edit_set]
        tree = base_dut
        for label, scale in edit_set:
            tree = scale_element(tree, label, float(scale))
        out.append(tree)
    return out


# -- randomised benches for property tests -----------------------------------

RANDOM_RANGES = {
    "l_lk_h": (0.1e-6, 5e-6),
    "c_p_f": (1e-12, 50e-12),
    "n": (0.5, 4.0),
    "R": (0.1, 200.0),
    "L": (0.1e-6, 100e-6),
    "C": (10e-12, 10e-6),
}


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_leaf(rng: np.random.Generator, label: str | None = None) -> LoopElement:
    kind = rng.choice(["R", "L", "C"])
    cls = {"R": Resistor, "L": Inductor, "C": Capacitor}[kind]
    return cls(_log_uniform(rng, *RANDOM_RANGES[kind]), label)


def random_tree(rng: np.random.Generator, depth: int = 2, prefix: str = "e") -> LoopElement:
    counter = iter(range(10_000))

    def build(level):
        if level == 0 or rng.random() < 0.4:
            return random_leaf(rng, f"{prefix}{next(counter)}")
        group = Series if rng.random() < 0.5 else Parallel
        return group(tuple(build(level - 1) for _ in range(rng.integers(2, 4))))

    return build(depth)


def random_lisn(rng: np.random.Generator) -> LoopElement:
    """LISN-like damped branch: R_a || (L + R_b)."""
    r = RANDOM_RANGES
    return Parallel(
        (
            Resistor(_log_uniform(rng, *r["R"]), "lisn_r"),
            Series((Inductor(_log_uniform(rng, *r["L"]), "lisn_l"), Resistor(_log_uniform(rng, *r["R"]), "lisn_esr"))),
        ),
        "lisn",
    )


def random_cable(rng: np.random.Generator) -> LoopElement:
    """Short two-wire cable as a series R-L; up to ~3 m at 1 uH/m."""
    return Series(
        (Resistor(_log_uniform(rng, 0.1, 1.0), "cable_r"), Inductor(_log_uniform(rng, 0.1e-6, 3e-6), "cable_l")),
        "cable",
    )


def random_dut(rng: np.random.Generator) -> LoopElement:
    """Random RLC tree behind a series resistance, so |Z| never drops below that resistance."""
    return Series((Resistor(_log_uniform(rng, *RANDOM_RANGES["R"]), "dut_esr"), random_tree(rng, 2, "dut")), "dut")


def random_bench(
    rng: np.random.Generator,
    grid: FrequencyGrid,
    topology: Sequence[str] = PROBE_PARTS,
    noise: NoiseModel | None = None,
) -> BenchModel:
    """Random bench with every value drawn log-uniformly from ``RANDOM_RANGES``.

    Loop blocks are structured like a real LISN and cable rather than
    arbitrary trees: with a loop impedance many decades above the DUT the
    DUT signature falls below float64 resolution of the reflection.
    """
    r = RANDOM_RANGES
    probe = ProbeModel(
        _log_uniform(rng, *r["l_lk_h"]),
        _log_uniform(rng, *r["c_p_f"]),
        float(rng.uniform(*r["n"])),
        tuple(topology),
    )
    return BenchModel(
        probe=probe,
        lisn=random_lisn(rng),
        cable=random_cable(rng),
        dut=random_dut(rng),
        grid=grid,
        noise=noise or NoiseModel(),
    )
