"""Frequency grids, complex traces and two-port ABCD algebra.

Every per-frequency quantity is held as a numpy array aligned with a
:class:`FrequencyGrid`. Frequency-local singularities never raise; they are
recorded in a per-point status array so a single degenerate point does not
destroy a sweep.
"""
from __future__ import annotations

import enum
from dataclasses import InitVar, dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

GRID_RTOL = 1e-9
SINGULAR_FLOOR = 1e-30
DEFAULT_Z0 = 50.0


class Status(enum.IntEnum):
    """Per-point status codes shared by every trace type."""

    OK = 0
    SINGULAR = 1
    OPEN = 2
    NEAR_OPEN = 3
    ILL_CONDITIONED = 4

    @property
    def label(self) -> str:
        return _STATUS_LABELS[self]

    @classmethod
    def from_label(cls, text: str) -> "Status":
        try:
            return _LABEL_STATUS[text.strip()]
        except KeyError:
            raise ValueError(f"unknown status label {text!r}") from None


_STATUS_LABELS = {
    Status.OK: "ok",
    Status.SINGULAR: "singular",
    Status.OPEN: "open",
    Status.NEAR_OPEN: "near-open",
    Status.ILL_CONDITIONED: "ill-conditioned-cal",
}
_LABEL_STATUS = {v: k for k, v in _STATUS_LABELS.items()}


class GridMismatchError(ValueError):
    """Two frequency grids that must be identical are not."""

    def __init__(self, a: "FrequencyGrid", b: "FrequencyGrid", what: str = ""):
        self.a = a
        self.b = b
        self.first_difference = a.first_difference(b)
        prefix = f"{what}: " if what else ""
        if len(a) != len(b):
            detail = f"lengths differ ({len(a)} vs {len(b)} points)"
        else:
            i = self.first_difference
            detail = f"first difference at index {i}: {a.points[i]!r} Hz vs {b.points[i]!r} Hz"
        super().__init__(f"{prefix}frequency grids differ, {detail}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    points: np.ndarray
    allow_empty: InitVar[bool] = False

    def __post_init__(self, allow_empty):
        pts = np.array(self.points, dtype=float).reshape(-1)
        if pts.size < 1 and not allow_empty:
            raise ValueError("frequency grid needs at least one point")
        if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
            raise ValueError("frequency grid points must be finite and > 0")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def empty(cls) -> "FrequencyGrid":
        """Zero-point grid; only file round trips of data-less files need it."""
        return cls(np.empty(0), allow_empty=True)

    @classmethod
    def logspace(cls, f_start: float, f_stop: float, n: int) -> "FrequencyGrid":
        return cls(np.geomspace(f_start, f_stop, n))

    @classmethod
    def linspace(cls, f_start: float, f_stop: float, n: int) -> "FrequencyGrid":
        return cls(np.linspace(f_start, f_stop, n))

    def __len__(self) -> int:
        return self.points.size

    @property
    def omega(self) -> np.ndarray:
        return 2 * np.pi * self.points

    def first_difference(self, other: "FrequencyGrid", rtol: float = GRID_RTOL) -> int | None:
        """Index of the first point not matching ``other`` (None if identical)."""
        n = min(len(self), len(other))
        close = np.abs(self.points[:n] - other.points[:n]) <= rtol * np.abs(other.points[:n])
        bad = np.flatnonzero(~close)
        if bad.size:
            return int(bad[0])
        if len(self) != len(other):
            return n
        return None

    def identical(self, other: "FrequencyGrid", rtol: float = GRID_RTOL) -> bool:
        return self is other or self.first_difference(other, rtol) is None

    def require_identical(self, other: "FrequencyGrid", what: str = "") -> None:
        if not self.identical(other):
            raise GridMismatchError(self, other, what)


@dataclass(frozen=True, eq=False)
class ComplexTrace:
    """Complex samples over a grid with a per-point :class:`Status` array.

    Samples at points whose status is not OK may be non-finite.
    """

    grid: FrequencyGrid
    values: np.ndarray
    status: np.ndarray = None
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if vals.size != len(self.grid):
            raise ValueError(f"trace has {vals.size} samples for a {len(self.grid)}-point grid")
        if self.status is None:
            status = np.zeros(vals.size, dtype=np.uint8)
        else:
            status = np.array(self.status, dtype=np.uint8).reshape(-1)
            if status.size != vals.size:
                raise ValueError("status array length differs from values")
        if not np.all(np.isfinite(vals[status == Status.OK])):
            raise ValueError("non-finite sample at a point flagged ok")
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "status", _frozen(status))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @classmethod
    def constant(cls, grid: FrequencyGrid, value: complex, **metadata) -> "ComplexTrace":
        return cls(grid, np.full(len(grid), value, dtype=complex), metadata=metadata)

    @classmethod
    def open_circuit(cls, grid: FrequencyGrid) -> "ComplexTrace":
        """Symbolic open load: infinite impedance at every point."""
        n = len(grid)
        return cls(grid, np.full(n, np.inf + 0j), np.full(n, Status.OPEN, dtype=np.uint8))

    def __len__(self) -> int:
        return self.values.size

    @property
    def ok(self) -> np.ndarray:
        return self.status == Status.OK

    def with_metadata(self, **extra) -> "ComplexTrace":
        return ComplexTrace(self.grid, self.values, self.status, {**self.metadata, **extra})


@dataclass(frozen=True)
class ReferenceImpedance:
    z0: float = DEFAULT_Z0

    def __post_init__(self):
        if not (np.isfinite(self.z0) and self.z0 > 0):
            raise ValueError(f"reference impedance must be > 0, got {self.z0!r}")


def as_z0(z0: "ReferenceImpedance | float") -> float:
    if isinstance(z0, ReferenceImpedance):
        return z0.z0
    return ReferenceImpedance(float(z0)).z0


@dataclass(frozen=True, eq=False)
class AbcdNetwork:
    """Per-frequency transmission matrices, shape ``(N, 2, 2)``."""

    grid: FrequencyGrid
    matrices: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrices, dtype=complex)
        if m.shape != (len(self.grid), 2, 2):
            raise ValueError(f"expected matrices of shape {(len(self.grid), 2, 2)}, got {m.shape}")
        object.__setattr__(self, "matrices", _frozen(m))

    @classmethod
    def identity(cls, grid: FrequencyGrid) -> "AbcdNetwork":
        return cls(grid, np.broadcast_to(np.eye(2, dtype=complex), (len(grid), 2, 2)))

    @property
    def a(self) -> np.ndarray:
        return self.matrices[:, 0, 0]

    @property
    def b(self) -> np.ndarray:
        return self.matrices[:, 0, 1]

    @property
    def c(self) -> np.ndarray:
        return self.matrices[:, 1, 0]

    @property
    def d(self) -> np.ndarray:
        return self.matrices[:, 1, 1]

    def det(self) -> np.ndarray:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "AbcdNetwork") -> "AbcdNetwork":
        return cascade(self, other)


ZFunc = Callable[[np.ndarray], np.ndarray]


def _per_point(value, grid: FrequencyGrid) -> np.ndarray:
    """Accept a scalar, array, ComplexTrace, or callable of frequency in Hz."""
    if isinstance(value, ComplexTrace):
        grid.require_identical(value.grid)
        return value.values
    if callable(value):
        value = value(grid.points)
    return np.broadcast_to(np.asarray(value, dtype=complex), (len(grid),))


def _build(grid, a, b, c, d) -> AbcdNetwork:
    n = len(grid)
    m = np.empty((n, 2, 2), dtype=complex)
    m[:, 0, 0] = a
    m[:, 0, 1] = b
    m[:, 1, 0] = c
    m[:, 1, 1] = d
    return AbcdNetwork(grid, m)


def make_series(z_of_f, grid: FrequencyGrid) -> AbcdNetwork:
    """Series impedance ``[[1, Z], [0, 1]]``."""
    return _build(grid, 1.0, _per_point(z_of_f, grid), 0.0, 1.0)


def make_shunt(y_of_f, grid: FrequencyGrid) -> AbcdNetwork:
    """Shunt admittance ``[[1, 0], [Y, 1]]``."""
    return _build(grid, 1.0, 0.0, _per_point(y_of_f, grid), 1.0)


def make_transformer(n: float, grid: FrequencyGrid) -> AbcdNetwork:
    """Ideal transformer with turns ratio ``n`` (``[[n, 0], [0, 1/n]]``)."""
    n = float(n)
    if n == 0 or not np.isfinite(n):
        raise ValueError("transformer turns ratio must be finite and nonzero")
    return _build(grid, n, 0.0, 0.0, 1.0 / n)


def make_attenuator(db: float, z0: "ReferenceImpedance | float", grid: FrequencyGrid) -> AbcdNetwork:
    """Symmetric pad matched to ``z0``; negative ``db`` gives gain."""
    z0 = as_z0(z0)
    alpha = float(db) * np.log(10) / 20
    return _build(grid, np.cosh(alpha), z0 * np.sinh(alpha), np.sinh(alpha) / z0, np.cosh(alpha))


def cascade(a: AbcdNetwork, b: AbcdNetwork) -> AbcdNetwork:
    """Matrix product ``a @ b``; ``a`` sits nearer the measurement plane."""
    a.grid.require_identical(b.grid, "cascade")
    return AbcdNetwork(a.grid, np.matmul(a.matrices, b.matrices))


def cascade_all(networks, grid: FrequencyGrid) -> AbcdNetwork:
    out = AbcdNetwork.identity(grid)
    for net in networks:
        out = cascade(out, net)
    return out


def input_impedance(n: AbcdNetwork, z_load: ComplexTrace) -> ComplexTrace:
    """Impedance seen at port 1 with ``z_load`` terminating port 2.

    Points flagged OPEN in ``z_load`` use the limit ``A/C``. A vanishing
    denominator with a nonzero numerator is an open circuit (flagged OPEN);
    both vanishing is flagged SINGULAR.
    """
    n.grid.require_identical(z_load.grid, "input_impedance")
    is_open = z_load.status == Status.OPEN
    zl = np.where(is_open, 0, z_load.values)
    num = np.where(is_open, n.a, n.a * zl + n.b)
    den = np.where(is_open, n.c, n.c * zl + n.d)

    status = np.where(z_load.status == Status.OK, Status.OK, z_load.status).astype(np.uint8)
    status[is_open] = Status.OK
    tiny_den = np.abs(den) < SINGULAR_FLOOR
    tiny_num = np.abs(num) < SINGULAR_FLOOR
    status[tiny_den & ~tiny_num] = Status.OPEN
    status[tiny_den & tiny_num] = Status.SINGULAR

    with np.errstate(divide="ignore", invalid="ignore"):
        z = num / den
    z[status == Status.OPEN] = np.inf
    z[status == Status.SINGULAR] = np.nan
    return ComplexTrace(n.grid, z, status, dict(z_load.metadata))


def reflection_from_impedance(z: ComplexTrace, z0: "ReferenceImpedance | float" = DEFAULT_Z0) -> ComplexTrace:
    """Gamma = (Z - Z0) / (Z + Z0); OPEN points map to Gamma = 1."""
    z0 = as_z0(z0)
    is_open = z.status == Status.OPEN
    zv = np.where(z.status == Status.OK, z.values, 0)
    den = zv + z0
    status = z.status.copy()
    status[is_open] = Status.OK
    singular = (z.status == Status.OK) & (np.abs(den) < SINGULAR_FLOOR * z0)
    status[singular] = Status.SINGULAR
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (zv - z0) / den
    g[is_open] = 1.0
    g[status != Status.OK] = np.nan
    return ComplexTrace(z.grid, g, status, dict(z.metadata))


def impedance_from_reflection(g: ComplexTrace, z0: "ReferenceImpedance | float" = DEFAULT_Z0) -> ComplexTrace:
    """Z = Z0 (1 + Gamma) / (1 - Gamma); Gamma = 1 is flagged OPEN."""
    z0 = as_z0(z0)
    den = 1 - g.values
    status = g.status.copy()
    status[(status == Status.OK) & (np.abs(den) < SINGULAR_FLOOR)] = Status.OPEN
    with np.errstate(divide="ignore", invalid="ignore"):
        z = z0 * (1 + g.values) / den
    z[status == Status.OPEN] = np.inf
    z[(status != Status.OK) & (status != Status.OPEN)] = np.nan
    return ComplexTrace(g.grid, z, status, dict(g.metadata))
