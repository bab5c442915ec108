"""Calibration coefficients of the bilinear reflection-to-impedance map.

The coefficients (k1, k2, k3) can be obtained two independent ways: forward
from a known ABCD chain, or from reflections measured with open, short and
resistive-load standards at the DUT port. With exact standards both routes
agree, which the test-suite uses as an oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .netcore import (
    DEFAULT_Z0,
    SINGULAR_FLOOR,
    AbcdNetwork,
    ComplexTrace,
    FrequencyGrid,
    ReferenceImpedance,
    Status,
    as_z0,
)

DEFAULT_R_LOAD = 50.0
CONDITIONING_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class CalibrationSet:
    grid: FrequencyGrid
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    status: np.ndarray
    r_load: float = DEFAULT_R_LOAD
    z0: float = DEFAULT_Z0
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.grid)
        for name in ("k1", "k2", "k3"):
            arr = np.array(getattr(self, name), dtype=complex).reshape(-1)
            if arr.size != n:
                raise ValueError(f"{name} has {arr.size} samples for a {n}-point grid")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        status = np.array(self.status, dtype=np.uint8).reshape(-1)
        if status.size != n:
            raise ValueError("status array length differs from grid")
        status.setflags(write=False)
        object.__setattr__(self, "status", status)
        if not self.r_load > 0:
            raise ValueError("r_load must be > 0")
        object.__setattr__(self, "z0", as_z0(self.z0))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def trace(self, name: str) -> ComplexTrace:
        """One coefficient as a :class:`ComplexTrace` carrying the calibration flags."""
        return ComplexTrace(self.grid, getattr(self, name), self.status, {"coefficient": name})

    @property
    def n_flagged(self) -> int:
        return int(np.count_nonzero(self.status != Status.OK))


@dataclass(frozen=True, eq=False)
class StandardsTriple:
    gamma_open: ComplexTrace
    gamma_short: ComplexTrace
    gamma_load: ComplexTrace

    def __post_init__(self):
        grid = self.gamma_open.grid
        grid.require_identical(self.gamma_short.grid, "short standard")
        grid.require_identical(self.gamma_load.grid, "load standard")
        for name in ("gamma_open", "gamma_short", "gamma_load"):
            if not np.all(np.isfinite(getattr(self, name).values)):
                raise ValueError(f"{name} contains non-finite samples")

    @property
    def grid(self) -> FrequencyGrid:
        return self.gamma_open.grid


def k_from_abcd(n: AbcdNetwork, z0: "ReferenceImpedance | float" = DEFAULT_Z0) -> CalibrationSet:
    """Coefficients computed directly from the chain's ABCD parameters."""
    z0 = as_z0(z0)
    a, b, c, d = n.a, n.b, n.c, n.d
    den = z0 * c + a
    status = np.where(np.abs(den) < SINGULAR_FLOOR, Status.SINGULAR, Status.OK).astype(np.uint8)
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = -(z0 * d + b) / den
        k2 = -(z0 * d - b) / den
        k3 = (z0 * c - a) / den
    bad = status != Status.OK
    for k in (k1, k2, k3):
        k[bad] = np.nan
    return CalibrationSet(n.grid, k1, k2, k3, status, z0=z0, metadata={"source": "abcd"})


def solve_osl(
    s: StandardsTriple,
    r_load: float = DEFAULT_R_LOAD,
    z0: "ReferenceImpedance | float" = DEFAULT_Z0,
    floor: float = CONDITIONING_FLOOR,
) -> CalibrationSet:
    """Coefficients from measured open/short/load reflections.

    ``r_load`` is the resistance of the load standard; the classic procedure
    fixes it at 50 ohm. Points where the short and load reflections are closer
    than ``floor`` are flagged ill-conditioned.
    """
    if not r_load > 0:
        raise ValueError("r_load must be > 0")
    go, gs, gl = s.gamma_open.values, s.gamma_short.values, s.gamma_load.values
    sep = gl - gs
    status = np.where(np.abs(sep) < floor, Status.ILL_CONDITIONED, Status.OK).astype(np.uint8)
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = r_load * (gl - go) / sep
    # algebraically r_load*gs*(go - gl)/(gl - gs); this form makes the short map to exactly 0
    k2 = -(k1 * gs)
    k3 = -go
    return CalibrationSet(
        s.grid, k1, k2, k3, status, r_load=float(r_load), z0=z0,
        metadata={"source": "osl", "conditioning_floor": floor},
    )


@dataclass(frozen=True, eq=False)
class ConditioningReport:
    grid: FrequencyGrid
    load_short_distance: np.ndarray
    open_load_distance: np.ndarray
    min_pairwise_distance: np.ndarray
    flagged: np.ndarray
    floor: float

    @property
    def flagged_bands(self) -> list[tuple[float, float]]:
        """Maximal runs of flagged points as (f_lo, f_hi) pairs."""
        return runs_to_bands(self.grid, self.flagged)

    @property
    def n_flagged(self) -> int:
        return int(np.count_nonzero(self.flagged))

    def summary(self) -> str:
        bands = ", ".join(f"{lo:.6g}-{hi:.6g} Hz" for lo, hi in self.flagged_bands) or "none"
        return (
            f"{self.n_flagged}/{len(self.grid)} points below conditioning floor {self.floor:g}; "
            f"worst min pairwise distance {np.min(self.min_pairwise_distance):.3g}; flagged bands: {bands}"
        )


def runs_to_bands(grid: FrequencyGrid, mask: np.ndarray) -> list[tuple[float, float]]:
    mask = np.asarray(mask, dtype=bool)
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    f = grid.points
    return [(float(f[i]), float(f[j])) for i, j in zip(starts, stops)]


def conditioning_report(
    c: CalibrationSet, s: StandardsTriple, floor: float | None = None
) -> ConditioningReport:
    c.grid.require_identical(s.grid, "conditioning_report")
    if floor is None:
        floor = c.metadata.get("conditioning_floor", CONDITIONING_FLOOR)
    go, gs, gl = s.gamma_open.values, s.gamma_short.values, s.gamma_load.values
    d_ls = np.abs(gl - gs)
    d_ol = np.abs(go - gl)
    d_os = np.abs(go - gs)
    spread = np.minimum(np.minimum(d_ls, d_ol), d_os)
    flagged = (spread < floor) | (c.status != Status.OK)
    return ConditioningReport(c.grid, d_ls, d_ol, spread, flagged, floor)
