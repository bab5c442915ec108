"""Measured reflection -> in-circuit impedance via the calibrated bilinear map."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .calib import CalibrationSet
from .netcore import ComplexTrace, FrequencyGrid, GridMismatchError, Status

NEAR_OPEN_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ImpedanceTrace:
    grid: FrequencyGrid
    z: np.ndarray
    status: np.ndarray
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        z = np.array(self.z, dtype=complex).reshape(-1)
        status = np.array(self.status, dtype=np.uint8).reshape(-1)
        if z.size != len(self.grid) or status.size != z.size:
            raise ValueError("impedance, status and grid lengths differ")
        if not np.all(np.isfinite(z[status == Status.OK])):
            raise ValueError("non-finite impedance at a point flagged ok")
        z.setflags(write=False)
        status.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self) -> int:
        return self.z.size

    @property
    def ok(self) -> np.ndarray:
        return self.status == Status.OK

    def as_trace(self) -> ComplexTrace:
        return ComplexTrace(self.grid, self.z, self.status, self.metadata)


def extract_impedance(
    gamma_m: ComplexTrace, cal: CalibrationSet, near_open_rtol: float = NEAR_OPEN_RTOL
) -> ImpedanceTrace:
    """Z = (k1*G + k2) / (G + k3) per frequency.

    Points where ``|G + k3| < near_open_rtol * (1 + |k3|)`` are flagged
    near-open; ill-conditioned calibration points stay flagged as such.
    """
    cal.grid.require_identical(gamma_m.grid, "measurement vs calibration")
    g = gamma_m.values
    den = g + cal.k3
    status = np.full(len(g), Status.OK, dtype=np.uint8)
    with np.errstate(invalid="ignore"):
        near_open = ~(np.abs(den) >= near_open_rtol * (1 + np.abs(cal.k3)))
    status[near_open] = Status.NEAR_OPEN
    status[cal.status != Status.OK] = Status.ILL_CONDITIONED
    status[(gamma_m.status != Status.OK) & (status == Status.OK)] = Status.SINGULAR
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (cal.k1 * g + cal.k2) / den
    z[status != Status.OK] = np.nan
    meta = {
        "calibration": cal.metadata.get("id", cal.metadata.get("source", "")),
        "source": gamma_m.metadata.get("name", gamma_m.metadata.get("source", "")),
    }
    if gamma_m.metadata.get("resampled") or cal.metadata.get("resampled"):
        meta["resampled"] = True
    return ImpedanceTrace(cal.grid, z, status, meta)


def extract_batch(
    measurements: Sequence[tuple[str, ComplexTrace]], cal: CalibrationSet, **kwargs
) -> list[ImpedanceTrace]:
    """Extract every named trace; the first grid mismatch aborts, naming the trace."""
    for name, trace in measurements:
        if not cal.grid.identical(trace.grid):
            raise GridMismatchError(cal.grid, trace.grid, f"measurement {name!r}")
    out = []
    for name, trace in measurements:
        z = extract_impedance(trace, cal, **kwargs)
        out.append(ImpedanceTrace(z.grid, z.z, z.status, {**z.metadata, "name": name}))
    return out
