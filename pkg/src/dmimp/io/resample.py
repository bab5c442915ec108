"""Moving traces and calibrations between frequency grids."""
from __future__ import annotations

import numpy as np

from ..calib import CalibrationSet
from ..netcore import GRID_RTOL, ComplexTrace, FrequencyGrid, Status

CALIBRATION_RESAMPLE_WARNING = (
    "calibration resampled from its measured grid; coefficients are only valid "
    "for the exact setup and sweep they were measured on"
)


def _interp(values: np.ndarray, status: np.ndarray, src: FrequencyGrid, dst: FrequencyGrid):
    xs, xd = np.log(src.points), np.log(dst.points)
    lo, hi = src.points[0] * (1 - GRID_RTOL), src.points[-1] * (1 + GRID_RTOL)
    outside = (dst.points < lo) | (dst.points > hi)
    if np.any(outside):
        f = dst.points[np.argmax(outside)]
        raise ValueError(
            f"cannot extrapolate: target {f!r} Hz lies outside source span "
            f"[{src.points[0]!r}, {src.points[-1]!r}] Hz"
        )
    xd = np.clip(xd, xs[0], xs[-1])
    bad = status != Status.OK
    safe = np.where(bad, 0, values)
    out = np.interp(xd, xs, safe.real) + 1j * np.interp(xd, xs, safe.imag)
    # a target inherits a flag from any source neighbour it draws on
    idx = np.searchsorted(xs, xd)
    exact = np.isclose(xd, xs[np.clip(idx, 0, len(xs) - 1)], rtol=0, atol=GRID_RTOL)
    left = np.clip(idx - 1, 0, len(xs) - 1)
    right = np.clip(idx, 0, len(xs) - 1)
    new_status = np.where(exact, status[right], np.maximum(status[left], status[right])).astype(np.uint8)
    out[new_status != Status.OK] = np.nan
    return out, new_status


def resample(trace: ComplexTrace, target_grid: FrequencyGrid) -> ComplexTrace:
    """Linear interpolation of real and imaginary parts against log-frequency."""
    values, status = _interp(trace.values, trace.status, trace.grid, target_grid)
    return ComplexTrace(target_grid, values, status, {**trace.metadata, "resampled": True})


def resample_calibration(cal: CalibrationSet, target_grid: FrequencyGrid) -> CalibrationSet:
    ks = [_interp(k, cal.status, cal.grid, target_grid) for k in (cal.k1, cal.k2, cal.k3)]
    meta = {**cal.metadata, "resampled": True, "warning": CALIBRATION_RESAMPLE_WARNING}
    return CalibrationSet(
        target_grid, ks[0][0], ks[1][0], ks[2][0], ks[0][1], r_load=cal.r_load, z0=cal.z0, metadata=meta
    )
