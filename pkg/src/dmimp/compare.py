"""Side-by-side comparison of two impedance sweeps with deviation bands."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calib import runs_to_bands
from .extract import ImpedanceTrace
from .io.csvfiles import phase_deg
from .io.touchstone import _num
from .netcore import FrequencyGrid

DEFAULT_THRESHOLD_DB = 3.0


@dataclass(frozen=True, eq=False)
class CompareReport:
    grid: FrequencyGrid
    ratio_db: np.ndarray
    phase_diff_deg: np.ndarray
    valid: np.ndarray
    threshold_db: float
    bands: list

    @property
    def exceeds(self) -> np.ndarray:
        return self.valid & (np.abs(np.where(self.valid, self.ratio_db, 0)) > self.threshold_db)

    @property
    def max_deviation_db(self) -> float:
        if not np.any(self.valid):
            return 0.0
        return float(np.max(np.abs(self.ratio_db[self.valid])))

    @property
    def band_count(self) -> int:
        return len(self.bands)

    def band_peaks_db(self) -> list[float]:
        out = []
        f = self.grid.points
        for lo, hi in self.bands:
            sel = (f >= lo) & (f <= hi) & self.valid
            out.append(float(np.max(np.abs(self.ratio_db[sel]))))
        return out

    def summary(self) -> str:
        bands = ", ".join(f"[{lo:.6g}, {hi:.6g}] Hz" for lo, hi in self.bands) or "none"
        return (
            f"max deviation {self.max_deviation_db:.4g} dB; "
            f"{self.band_count} band(s) above {self.threshold_db:g} dB: {bands}"
        )


def compare_impedance(
    a: ImpedanceTrace, b: ImpedanceTrace, threshold_db: float = DEFAULT_THRESHOLD_DB
) -> CompareReport:
    """Magnitude ratio 20*log10(|Za|/|Zb|) and phase difference per point.

    A band is a maximal run of consecutive points whose ratio magnitude
    exceeds ``threshold_db``; points flagged in either trace break runs.
    """
    a.grid.require_identical(b.grid, "compare")
    valid = a.ok & b.ok & (np.abs(a.z) > 0) & (np.abs(b.z) > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(valid, 20 * np.log10(np.abs(a.z) / np.abs(b.z)), np.nan)
        dphase = phase_deg(np.where(valid, a.z / np.where(valid, b.z, 1), np.nan))
    exceeds = valid & (np.abs(np.where(valid, ratio, 0)) > threshold_db)
    return CompareReport(a.grid, ratio, dphase, valid, float(threshold_db), runs_to_bands(a.grid, exceeds))


def write_compare_csv(report: CompareReport) -> str:
    lines = ["freq_hz,ratio_db,phase_diff_deg,exceeds"]
    for f, r, p, ex in zip(report.grid.points, report.ratio_db, report.phase_diff_deg, report.exceeds):
        lines.append(f"{_num(f)},{_num(r)},{_num(p)},{int(ex)}")
    return "\n".join(lines) + "\n"


def write_bands_csv(report: CompareReport) -> str:
    lines = ["band,f_lo_hz,f_hi_hz,peak_abs_ratio_db"]
    for i, ((lo, hi), peak) in enumerate(zip(report.bands, report.band_peaks_db())):
        lines.append(f"{i},{_num(lo)},{_num(hi)},{_num(peak)}")
    return "\n".join(lines) + "\n"
