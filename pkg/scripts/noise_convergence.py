"""Median impedance error versus reflection noise level on a reference bench."""
import argparse

import numpy as np

from dmimp.benchsim import BenchModel, Inductor, NoiseModel, ProbeModel, Resistor, Series, dut_impedance
from dmimp.benchsim import synth_gamma, synth_standards
from dmimp.calib import solve_osl
from dmimp.extract import extract_impedance
from dmimp.netcore import FrequencyGrid


def reference_bench(grid):
    return BenchModel(
        ProbeModel(0.5e-6, 20e-12, 1.0),
        Series((Resistor(50.0, "lisn_r"),), "lisn"),
        Series((), "cable"),
        Series((Resistor(10.0, "r_dut"), Inductor(1e-6, "l_dut")), "dut"),
        grid,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 1e-5])
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    base = reference_bench(FrequencyGrid.logspace(150e3, 30e6, 201))
    truth = dut_impedance(base).values
    print(f"{'sigma':>8}  {'median':>10}  {'p95':>10}")
    for sigma in args.sigmas:
        errs = []
        for seed in range(args.seeds):
            b = base.replace(noise=NoiseModel(sigma, seed))
            z = extract_impedance(synth_gamma(b), solve_osl(synth_standards(b)))
            errs.append(np.abs(z.z[z.ok] - truth[z.ok]) / np.abs(truth[z.ok]))
        e = np.concatenate(errs)
        print(f"{sigma:8.0e}  {np.median(e):10.3e}  {np.percentile(e, 95):10.3e}")


if __name__ == "__main__":
    main()
