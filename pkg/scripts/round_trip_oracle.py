"""Simulate standards, calibrate and extract on random benches; report recovery error."""
import argparse
import time

import numpy as np

from dmimp.benchsim import dut_impedance, random_bench, synth_gamma, synth_standards
from dmimp.calib import solve_osl
from dmimp.extract import extract_impedance
from dmimp.netcore import FrequencyGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--benches", type=int, default=100)
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    grid = FrequencyGrid.logspace(150e3, 30e6, args.points)
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    errs, flagged = [], 0
    for _ in range(args.benches):
        b = random_bench(rng, grid)
        z = extract_impedance(synth_gamma(b), solve_osl(synth_standards(b)))
        truth = dut_impedance(b).values
        errs.append(np.abs(z.z[z.ok] - truth[z.ok]) / np.abs(truth[z.ok]))
        flagged += int((~z.ok).sum())
    err = np.concatenate(errs)
    print(f"benches={args.benches} points={args.points} elapsed={time.perf_counter() - t0:.3f}s")
    print(f"max rel err={err.max():.3e} median={np.median(err):.3e} flagged={flagged}")


if __name__ == "__main__":
    main()
