"""Six operating modes of the example bench run through the CLI and compared.

Control modes (V/F, SLV) share a DUT; speeds scale the motor branch
capacitance. Every file lands in the output directory.
"""
import argparse
import json
from importlib import resources
from pathlib import Path

from dmimp.cli import main as dmimp

SPEEDS = {10: 1.0, 30: 1.1, 50: 1.2}
CONTROLS = ("vf", "slv")


def run_mode(out: Path, name: str, seed: int, scale: float, sigma: float) -> Path:
    doc = json.loads(resources.files("dmimp.data").joinpath("example_bench.json").read_text())
    doc["noise"] = {"sigma": sigma, "seed": seed}
    bench = out / f"{name}.json"
    bench.write_text(json.dumps(doc, indent=2))
    d = out / name
    variant = ["--dut-variant", f"c_m={scale}"] if scale != 1.0 else []
    steps = [
        ["simulate", str(bench), str(d), "--standards", *variant],
        ["calibrate", "--open", str(d / "open.s1p"), "--short", str(d / "short.s1p"),
         "--load", str(d / "load.s1p"), "--out", str(d / "cal.json")],
        ["extract", "--cal", str(d / "cal.json"), "--meas", str(d / "gamma_m.s1p"), "--out", str(d / "z.csv")],
    ]
    for step in steps:
        if dmimp(step) != 0:
            raise SystemExit(f"step failed: {step}")
    return d / "z.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path)
    ap.add_argument("--sigma", type=float, default=1e-4)
    ap.add_argument("--threshold-db", type=float, default=3.0)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    z = {}
    for i, (c, s) in enumerate((c, s) for c in CONTROLS for s in SPEEDS):
        z[c, s] = run_mode(args.out, f"{c}_{s}hz", 100 + i, SPEEDS[s], args.sigma)

    pairs = [((CONTROLS[0], s), (CONTROLS[1], s)) for s in SPEEDS]
    pairs += [((c, 10), (c, s)) for c in CONTROLS for s in (30, 50)]
    for a, b in pairs:
        tag = f"{a[0]}{a[1]}_vs_{b[0]}{b[1]}"
        print(f"{tag}: ", end="", flush=True)
        dmimp(["compare", str(z[a]), str(z[b]), "--threshold-db", str(args.threshold_db),
               "--out", str(args.out / f"{tag}.csv")])


if __name__ == "__main__":
    main()
