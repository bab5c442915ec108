"""``dmimp`` command line: simulate, calibrate, extract, compare, convert.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 deviation bands found (only with ``compare --fail-on-deviation``).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

from . import __version__
from .benchsim import mode_variants, synth_gamma, synth_standards
from .calib import DEFAULT_R_LOAD, CONDITIONING_FLOOR, StandardsTriple, conditioning_report, solve_osl
from .compare import DEFAULT_THRESHOLD_DB, compare_impedance, write_bands_csv, write_compare_csv
from .extract import NEAR_OPEN_RTOL, extract_impedance
from .io import (
    BenchConfigError,
    ParseError,
    parse_impedance_csv,
    parse_touchstone_1port,
    parse_trace_csv,
    read_bench_config,
    read_calibration,
    resample,
    write_calibration,
    write_impedance_csv,
    write_touchstone_1port,
    write_trace_csv,
)
from .netcore import GridMismatchError

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_DEVIATION = 0, 1, 2, 3
CONFIG_DIR_ENV = "DMIMP_CONFIG_DIR"
EXAMPLE_BENCH = "@example"


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"dmimp: {msg}", file=sys.stderr)


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def resolve_bench(name: str) -> tuple[str, str]:
    """Return (text, resolved name); falls back to $DMIMP_CONFIG_DIR and the packaged example."""
    if name == EXAMPLE_BENCH:
        return resources.files("dmimp.data").joinpath("example_bench.json").read_text("utf-8"), name
    path = Path(name)
    if not path.exists() and not path.is_absolute() and os.environ.get(CONFIG_DIR_ENV):
        candidate = Path(os.environ[CONFIG_DIR_ENV]) / path
        if candidate.exists():
            path = candidate
    return _read(path), str(path)


def _parse_variant(text: str) -> tuple[str, float]:
    label, sep, scale = text.partition("=")
    try:
        if not sep or not label:
            raise ValueError
        return label, float(scale)
    except ValueError:
        raise UsageError(f"--dut-variant expects LABEL=SCALE, got {text!r}") from None


def cmd_simulate(args) -> int:
    text, name = resolve_bench(args.bench)
    bench = read_bench_config(text, strict=not args.no_strict)
    edits = [_parse_variant(v) for v in args.dut_variant]
    if edits:
        try:
            bench = bench.replace(dut=mode_variants(bench.dut, [edits])[1])
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    fmt = args.format.upper()
    outputs = {"gamma_m.s1p": synth_gamma(bench, role="measurement")}
    if args.standards:
        std = synth_standards(bench, r_load=args.r_load)
        outputs.update({"open.s1p": std.gamma_open, "short.s1p": std.gamma_short, "load.s1p": std.gamma_load})
    rendered = {
        fname: write_touchstone_1port(trace, fmt, r_ref=bench.z0, comments=[f"dmimp {__version__} simulate: {fname[:-4]}"])
        for fname, trace in outputs.items()
    }
    manifest = {
        "tool": f"dmimp {__version__}",
        "bench": name,
        "bench_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "seed": bench.noise.seed,
        "sigma": bench.noise.sigma,
        "dut_variants": [f"{label}={scale:g}" for label, scale in edits],
        "r_load": args.r_load,
        "files": {fname: hashlib.sha256(body.encode()).hexdigest() for fname, body in rendered.items()},
    }
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fname, body in rendered.items():
        atomic_write(out / fname, body)
    atomic_write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(rendered)} Touchstone file(s) and manifest.json to {out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    traces = {}
    for role in ("open", "short", "load"):
        path = getattr(args, role)
        traces[role] = parse_touchstone_1port(_read(path), source=str(path))
    ref = traces["open"].grid
    for role in ("short", "load"):
        if not ref.identical(traces[role].grid):
            raise GridMismatchError(ref, traces[role].grid, f"{getattr(args, role)} vs {args.open}")
    std = StandardsTriple(traces["open"], traces["short"], traces["load"])
    cal = solve_osl(std, r_load=args.r_load, floor=args.floor)
    cal = type(cal)(
        cal.grid, cal.k1, cal.k2, cal.k3, cal.status, cal.r_load, cal.z0,
        {**cal.metadata, "open": str(args.open), "short": str(args.short), "load": str(args.load), "tool": f"dmimp {__version__}"},
    )
    report = conditioning_report(cal, std, args.floor)
    atomic_write(Path(args.out), write_calibration(cal))
    print(f"calibration: {cal.n_flagged} flagged point(s) of {len(cal.grid)}")
    print(f"conditioning: {report.summary()}")
    if cal.n_flagged:
        _err(f"warning: {cal.n_flagged} ill-conditioned calibration point(s); they stay flagged in the output")
    return EXIT_OK


def cmd_extract(args) -> int:
    cal = read_calibration(_read(args.cal), source=str(args.cal))
    meas = parse_touchstone_1port(_read(args.meas), source=str(args.meas))
    if not cal.grid.identical(meas.grid):
        if not args.resample:
            raise GridMismatchError(cal.grid, meas.grid, f"{args.meas} vs calibration {args.cal}")
        meas = resample(meas, cal.grid)
    z = extract_impedance(meas.with_metadata(name=str(args.meas)), cal, near_open_rtol=args.near_open_rtol)
    atomic_write(Path(args.out), write_impedance_csv(z))
    print(f"extracted {len(z)} point(s), {int((~z.ok).sum())} flagged")
    return EXIT_OK


def _bands_path(out: Path) -> Path:
    return out.with_name(out.stem + ".bands.csv")


def cmd_compare(args) -> int:
    a = parse_impedance_csv(_read(args.a), source=str(args.a))
    b = parse_impedance_csv(_read(args.b), source=str(args.b))
    if not a.grid.identical(b.grid):
        raise GridMismatchError(a.grid, b.grid, f"{args.b} vs {args.a}")
    report = compare_impedance(a, b, args.threshold_db)
    out = Path(args.out)
    atomic_write(out, write_compare_csv(report))
    atomic_write(_bands_path(out), write_bands_csv(report))
    print(report.summary())
    if args.fail_on_deviation and report.band_count:
        return EXIT_DEVIATION
    return EXIT_OK


def _read_any_trace(path: Path):
    text = _read(path)
    first = next((ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("!")), "")
    is_csv = path.suffix.lower() == ".csv" or (path.suffix.lower() not in (".s1p", ".ts") and ":" in first)
    if is_csv or first.startswith("freq_hz"):
        return parse_trace_csv(text, source=str(path))
    return parse_touchstone_1port(text, source=str(path))


def cmd_convert(args) -> int:
    fmt = args.format.lower()
    trace = _read_any_trace(Path(args.input))
    if fmt == "csv":
        body = write_trace_csv(trace)
    else:
        body = write_touchstone_1port(trace, fmt.upper(), unit=trace.metadata.get("unit", "Hz"), comments=trace.metadata.get("comments", ()))
    atomic_write(Path(args.output), body)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _err(message)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dmimp", description="Single-probe in-circuit DM impedance extraction.")
    p.add_argument("--version", action="version", version=f"dmimp {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="synthesise reflection files from a bench description")
    s.add_argument("bench", help=f"bench JSON file, or {EXAMPLE_BENCH} for the packaged example")
    s.add_argument("output_dir")
    s.add_argument("--standards", action="store_true", help="also write open/short/load standards")
    s.add_argument("--dut-variant", action="append", default=[], metavar="LABEL=SCALE")
    s.add_argument("--format", choices=["ri", "ma", "db"], default="ri")
    s.add_argument("--r-load", type=float, default=DEFAULT_R_LOAD)
    s.add_argument("--no-strict", action="store_true", help="ignore unknown keys in the bench file")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("calibrate", help="solve k1, k2, k3 from open/short/load files")
    c.add_argument("--open", required=True, type=Path)
    c.add_argument("--short", required=True, type=Path)
    c.add_argument("--load", required=True, type=Path)
    c.add_argument("--r-load", type=float, default=DEFAULT_R_LOAD)
    c.add_argument("--floor", type=float, default=CONDITIONING_FLOOR, help="conditioning floor on |G_load - G_short|")
    c.add_argument("--out", required=True, type=Path)
    c.set_defaults(func=cmd_calibrate)

    e = sub.add_parser("extract", help="convert a measured reflection file into impedance CSV")
    e.add_argument("--cal", required=True, type=Path)
    e.add_argument("--meas", required=True, type=Path)
    e.add_argument("--out", required=True, type=Path)
    e.add_argument("--resample", action="store_true", help="interpolate the measurement onto the calibration grid")
    e.add_argument("--near-open-rtol", type=float, default=NEAR_OPEN_RTOL)
    e.set_defaults(func=cmd_extract)

    m = sub.add_parser("compare", help="compare two impedance CSV files")
    m.add_argument("a", type=Path)
    m.add_argument("b", type=Path)
    m.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB)
    m.add_argument("--out", required=True, type=Path)
    m.add_argument("--fail-on-deviation", action="store_true", help="exit 3 when any band is found")
    m.set_defaults(func=cmd_compare)

    v = sub.add_parser("convert", help="convert between Touchstone formats and trace CSV")
    v.add_argument("input", type=Path)
    v.add_argument("output", type=Path)
    v.add_argument("--format", required=True, choices=["ri", "ma", "db", "csv"])
    v.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, BenchConfigError, GridMismatchError, UsageError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
