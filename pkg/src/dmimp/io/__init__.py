"""On-disk formats: Touchstone one-port, CSV, calibration and bench JSON."""
from .benchfile import BenchConfigError, read_bench_config, write_bench_config
from .calfile import read_calibration, write_calibration
from .csvfiles import (
    parse_impedance_csv,
    parse_trace_csv,
    write_impedance_csv,
    write_trace_csv,
)
from .resample import resample, resample_calibration
from .touchstone import ParseError, parse_touchstone, parse_touchstone_1port, write_touchstone_1port

__all__ = [
    "BenchConfigError",
    "ParseError",
    "parse_impedance_csv",
    "parse_touchstone",
    "parse_touchstone_1port",
    "parse_trace_csv",
    "read_bench_config",
    "read_calibration",
    "resample",
    "resample_calibration",
    "write_bench_config",
    "write_calibration",
    "write_impedance_csv",
    "write_touchstone_1port",
    "write_trace_csv",
]
