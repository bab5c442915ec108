import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rel_err
from dmimp.benchsim import build_chain, dut_impedance, random_bench, synth_gamma, synth_standards
from dmimp.calib import solve_osl
from dmimp.extract import ImpedanceTrace, extract_impedance
from dmimp.io import (
    BenchConfigError,
    ParseError,
    parse_impedance_csv,
    parse_touchstone_1port,
    parse_trace_csv,
    read_bench_config,
    read_calibration,
    resample,
    resample_calibration,
    write_bench_config,
    write_calibration,
    write_impedance_csv,
    write_touchstone_1port,
    write_trace_csv,
)
from dmimp.netcore import ComplexTrace, FrequencyGrid, Status

EXAMPLE = resources.files("dmimp.data").joinpath("example_bench.json").read_text()


def random_trace(rng, n=201):
    grid = FrequencyGrid(np.sort(rng.uniform(1e5, 4e7, n)))
    mag = rng.uniform(1e-3, 1, n)
    return ComplexTrace(grid, mag * np.exp(1j * rng.uniform(-np.pi, np.pi, n)))


# -- Touchstone ---------------------------------------------------------------


def test_parse_matched_point():
    t = parse_touchstone_1port("# MHz S RI R 50\n1 0 0\n")
    assert list(t.grid.points) == [1e6]
    assert t.values[0] == 0


def test_parse_ma_row():
    t = parse_touchstone_1port("# Hz S MA R 50\n150000 1 180\n")
    assert t.values[0] == pytest.approx(-1, abs=1e-15)


def test_parse_db_row():
    t = parse_touchstone_1port("# Hz S DB R 50\n1e6 -6.0206 0\n")
    assert t.values[0] == pytest.approx(10 ** (-6.0206 / 20), rel=1e-12)
    assert abs(t.values[0]) == pytest.approx(0.5, rel=1e-5)


def test_comments_and_case():
    t = parse_touchstone_1port("! from a VNA\n#  mhz s ri r 75 ! inline\n1 0.5 0 ! first\n")
    assert t.metadata["comments"] == ["from a VNA", "inline", "first"]
    assert t.metadata["r_ref"] == 75


@pytest.mark.parametrize(
    "text, line, match",
    [
        ("1 0 0\n", 1, "missing option line"),
        ("! only a comment\n", 1, "missing option line"),
        ("# Hz S RI R 50\n1 0 0\n1 0 0\n", 3, "does not increase"),
        ("# Hz S RI R 50\n1 0 0\n2 0\n", 3, "3 numeric fields"),
        ("# Hz S RI R 50\n1 0 0 0\n", 2, "3 numeric fields"),
        ("# THz S RI R 50\n", 1, "unknown frequency unit"),
        ("# Hz Z RI R 50\n", 1, "only S-parameter"),
        ("# Hz S RI R 50\n# Hz S RI R 50\n", 2, "second option"),
        ("# Hz S RI R 50\n1 x 0\n", 2, "non-numeric"),
        ("# Hz S RI R 50\n1 nan 0\n", 2, "non-finite"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, match):
    with pytest.raises(ParseError, match=match) as info:
        parse_touchstone_1port(text)
    assert info.value.line == line


def test_empty_trace_round_trip():
    text = write_touchstone_1port(ComplexTrace(FrequencyGrid.empty(), []))
    assert text == "# Hz S RI R 50\n"
    assert len(parse_touchstone_1port(text)) == 0


@pytest.mark.parametrize("fmt", ["RI", "MA", "DB"])
def test_touchstone_round_trip(rng, fmt):
    t = random_trace(rng)
    back = parse_touchstone_1port(write_touchstone_1port(t, fmt))
    assert back.grid.identical(t.grid)
    assert np.max(rel_err(back.values, t.values)) < 1e-9


def test_format_chain_preserves_values(rng):
    t = random_trace(rng)
    ma = parse_touchstone_1port(write_touchstone_1port(t, "RI"))
    ma = parse_touchstone_1port(write_touchstone_1port(ma, "MA"))
    ri = parse_touchstone_1port(write_touchstone_1port(ma, "RI"))
    assert np.max(rel_err(ri.values, t.values)) < 1e-9


def test_unit_normalisation(rng):
    t = random_trace(rng, 20)
    hz = parse_touchstone_1port(write_touchstone_1port(t, unit="Hz"))
    mhz = parse_touchstone_1port(write_touchstone_1port(t, unit="MHz"))
    assert hz.grid.identical(mhz.grid)
    assert np.array_equal(hz.values, mhz.values)


def _corrupt(lines, idx, how, rng):
    fields = lines[idx].split()
    if how == "word":
        fields[rng.integers(len(fields))] = "x1"
    elif how == "drop":
        fields.pop(rng.integers(len(fields)))
    elif how == "extra":
        fields.append("0.5")
    elif how == "nan":
        fields[rng.integers(1, len(fields))] = "nan"
    elif how == "freq":
        fields[0] = "0"
    out = list(lines)
    out[idx] = " ".join(fields)
    return out


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), how=st.sampled_from(["word", "drop", "extra", "nan", "freq"]))
def test_corrupted_line_is_reported_exactly(seed, how):
    rng = np.random.default_rng(seed)
    t = random_trace(rng, 12)
    lines = write_touchstone_1port(t, ["RI", "MA", "DB"][seed % 3], comments=["c"]).splitlines()
    idx = int(rng.integers(2, len(lines)))
    bad = _corrupt(lines, idx, how, rng)
    with pytest.raises(ParseError) as info:
        parse_touchstone_1port("\n".join(bad) + "\n")
    assert info.value.line == idx + 1


# -- CSV ----------------------------------------------------------------------


def _imp(values, status=None):
    grid = FrequencyGrid(np.arange(1, len(values) + 1) * 1e6)
    return ImpedanceTrace(grid, values, np.zeros(len(values)) if status is None else status)


def test_impedance_csv_rows():
    text = write_impedance_csv(_imp([50 + 0j, 100j]))
    lines = text.splitlines()
    assert lines[0] == "freq_hz,z_re_ohm,z_im_ohm,z_mag_ohm,z_phase_deg,status"
    assert lines[1] == "1000000,50,0,50,0,ok"
    assert lines[2] == "2000000,0,100,100,90,ok"


def test_impedance_csv_phase_range():
    text = write_impedance_csv(_imp([-5 + 0j, -5 - 0j]))
    phases = [float(r.split(",")[4]) for r in text.splitlines()[1:]]
    assert phases == [180, 180]


def test_impedance_csv_round_trip_with_flags(rng):
    z = rng.normal(size=50) * 30 + 1j * rng.normal(size=50) * 30
    status = np.zeros(50, np.uint8)
    status[[3, 7]] = [Status.NEAR_OPEN, Status.ILL_CONDITIONED]
    z[[3, 7]] = np.nan
    t = _imp(z, status)
    back = parse_impedance_csv(write_impedance_csv(t))
    assert np.array_equal(back.status, t.status)
    ok = t.ok
    assert np.max(rel_err(back.z[ok], t.z[ok])) < 1e-9
    assert back.grid.identical(t.grid)


def test_impedance_csv_metadata_lines():
    t = ImpedanceTrace(FrequencyGrid([1e6]), [1], [0], {"resampled": True, "source": "m.s1p"})
    back = parse_impedance_csv(write_impedance_csv(t))
    assert back.metadata["resampled"] is True
    assert back.metadata["source"] == "m.s1p"


def test_impedance_csv_errors():
    with pytest.raises(ParseError) as info:
        parse_impedance_csv("freq_hz,z_re_ohm,z_im_ohm,z_mag_ohm,z_phase_deg,status\n1,2,3,4,5,weird\n")
    assert info.value.line == 2
    with pytest.raises(ParseError, match="header"):
        parse_impedance_csv("f,re\n")


def test_trace_csv_round_trip(rng):
    t = random_trace(rng)
    back = parse_trace_csv(write_trace_csv(t))
    assert np.array_equal(back.values, t.values)
    assert np.array_equal(back.grid.points, t.grid.points)


# -- calibration files ----------------------------------------------------------


def test_calibration_file_round_trip(rng, sweep):
    b = random_bench(rng, sweep)
    cal = solve_osl(synth_standards(b))
    back = read_calibration(write_calibration(cal))
    for k in ("k1", "k2", "k3"):
        assert np.array_equal(getattr(back, k), getattr(cal, k))
    assert np.array_equal(back.status, cal.status)
    assert back.r_load == cal.r_load and back.z0 == cal.z0


def test_calibration_file_flagged_points_are_null():
    from dmimp.calib import StandardsTriple

    grid = FrequencyGrid([1e6, 2e6])
    cal = solve_osl(StandardsTriple(ComplexTrace(grid, [1, 1]), ComplexTrace(grid, [-1, 0.2]), ComplexTrace(grid, [0, 0.2])))
    doc = json.loads(write_calibration(cal))
    assert doc["k1"][1] is None
    assert doc["status"] == ["ok", "ill-conditioned-cal"]
    back = read_calibration(json.dumps(doc))
    assert back.status[1] == Status.ILL_CONDITIONED


def test_calibration_version_checked():
    doc = {"format": "dmimp-calibration", "version": 99}
    with pytest.raises(ParseError, match="version"):
        read_calibration(json.dumps(doc))


# -- bench files ----------------------------------------------------------------

MINIMAL = {
    "version": 1,
    "probe": {"n": 1.0},
    "lisn": {"elements": []},
    "cable": {"elements": []},
    "dut": {"elements": [{"kind": "resistor", "value": 50}]},
    "sweep": {"f_start_hz": 1e6, "f_stop_hz": 2e6, "n_points": 2},
}


def test_minimal_bench():
    b = read_bench_config(json.dumps(MINIMAL))
    assert len(b.grid) == 2
    assert np.allclose(synth_gamma(b).values, 0, atol=1e-15)


def test_missing_sweep_named():
    doc = {k: v for k, v in MINIMAL.items() if k != "sweep"}
    with pytest.raises(BenchConfigError, match="sweep") as info:
        read_bench_config(json.dumps(doc))
    assert info.value.path == "sweep"


def test_unknown_keys_strict_and_lenient():
    doc = json.loads(json.dumps(MINIMAL))
    doc["probe"]["colour"] = "blue"
    with pytest.raises(BenchConfigError) as info:
        read_bench_config(json.dumps(doc))
    assert info.value.path == "probe.colour"
    read_bench_config(json.dumps(doc), strict=False)


@pytest.mark.parametrize(
    "patch, path",
    [
        ({"dut": {"elements": [{"kind": "resistor", "value": -1}]}}, "dut.elements[0]"),
        ({"dut": {"elements": [{"kind": "diode"}]}}, "dut.elements[0].kind"),
        ({"dut": {"elements": [{"kind": "series", "elements": []}]}}, "dut.elements[0].elements"),
        ({"dut": {"elements": []}}, "dut.elements"),
        ({"sweep": {"f_start_hz": 2e6, "f_stop_hz": 1e6, "n_points": 3}}, "sweep"),
        ({"sweep": {"f_start_hz": 1e6, "f_stop_hz": 2e6, "n_points": 3, "spacing": "cubic"}}, "sweep.spacing"),
        ({"noise": {"sigma": -1}}, "noise"),
        ({"probe": {"n": "one"}}, "probe.n"),
        ({"version": 2}, "version"),
    ],
)
def test_bench_schema_errors(patch, path):
    doc = {**MINIMAL, **patch}
    with pytest.raises(BenchConfigError) as info:
        read_bench_config(json.dumps(doc))
    assert info.value.path == path


def test_example_bench_drives_pipeline():
    b = read_bench_config(EXAMPLE)
    assert len(b.grid) == 201
    z = extract_impedance(synth_gamma(b), solve_osl(synth_standards(b)))
    assert np.all(z.ok)
    assert np.max(rel_err(z.z, dut_impedance(b).values)) < 1e-9


def test_bench_write_read_round_trip(rng, sweep):
    for b in (read_bench_config(EXAMPLE), random_bench(rng, sweep)):
        again = read_bench_config(write_bench_config(b))
        assert again.grid.identical(b.grid)
        assert np.array_equal(build_chain(again).matrices, build_chain(b).matrices)
        assert np.array_equal(dut_impedance(again).values, dut_impedance(b).values)
        assert write_bench_config(again) == write_bench_config(read_bench_config(write_bench_config(again)))


# -- resampling -------------------------------------------------------------------


def test_resample_identity(rng):
    t = random_trace(rng, 30)
    r = resample(t, t.grid)
    assert np.array_equal(r.values, t.values)
    assert r.metadata["resampled"] is True


def test_resample_constant():
    src = ComplexTrace.constant(FrequencyGrid.logspace(1e5, 1e7, 11), 0.3 - 0.2j)
    out = resample(src, FrequencyGrid.logspace(2e5, 9e6, 37))
    assert np.allclose(out.values, 0.3 - 0.2j, rtol=1e-15, atol=0)


def test_resample_log_midpoint():
    src = ComplexTrace(FrequencyGrid([1e6, 4e6]), [1 + 2j, 3 - 6j])
    out = resample(src, FrequencyGrid([2e6]))
    assert out.values[0] == pytest.approx(2 - 2j, rel=1e-12)


def test_resample_refuses_extrapolation():
    src = ComplexTrace(FrequencyGrid([1e6, 4e6]), [1, 2])
    with pytest.raises(ValueError, match="extrapolate"):
        resample(src, FrequencyGrid([5e5, 2e6]))


def test_resample_propagates_flags():
    src = ComplexTrace(FrequencyGrid([1e6, 2e6, 4e6]), [1, np.nan, 2], [0, Status.SINGULAR, 0])
    out = resample(src, FrequencyGrid([1e6, 1.5e6, 3e6, 4e6]))
    assert list(out.status) == [0, Status.SINGULAR, Status.SINGULAR, 0]


def test_resample_calibration_carries_warning(rng, sweep):
    b = random_bench(rng, sweep)
    cal = solve_osl(synth_standards(b))
    moved = resample_calibration(cal, FrequencyGrid.logspace(2e5, 2e7, 50))
    assert moved.metadata["resampled"] is True
    assert "warning" in moved.metadata
