import numpy as np
import pytest

from conftest import rel_err
from dmimp.benchsim import NoiseModel, build_chain, random_bench, synth_standards, BenchModel, ProbeModel, Resistor, Series
from dmimp.calib import StandardsTriple, conditioning_report, k_from_abcd, solve_osl
from dmimp.netcore import (
    AbcdNetwork,
    ComplexTrace,
    FrequencyGrid,
    Status,
    make_series,
    make_transformer,
)

ONE = FrequencyGrid([1e6])


def _standards(grid, go, gs, gl):
    return StandardsTriple(
        ComplexTrace(grid, np.broadcast_to(go, len(grid))),
        ComplexTrace(grid, np.broadcast_to(gs, len(grid))),
        ComplexTrace(grid, np.broadcast_to(gl, len(grid))),
    )


@pytest.mark.parametrize(
    "net, expected",
    [
        (AbcdNetwork.identity(ONE), (-50, -50, -1)),
        (make_series(50, ONE), (-100, 0, -1)),
        (make_transformer(2, ONE), (-12.5, -12.5, -1)),
    ],
)
def test_k_from_abcd_examples(net, expected):
    cal = k_from_abcd(net, 50)
    got = (cal.k1[0], cal.k2[0], cal.k3[0])
    assert got == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n", [0.5, 1, 2, 10])
def test_transformer_k3_independent_of_ratio(n):
    assert k_from_abcd(make_transformer(n, ONE)).k3[0] == -1


def test_k_from_abcd_singular_point():
    # A + Z0*C = 0 with det 1: A = 1, C = -1/50, B = 0, D = 1
    net = AbcdNetwork(ONE, [[[1, 0], [-1 / 50, 1]]])
    cal = k_from_abcd(net, 50)
    assert cal.status[0] == Status.SINGULAR


def test_solve_osl_ideal_standards():
    cal = solve_osl(_standards(ONE, 1, -1, 0), r_load=50)
    assert (cal.k1[0], cal.k2[0], cal.k3[0]) == (-50, -50, -1)
    assert cal.status[0] == Status.OK


def test_solve_osl_k2_matches_direct_form(rng):
    # k2 is computed as -k1*G_s; check against r*G_s*(G_o - G_L)/(G_L - G_s) directly
    g = rng.normal(size=(3, 50)) * 0.5 + 1j * rng.normal(size=(3, 50)) * 0.5
    grid = FrequencyGrid(np.arange(1, 51) * 1e5)
    cal = solve_osl(StandardsTriple(*(ComplexTrace(grid, x) for x in g)), r_load=50)
    go, gs, gl = g
    assert np.max(rel_err(cal.k2, 50 * gs * (go - gl) / (gl - gs))) < 1e-12
    assert np.max(rel_err(cal.k1, 50 * (gl - go) / (gl - gs))) < 1e-12


def test_solve_osl_k3_is_bitwise_negated_open(rng):
    grid = FrequencyGrid([1e6, 2e6, 3e6])
    go = rng.normal(size=3) + 1j * rng.normal(size=3)
    cal = solve_osl(StandardsTriple(ComplexTrace(grid, go), ComplexTrace.constant(grid, -1), ComplexTrace.constant(grid, 0)))
    assert np.array_equal(cal.k3, -go)


def test_solve_osl_degenerate_point_flagged():
    grid = FrequencyGrid([1e6, 2e6])
    s = StandardsTriple(
        ComplexTrace(grid, [1, 1]), ComplexTrace(grid, [-1, 0.2]), ComplexTrace(grid, [0, 0.2])
    )
    cal = solve_osl(s)
    assert list(cal.status) == [Status.OK, Status.ILL_CONDITIONED]


def test_solve_osl_equals_forward_route(rng, sweep):
    worst = 0.0
    for _ in range(30):
        b = random_bench(rng, sweep)
        osl = solve_osl(synth_standards(b))
        fwd = k_from_abcd(build_chain(b))
        for k in ("k1", "k2", "k3"):
            worst = max(worst, np.max(rel_err(getattr(osl, k), getattr(fwd, k))))
    assert worst < 1e-9


def test_solve_osl_general_load_resistance(rng, sweep):
    b = random_bench(rng, sweep)
    osl = solve_osl(synth_standards(b, r_load=75.0), r_load=75.0)
    fwd = k_from_abcd(build_chain(b))
    assert np.max(rel_err(osl.k1, fwd.k1)) < 1e-9
    assert np.max(rel_err(osl.k2, fwd.k2)) < 1e-9


def test_conditioning_ideal_spread():
    s = _standards(ONE, 1, -1, 0)
    rep = conditioning_report(solve_osl(s), s)
    assert rep.min_pairwise_distance[0] == pytest.approx(1.0)
    assert rep.n_flagged == 0


def test_conditioning_all_equal_flags_everything():
    grid = FrequencyGrid([1e6, 2e6, 3e6])
    s = _standards(grid, 0.3 + 0.1j, 0.3 + 0.1j, 0.3 + 0.1j)
    rep = conditioning_report(solve_osl(s), s)
    assert rep.flagged.all()
    assert rep.flagged_bands == [(1e6, 3e6)]


def test_heavy_attenuation_clusters_standards(sweep):
    bench = BenchModel(
        probe=ProbeModel(1e-6, 10e-12, 1.0),
        lisn=Series((Resistor(50.0),), "lisn"),
        cable=Series((), "cable"),
        dut=Series((Resistor(10.0),), "dut"),
        grid=sweep,
    )
    light = synth_standards(bench.replace(sap_attenuation_db=20))
    heavy = synth_standards(bench.replace(sap_attenuation_db=70))
    rep_light = conditioning_report(solve_osl(light), light)
    rep_heavy = conditioning_report(solve_osl(heavy), heavy)
    assert rep_light.n_flagged == 0
    # round-trip attenuation of 140 dB squeezes the standards to ~1e-7 apart
    assert rep_heavy.n_flagged == len(sweep)
    assert np.all(rep_heavy.min_pairwise_distance < 1e-6)


def test_noise_free_and_noisy_standards_differ(sweep, rng):
    b = random_bench(rng, sweep)
    clean = solve_osl(synth_standards(b))
    noisy = solve_osl(synth_standards(b.replace(noise=NoiseModel(1e-3, 5))))
    assert not np.allclose(clean.k1, noisy.k1)
