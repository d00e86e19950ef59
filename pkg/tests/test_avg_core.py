from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from historiclab.avg_core import (
    Grid,
    Membership,
    ObservableSeq,
    birkhoff_partial_averages,
    classify_level_set,
    cluster_values,
    empirical_measure,
    indicates_irregularity,
    lambda_probe,
    oscillation_report,
    total_variation,
    transitive_bounds_estimate,
    vT_cluster_report,
)
from historiclab.errors import LabError
from historiclab.rng import SplitMix64
from historiclab.symbolic import Alphabet, BlockSchedule, SymbolicPoint, WindowObservable, build_oscillating_point
from historiclab.systems import KanState, kan_orbit
from oracles import block_word, doubling_run_end_average, exact_partial_averages, geometric_lengths

H20 = 1 << 20


@pytest.fixture(scope="module")
def doubling_averages():
    point = build_oscillating_point(BlockSchedule(), Alphabet(2))
    values = WindowObservable.first_symbol().values_along(point.symbols(H20))
    return birkhoff_partial_averages(values)


# --- partial averages ---------------------------------------------------------


def test_constant_sequence():
    assert np.array_equal(birkhoff_partial_averages([0.7] * 5), [0.7] * 5)


def test_fixed_point_all_zeros():
    values = WindowObservable.first_symbol().values_along(SymbolicPoint.periodic("0").symbols(100))
    assert not birkhoff_partial_averages(values).any()


@given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False), min_size=1, max_size=300))
def test_partial_averages_match_exact_rationals(xs):
    got = birkhoff_partial_averages(xs)
    for g, e in zip(got, exact_partial_averages(xs)):
        assert abs(Fraction(g) - e) <= Fraction(1, 10**12)


def test_doubling_block_oracle_small_horizon():
    n = 5000
    word = block_word(geometric_lengths(), n)
    point = build_oscillating_point(BlockSchedule(), Alphabet(2))
    assert point.word(n) == tuple(word)
    got = birkhoff_partial_averages(point.symbols(n).astype(float))
    for g, e in zip(got, exact_partial_averages(word)):
        assert abs(g - float(e)) <= 1e-12


def test_doubling_run_boundaries_closed_form(doubling_averages):
    # every run end up to 2**20 - 1 against the closed form
    for i in range(1, 21):
        n = 2**i - 1
        assert abs(doubling_averages[n - 1] - float(doubling_run_end_average(i))) <= 1e-9
        if i % 2 == 0:
            assert doubling_run_end_average(i) == Fraction(2, 3)


def test_doubling_tail_extremes(doubling_averages):
    rep = oscillation_report(doubling_averages, tail_fraction=0.5)
    assert abs(rep.liminf_est - 1 / 3) < 0.01
    assert abs(rep.limsup_est - 2 / 3) < 0.01
    assert abs(rep.gap - 1 / 3) < 0.01


def test_partial_average_errors():
    with pytest.raises(LabError) as e:
        birkhoff_partial_averages([])
    assert e.value.code == "DOMAIN_EMPTY"
    with pytest.raises(LabError) as e:
        birkhoff_partial_averages([1.0], horizon=2)
    assert e.value.code == "BAD_HORIZON"


def test_observable_seq_invariants():
    assert ObservableSeq([0.1, -0.5], bound=1.0).horizon == 2
    with pytest.raises(LabError):
        ObservableSeq([2.0], bound=1.0)
    with pytest.raises(LabError):
        ObservableSeq([], bound=1.0)


# --- oscillation report --------------------------------------------------------


def test_alternating_clusters():
    avgs = [(-1.0) ** n for n in range(1, 1001)]
    rep = oscillation_report(avgs, tail_fraction=0.5, cluster_tol=0.1)
    assert [c.center for c in rep.clusters] == [-1.0, 1.0]
    assert rep.gap == 2.0


def test_convergent_one_cluster():
    avgs = [1 / n for n in range(1, 10001)]
    rep = oscillation_report(avgs, tail_fraction=0.1, cluster_tol=0.1)
    assert len(rep.clusters) == 1 and abs(rep.clusters[0].center) < 0.01
    assert rep.gap < 0.001
    assert not indicates_irregularity(rep, 0.01)


@given(st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=200), st.floats(0.01, 1.0))
def test_report_invariants(avgs, frac):
    rep = oscillation_report(avgs, frac, 0.05)
    assert rep.liminf_est <= rep.limsup_est
    assert rep.gap == rep.limsup_est - rep.liminf_est
    assert sum(c.weight for c in rep.clusters) == len(rep.partial_averages) - (len(avgs) - int(np.ceil(frac * len(avgs))))
    assert all(rep.liminf_est <= c.center <= rep.limsup_est for c in rep.clusters)


def test_cluster_values_single_linkage():
    cl = cluster_values([0.0, 0.05, 0.1, 0.5], 0.06)
    assert [c.weight for c in cl] == [3, 1]
    with pytest.raises(LabError):
        cluster_values([1.0], 0.0)


# --- lambda probe ---------------------------------------------------------------


def test_lambda_constant_not_violated():
    assert not lambda_probe([0.3] * 10, 1, 0.5).violated


def test_lambda_alternating_pair():
    probe = lambda_probe([(-1.0) ** n for n in range(1, 11)], 3, 1.0)
    assert probe.violated and probe.violation_pair == (3, 4)


def test_lambda_doubling_violated(doubling_averages):
    probe = lambda_probe(doubling_averages, 100, 0.1)
    assert probe.violated
    n, m = probe.violation_pair
    assert 100 <= n < m and abs(doubling_averages[n - 1] - doubling_averages[m - 1]) > 0.1


@given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False), min_size=2, max_size=40), st.floats(0.01, 1.5))
def test_lambda_pair_is_lexicographically_first(avgs, eta):
    probe = lambda_probe(avgs, 1, eta)
    pairs = [(i + 1, j + 1) for i in range(len(avgs)) for j in range(i + 1, len(avgs)) if abs(avgs[i] - avgs[j]) > eta]
    if pairs:
        assert probe.violated and probe.violation_pair == pairs[0]
    else:
        assert not probe.violated


def test_lambda_bad_window():
    with pytest.raises(LabError) as e:
        lambda_probe([1.0, 2.0], 3, 0.1)
    assert e.value.code == "BAD_WINDOW"


# --- level sets -----------------------------------------------------------------


def test_level_set_examples(doubling_averages):
    conv = oscillation_report([0.4 + 1 / n for n in range(1, 100001)], 0.25, 0.01)
    c = 0.4
    assert classify_level_set(conv, c, c, 0.01).membership is Membership.IN_LEVEL_SET
    assert classify_level_set(conv, c - 1, c + 1, 0.01).membership is Membership.OUTSIDE
    rep = oscillation_report(doubling_averages, 0.5)
    assert classify_level_set(rep, 1 / 3, 2 / 3, 0.02).membership is Membership.IN_LEVEL_SET
    assert classify_level_set(rep, 0.4, 0.6, 0.02).membership is Membership.IN_HAT_LEVEL_SET
    with pytest.raises(LabError) as e:
        classify_level_set(rep, 1.0, 0.0, 0.02)
    assert e.value.code == "BAD_INTERVAL"


# --- empirical measures ----------------------------------------------------------


def test_dirac_and_two_point_measures():
    grid = Grid.interval(0.0, 1.0, 2)
    mu = empirical_measure([Fraction(0)] * 10, grid)
    assert list(mu.weights) == [1.0, 0.0]
    nu = empirical_measure([Fraction(0), Fraction(1, 2)] * 5, grid)
    assert list(nu.weights) == [0.5, 0.5]
    assert total_variation(mu, nu) == 0.5


def test_times_three_orbit_seven_bins():
    grid = Grid.interval(Fraction(0), Fraction(1), 7)
    x, orbit = Fraction(1, 7), []
    for _ in range(10**4):
        orbit.append(x)
        x = (3 * x) % 1
    mu = empirical_measure(orbit, grid)
    counts = [0] * 7
    for p in orbit:
        counts[int(p * 7)] += 1  # p = j/7 lands in bin j exactly
    assert list(mu.weights) == [c / len(orbit) for c in counts]


def test_float_and_exact_binning_agree():
    pts = SplitMix64(5).random_array(1000)
    grid = Grid.interval(0.0, 1.0, 13)
    a = empirical_measure(pts, grid)
    b = empirical_measure([float(p) for p in pts], grid)
    assert np.array_equal(a.weights, b.weights)


def test_grid_boundary_and_errors():
    grid = Grid.interval(0.0, 1.0, 4)
    assert grid.cell_of(1.0) == 3 and grid.cell_of(0.25) == 1
    with pytest.raises(LabError):
        grid.cell_of(1.5)
    with pytest.raises(LabError) as e:
        total_variation(empirical_measure([0.1], grid), empirical_measure([0.1], Grid.interval(0.0, 1.0, 3)))
    assert e.value.code == "BIN_MISMATCH"


def test_vT_clusters():
    grid = Grid.interval(0.0, 1.0, 2)
    same = [empirical_measure([0.1, 0.9], grid)] * 4
    assert len(vT_cluster_report(same, 0.1)) == 1
    a, b = empirical_measure([0.1], grid), empirical_measure([0.9], grid)
    assert len(vT_cluster_report([a, b, a, b], 0.1)) == 2


def test_kan_boundary_snapshots_one_cluster():
    x0 = SplitMix64(11).random()
    orbit = kan_orbit(KanState(x0, 0.0), 1 << 17)
    grid = Grid.interval(0.0, 1.0, 16)
    snaps = [empirical_measure(orbit[: 1 << i, 0:1], grid) for i in range(10, 18)]
    assert len(vT_cluster_report(snaps, 0.1)) == 1


# --- transitive bounds -------------------------------------------------------------


def _rep(lo, hi):
    return oscillation_report([lo, hi], 1.0, 0.01)


def test_transitive_bounds_examples():
    est = transitive_bounds_estimate([_rep(0.2, 0.9)])
    assert (est.lstar_est, est.Lstar_est) == (0.2, 0.9)
    est = transitive_bounds_estimate([_rep(0.2, 0.9), _rep(0.1, 0.8)])
    assert (est.lstar_est, est.Lstar_est) == (0.1, 0.9)


def test_coin_toss_versus_block_orbits(doubling_averages):
    rng = SplitMix64(3)
    reports = []
    for _ in range(10):
        avgs = birkhoff_partial_averages(rng.integers(1 << 16, 2).astype(float))
        reports.append(oscillation_report(avgs, 0.25, 0.01))
    est = transitive_bounds_estimate(reports)
    assert abs(est.lstar_est - 0.5) < 0.02 and abs(est.Lstar_est - 0.5) < 0.02
    block = transitive_bounds_estimate([oscillation_report(doubling_averages, 0.5)])
    assert abs(block.lstar_est - 1 / 3) < 0.01 and abs(block.Lstar_est - 2 / 3) < 0.01
