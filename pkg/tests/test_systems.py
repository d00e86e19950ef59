from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from historiclab.errors import LabError
from historiclab.rng import SplitMix64
from historiclab.systems import (
    A1,
    A2,
    Basin,
    CirclePointRational,
    KanState,
    ToralMatrix,
    TorusPointExact,
    circle_mult,
    circle_mult_power,
    eventual_period,
    kan_basin_classify,
    kan_basin_labels,
    kan_basin_scan,
    kan_grid_samples,
    kan_orbit,
    kan_step,
    matrix_order_mod,
    multiplicative_order,
    reciprocal_orbit,
    toral_apply,
    toral_orbit_float,
    z2_action_apply,
)
from oracles import mat_apply_stepwise, mult_mod

P = CirclePointRational.of


# --- circle ---------------------------------------------------------------------


def test_circle_examples():
    assert circle_mult(4, P(0)) == P(0)
    assert circle_mult(4, P(1, 4)) == P(0)
    assert circle_mult(6, P(1, 7)) == P(6, 7)
    assert circle_mult(6, circle_mult(6, P(1, 7))) == P(1, 7)


@given(st.integers(2, 9), st.integers(0, 40), st.integers(1, 10**6), st.integers(0, 10**6))
def test_circle_power_matches_stepwise(k, e, q, a):
    theta = Fraction(a % q, q)
    got = circle_mult_power(k, e, P(theta.numerator, theta.denominator))
    assert got.as_fraction() == mult_mod(k, theta, e)


def test_circle_point_validation():
    with pytest.raises(LabError):
        CirclePointRational(2, 4)
    with pytest.raises(LabError):
        CirclePointRational(5, 4)
    assert str(CirclePointRational.parse("5/4")) == "1/4"
    assert float(P(1, 4)) == 0.25


def test_periodicity_helpers():
    assert eventual_period(lambda p: circle_mult(6, p), P(1, 7)) == (0, 2)
    assert eventual_period(lambda p: circle_mult(4, p), P(1, 24)) == (2, 1)  # 1/24 -> 1/6 -> 2/3 -> 2/3
    assert multiplicative_order(6, 7) == 2
    with pytest.raises(LabError):
        multiplicative_order(4, 8)


def test_reciprocal_orbit():
    assert reciprocal_orbit(3) == [Fraction(1), Fraction(1, 2), Fraction(1, 3)]


# --- Kan map ------------------------------------------------------------------------


def test_kan_step_examples():
    assert kan_step(KanState(0.0, 0.0)) == KanState(0.0, 0.0)
    s = kan_step(KanState(0.25, 0.5))
    assert s.x == 0.75 and abs(s.t - 0.5) < 1e-15
    assert kan_step(KanState(0.0, 0.5)) == KanState(0.0, 0.5078125)


def test_kan_boundaries_decide_immediately():
    for x in (0.0, 0.3, 0.9):
        assert kan_basin_classify(KanState(x, 0.0)) == kan_basin_classify(KanState(x, 0.0))
        assert kan_basin_classify(KanState(x, 0.0)).label is Basin.B0
        assert kan_basin_classify(KanState(x, 0.0)).iterations_used == 0
        assert kan_basin_classify(KanState(x, 1.0)).label is Basin.B1


def test_kan_vectorized_labels_match_scalar():
    _, _, x, t = kan_grid_samples(4, 3, seed=5)
    labels = kan_basin_labels(x, t, 20000)
    for xi, ti, li in zip(x, t, labels):
        scalar = kan_basin_classify(KanState(float(xi), float(ti)), 20000).label
        assert {Basin.B0: 0, Basin.B1: 1, Basin.UNDECIDED: -1}[scalar] == li


def test_kan_orbit_matches_steps():
    s = KanState(0.123, 0.4)
    orbit = kan_orbit(s, 50)
    for row in orbit:
        assert (row[0], row[1]) == (s.x, s.t)
        s = kan_step(s)


def test_kan_small_scan_is_seeded_and_mixed():
    a = kan_basin_scan(4, 40, seed=3, max_iter=100000)
    b = kan_basin_scan(4, 40, seed=3, max_iter=100000)
    assert a == b
    assert sum(r.n_B0 + r.n_B1 + r.n_undecided for r in a) == 4 * 4 * 40
    assert all(r.n_B0 > 0 and r.n_B1 > 0 for r in a)


def test_kan_samples_use_splitmix_doubles():
    bi, bj, x, t = kan_grid_samples(2, 2, seed=9)
    u = SplitMix64(9).random_array(16).reshape(8, 2)
    assert np.array_equal(x, (bi + u[:, 0]) / 2) and np.array_equal(t, (bj + u[:, 1]) / 2)


def test_kan_bad_inputs():
    with pytest.raises(LabError):
        KanState(1.0, 0.5)
    with pytest.raises(LabError):
        kan_basin_classify(KanState(0.1, 0.5), thresholds=(0.5, 0.4))


# --- torus -------------------------------------------------------------------------


def test_toral_examples():
    assert toral_apply(A2, TorusPointExact(5, 0, 0)) == TorusPointExact(5, 0, 0)
    p1 = toral_apply(A2, TorusPointExact(5, 1, 0))
    assert (p1.a, p1.b) == (1, 1)
    p2 = toral_apply(A2, p1)
    assert (p2.a, p2.b) == (2, 1)
    assert (A2 @ A2).entries == ((2, 1), (1, 1)) == A1.entries


def test_z2_action_examples():
    p = TorusPointExact(101, 17, 55)
    assert z2_action_apply(0, 0, p) == p
    assert z2_action_apply(1, 0, p) == z2_action_apply(0, 2, p)
    q = TorusPointExact(7, 1, 2)
    stepwise = mat_apply_stepwise(((1, 1), (1, 0)), 8, (1, 2), 7)
    r = z2_action_apply(3, 2, q)
    assert (r.a, r.b) == stepwise == (6, 5)


@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(1, 50), st.integers(0, 10**6), st.integers(0, 10**6))
def test_theta_identity(m, n, q, a, b):
    p = TorusPointExact(q, a % q, b % q)
    assert z2_action_apply(m, n, p) == z2_action_apply(0, 2 * m + n, p)
    x = mat_apply_stepwise(((2, 1), (1, 1)), m, mat_apply_stepwise(((1, 1), (1, 0)), n, (p.a, p.b), q), q)
    r = z2_action_apply(m, n, p)
    assert (r.a, r.b) == x


def test_toral_matrix_validation_and_orders():
    with pytest.raises(LabError):
        ToralMatrix(((2, 0), (0, 1)))
    assert A2.inverse().entries == ((0, 1), (1, -1))
    assert matrix_order_mod(A2, 5) == 20  # Pisano period of 5
    assert TorusPointExact.parse("1/2,1/3") == TorusPointExact(6, 3, 2)


def test_float_orbit_horizon_limit():
    assert toral_orbit_float(A1, 0.1, 0.2, 10).shape == (11, 2)
    with pytest.raises(LabError) as e:
        toral_orbit_float(A1, 0.1, 0.2, 51)
    assert e.value.code == "HYPERBOLIC_FLOAT_HORIZON"
