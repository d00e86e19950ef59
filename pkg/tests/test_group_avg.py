import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from historiclab.errors import LabError
from historiclab.group_avg import (
    FolnerBox,
    PreOrbitWitness,
    SphericalWeights,
    TrigPolynomial,
    cesaro_spherical,
    cesaro_spherical_trace,
    double_average_psi,
    folner_average,
    preorbit_construct,
    psi_bound_rows,
    psi_error_bound_check,
    psi_trace,
    spherical_average,
    spherical_trace,
    spherical_weight_rows,
    tempered_check,
)
from historiclab.systems import CirclePointRational, TorusPointExact, circle_mult_power
from oracles import cesaro_bruteforce, folner_bruteforce, psi_bruteforce, spherical_bruteforce, tempered_min_c_bruteforce

P = CirclePointRational.of
COS = TrigPolynomial()


def cos_frac(x: Fraction) -> float:
    return math.cos(2 * math.pi * float(x))


# --- Folner averages ------------------------------------------------------------


def test_folner_fixed_point_and_identity_box():
    phi = lambda p: (p.a + 2 * p.b) / p.q  # noqa: E731
    origin = TorusPointExact(13, 0, 0)
    for n in (0, 1, 5):
        assert folner_average(origin, phi, n) == phi(origin)
    p = TorusPointExact(13, 4, 9)
    assert folner_average(p, phi, 0) == phi(p)


def test_folner_indicator_matches_bruteforce():
    p = TorusPointExact(5, 1, 0)
    got = folner_average(p, lambda y: float((y.a, y.b) == (0, 0)), 2)
    assert got == folner_bruteforce((1, 0), lambda y: float(y == (0, 0)), 2, 5)
    phi = lambda y: y.a / 5 - y.b / 5  # noqa: E731
    assert abs(folner_average(p, phi, 3) - folner_bruteforce((1, 0), lambda y: y[0] / 5 - y[1] / 5, 3, 5)) < 1e-15


def test_folner_box():
    assert FolnerBox(2).cardinality == 25 and len(list(FolnerBox(2).elements())) == 25
    assert FolnerBox(2).contains((-2, 2)) and not FolnerBox(2).contains((3, 0))
    with pytest.raises(LabError):
        FolnerBox(-1)


# --- tempered boxes ---------------------------------------------------------------


def test_tempered_small_horizons_match_bruteforce():
    for n in (1, 2, 3, 6):
        assert tempered_check(n, 4.0).minimal_C == float(tempered_min_c_bruteforce(n))
    assert tempered_check(1, 1.0).minimal_C == 1.0


def test_tempered_up_to_100():
    res = tempered_check(100, 4.0)
    assert res.holds and res.verified_up_to == 100
    assert res.minimal_C == float(Fraction(399, 201) ** 2)
    assert not tempered_check(100, 3.9).holds


# --- spherical weights --------------------------------------------------------------


def test_weight_rows_normalized_and_symmetric():
    for row in spherical_weight_rows(1000):
        assert abs(math.fsum(row.weights) - 1.0) <= 1e-12
    for k in (0, 1, 7, 60):
        w = SphericalWeights.exact(k).weights
        assert np.array_equal(w, w[::-1])
    with pytest.raises(LabError):
        SphericalWeights.exact(-1)


def test_recurrence_rows_close_to_exact():
    for row in spherical_weight_rows(40):
        assert np.allclose(row.weights, SphericalWeights.exact(row.k).weights, rtol=0, atol=1e-15)


# --- spherical, Cesaro and Psi averages -------------------------------------------------


def test_spherical_examples():
    theta = P(3, 11)
    assert spherical_average(theta, COS, 0) == COS(theta)
    for k in (0, 3, 50):
        assert spherical_average(P(0), COS, k) == 1.0
    got = spherical_average(P(1, 7), COS, 3)
    assert abs(got - spherical_bruteforce(Fraction(1, 7), cos_frac, 3)) < 1e-14


@given(st.integers(1, 200), st.integers(0, 199), st.integers(0, 8))
def test_spherical_matches_word_enumeration(q, a, k):
    theta = Fraction(a % q, q)
    got = spherical_average(P(theta.numerator, theta.denominator), COS, k)
    assert abs(got - spherical_bruteforce(theta, cos_frac, k)) < 1e-12


def test_spherical_trace_matches_single_orders():
    theta = P(5, 36)
    trace = spherical_trace(theta, COS, 30)
    for k in (0, 1, 17, 29):
        assert abs(trace[k] - spherical_average(theta, COS, k)) < 1e-14


def test_cesaro_examples():
    assert cesaro_spherical(P(0), COS, 25) == 1.0
    got = cesaro_spherical(P(1, 4), COS, 10)
    assert abs(got - cesaro_bruteforce(Fraction(1, 4), cos_frac, 10)) < 1e-13
    for n in (1, 9, 64):
        assert cesaro_spherical(P(2, 9), lambda p: 0.37, n) == 0.37
    trace = cesaro_spherical_trace(P(1, 4), COS, 10)
    assert abs(trace[-1] - got) < 1e-15


def test_psi_examples():
    assert double_average_psi(P(0), COS, 13) == 1.0
    theta = P(2, 15)
    assert double_average_psi(theta, COS, 1) == COS(theta)
    got = double_average_psi(P(1, 4), COS, 8)
    assert abs(got - psi_bruteforce(Fraction(1, 4), cos_frac, 8)) < 1e-14


@given(st.integers(1, 100), st.integers(0, 99), st.integers(1, 9))
def test_psi_matches_bruteforce(q, a, n):
    theta = Fraction(a % q, q)
    p = P(theta.numerator, theta.denominator)
    assert abs(double_average_psi(p, COS, n) - psi_bruteforce(theta, cos_frac, n)) < 1e-12
    psi, _ = psi_trace(p, COS, n)
    assert abs(psi[-1] - double_average_psi(p, COS, n)) < 1e-12


def test_average_errors():
    with pytest.raises(LabError):
        spherical_average(P(1, 3), COS, -1)
    with pytest.raises(LabError):
        double_average_psi(P(1, 3), COS, 0)
    with pytest.raises(LabError):
        cesaro_spherical(P(1, 3), COS, 0)


# --- pre-orbits and the Psi bound ---------------------------------------------------------


def test_preorbit_examples():
    assert preorbit_construct(P(0), 1, 0, branch=1).theta == P(1, 4)
    assert preorbit_construct(P(0), 0, 1, branch=1).theta == P(1, 6)
    target = P(1, 3)
    thetas = set()
    for branch in range(24):
        w = preorbit_construct(target, 1, 1, branch)
        image = circle_mult_power(4, 1, circle_mult_power(6, 1, w.theta))
        assert image == target
        thetas.add(w.theta)
    assert len(thetas) == 24
    with pytest.raises(LabError) as e:
        preorbit_construct(target, 1, 1, 24)
    assert e.value.code == "BAD_BRANCH"
    with pytest.raises(LabError) as e:
        PreOrbitWitness(P(1, 5), 1, 0, P(0))
    assert e.value.code == "BAD_WITNESS"


def test_psi_bound_trivial_witness():
    w = preorbit_construct(P(0), 0, 0)
    check = psi_error_bound_check(w, COS, 5)
    assert check.lhs == 0.0 and check.holds


@pytest.mark.parametrize("a,b", [(1, 0), (0, 1)])
def test_psi_bound_every_horizon(a, b):
    w = preorbit_construct(P(0), a, b, branch=1)
    rows = psi_bound_rows(w, COS, range(2, 1001), sup_norm=1.0)
    assert all(r.holds for r in rows)
    # one-shot and incremental evaluation agree
    single = psi_error_bound_check(w, COS, 2, sup_norm=1.0)
    assert (single.lhs, single.bound) == (rows[0].lhs, rows[0].bound)


def test_psi_bound_horizon_too_small():
    w = preorbit_construct(P(0), 2, 1, branch=3)
    with pytest.raises(LabError) as e:
        psi_error_bound_check(w, COS, 2)
    assert e.value.code == "HORIZON_TOO_SMALL"
    assert psi_error_bound_check(w, COS, 3).holds


@pytest.mark.parametrize("a,b,branch", [(1, 0, 1), (0, 1, 5), (1, 1, 7), (2, 1, 11), (2, 2, 100)])
def test_cesaro_converges_on_preorbits(a, b, branch):
    w = preorbit_construct(P(0), a, b, branch)
    trace = cesaro_spherical_trace(w.theta, COS, 200)
    err = np.abs(trace - COS(w.target))
    assert err[-1] < 0.05
    assert err[-1] < err[19]
