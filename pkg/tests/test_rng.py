import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from historiclab.rng import SplitMix64
from oracles import splitmix64_reference


def test_reference_values_seed_zero():
    g = SplitMix64(0)
    assert g.next_u64() == 0xE220A8397B1DCDAF
    assert g.next_u64() == 0x6E789E6AA1B965F4


@given(st.integers(min_value=0, max_value=2**64 - 1), st.integers(min_value=1, max_value=50))
def test_scalar_and_vector_streams_match_reference(seed, n):
    ref = splitmix64_reference(seed, 2 * n)
    g = SplitMix64(seed)
    assert [g.next_u64() for _ in range(n)] == ref[:n]
    assert [int(v) for v in g.u64_array(n)] == ref[n:]


def test_doubles_in_unit_interval_and_consistent():
    a = SplitMix64(42).random_array(1000)
    g = SplitMix64(42)
    b = np.array([g.random() for _ in range(1000)])
    assert np.array_equal(a, b)
    assert a.min() >= 0.0 and a.max() < 1.0


def test_integers_range():
    v = SplitMix64(1).integers(10000, 3)
    assert set(np.unique(v)) == {0, 1, 2}
