import numpy as np
import pytest
from hypothesis import given, strategies as st

from mabmc.rng import RandomStream


def test_same_address_same_sequence():
    a = RandomStream(12345, 7).generator().random(64)
    b = RandomStream(12345, 7).generator().random(64)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = RandomStream(12345, 7).generator().random(64)
    b = RandomStream(12345, 8).generator().random(64)
    c = RandomStream(12346, 7).generator().random(64)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_generator_is_fresh_each_call():
    s = RandomStream(1, 2)
    assert np.array_equal(s.generator().random(16), s.generator().random(16))


def test_child_is_deterministic_and_distinct():
    s = RandomStream(99)
    assert s.child(3) == s.child(3)
    assert s.child(3) != s.child(4)
    assert s.child(3).seed == s.seed
    assert s.child(1, 2) != s.child(2, 1)
    assert s.child(1).child(2) == s.child(1, 2)


def test_child_requires_index():
    with pytest.raises(ValueError):
        RandomStream(1).child()


def test_negative_and_large_values_wrap():
    s = RandomStream(-1, 2**70)
    assert 0 <= s.seed < 2**64
    assert 0 <= s.stream < 2**64


@given(st.integers(0, 2**63), st.integers(0, 2**20), st.integers(0, 2**20))
def test_child_injective_in_practice(seed, i, j):
    s = RandomStream(seed)
    if i != j:
        assert s.child(i) != s.child(j)
