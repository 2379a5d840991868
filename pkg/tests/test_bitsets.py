import math

import pytest
from hypothesis import given, strategies as st

from geomlaw.bitsets import (
    difference,
    full_mask,
    indices_to_mask,
    mask_to_indices,
    nonempty_subsets,
    order_stats,
    popcount,
    subsets_iter,
    validate_dim,
)
from geomlaw.errors import GeomlawError


def naive_difference(x, j, k):
    # independent route: Pascal recursion instead of the binomial sum
    if j == 0:
        return x[k]
    return naive_difference(x, j - 1, k) - naive_difference(x, j - 1, k + 1)


def test_difference_hand_expanded():
    # 1 - 2*0.5 + 0.2
    assert difference([1.0, 0.5, 0.2], 2, 0) == pytest.approx(0.2, abs=1e-15)


def test_difference_constant_sequence_vanishes():
    assert difference([3.7, 3.7, 3.7], 1, 0) == 0.0


def test_difference_order_zero_is_identity():
    assert difference([1.0, 0.5, 0.2], 0, 2) == 0.2


def test_difference_out_of_range():
    with pytest.raises(GeomlawError) as err:
        difference([1.0, 0.5], 1, 1)
    assert err.value.code == "index-out-of-range"


@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=9),
    st.data(),
)
def test_difference_matches_pascal_recursion(x, data):
    k = data.draw(st.integers(0, len(x) - 1))
    j = data.draw(st.integers(0, len(x) - 1 - k))
    assert difference(x, j, k) == pytest.approx(naive_difference(x, j, k), abs=1e-9)


@pytest.mark.parametrize(
    "n, expected_sorted, expected_perm",
    [
        ((3, 1, 2), (1, 2, 3), (1, 2, 0)),
        ((0, 0, 0), (0, 0, 0), (0, 1, 2)),
        ((5, 5, 1), (1, 5, 5), (2, 0, 1)),
    ],
)
def test_order_stats_examples(n, expected_sorted, expected_perm):
    srt, perm = order_stats(n)
    assert srt == expected_sorted
    assert perm == expected_perm


@given(st.lists(st.integers(0, 10), min_size=1, max_size=8))
def test_order_stats_returns_valid_permutation(n):
    srt, perm = order_stats(n)
    assert sorted(perm) == list(range(len(n)))
    assert tuple(n[i] for i in perm) == srt
    assert all(a <= b for a, b in zip(srt, srt[1:]))


def test_subsets_enumeration():
    assert list(subsets_iter(2)) == [0, 1, 2, 3]
    assert len(list(subsets_iter(3, lambda m: m & 1))) == 4
    assert list(nonempty_subsets(1)) == [1]


def test_subsets_counts_power_of_two():
    for d in (1, 2, 5):
        assert len(list(subsets_iter(d))) == 2**d


def test_dimension_cap():
    with pytest.raises(GeomlawError) as err:
        validate_dim(31)
    assert err.value.code == "dimension-too-large"
    validate_dim(30)


def test_mask_round_trip():
    assert mask_to_indices(0b1011) == (0, 1, 3)
    assert indices_to_mask((0, 1, 3)) == 0b1011
    assert popcount(full_mask(7)) == 7
