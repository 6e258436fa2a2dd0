import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smrls.input_space import (
    LatestSampleRule,
    Normalizer,
    PartitionStore,
    SynthSample,
    cell_bounds,
    encode_partition,
    memory_lookup,
    memory_update,
    per_dim_partitions,
)


def test_normalize_examples():
    n = Normalizer([0.0], [10.0])
    assert n.normalize([5.0])[0] == 0.0
    assert n.normalize([0.0])[0] == -1.0
    assert n.normalize([10.0])[0] == 1.0
    assert Normalizer([-1.0], [1.0]).normalize([0.3])[0] == pytest.approx(0.3, abs=1e-16)


def test_normalize_clamps_and_batches():
    n = Normalizer([0.0, -2.0], [10.0, 2.0])
    out = n.normalize([[12.0, -3.0], [5.0, 1.0]])
    np.testing.assert_array_equal(out, [[1.0, -1.0], [0.0, 0.5]])


def test_normalizer_rejects_degenerate_bounds():
    with pytest.raises(ValueError):
        Normalizer([1.0], [1.0])
    with pytest.raises(ValueError):
        Normalizer([0.0, 2.0], [1.0, 1.0])


def test_normalize_dimension_mismatch():
    with pytest.raises(ValueError):
        Normalizer.unit(2).normalize([0.1, 0.2, 0.3])


def test_encode_examples():
    assert encode_partition([1.0, 1.0], 100, 2) == 100
    assert encode_partition([-0.95, -0.95], 100, 2) == 1
    assert encode_partition([-1.0, -1.0], 100, 2) == 1


def test_encode_direct_formula():
    # x1 = 0.05 -> ceil(10.5/2 - 1) = ceil(4.25) = 5; x2 = -0.35 -> ceil(6.5/2 - 1) = 3
    assert encode_partition([0.05, -0.35], 100, 2) == 1 + 5 + 3 * 10
    # cells are closed on their upper edge: x = 0 -> ceil(5 - 1) = 4
    assert encode_partition([0.0, 0.0], 100, 2) == 1 + 4 + 4 * 10


def test_encode_rejects_non_power():
    with pytest.raises(ValueError):
        encode_partition([0.0, 0.0], 99, 2)
    with pytest.raises(ValueError):
        per_dim_partitions(10, 3)
    assert per_dim_partitions(1000, 3) == 10
    assert per_dim_partitions(7, 1) == 7


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2), st.integers(1, 12))
def test_every_point_lands_in_exactly_one_cell(x, m):
    idx = encode_partition(x, m * m, 2)
    assert 1 <= idx <= m * m
    # brute force over all cells: cell d owns scaled coordinate u iff d < u <= d + 1,
    # with u == 0 absorbed by the lowest cell
    owners = []
    for d1 in range(m):
        for d2 in range(m):
            ok = True
            for xi, d in zip(x, (d1, d2)):
                u = (xi + 1.0) * m / 2.0
                ok &= (d < u <= d + 1) or (d == 0 and u == 0)
            if ok:
                owners.append(1 + d1 + d2 * m)
    assert owners == [idx]
    lo, hi = cell_bounds(idx, m, 2)
    assert np.all(np.asarray(x) >= lo - 1e-12) and np.all(np.asarray(x) <= hi + 1e-12)


def test_fresh_store_lookup():
    s = PartitionStore(10, 2)
    assert s.n_partitions == 100 and s.visited_count == 0
    seen, sample = memory_lookup(s, 37)
    assert not seen
    np.testing.assert_array_equal(sample.input, [0.0, 0.0])
    assert sample.output == 0.0


def test_store_read_after_write_and_displacement():
    s = PartitionStore(10, 2)
    x = np.array([0.33, -0.52])
    a = s.encode(x)
    displaced, before = memory_update(s, a, SynthSample(x, 1.5))
    assert not before and displaced.output == 0.0
    np.testing.assert_array_equal(displaced.input, [0.0, 0.0])
    assert s.visited_count == 1
    seen, got = memory_lookup(s, a)
    assert seen and got.output == 1.5
    np.testing.assert_array_equal(got.input, x)

    x2 = x + 0.01
    assert s.encode(x2) == a
    displaced, before = memory_update(s, a, SynthSample(x2, -2.0))
    assert before and displaced.output == 1.5
    np.testing.assert_array_equal(displaced.input, x)
    assert s.visited_count == 1
    assert memory_lookup(s, a)[1].output == -2.0

    displaced, before = memory_update(s, a, SynthSample(x2, -2.0))
    assert before and displaced.output == -2.0
    np.testing.assert_array_equal(displaced.input, x2)


def test_store_rejects_wrong_partition_and_range():
    s = PartitionStore(10, 2)
    with pytest.raises(ValueError):
        s.update(1, SynthSample(np.array([0.9, 0.9]), 0.0))
    with pytest.raises(IndexError):
        s.lookup(0)
    with pytest.raises(IndexError):
        s.lookup(101)


def test_store_latest_rule_matches_replay(rng):
    s = PartitionStore(5, 2, rule=LatestSampleRule())
    X = rng.uniform(-1, 1, (400, 2))
    Y = rng.normal(size=400)
    counts = []
    for k, (x, y) in enumerate(zip(X, Y)):
        s.update(s.encode(x), SynthSample(x, y))
        counts.append(s.visited_count)
        assert counts[-1] <= min(25, k + 1)
    assert counts == sorted(counts)
    # brute-force replay: last sample per cell
    last = {}
    for x, y in zip(X, Y):
        last[encode_partition(x, 25, 2)] = (x, y)
    for j in range(1, 26):
        seen, smp = s.lookup(j)
        assert seen == (j in last)
        if seen:
            np.testing.assert_array_equal(smp.input, last[j][0])
            assert smp.output == last[j][1]
            assert s.encode(smp.input) == j
