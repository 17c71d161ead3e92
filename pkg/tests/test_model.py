import numpy as np
import pytest

from rankci.model import (
    CriticalPolicy,
    GuardError,
    OrderedHypothesis,
    RankCIs,
    Sample,
    cns_decode,
    cns_encode,
    count_all_partitions,
    count_ordered_hypotheses,
    partition_count_factorial_formula,
    rank_set,
)

CHI2_95 = {
    1: 3.841458820694124,
    2: 5.991464547107979,
    3: 7.814727903251179,
    4: 9.487729036781154,
}


def test_sample_sorts_by_estimate():
    s = Sample(["a", "b", "c"], [2.0, -1.0, 0.5], [1.0, 2.0, 3.0])
    assert s.labels == ("b", "c", "a")
    assert np.allclose(s.y, [-1.0, 0.5, 2.0])
    assert np.allclose(s.sigma, [2.0, 3.0, 1.0])
    assert s.n == 3


def test_sample_sort_is_stable_on_ties():
    s = Sample(["a", "b", "c"], [1.0, 1.0, 0.0], [1.0, 2.0, 3.0])
    assert s.labels == ("c", "a", "b")
    assert np.allclose(s.sigma, [3.0, 1.0, 2.0])


def test_sample_original_index_maps_back_to_input_rows():
    rng = np.random.default_rng(5)
    y = rng.normal(size=8)
    s = Sample([f"c{i}" for i in range(8)], y, np.ones(8))
    for k in range(8):
        assert s.y[k] == y[s.original_index[k]]


def test_sample_weights():
    s = Sample(["a", "b"], [0.0, 1.0], [2.0, 0.5])
    assert np.allclose(s.weights, [0.25, 4.0])


def test_sample_rejects_bad_input():
    with pytest.raises(ValueError):
        Sample(["a", "b"], [0.0, 1.0], [1.0, -1.0])
    with pytest.raises(ValueError):
        Sample(["a", "b"], [0.0, np.nan], [1.0, 1.0])
    with pytest.raises(ValueError):
        Sample(["a"], [0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Sample([], [], [])


def test_hypothesis_blocks_and_rank_intervals():
    # gaps after positions 2 and 3 -> blocks {1,2},{3},{4,5}
    h = OrderedHypothesis(5, frozenset({2, 3}))
    assert h.n_blocks == 3
    assert h.n_equalities == 2
    assert list(h.blocks()) == [(0, 1), (2, 2), (3, 4)]
    assert h.rank_intervals() == [(1, 2), (1, 2), (3, 3), (4, 5), (4, 5)]


def test_hypothesis_mask_roundtrip():
    for m in range(16):
        h = OrderedHypothesis.from_mask_int(5, m)
        assert h.to_mask_int() == m


def test_hypothesis_validates_gaps():
    with pytest.raises(ValueError):
        OrderedHypothesis(3, frozenset({0}))
    with pytest.raises(ValueError):
        OrderedHypothesis(3, frozenset({3}))


def test_rank_cis_from_arrays_and_widths():
    s = Sample(["a", "b", "c"], [3.0, 1.0, 2.0], [1.0, 1.0, 1.0])
    cis = RankCIs.from_arrays([1, 1, 3], [2, 3, 3], s)
    assert cis.intervals == ((1, 2), (1, 3), (3, 3))
    assert cis.labels == ("b", "c", "a")
    assert np.array_equal(cis.widths(), [2, 3, 1])
    assert np.array_equal(cis.lo, [1, 1, 3])
    assert np.array_equal(cis.hi, [2, 3, 3])


def test_rank_cis_validation():
    with pytest.raises(ValueError):
        RankCIs(((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        RankCIs(((2, 1), (1, 2)))
    with pytest.raises(ValueError):
        RankCIs(((1, 3), (1, 2)))


def test_rank_cis_contains():
    inner = RankCIs(((2, 2), (1, 3), (3, 3)))
    outer = RankCIs(((1, 2), (1, 3), (2, 3)))
    assert outer.contains(inner)
    assert not inner.contains(outer)


def test_rank_cis_check_catches_rank_escape():
    good = RankCIs(((1, 2), (1, 2), (3, 3)))
    good.check()
    bad = RankCIs(((1, 1), (2, 2), (2, 3)))
    # center 1 has empirical rank 2, fine; but endpoints must be monotone
    bad.check()
    with pytest.raises(AssertionError):
        RankCIs(((2, 2), (1, 2), (3, 3))).check()


def test_critical_policy_chi_square():
    pol = CriticalPolicy.chi_square_by_equalities(0.05)
    assert pol.critical_value(10, 0) == 0.0
    for k, q in CHI2_95.items():
        assert pol.critical_value(10, k) == pytest.approx(q, abs=1e-12)
    vals = pol.critical_values(5)
    assert vals[0] == 0.0
    assert vals[3] == pytest.approx(CHI2_95[3], abs=1e-12)


def test_critical_policy_mixture_dominates_chi_square():
    # every mixture component has df >= the equality count, so the
    # least-favorable quantile can only sit above the chi-square one
    chi = CriticalPolicy.chi_square_by_equalities(0.05)
    mix = CriticalPolicy.least_favorable_mixture(0.05)
    for k in range(1, 5):
        assert mix.critical_value(6, k) > chi.critical_value(6, k)


def test_critical_policy_affine():
    pol = CriticalPolicy.affine(2.0, 1.0, 0.05)
    assert pol.critical_value(9, 3) == pytest.approx(7.0)
    with pytest.raises(ValueError):
        CriticalPolicy.affine(2.0, None, 0.05)


def test_rank_set_with_ties():
    assert rank_set([1.0, 2.0, 3.0]) == [(1, 1), (2, 2), (3, 3)]
    assert rank_set([2.0, 1.0, 1.0]) == [(3, 3), (1, 2), (1, 2)]
    assert rank_set([5.0, 5.0, 5.0]) == [(1, 3), (1, 3), (1, 3)]


def test_cns_codec_frozen_values():
    # 1-based combinatorial positions of the gap set, smallest first
    assert cns_encode((0,)) == 0
    assert cns_encode((0, 2)) == 1
    assert cns_encode((1, 2)) == 2


def test_cns_codec_roundtrip():
    from itertools import combinations

    for n in (4, 6):
        for k in range(1, n):
            seen = set()
            for pos in combinations(range(n - 1), k):
                idx = cns_encode(pos)
                assert cns_decode(idx, k) == tuple(pos)
                seen.add(idx)
            assert seen == set(range(len(seen)))


def test_hypothesis_counts():
    assert count_ordered_hypotheses(10) == 512
    for n in range(1, 15):
        assert count_ordered_hypotheses(n) == 2 ** (n - 1)
    with pytest.raises(GuardError):
        count_ordered_hypotheses(63)


def test_all_partition_counts():
    # ordered set partitions (Fubini numbers)
    assert count_all_partitions(1) == 1
    assert count_all_partitions(3) == 13
    assert count_all_partitions(4) == 75
    assert count_all_partitions(5) == 541
    with pytest.raises(GuardError):
        count_all_partitions(21)


def test_factorial_formula_count_differs_from_enumeration():
    """The closed-form sum n!/l! is kept for reference but counts a
    different family than the enumeration for n >= 3."""
    assert partition_count_factorial_formula(3) == 10
    assert partition_count_factorial_formula(4) == 41
    assert partition_count_factorial_formula(10) == 6235301
    assert partition_count_factorial_formula(3) != count_all_partitions(3)
