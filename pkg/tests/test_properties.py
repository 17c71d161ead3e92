"""Property-based checks of the structural invariants."""

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from rankci.bracket import bracket_cis, hybrid_exact
from rankci.model import OrderedHypothesis, Sample, cns_decode, cns_encode, rank_set
from rankci.numerics import pava, split_sum_of_squares, weighted_sse
from rankci.partition import ci_level_by_level
from rankci.tukey import tukey_pairwise_cis, tukey_partition_cis

finite = st.floats(-50.0, 50.0, allow_nan=False)
sigmas = st.floats(0.3, 4.0, allow_nan=False)


@st.composite
def samples(draw, min_n=2, max_n=8, equal_sigma=None):
    n = draw(st.integers(min_n, max_n))
    y = draw(st.lists(finite, min_size=n, max_size=n))
    if equal_sigma is None:
        equal_sigma = draw(st.booleans())
    if equal_sigma:
        sig = [1.0] * n
    else:
        sig = draw(st.lists(sigmas, min_size=n, max_size=n))
    return Sample([f"c{i}" for i in range(n)], y, sig)


@given(samples())
def test_sample_canonical_form(s):
    assert np.all(np.diff(s.y) >= 0)
    assert np.allclose(s.weights, 1.0 / s.sigma**2)
    assert sorted(s.original_index) == list(range(s.n))


@given(st.lists(finite, min_size=1, max_size=8))
def test_rank_set_matches_counting(mu):
    out = rank_set(mu)
    for i, (a, b) in enumerate(out):
        assert a == 1 + sum(1 for v in mu if v < mu[i])
        assert b == sum(1 for v in mu if v <= mu[i])
        assert a <= b


@given(st.integers(2, 12).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2 ** (n - 1) - 1))
))
def test_gap_mask_roundtrip(args):
    n, mask = args
    assert OrderedHypothesis.from_mask_int(n, mask).to_mask_int() == mask


@given(st.lists(st.integers(0, 30), min_size=1, max_size=6, unique=True))
def test_cns_roundtrip(positions):
    pos = tuple(sorted(positions))
    assert cns_decode(cns_encode(pos), len(pos)) == pos


@given(st.lists(finite, min_size=1, max_size=20),
       st.lists(st.floats(0.1, 5.0), min_size=1, max_size=20))
def test_pava_is_a_monotone_projection(y, w):
    n = min(len(y), len(w))
    y, w = np.array(y[:n]), np.array(w[:n])
    fit = pava(y, w)
    assert np.all(np.diff(fit) >= -1e-9)
    # weighted mean is preserved
    assert np.isclose((w * fit).sum(), (w * y).sum(), rtol=1e-9, atol=1e-9)
    # projecting again changes nothing
    assert np.allclose(pava(fit, w), fit, atol=1e-9)


@given(st.lists(finite, min_size=2, max_size=15),
       st.lists(st.floats(0.1, 5.0), min_size=2, max_size=15),
       st.integers(1, 14))
def test_split_sum_of_squares_identity(y, w, n1):
    n = min(len(y), len(w))
    assume(n >= 2)
    y, w = np.array(y[:n]), np.array(w[:n])
    n1 = 1 + n1 % (n - 1)
    left, right, cross = split_sum_of_squares(y, w, n1)
    assert cross >= -1e-12
    total = weighted_sse(y, w)
    assert np.isclose(left + right + cross, total, rtol=1e-10, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(samples())
def test_exact_cis_pass_structural_check(s):
    ci_level_by_level(s).check()
    hybrid_exact(s).check()


@settings(max_examples=50, deadline=None)
@given(samples(), st.floats(0.5, 3.0))
def test_tukey_partition_cis_pass_structural_check(s, q):
    tukey_partition_cis(s, q=q).check()


@settings(max_examples=50, deadline=None)
@given(samples(equal_sigma=True), st.floats(0.5, 3.0))
def test_tukey_pairwise_check_holds_for_equal_sigma(s, q):
    tukey_pairwise_cis(s, q=q).check()


@settings(max_examples=40, deadline=None)
@given(samples())
def test_smaller_alpha_gives_wider_intervals(s):
    strict = ci_level_by_level(s, alpha=0.10)
    loose = ci_level_by_level(s, alpha=0.01)
    assert loose.contains(strict)


@settings(max_examples=40, deadline=None)
@given(samples(min_n=3, max_n=10))
def test_bracket_sandwich(s):
    inner, outer = bracket_cis(s, adjust_lower=True)
    exact = ci_level_by_level(s)
    assert exact.contains(inner)
    assert outer.contains(exact)


@settings(max_examples=40, deadline=None)
@given(samples(), st.integers(-50, 50))
def test_translation_invariance(s, c):
    shifted = Sample(s.labels, s.y + float(c), s.sigma)
    assert ci_level_by_level(shifted).intervals == ci_level_by_level(s).intervals


@settings(max_examples=40, deadline=None)
@given(samples(), st.integers(-3, 3))
def test_power_of_two_scale_invariance(s, k):
    f = 2.0**k
    scaled = Sample(s.labels, s.y * f, s.sigma * f)
    assert ci_level_by_level(scaled).intervals == ci_level_by_level(s).intervals


@settings(max_examples=40, deadline=None)
@given(samples(), st.randoms(use_true_random=False))
def test_input_order_invariance(s, rnd):
    assume(len(set(map(float, s.y)))
           == s.n)
    rows = list(range(s.n))
    rnd.shuffle(rows)
    shuffled = Sample(
        [s.labels[i] for i in rows], s.y[rows], s.sigma[rows]
    )
    assert ci_level_by_level(shuffled).intervals == ci_level_by_level(s).intervals
    assert tukey_pairwise_cis(shuffled, q=1.5).intervals == (
        tukey_pairwise_cis(s, q=1.5).intervals
    )
