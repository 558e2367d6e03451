import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import (
    binomial_oracle,
    cliffs_delta_oracle,
    fisher_oracle,
    mann_whitney_oracle,
    midranks as midranks_oracle,
    spearman_oracle,
    u_statistic,
    weighted_kappa_oracle,
    wilcoxon_oracle,
)

from tomholdem.rng import SplitMix64, derive_seed
from tomholdem.stats import (
    AllZeroDifferences,
    ConstantInput,
    EmptyInput,
    GroupSample,
    LengthMismatch,
    TooLargeForExact,
    ZeroVariance,
    binomial_test,
    bootstrap_ci_delta,
    cliffs_delta,
    cohens_d,
    cohens_d_ci,
    fishers_exact,
    mann_whitney_exact,
    midranks,
    spearman,
    weighted_kappa,
    wilcoxon_signed_rank,
)

PROPERTY_CASES = 1000
small_values = st.integers(min_value=0, max_value=6)


def two_groups(total=8):
    return st.integers(1, total - 1).flatmap(
        lambda n: st.tuples(
            st.lists(small_values, min_size=n, max_size=n),
            st.lists(small_values, min_size=1, max_size=total - n),
        )
    )


# -- generator ----------------------------------------------------------------


def test_splitmix64_reference_vector():
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_bulk_stream_matches_sequential():
    a, b = SplitMix64(42), SplitMix64(42)
    assert [int(x) for x in a.bulk_u64(100)] == [b.next_u64() for _ in range(100)]
    assert a.next_u64() == b.next_u64()


def test_derive_seed_is_order_sensitive():
    assert derive_seed(1, 2) != derive_seed(2, 1)
    assert derive_seed("Full", 0) == derive_seed("Full", 0)


# -- Mann-Whitney ----------------------------------------------------------------


def test_mann_whitney_headline_example():
    r = mann_whitney_exact([0] * 5, [3] * 5)
    assert r.statistic == 0
    assert r.p_two_tailed == pytest.approx(2 / 252, abs=1e-12)


def test_mann_whitney_identical_samples():
    assert mann_whitney_exact([1, 2, 3], [1, 2, 3]).p_two_tailed == 1.0


def test_mann_whitney_three_vs_three_matches_enumeration():
    a, b = [1.5, 4.0, 2.2], [3.3, 0.1, 5.0]
    u, p = mann_whitney_oracle(a, b)
    r = mann_whitney_exact(a, b)
    assert r.statistic == min(u, 9 - u) and r.p_two_tailed == pytest.approx(p, abs=1e-12)


def test_mann_whitney_too_large():
    with pytest.raises(TooLargeForExact):
        mann_whitney_exact(list(range(11)), list(range(11)))


def test_group_sample_accepted():
    r = mann_whitney_exact(GroupSample("x", (1.0, 2.0)), GroupSample("y", (3.0, 4.0)))
    assert r.statistic == 0
    with pytest.raises(EmptyInput):
        GroupSample("z", ())


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(two_groups())
def test_mann_whitney_matches_oracle(groups):
    a, b = groups
    u, p = mann_whitney_oracle(a, b)
    r = mann_whitney_exact(a, b)
    assert r.statistic == min(u, len(a) * len(b) - u)  # reported U is the smaller of U_a, U_b
    assert r.effect == pytest.approx(cliffs_delta_oracle(a, b), abs=1e-12)
    assert r.p_two_tailed == pytest.approx(p, abs=1e-12)
    # label symmetry
    assert mann_whitney_exact(b, a).p_two_tailed == pytest.approx(r.p_two_tailed, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(two_groups())
def test_rank_statistics_invariant_under_monotone_transform(groups):
    a, b = groups
    f = lambda v: [math.exp(x) * 3 + 1 for x in v]  # noqa: E731
    r1, r2 = mann_whitney_exact(a, b), mann_whitney_exact(f(a), f(b))
    assert (r1.statistic, r1.p_two_tailed) == (r2.statistic, r2.p_two_tailed)
    assert cliffs_delta(a, b, resamples=50).statistic == cliffs_delta(f(a), f(b), resamples=50).statistic


# -- Cliff's delta and bootstrap -----------------------------------------------------


def test_cliffs_delta_examples():
    assert cliffs_delta([3] * 5, [0] * 5).statistic == 1.0
    assert cliffs_delta([1, 2], [1, 2]).statistic == 0.0
    assert cliffs_delta([67, 68], [79, 78]).statistic == -1.0


def test_bootstrap_ci_examples():
    assert bootstrap_ci_delta([3] * 5, [0] * 5) == (1.0, 1.0)
    lo, hi = bootstrap_ci_delta([1, 2, 3, 4], [1, 2, 3, 4])
    assert lo <= 0 <= hi
    assert bootstrap_ci_delta([1, 5, 2, 8], [3, 4, 0, 6]) == bootstrap_ci_delta([1, 5, 2, 8], [3, 4, 0, 6])


def test_bootstrap_seed_changes_ci():
    a, b = [1.1, 5.3, 2.7, 8.2, 3.9, 0.4], [3.3, 4.8, 0.2, 6.1, 2.5, 7.7]
    assert bootstrap_ci_delta(a, b, resamples=100, seed=1) != bootstrap_ci_delta(a, b, resamples=100, seed=2)


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(two_groups())
def test_cliffs_delta_matches_oracle_and_is_antisymmetric(groups):
    a, b = groups
    d = cliffs_delta(a, b, resamples=20).statistic
    assert d == pytest.approx(cliffs_delta_oracle(a, b), abs=1e-12)
    assert cliffs_delta(b, a, resamples=20).statistic == pytest.approx(-d, abs=1e-12)
    assert -1 <= d <= 1


# -- Cohen's d ---------------------------------------------------------------------


def test_cohens_d_shift_identity():
    b = np.array([1.0, 2.0, 4.0, 7.0])
    s = b.std(ddof=1)
    assert cohens_d(b + 3.0, b) == pytest.approx(3.0 / s)
    assert cohens_d([1, 2, 3], [3, 2, 1]) == 0.0


def test_cohens_d_matches_direct_formula():
    rng = SplitMix64(8)
    for _ in range(200):
        n, m = 2 + rng.below(8), 2 + rng.below(8)
        a = np.array([rng.random() * 10 for _ in range(n)])
        b = np.array([rng.random() * 10 for _ in range(m)])
        pooled = math.sqrt(((n - 1) * a.var(ddof=1) + (m - 1) * b.var(ddof=1)) / (n + m - 2))
        assert cohens_d(a, b) == pytest.approx((a.mean() - b.mean()) / pooled, rel=1e-12)


def test_cohens_d_zero_variance():
    with pytest.raises(ZeroVariance):
        cohens_d([1, 1], [1, 1])


def test_cohens_d_ci_brackets_estimate():
    a, b = [3.1, 4.2, 5.0, 6.3, 4.4], [1.0, 2.2, 2.9, 3.1, 1.7]
    lo, hi = cohens_d_ci(a, b)
    assert lo <= cohens_d(a, b) <= hi


# -- Fisher / binomial -------------------------------------------------------------


def test_fisher_examples():
    assert fishers_exact([[0, 10], [0, 12]]).p_two_tailed == 1.0
    assert fishers_exact([[5, 5], [5, 5]]).p_two_tailed == pytest.approx(1.0)
    r = fishers_exact([[90, 410], [0, 500]])
    assert r.p_two_tailed < 0.001
    assert r.p_two_tailed == pytest.approx(fisher_oracle([[90, 410], [0, 500]]), rel=1e-9)


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=4, max_size=4).filter(lambda c: sum(c) <= 8))
def test_fisher_matches_oracle(cells):
    table = [cells[:2], cells[2:]]
    assert fishers_exact(table).p_two_tailed == pytest.approx(fisher_oracle(table), abs=1e-12)


def test_binomial_examples():
    assert binomial_test(5, 10).p_two_tailed == pytest.approx(1.0)
    assert binomial_test(10, 10).p_two_tailed == pytest.approx(2 / 1024)
    assert binomial_test(31, 56).p_two_tailed == pytest.approx(0.50, abs=0.01)


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))),
       st.sampled_from([0.5, 0.25, 0.1, 0.8]))
def test_binomial_matches_oracle(kn, p0):
    k, n = kn
    assert binomial_test(k, n, p0).p_two_tailed == pytest.approx(binomial_oracle(k, n, p0), abs=1e-12)


# -- kappa -------------------------------------------------------------------------


def test_kappa_identical_and_errors():
    assert weighted_kappa([0, 1, 2, 3, 4, 5], [0, 1, 2, 3, 4, 5]).statistic == pytest.approx(1.0)
    with pytest.raises(LengthMismatch):
        weighted_kappa([0, 1], [0])
    with pytest.raises(EmptyInput):
        weighted_kappa([], [])


def test_kappa_near_zero_for_independent_codes():
    rng = SplitMix64(99)
    a = [rng.below(6) for _ in range(10_000)]
    b = [rng.below(6) for _ in range(10_000)]
    assert abs(weighted_kappa(a, b).statistic) < 0.05


def test_kappa_by_hand_adjacent_disagreements():
    # Levels 0..3 only: 8 exact agreements (two on each level) plus four
    # adjacent disagreements (0,1), (1,2), (2,3), (3,2).  With k = 6 the
    # linear weights are |i-j|/5.
    a = [0, 0, 1, 1, 2, 2, 3, 3, 0, 1, 2, 3]
    b = [0, 0, 1, 1, 2, 2, 3, 3, 1, 2, 3, 2]
    # observed weighted disagreement: 4 pairs at weight 1/5 over 12 -> 1/15
    # row margins: each level 3/12; column margins: 0:2, 1:3, 2:4, 3:3 (/12)
    rows = [3 / 12] * 4
    cols = [2 / 12, 3 / 12, 4 / 12, 3 / 12]
    expected = sum(rows[i] * cols[j] * abs(i - j) / 5 for i in range(4) for j in range(4))
    by_hand = 1 - (1 / 15) / expected
    assert weighted_kappa(a, b).statistic == pytest.approx(by_hand, abs=1e-12)
    assert by_hand == pytest.approx(weighted_kappa_oracle(a, b), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=2, max_size=30))
def test_kappa_bounds(pairs):
    a, b = [x for x, _ in pairs], [y for _, y in pairs]
    if len(set(a)) == 1 and len(set(b)) == 1:
        return  # no chance disagreement, kappa undefined
    k = weighted_kappa(a, b).statistic
    assert k <= 1 + 1e-12
    assert (abs(k - 1) < 1e-12) == (a == b)
    assert k == pytest.approx(weighted_kappa_oracle(a, b), abs=1e-9)


# -- Spearman -----------------------------------------------------------------------


def test_spearman_examples():
    assert spearman([1, 2, 3, 4], [2, 4, 8, 16]).statistic == pytest.approx(1.0)
    assert spearman([1, 2, 3, 4], [4, 3, 2, 1]).statistic == pytest.approx(-1.0)
    with pytest.raises(ConstantInput):
        spearman([1, 1, 1], [1, 2, 3])


def test_spearman_n6_matches_720_permutations():
    x, y = [3.1, 0.4, 2.2, 5.5, 1.0, 4.4], [2.0, 1.0, 3.5, 3.0, 0.5, 6.0]
    rho, p = spearman_oracle(x, y)
    r = spearman(x, y)
    assert r.statistic == pytest.approx(rho, abs=1e-12)
    assert r.p_two_tailed == pytest.approx(p, abs=1e-12)


def test_spearman_large_n_uses_approximation():
    rng = SplitMix64(4)
    x = [rng.random() for _ in range(40)]
    y = [v + rng.random() for v in x]
    assert "t" in spearman(x, y).method.lower()


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.lists(small_values, min_size=n, max_size=n),
                                                      st.lists(small_values, min_size=n, max_size=n))))
def test_spearman_matches_oracle(xy):
    x, y = xy
    if len(set(x)) == 1 or len(set(y)) == 1:
        with pytest.raises(ConstantInput):
            spearman(x, y)
        return
    rho, p = spearman_oracle(x, y)
    r = spearman(x, y)
    assert r.statistic == pytest.approx(rho, abs=1e-9)
    assert r.p_two_tailed == pytest.approx(p, abs=1e-9)


# -- Wilcoxon -----------------------------------------------------------------------


def test_wilcoxon_examples():
    assert wilcoxon_signed_rank([1, -1, 2, -2]).p_two_tailed == 1.0
    assert wilcoxon_signed_rank([1, 2, 3, 4, 5]).p_two_tailed == pytest.approx(2 / 32)
    d = [0.5, -1.5, 2.0, 3.0]
    assert wilcoxon_signed_rank(d).p_two_tailed == pytest.approx(wilcoxon_oracle(d))
    with pytest.raises(AllZeroDifferences):
        wilcoxon_signed_rank([0, 0])


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=8).filter(lambda d: any(d)))
def test_wilcoxon_matches_oracle(diffs):
    assert wilcoxon_signed_rank(diffs).p_two_tailed == pytest.approx(wilcoxon_oracle(diffs), abs=1e-12)


# -- helpers -------------------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(st.lists(small_values, min_size=1, max_size=12))
def test_midranks_match_oracle(values):
    assert list(midranks(values)) == midranks_oracle(values)


def test_u_oracle_sanity():
    assert u_statistic([1, 2], [1, 2]) == 2.0


def test_result_invariants():
    r = cliffs_delta([1, 4, 6], [2, 3, 5])
    lo, hi = r.ci95
    assert lo <= hi and 0 <= r.p_two_tailed <= 1
    assert r.to_dict()["ci95"] == [lo, hi]
