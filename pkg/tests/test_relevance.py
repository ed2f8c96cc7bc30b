import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from socialties.relevance import (
    RelevanceMap,
    extract_relevant,
    persistence,
    quantile,
    randomization_filter,
)
from socialties.temporal_graph import EdgeInstance, build

from oracles import random_toy_network, relevant_sets_oracle, upper_outliers

finite_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


# ------------------------------------------------------------------ quantile

def test_quantile_edge_cases():
    assert quantile([7.0], 0.25) == 7.0
    assert quantile([1.0, 3.0], 0.5) == 2.0
    assert quantile([3.0, 1.0], 0.0) == 1.0  # unsorted input
    assert quantile([3.0, 1.0], 1.0) == 3.0
    with pytest.raises(ValueError, match=r"empty"):
        quantile([], 0.5)
    with pytest.raises(ValueError, match=r"method"):
        quantile([1.0, 2.0], 0.5, "nearest")


def test_quantile_exclusive_clamps_to_data_range():
    # (n+1)q - 1 falls outside [0, n-1] for extreme q at small n
    assert quantile([1.0, 2.0], 0.05, "exclusive") == 1.0
    assert quantile([1.0, 2.0], 0.95, "exclusive") == 2.0


@settings(max_examples=150, deadline=None)
@given(
    st.lists(finite_floats, min_size=2, max_size=40),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_quantile_matches_numpy(values, q):
    # numpy uses a two-sided lerp, so allow a few ulp of slack
    mine = quantile(values, q, "inclusive")
    ref = float(np.percentile(values, 100 * q, method="linear"))
    assert mine == pytest.approx(ref, rel=1e-12, abs=1e-12)
    mine = quantile(values, q, "exclusive")
    ref = float(np.percentile(values, 100 * q, method="weibull"))
    assert mine == pytest.approx(ref, rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite_floats, min_size=1, max_size=30))
def test_quantile_order_statistics(values):
    assert quantile(values, 0.0) == min(values)
    assert quantile(values, 1.0) == max(values)
    assert (
        quantile(values, 0.25)
        <= quantile(values, 0.5)
        <= quantile(values, 0.75)
    )


# --------------------------------------------------------------- persistence

def test_persistence_by_hand(triangle_net):
    net = triangle_net
    # actor 0, attribute 0 present at snapshots {0,1,2}
    assert persistence(net, 0, 0, 1) == 1.0
    assert persistence(net, 0, 0, 3) == 1.0
    assert persistence(net, 0, 0, 4) == 0.75
    # attribute 2 only at snapshot 1
    assert persistence(net, 0, 2, 1) == 0.0
    assert persistence(net, 0, 2, 2) == 0.5
    # unknown actor/attribute pairs count as never present
    assert persistence(net, 0, 99, 4) == 0.0
    assert persistence(net, 99, 0, 4) == 0.0


def test_persistence_k_validation(triangle_net):
    with pytest.raises(ValueError, match=r"k=0"):
        persistence(triangle_net, 0, 0, 0)
    with pytest.raises(ValueError, match=r"\[1, 4\]"):
        persistence(triangle_net, 0, 0, 5)


# ----------------------------------------------------------- extract_relevant

def test_extract_relevant_hand_trace(triangle_net):
    relmap = extract_relevant(triangle_net)
    assert [relmap.at(0, s) for s in range(4)] == [
        frozenset(), frozenset(), frozenset({0}), frozenset({0}),
    ]
    assert relmap.at(1, 3) == frozenset({0})
    assert relmap.final(2) == frozenset()
    assert relmap.actors() == [0, 1, 2]
    assert relmap.any_relevant() == {0}
    assert relmap.covers(1) and not relmap.covers(7)


def test_extract_relevant_input_validation(triangle_net):
    with pytest.raises(ValueError, match=r"method"):
        extract_relevant(triangle_net, "zscore")
    with pytest.raises(ValueError, match=r"empty network"):
        extract_relevant(build([], 3))


def test_relevance_map_rejects_unknown_queries(triangle_net):
    relmap = extract_relevant(triangle_net)
    with pytest.raises(KeyError, match=r"actor 9"):
        relmap.at(9, 0)
    with pytest.raises(KeyError, match=r"actor 0 at snapshot 7"):
        relmap.at(0, 7)


@pytest.mark.parametrize("method", ["iqr", "modified-z"])
@pytest.mark.parametrize("percentile", ["inclusive", "exclusive"])
def test_extract_relevant_matches_oracle(method, percentile):
    rng = np.random.default_rng(2024)
    for _ in range(120):
        instances, t = random_toy_network(rng)
        net = build(instances, t)
        relmap = extract_relevant(net, method, percentile_method=percentile)
        expect = relevant_sets_oracle(instances, t, method, percentile)
        assert relmap.actors() == sorted(expect)
        for u, seq in expect.items():
            assert [relmap.at(u, s) for s in range(t)] == seq


def test_flat_pools_are_never_flagged():
    # every attribute seen exactly once -> identical persistences -> the
    # strict upper fence can flag nothing (quartiles coincide)
    instances = [
        EdgeInstance(0, 1, s, frozenset({10 + s, 20 + s})) for s in range(5)
    ]
    relmap = extract_relevant(build(instances, 5))
    assert relmap.final(0) == frozenset()
    assert relmap.any_relevant() == set()


def test_modified_z_falls_back_to_iqr_on_zero_mad():
    # ten identical persistences and one outlier: MAD = 0, so the modified-z
    # rule defers to the fences, which do flag the persistent attribute
    instances = []
    for s in range(10):
        attrs = {100} | {s}  # attribute 100 every snapshot, the rest one-shot
        instances.append(EdgeInstance(0, 1, s, frozenset(attrs)))
    net = build(instances, 10)
    relmap = extract_relevant(net, "modified-z")
    assert relmap.final(0) == frozenset({100})


def test_inactive_snapshots_reuse_previous_set():
    # actor pauses at snapshots 2-3; the set there must equal snapshot 1's
    instances = [
        EdgeInstance(0, 1, 0, frozenset({0, 1})),
        EdgeInstance(0, 1, 1, frozenset({0, 2})),
        EdgeInstance(0, 1, 4, frozenset({0, 3})),
    ]
    relmap = extract_relevant(build(instances, 5))
    assert relmap.at(0, 2) == relmap.at(0, 1)
    assert relmap.at(0, 3) == relmap.at(0, 1)
    # sharing, not just equality: unchanged snapshots reuse one frozenset
    assert relmap.at(0, 2) is relmap.at(0, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_trailing_empty_snapshots_change_nothing(seed, extra):
    # appending inactive snapshots leaves every presence count as it was,
    # so the outlier rules see the very same input
    instances, t = random_toy_network(np.random.default_rng(seed))
    relmap = extract_relevant(build(instances, t))
    longer = extract_relevant(build(instances, t + extra))
    for u in relmap.actors():
        for s in range(t):
            assert longer.at(u, s) == relmap.at(u, s)
        for s in range(t, t + extra):
            assert longer.at(u, s) == relmap.at(u, t - 1)


def _iqr_outliers_exact(pool, percentile):
    """The fence decision redone in Fraction arithmetic, no floats at all."""
    vals = sorted(Fraction(v) for v in pool.values())
    n = len(vals)

    def quart(q):
        if n == 1:
            return vals[0]
        if percentile == "inclusive":
            rank = (n - 1) * q
        else:
            rank = min(max((n + 1) * q - 1, Fraction(0)), Fraction(n - 1))
        lo = math.floor(rank)
        hi = math.ceil(rank)
        return vals[lo] + (vals[hi] - vals[lo]) * (rank - lo)

    fence = quart(Fraction(3, 4)) + Fraction(3, 2) * (
        quart(Fraction(3, 4)) - quart(Fraction(1, 4))
    )
    return frozenset(a for a, v in pool.items() if v > fence)


@settings(max_examples=200, deadline=None)
@given(
    st.dictionaries(
        st.integers(0, 20), st.integers(0, 60), min_size=1, max_size=15
    ),
    st.sampled_from(["inclusive", "exclusive"]),
)
def test_iqr_fence_on_counts_is_exact(pool, percentile):
    # extraction feeds the rules integer presence counts, and on those the
    # float fence must agree with exact rational arithmetic even when a
    # value sits exactly on the fence -- the property that makes the strict
    # > comparison (and the idle-snapshot reuse) trustworthy
    assert upper_outliers(pool, percentile, "iqr") == _iqr_outliers_exact(
        pool, percentile
    )


def test_relevance_map_equality(triangle_net):
    a = extract_relevant(triangle_net)
    b = extract_relevant(triangle_net)
    assert a == b
    shorter = RelevanceMap(3, {u: [a.at(u, s) for s in range(3)] for u in a.actors()})
    assert a != shorter
    assert a != object()


# ------------------------------------------------------- randomization filter

def _small_net():
    rng = np.random.default_rng(5)
    instances, t = random_toy_network(rng)
    return build(instances, t)


def test_randomization_filter_is_seed_deterministic():
    net = _small_net()
    a = randomization_filter(net, trials=30, seed=9)
    b = randomization_filter(net, trials=30, seed=9)
    assert a.frequencies == b.frequencies
    assert a.excluded == b.excluded
    assert a.pvalues == b.pvalues


def test_randomization_filter_worker_count_does_not_change_results():
    net = _small_net()
    serial = randomization_filter(net, trials=12, seed=3, workers=1)
    parallel = randomization_filter(net, trials=12, seed=3, workers=2)
    assert serial.frequencies == parallel.frequencies
    assert serial.excluded == parallel.excluded


def test_randomization_filter_validates_trials(triangle_net):
    with pytest.raises(ValueError, match=r"trials"):
        randomization_filter(triangle_net, trials=0)


def test_randomization_filter_report_shape(triangle_net):
    report = randomization_filter(triangle_net, trials=25, seed=1)
    assert set(report.frequencies) == set(triangle_net.attributes())
    assert report.excluded <= set(report.frequencies)
    assert all(0.0 <= f <= 1.0 for f in report.frequencies.values())
    assert all(0.0 <= p <= 1.0 for p in report.pvalues.values())
    # exclusion rule: one-sided exact binomial against P(flagged) <= alpha
    for a, p in report.pvalues.items():
        assert (a in report.excluded) == (p < report.alpha)


def test_randomization_filter_excludes_structurally_robust_attribute():
    # attribute 0 rides on every instance of a two-actor network, so any
    # permutation of the attribute sets leaves it persistent everywhere:
    # it gets flagged in 100% of trials and must be excluded
    instances = [
        EdgeInstance(0, 1, s, frozenset({0, 10 + s})) for s in range(8)
    ]
    net = build(instances, 8)
    assert extract_relevant(net).final(0) == frozenset({0})
    report = randomization_filter(net, trials=60, alpha=0.05, seed=2)
    assert report.frequencies[0] == 1.0
    assert 0 in report.excluded


def test_binomial_pvalues_match_scipy():
    from socialties.relevance import _binom_sf

    for n in (5, 30, 100):
        for c in (0, 1, n // 2, n):
            mine = _binom_sf(c, n, 0.05)
            ref = scipy.stats.binom.sf(c - 1, n, 0.05)
            assert mine == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_shuffle_units_preserve_their_invariants():
    from socialties.relevance import _shuffled_instances

    net = _small_net()
    rng = np.random.default_rng(0)
    base = list(net.instances())
    by_set = _shuffled_instances(net, rng, "set")
    assert sorted(e.attrs for e in by_set) == sorted(e.attrs for e in base)
    assert [(e.u, e.v, e.snapshot) for e in by_set] == [
        (e.u, e.v, e.snapshot) for e in base
    ]
    by_token = _shuffled_instances(net, rng, "token")
    pool = {a for e in base for a in e.attrs}
    for out, orig in zip(by_token, base):
        assert (out.u, out.v, out.snapshot) == (orig.u, orig.v, orig.snapshot)
        # a shuffled chunk can contain repeats, so the set may only shrink
        assert len(out.attrs) <= len(orig.attrs)
        assert out.attrs <= pool
    with pytest.raises(ValueError, match=r"shuffle unit"):
        _shuffled_instances(net, rng, "pair")
