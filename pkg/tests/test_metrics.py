import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dipmsc.errors import DegenerateSampleError, EmptySampleError, NoEventsError, SampleSizeError, WindowError
from dipmsc.metrics import (
    InterEventSample,
    _kolmogorov_cdf,
    burstiness,
    clamp,
    cluster_burstiness_memory,
    cluster_tail_slopes,
    cumulative_popularity,
    extract_events,
    ks_two_sample,
    memory,
    partition_scores,
    tail_slope,
)

from oracles import ari_brute, ks_brute, lagged_memory, ls_slope, nmi_brute


def test_extract_events_examples():
    assert extract_events([0, 5, 0, 5, 0, 5]).taus == (2, 2)
    assert extract_events([9, 0, 0, 9, 9, 0, 0, 0, 9], threshold=1).taus == (3, 1, 4)
    with pytest.raises(NoEventsError):
        extract_events([3, 3, 3, 3])
    with pytest.raises(NoEventsError):
        extract_events([0, 0, 7, 0])


def test_inter_event_sample_checks():
    assert InterEventSample((3, 1)).n_tau == 2
    with pytest.raises(SampleSizeError):
        InterEventSample(())
    with pytest.raises(ValueError):
        InterEventSample((0, 2))


def test_burstiness_examples():
    assert burstiness([4, 4, 4, 4]) == -1.0
    assert burstiness([1, 1, 10]) == pytest.approx((math.sqrt(18) - 4) / (math.sqrt(18) + 4), abs=1e-15)
    with pytest.raises(SampleSizeError):
        burstiness([5])


def test_burstiness_zero_when_sigma_equals_mean():
    # four gaps of 1 and one of 6: mean 2, population sd 2
    taus = [1, 1, 1, 1, 6]
    assert np.std(taus) == pytest.approx(np.mean(taus), abs=1e-15)
    assert burstiness(taus) == pytest.approx(0.0, abs=1e-15)


def test_memory_examples():
    assert clamp(memory([1, 9, 1, 9, 1, 9], 1)) == pytest.approx(-1.0, abs=0.25)
    assert memory([1, 9, 1, 9, 1, 9], 1) < -0.7
    assert memory([1, 2, 3, 4, 5, 6], 1) > 0.7
    assert memory([2, 5, 3, 7, 4], 1) == pytest.approx(lagged_memory([2, 5, 3, 7, 4], 1), abs=1e-12)


def test_memory_prefactor_and_clamp():
    # with the 1/(n-1) prefactor, perfectly correlated halves give (n-lag)/(n-1)
    assert memory([1, 2, 3, 4, 5, 6], 1) == pytest.approx(5 / 5, abs=1e-12)
    assert memory([1, 2, 3, 4, 5, 6], 2) == pytest.approx(4 / 5, abs=1e-12)
    assert clamp(1.2) == 1.0 and clamp(-3) == -1.0 and clamp(None) is None


def test_memory_errors():
    with pytest.raises(SampleSizeError):
        memory([1, 2, 3], 2)
    with pytest.raises(DegenerateSampleError):
        memory([2, 2, 2, 5], 1)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 500), min_size=2, max_size=40))
def test_burstiness_range(taus):
    b = burstiness(taus)
    assert -1 <= b <= 1
    assert (b == -1) == (len(set(taus)) == 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=4, max_size=30), st.integers(1, 20), st.integers(0, 30))
def test_memory_affine_invariance(taus, scale, offset):
    try:
        m = memory(taus, 1)
    except DegenerateSampleError:
        return
    scaled = [scale * t + offset for t in taus]
    assert memory(scaled, 1) == pytest.approx(m, abs=1e-9)
    assert m == pytest.approx(lagged_memory(taus, 1), abs=1e-9)


def test_cluster_burstiness_memory():
    periodic = np.zeros((3, 1, 24))
    periodic[:, 0, ::4] = 1.0
    spike = np.zeros((2, 1, 24))
    spike[:, 0, 5] = 3.0
    mixed = np.full((4, 1, 24), 1e-3)
    for n, events in enumerate([[0, 1, 5, 6, 13, 20], [2, 3, 4, 11, 19], [1, 8, 9, 15, 16, 23], [0, 2, 9, 10, 22]]):
        mixed[n, 0, events] = 1.0
    X = np.concatenate([periodic, spike, mixed])
    labels = np.array([0, 0, 0, 1, 1, 2, 2, 2, 2])
    out = cluster_burstiness_memory(X, labels, 0, lag=1)
    assert out[0]["burstiness"] == -1.0 and out[0]["coverage"] == 3
    assert out[0]["memory"] is None and out[0]["memory_coverage"] == 0
    assert out[1]["coverage"] == 0 and out[1]["burstiness"] is None
    per = [burstiness(extract_events(X[n, 0])) for n in range(5, 9)]
    assert out[2]["burstiness"] == pytest.approx(sum(per) / 4, abs=1e-12)
    mem = [lagged_memory(list(extract_events(X[n, 0]).taus), 1) for n in range(5, 9)]
    assert out[2]["memory"] == pytest.approx(sum(mem) / 4, abs=1e-12)


def test_cumulative_popularity(rng):
    X = np.array([[[1.0, 2.0, 3.0]], [[4.0, 0.0, 1.0]], [[0.5, 0.5, 0.5]]])
    assert cumulative_popularity(X, [1, 0, 1], 0) == [[5.0], [6.0, 1.5]]
    Y = rng.random((10, 2, 7))
    labels = rng.integers(0, 3, 10)
    pop = cumulative_popularity(Y, labels, 1)
    for k in range(3):
        assert pop[k] == pytest.approx([sum(Y[n, 1]) for n in range(10) if labels[n] == k], abs=1e-12)


def test_ks_examples(rng):
    a = rng.normal(size=30)
    r = ks_two_sample(a, a.copy())
    assert r.statistic == 0.0 and r.p_value == 1.0
    assert ks_two_sample(rng.uniform(0, 1, 20), rng.uniform(10, 11, 25)).statistic == 1.0
    with pytest.raises(EmptySampleError):
        ks_two_sample([], [1.0])


def test_ks_against_reference(rng):
    for _ in range(10):
        a = rng.normal(size=100)
        b = rng.normal(0.3, 1.2, size=100)
        ours = ks_two_sample(a, b)
        ref = stats.ks_2samp(a, b, method="asymp")
        assert abs(ours.statistic - ref.statistic) <= 1e-6
        assert abs(ours.p_value - ref.pvalue) <= 1e-3
        assert ours.statistic == pytest.approx(ks_brute(a, b), abs=1e-15)


def test_ks_symmetric(rng):
    a, b = rng.exponential(size=17), rng.exponential(size=29)
    assert ks_two_sample(a, b) == ks_two_sample(b, a)


def test_kolmogorov_cdf_against_reference():
    for n in (1, 2, 5, 17, 60, 140):
        for d in np.linspace(0.01, 0.99, 25):
            assert 1 - _kolmogorov_cdf(n, d) == pytest.approx(stats.kstwo.sf(d, n), abs=1e-11)


def test_tail_slope_examples(rng):
    assert tail_slope([0, 5, 5, 5, 5], 1, 10) == pytest.approx(0.0, abs=1e-15)
    row = [0, 0, 10, 9.5, 9, 8.5, 8, 7.5]
    assert tail_slope(row, 2, 6) == pytest.approx(-0.5, abs=1e-12)
    y = np.exp(-0.3 * np.arange(20)) + 0.01 * rng.random(20)
    assert tail_slope(y, 0, 12) == pytest.approx(ls_slope(y[:12]), abs=1e-9)
    assert tail_slope(y, 15, 24) == pytest.approx(ls_slope(y[15:]), abs=1e-9)
    with pytest.raises(WindowError):
        tail_slope([1, 2, 3], 2, 5)
    with pytest.raises(WindowError):
        tail_slope([1, 2, 3], 0, 1)


def test_cluster_tail_slopes():
    X = np.array([[[0, 4.0, 3.0, 2.0]], [[0, 0, 2.0, 1.0]], [[0, 0, 0, 1.0]]])
    out = cluster_tail_slopes(X, [0, 0, 1], 0, 3)
    assert out[0]["tail_slope"] == pytest.approx(-1.0) and out[0]["coverage"] == 2
    assert out[1]["tail_slope"] is None and out[1]["coverage"] == 0


def test_partition_scores_examples(rng):
    truth = np.repeat([0, 1, 2], 4)
    relabeled = np.array([2, 0, 1])[truth]
    assert partition_scores(relabeled, truth) == pytest.approx((1.0, 1.0))
    big = rng.integers(0, 4, 1000)
    rand = rng.integers(0, 4, 1000)
    assert abs(partition_scores(rand, big)[0]) <= 0.05
    p = [0, 0, 1, 1, 1, 2, 2, 0, 1, 2]
    t = [0, 0, 0, 1, 1, 1, 2, 2, 2, 2]
    ari, nmi = partition_scores(p, t)
    assert ari == pytest.approx(ari_brute(p, t), abs=1e-12)
    assert nmi == pytest.approx(nmi_brute(p, t), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=5, max_size=30), st.permutations([0, 1, 2, 3]), st.integers(0, 9))
def test_partition_scores_label_invariance(labels, perm, seed):
    other = np.random.default_rng(seed).integers(0, 3, len(labels))
    base = partition_scores(labels, other)
    permuted = [perm[v] for v in labels]
    assert partition_scores(permuted, other) == pytest.approx(base, abs=1e-12)
    assert base[0] == pytest.approx(ari_brute(labels, other), abs=1e-12)
