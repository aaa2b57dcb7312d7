"""Temporal characterisation of series and clusters.

Inter-event times are read off a binned activity row by thresholding; the
burstiness and memory coefficients summarise their distribution and their
serial correlation. Cumulative popularity, post-peak tail slopes, a
two-sample Kolmogorov-Smirnov test and partition agreement scores round
out the toolkit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

from .errors import (
    DegenerateSampleError,
    EmptySampleError,
    NoEventsError,
    SampleSizeError,
    ShapeError,
    WindowError,
)
from .tensor import SeriesTensor

DEFAULT_LAG = 24


@dataclass(frozen=True)
class InterEventSample:
    taus: tuple

    def __post_init__(self):
        taus = tuple(int(t) for t in self.taus)
        if len(taus) < 1:
            raise SampleSizeError("an inter-event sample needs at least one interval")
        if min(taus) < 1:
            raise ValueError("inter-event times must be >= 1")
        object.__setattr__(self, "taus", taus)

    @property
    def n_tau(self) -> int:
        return len(self.taus)

    def asarray(self) -> np.ndarray:
        return np.asarray(self.taus, dtype=np.float64)


@dataclass(frozen=True)
class BurstinessMemory:
    B: float
    memory: float
    lag: int


def extract_events(row, threshold="mean") -> InterEventSample:
    """Inter-event times of the bins whose value exceeds ``threshold``.

    ``threshold="mean"`` uses the row mean. The comparison is strict, so a
    constant row has no events.

    Raises
    ------
    NoEventsError
        Fewer than two events.
    """
    row = np.asarray(row, dtype=np.float64).ravel()
    if row.size < 2:
        raise ShapeError("an activity row needs at least two bins")
    thr = float(row.mean()) if isinstance(threshold, str) and threshold == "mean" else float(threshold)
    events = np.flatnonzero(row > thr)
    if events.size < 2:
        raise NoEventsError(f"found {events.size} event(s) above {thr:g}; need at least 2")
    return InterEventSample(tuple(np.diff(events)))


def _taus(sample) -> np.ndarray:
    if isinstance(sample, InterEventSample):
        return sample.asarray()
    return InterEventSample(tuple(sample)).asarray()


def burstiness(sample) -> float:
    """``(sigma - m) / (sigma + m)`` with the population standard deviation."""
    t = _taus(sample)
    if t.size < 2:
        raise SampleSizeError("burstiness needs at least two inter-event times")
    m = t.mean()
    s = t.std()
    return float((s - m) / (s + m))


def memory(sample, lag: int = 1) -> float:
    """Lagged memory coefficient of the inter-event times.

    Sums ``(tau_i - m1)(tau_{i+lag} - m2) / (s1 s2)`` over the overlapping
    pairs and divides by ``n_tau - 1``. ``m1, s1`` are the mean and
    population deviation of the leading subsequence ``tau_1..tau_{n-lag}``,
    ``m2, s2`` those of the lagged one. The prefactor means the raw value
    can leave ``[-1, 1]`` slightly on short samples; see ``clamp``.
    """
    t = _taus(sample)
    lag = int(lag)
    if lag < 1:
        raise ValueError("lag must be >= 1")
    n = t.size
    if n - lag < 2:
        raise SampleSizeError(f"memory at lag {lag} needs at least {lag + 2} inter-event times, got {n}")
    a, b = t[: n - lag], t[lag:]
    s1, s2 = a.std(), b.std()
    if s1 == 0 or s2 == 0:
        raise DegenerateSampleError("an inter-event subsequence has zero spread")
    return float(np.sum((a - a.mean()) * (b - b.mean())) / (s1 * s2) / (n - 1))


def clamp(value, lo=-1.0, hi=1.0):
    return None if value is None else float(min(hi, max(lo, value)))


def _values(X) -> np.ndarray:
    return X.values if isinstance(X, SeriesTensor) else np.asarray(X, dtype=np.float64)


def _labels(assignment) -> np.ndarray:
    return np.asarray(getattr(assignment, "cluster_of", assignment), dtype=np.int64)


def cluster_burstiness_memory(X, assignment, d: int = 0, lag: int = DEFAULT_LAG, threshold="mean"):
    """Mean burstiness and memory of every cluster on dimension ``d``.

    Members without at least two inter-event times are left out of the
    burstiness mean; members whose memory is undefined (too few intervals
    for ``lag`` or a constant subsequence) are left out of the memory mean.
    Returns one dict per cluster with the means (``None`` when nobody
    contributes) and the member counts behind them.
    """
    values = _values(X)
    labels = _labels(assignment)
    out = []
    for k in range(int(labels.max()) + 1 if labels.size else 0):
        idx = np.flatnonzero(labels == k)
        bs, ms = [], []
        for n in idx:
            try:
                sample = extract_events(values[n, d], threshold)
                bs.append(burstiness(sample))
            except (NoEventsError, SampleSizeError):
                continue
            try:
                ms.append(memory(sample, lag))
            except (SampleSizeError, DegenerateSampleError):
                pass
        out.append({
            "cluster": k,
            "n_members": int(idx.size),
            "coverage": len(bs),
            "memory_coverage": len(ms),
            "burstiness": float(np.mean(bs)) if bs else None,
            "memory": float(np.mean(ms)) if ms else None,
        })
    return out


def cumulative_popularity(X, assignment, d: int = 0):
    """Per cluster, the list of member totals ``sum_t X[n, d, t]`` (raw values)."""
    values = _values(X)
    labels = _labels(assignment)
    totals = values[:, d, :].sum(axis=1)
    return [[float(v) for v in totals[labels == k]] for k in range(int(labels.max()) + 1 if labels.size else 0)]


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float


def _kolmogorov_cdf(n: int, d: float) -> float:
    """P(D_n < d) for the one-sample two-sided statistic.

    Marsaglia, Tsang and Wang's matrix formulation: the probability is
    ``n!/n^n`` times the central entry of ``H^n``. Powers are renormalised
    as they are formed and the scale carried in log space.
    """
    if d <= 0:
        return 0.0
    if d >= 1:
        return 1.0
    nd = n * d
    k = int(math.floor(nd)) + 1
    m = 2 * k - 1
    h = k - nd
    i = np.arange(m)[:, None]
    j = np.arange(m)[None, :]
    diff = i - j + 1
    H = (diff >= 0).astype(np.float64)
    H[:, 0] -= h ** (np.arange(m) + 1.0)
    H[m - 1, :] -= h ** (m - np.arange(m, dtype=np.float64))
    if 2 * h - 1 > 0:
        H[m - 1, 0] += (2 * h - 1) ** m
    fact = np.array([math.lgamma(v + 1.0) for v in range(m + 1)])
    pos = diff > 0
    H[pos] *= np.exp(-fact[diff[pos]])

    def mul(A, a_log, B, b_log):
        C = A @ B
        s = np.abs(C).max()
        if s == 0:
            return C, a_log + b_log
        return C / s, a_log + b_log + math.log(s)

    result, r_log = None, 0.0
    base, b_log = H, 0.0
    e = n
    while e:
        if e & 1:
            result, r_log = (base, b_log) if result is None else mul(result, r_log, base, b_log)
        e >>= 1
        if e:
            base, b_log = mul(base, b_log, base, b_log)
    centre = result[k - 1, k - 1]
    if centre <= 0:
        return 0.0
    log_p = math.log(centre) + r_log + math.lgamma(n + 1.0) - n * math.log(n)
    return min(1.0, math.exp(log_p))


def _kolmogorov_sf_limit(x: float) -> float:
    j = np.arange(1, 101)
    return float(np.clip(2.0 * np.sum((-1.0) ** (j - 1) * np.exp(-2.0 * j * j * x * x)), 0.0, 1.0))


def ks_two_sample(a, b) -> KSResult:
    """Two-sample Kolmogorov-Smirnov test.

    The statistic is the largest gap between the two empirical CDFs. The
    p-value is the asymptotic one: the survival function of the
    one-sample two-sided Kolmogorov distribution at the effective size
    ``round(n m / (n + m))``. For effective sizes where the tail is
    negligible or the matrix method gets expensive, the limiting
    Kolmogorov series (with the usual finite-sample correction) is used.
    """
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    stat = float(np.max(np.abs(fa - fb)))
    en = a.size * b.size / (a.size + b.size)
    n_eff = max(1, int(round(en)))
    if stat == 0.0:
        return KSResult(0.0, 1.0)
    if n_eff * stat * stat > 18.0 or n_eff > 20000:
        se = math.sqrt(en)
        p = _kolmogorov_sf_limit((se + 0.12 + 0.11 / se) * stat)
    else:
        p = 1.0 - _kolmogorov_cdf(n_eff, stat)
    return KSResult(stat, float(min(1.0, max(0.0, p))))


def tail_slope(row, peak_index: int, fit_horizon: int) -> float:
    """Least-squares slope of ``row[peak_index : peak_index + fit_horizon]``.

    The window is cut at the end of the row and must hold two points.
    """
    row = np.asarray(row, dtype=np.float64).ravel()
    T = row.size
    peak_index = int(peak_index)
    if peak_index < 0 or peak_index + 2 > T:
        raise WindowError(f"peak index {peak_index} leaves fewer than two points in a row of length {T}")
    stop = min(peak_index + int(fit_horizon), T)
    y = row[peak_index:stop]
    if y.size < 2:
        raise WindowError(f"fit horizon {fit_horizon} leaves fewer than two points")
    x = np.arange(y.size, dtype=np.float64)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def cluster_tail_slopes(X, assignment, d: int = 0, fit_horizon: int = 24):
    """Mean post-peak tail slope per cluster; the peak is each member's argmax."""
    values = _values(X)
    labels = _labels(assignment)
    out = []
    for k in range(int(labels.max()) + 1 if labels.size else 0):
        slopes = []
        for n in np.flatnonzero(labels == k):
            row = values[n, d]
            try:
                slopes.append(tail_slope(row, int(np.argmax(row)), fit_horizon))
            except WindowError:
                continue
        out.append({"cluster": k, "coverage": len(slopes), "tail_slope": float(np.mean(slopes)) if slopes else None})
    return out


def partition_scores(predicted, truth):
    """Adjusted Rand index and NMI (arithmetic normalisation) of two partitions."""
    p = _labels(predicted)
    t = np.asarray(truth, dtype=np.int64)
    if p.shape != t.shape:
        raise ShapeError(f"partitions have different lengths: {p.shape[0]} vs {t.shape[0]}")
    return float(adjusted_rand_score(t, p)), float(normalized_mutual_info_score(t, p, average_method="arithmetic"))
