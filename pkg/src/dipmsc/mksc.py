"""Multivariate k-spectral-centroid clustering (m-kSC).

Alternates a spectral centroid update with a nearest-centroid assignment
under the shift/scale-invariant distance until the partition stops
changing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .centroid import update_centroid
from .distance import ShiftBound, batch_distances, distance
from .errors import ConfigError, ShapeError
from .tensor import SeriesTensor

INITS = ("random-assignment", "provided-centroids")


@dataclass
class Assignment:
    cluster_of: np.ndarray  # (N,) int
    q_of: np.ndarray  # (N,) int, shift found at assignment time
    alpha_of: np.ndarray  # (N, D)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_of == k)


@dataclass
class ClusteringConfig:
    K: int
    q_max: int = 0
    max_iters: int = 100
    seed: int = 0
    init: str = "random-assignment"
    n_jobs: int = 1

    def validate(self, N: int, T: int) -> None:
        if self.K < 1:
            raise ConfigError(f"K must be positive, got {self.K}")
        if self.K > N:
            raise ConfigError(f"K={self.K} exceeds the number of entities N={N}")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.init not in INITS:
            raise ConfigError(f"init must be one of {INITS}, got {self.init!r}")
        if not 0 <= self.q_max < T:
            raise ConfigError(f"q_max must lie in [0, {T - 1}], got {self.q_max}")


@dataclass
class ClusteringResult:
    centroids: np.ndarray  # (K, D, T), unit-norm sign-fixed rows
    assignment: Assignment
    objective: float
    iterations: int
    converged: bool
    objective_trace: list = field(default_factory=list)

    @property
    def K(self) -> int:
        return self.centroids.shape[0]


def _values(X) -> np.ndarray:
    return X.values if isinstance(X, SeriesTensor) else np.asarray(X, dtype=np.float64)


def random_labels(N: int, K: int, rng: np.random.Generator, attempts: int = 100) -> np.ndarray:
    """Uniform random labels with every cluster non-empty.

    Draws are rejected until all K labels appear. After ``attempts``
    failures (only plausible when K is close to N) a random balanced
    labelling is used instead.
    """
    for _ in range(attempts):
        labels = rng.integers(0, K, size=N)
        if np.unique(labels).size == K:
            return labels
    return rng.permutation(np.arange(N) % K)


def _assign(values, centroids, q_max, n_jobs):
    b = batch_distances(centroids, values, q_max, n_jobs=n_jobs)
    labels = np.argmin(b.values, axis=0)  # first minimum: lowest cluster id on ties
    idx = np.arange(values.shape[0])
    return labels, b.values[labels, idx].copy(), b.shifts[labels, idx].copy(), b.alphas[labels, idx].copy(), b


def _repair(labels, dists, shifts, alphas, b, K):
    """Give every empty cluster the entity farthest from its own centroid."""
    counts = np.bincount(labels, minlength=K)
    for k in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        cand = np.where(movable, dists, -np.inf)
        n = int(np.argmax(cand))
        counts[labels[n]] -= 1
        counts[k] += 1
        labels[n] = k
        dists[n] = b.values[k, n]
        shifts[n] = b.shifts[k, n]
        alphas[n] = b.alphas[k, n]


def _update(values, labels, shifts, K):
    out = []
    for k in range(K):
        idx = np.flatnonzero(labels == k)
        out.append(update_centroid(values[idx], shifts[idx]))
    return np.stack(out)


def m_ksc(X, config: ClusteringConfig, init_centroids=None) -> ClusteringResult:
    """Run m-kSC on tensor ``X``.

    With ``init="random-assignment"`` the loop starts from seeded random
    labels and zero shifts and computes centroids first. With
    ``init="provided-centroids"`` it starts by assigning against
    ``init_centroids``. ``converged`` is set when two consecutive
    assignments coincide before ``max_iters`` centroid updates.
    """
    values = _values(X)
    N, D, T = values.shape
    if init_centroids is not None and config.init == "random-assignment":
        config = ClusteringConfig(**{**config.__dict__, "init": "provided-centroids"})
    config.validate(N, T)
    K = config.K
    ShiftBound(config.q_max).check(T)
    trace = []

    if config.init == "provided-centroids":
        if init_centroids is None:
            raise ConfigError("init='provided-centroids' needs init_centroids")
        centroids = np.asarray(init_centroids, dtype=np.float64)
        if centroids.shape != (K, D, T):
            raise ShapeError(f"init_centroids must have shape {(K, D, T)}, got {centroids.shape}")
        labels, dists, shifts, alphas, b = _assign(values, centroids, config.q_max, config.n_jobs)
        _repair(labels, dists, shifts, alphas, b, K)
        trace.append(float(np.sum(dists**2)))
    else:
        rng = np.random.default_rng(config.seed)
        labels = random_labels(N, K, rng)
        shifts = np.zeros(N, dtype=np.int64)

    converged = False
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        centroids = _update(values, labels, shifts, K)
        new_labels, dists, new_shifts, alphas, b = _assign(values, centroids, config.q_max, config.n_jobs)
        _repair(new_labels, dists, new_shifts, alphas, b, K)
        trace.append(float(np.sum(dists**2)))
        same = np.array_equal(new_labels, labels)
        labels, shifts = new_labels, new_shifts
        if same:
            converged = True
            break

    if not converged:
        # bring the centroids in line with the final partition
        centroids = _update(values, labels, shifts, K)
        b = batch_distances(centroids, values, config.q_max, n_jobs=config.n_jobs)
        idx = np.arange(N)
        dists, shifts, alphas = b.values[labels, idx], b.shifts[labels, idx], b.alphas[labels, idx]

    return ClusteringResult(
        centroids=centroids,
        assignment=Assignment(labels.astype(np.int64), np.asarray(shifts, dtype=np.int64), alphas),
        objective=float(np.sum(dists**2)),
        iterations=iterations,
        converged=converged,
        objective_trace=trace,
    )


def objective(X, centroids, assignment, q_max) -> float:
    """Sum over entities of the squared distance to their own centroid (fresh shift search)."""
    values = _values(X)
    labels = assignment.cluster_of if isinstance(assignment, Assignment) else np.asarray(assignment)
    centroids = np.asarray(centroids, dtype=np.float64)
    if labels.shape[0] != values.shape[0] or centroids.shape[1:] != values.shape[1:]:
        raise ShapeError("centroids, assignment and tensor do not line up")
    return float(sum(distance(centroids[k], x, q_max).value ** 2 for k, x in zip(labels, values)))
