"""dipm-SC: m-kSC with the number of clusters chosen by dip-dist splitting.

Starting from a single cluster, the cluster whose pairwise-distance rows
look most multimodal is split in two by a small local K=2 search, and the
whole partition is then refined by a global m-kSC run seeded with the
enlarged centroid set. The loop stops once no cluster scores above the
split threshold.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dip import MIN_SAMPLE, check_cluster_modality
from .distance import pairwise_distance_matrix
from .errors import ConfigError, SplitError
from .mksc import ClusteringConfig, ClusteringResult, m_ksc
from .tensor import SeriesTensor


@dataclass
class DipmConfig:
    alpha: float = 0.05
    v: float = 0.01
    q_max: int = 0
    b: int = 1000
    local_runs: int = 10
    seed: int = 0
    max_clusters: int | None = None  # None -> min(N // 5, 50), at least 1
    threshold_kind: str = "ratio"
    max_iters: int = 100
    n_jobs: int = 1

    def validate(self, N: int | None = None, T: int | None = None) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.threshold_kind not in ("ratio", "count"):
            raise ConfigError(f"threshold_kind must be 'ratio' or 'count', got {self.threshold_kind!r}")
        if self.threshold_kind == "ratio" and not 0.0 <= self.v <= 1.0:
            raise ConfigError(f"split threshold must lie in [0, 1], got {self.v}")
        if self.threshold_kind == "count" and self.v < 0:
            raise ConfigError(f"split threshold must be >= 0, got {self.v}")
        if self.b < 100:
            raise ConfigError(f"bootstrap count must be >= 100, got {self.b}")
        if self.local_runs < 1:
            raise ConfigError("local_runs must be >= 1")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.q_max < 0 or (T is not None and self.q_max >= T):
            raise ConfigError(f"q_max must lie in [0, T-1], got {self.q_max}")
        if self.max_clusters is not None and self.max_clusters < 1:
            raise ConfigError("max_clusters must be >= 1")

    def cap(self, N: int) -> int:
        if self.max_clusters is not None:
            return min(int(self.max_clusters), N)
        return max(1, min(N // 5, 50))


@dataclass(frozen=True)
class SplitEvent:
    iteration: int
    cluster: int  # index of the split cluster before the split
    size: int
    scores: tuple  # splitter score of every cluster at this iteration
    new_K: int


@dataclass
class DipmResult:
    clustering: ClusteringResult
    history: list = field(default_factory=list)
    cap_reached: bool = False
    final_scores: tuple = ()

    @property
    def K(self) -> int:
        return self.clustering.K


def _values(X) -> np.ndarray:
    return X.values if isinstance(X, SeriesTensor) else np.asarray(X, dtype=np.float64)


def split_cluster(members, config: DipmConfig, seed_key: int = 0):
    """Two child centroids for the entities in ``members``.

    Runs m-kSC with K=2 ``config.local_runs`` times from distinct seeds and
    keeps the centroid pair of the run with the lowest objective. Runs that
    end with an empty child are discarded.

    Raises
    ------
    SplitError
        If there are fewer than two members or every run collapses.
    """
    values = _values(members)
    if values.shape[0] < 2:
        raise SplitError("need at least two members to split a cluster")
    seeds = np.random.SeedSequence([int(config.seed), int(seed_key)]).generate_state(config.local_runs)
    best = None
    for s in seeds:
        cfg = ClusteringConfig(K=2, q_max=config.q_max, max_iters=config.max_iters, seed=int(s), n_jobs=config.n_jobs)
        res = m_ksc(values, cfg)
        if np.unique(res.assignment.cluster_of).size < 2:
            continue
        if best is None or res.objective < best.objective:
            best = res
    if best is None:
        raise SplitError("every local run collapsed to a single cluster")
    return best.centroids[0], best.centroids[1]


def _scores(dmat, labels, K, config):
    out = []
    for k in range(K):
        idx = np.flatnonzero(labels == k)
        if idx.size < MIN_SAMPLE + 1:
            out.append(0.0)
            continue
        sub = dmat[np.ix_(idx, idx)]
        out.append(check_cluster_modality(sub, config.alpha, config.b, config.seed, config.threshold_kind))
    return tuple(out)


def dipm_sc(X, config: DipmConfig | None = None, distances=None) -> DipmResult:
    """Cluster ``X`` with the number of clusters chosen by dip-dist splitting.

    Parameters
    ----------
    X : SeriesTensor or ndarray (N, D, T)
    config : DipmConfig
    distances : ndarray (N, N), optional
        Precomputed pairwise matrix (row i uses entity i as reference).
        Computed once here when omitted; it never changes during the loop.

    Returns
    -------
    DipmResult
        Final clustering, split history, scores of the final clusters and a
        flag telling whether the cluster cap stopped the loop.
    """
    config = config or DipmConfig()
    values = _values(X)
    N, D, T = values.shape
    config.validate(N, T)
    cap = config.cap(N)

    dmat = pairwise_distance_matrix(values, config.q_max, n_jobs=config.n_jobs) if distances is None \
        else np.asarray(distances, dtype=np.float64)
    if dmat.shape != (N, N):
        raise ConfigError(f"distance matrix must be {(N, N)}, got {dmat.shape}")

    base = ClusteringConfig(K=1, q_max=config.q_max, max_iters=config.max_iters, seed=config.seed, n_jobs=config.n_jobs)
    result = m_ksc(values, base)
    history = []
    iteration = 0
    while True:
        labels = result.assignment.cluster_of
        scores = _scores(dmat, labels, result.K, config)
        top = int(np.argmax(scores))
        if scores[top] <= config.v:
            return DipmResult(result, history, False, scores)
        if result.K >= cap:
            return DipmResult(result, history, True, scores)
        iteration += 1
        idx = np.flatnonzero(labels == top)
        c1, c2 = split_cluster(values[idx], config, seed_key=iteration)
        centroids = result.centroids.copy()
        centroids[top] = c1
        centroids = np.concatenate([centroids, c2[None]], axis=0)
        cfg = ClusteringConfig(K=result.K + 1, q_max=config.q_max, max_iters=config.max_iters,
                               seed=config.seed, init="provided-centroids", n_jobs=config.n_jobs)
        result = m_ksc(values, cfg, init_centroids=centroids)
        history.append(SplitEvent(iteration, top, int(idx.size), scores, result.K))
