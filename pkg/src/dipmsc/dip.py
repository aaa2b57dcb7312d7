"""Hartigan's dip test of unimodality.

The statistic is computed by the greatest-convex-minorant /
least-concave-majorant construction (a port of the classic AS 217
routine, see ``_ckernels``). P-values come from a seeded bootstrap
against the uniform(0, 1) null.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConfigError, SampleSizeError

MIN_SAMPLE = 4
MIN_BOOTSTRAP = 100


@dataclass(frozen=True)
class DipResult:
    dip: float
    p_value: float
    n: int
    rejects_unimodality: bool


def _sorted_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size < MIN_SAMPLE:
        raise SampleSizeError(f"dip test needs at least {MIN_SAMPLE} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise SampleSizeError("sample contains non-finite values")
    return np.ascontiguousarray(np.sort(x))


def dip_statistic(sample, backend=None) -> float:
    """Dip of ``sample``: sup distance from its ECDF to the closest unimodal CDF.

    Lies in ``[1/(2n), 0.25]`` and does not depend on the order of the
    sample or on increasing affine transforms of it.

    Raises
    ------
    SampleSizeError
        If the sample has fewer than four values.
    """
    return float(kernels.get_backend(backend).dip_sorted(_sorted_sample(sample)))


@lru_cache(maxsize=64)
def _null_dips(n: int, b: int, seed: int, backend: str | None) -> np.ndarray:
    # one independent stream per (seed, n); replicate r always sees row r,
    # so the null is the same however the rows are later processed
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(n)]))
    block = np.sort(rng.random((b, n)), axis=1)
    out = kernels.get_backend(backend).dip_sorted_rows(np.ascontiguousarray(block))
    out.setflags(write=False)
    return out


def null_distribution(n: int, b: int = 1000, seed: int = 0, backend=None) -> np.ndarray:
    """Dips of ``b`` seeded uniform(0, 1) samples of size ``n`` (cached)."""
    if n < MIN_SAMPLE:
        raise SampleSizeError(f"dip test needs at least {MIN_SAMPLE} observations, got {n}")
    if b < MIN_BOOTSTRAP:
        raise ConfigError(f"bootstrap count must be >= {MIN_BOOTSTRAP}, got {b}")
    return _null_dips(int(n), int(b), int(seed), backend)


def dip_pvalue(sample, b: int = 1000, seed: int = 0, alpha: float = 0.05, backend=None) -> DipResult:
    """Bootstrap p-value of the dip against the uniform null.

    Parameters
    ----------
    sample : array_like
        At least four observations.
    b : int
        Number of bootstrap replicates (>= 100).
    seed : int
        Seed of the replicate stream; the same ``(seed, n, b)`` always gives
        the same null sample.
    alpha : float
        Significance level used for ``rejects_unimodality``.

    Returns
    -------
    DipResult
        ``p_value`` is the fraction of null dips that are >= the observed dip.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    x = _sorted_sample(sample)
    dip = float(kernels.get_backend(backend).dip_sorted(x))
    null = null_distribution(x.size, b, seed, backend)
    p = float(np.count_nonzero(null >= dip)) / null.size
    return DipResult(dip, p, int(x.size), p < alpha)


def check_cluster_modality(dist_rows, alpha: float = 0.05, b: int = 1000, seed: int = 0,
                           kind: str = "ratio", backend=None) -> float:
    """Splitter score of one cluster.

    Row ``i`` of the square submatrix ``dist_rows`` holds the distances
    from member ``i`` to the other members; the diagonal is dropped. A
    member whose row fails the dip test at ``alpha`` is a splitter. The
    score is the fraction of splitters (``kind="ratio"``) or their number
    (``kind="count"``). Clusters with fewer than five members score 0.
    """
    if kind not in ("ratio", "count"):
        raise ConfigError(f"kind must be 'ratio' or 'count', got {kind!r}")
    d = np.asarray(dist_rows, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ConfigError(f"expected a square distance matrix, got shape {d.shape}")
    m = d.shape[0]
    if m < MIN_SAMPLE + 1:
        return 0.0
    mod = kernels.get_backend(backend)
    off = ~np.eye(m, dtype=bool)
    rows = np.sort(d[off].reshape(m, m - 1), axis=1)
    dips = mod.dip_sorted_rows(np.ascontiguousarray(rows))
    null = null_distribution(m - 1, b, seed, backend)
    # p < alpha  <=>  fewer than alpha*b null dips reach the observed dip
    null_sorted = np.sort(null)
    reach = null.size - np.searchsorted(null_sorted, dips, side="left")
    splitters = int(np.count_nonzero(reach / null.size < alpha))
    return splitters / m if kind == "ratio" else float(splitters)
