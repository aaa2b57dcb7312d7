"""Shift- and scale-invariant distance between multivariate series.

For a reference shape ``c`` (D x T) and a series ``x`` the distance is

    min over q in [-q_max, q_max] of
        (1/D) * sum_d ||c[d] - alpha_d * x_q[d]|| / ||c[d]||

where ``x_q`` is ``x`` delayed by ``q`` steps (zero-filled, same ``q`` for
every dimension) and ``alpha_d = <x_q[d], c[d]> / ||x_q[d]||^2`` is the
closed-form optimal scale for that row. The distance is not symmetric.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateEntityError, DegenerateRowError, ShapeError, ShiftError
from .tensor import SeriesTensor, check_multiseries


@dataclass(frozen=True)
class ShiftBound:
    q_max: int = 0

    def __post_init__(self):
        if int(self.q_max) < 0:
            raise ShiftError(f"q_max must be non-negative, got {self.q_max}")
        object.__setattr__(self, "q_max", int(self.q_max))

    def check(self, T: int) -> None:
        if self.q_max >= T:
            raise ShiftError(f"q_max={self.q_max} must be smaller than the series length {T}")


@dataclass(frozen=True)
class DistanceResult:
    value: float
    q_star: int
    alphas: np.ndarray


def _as_bound(bound) -> ShiftBound:
    return bound if isinstance(bound, ShiftBound) else ShiftBound(int(bound))


def shift(x, q: int) -> np.ndarray:
    """Delay all rows of ``x`` by ``q`` steps; vacated cells become 0."""
    x = check_multiseries(x)
    T = x.shape[1]
    q = int(q)
    if abs(q) >= T:
        raise ShiftError(f"|q|={abs(q)} must be smaller than the series length {T}")
    out = np.zeros_like(x)
    if q >= 0:
        out[:, q:] = x[:, : T - q]
    else:
        out[:, :q] = x[:, -q:]
    return out


def optimal_alpha(x_q_row, c_row) -> float:
    x_q_row = np.asarray(x_q_row, dtype=np.float64)
    c_row = np.asarray(c_row, dtype=np.float64)
    nn = float(x_q_row @ x_q_row)
    if nn == 0.0:
        raise DegenerateEntityError([("<series>", "<row>")], "cannot scale an all-zero row")
    return float(x_q_row @ c_row) / nn


def _check_pair(c, x):
    c = np.ascontiguousarray(check_multiseries(c))
    x = np.ascontiguousarray(check_multiseries(x))
    if c.shape != x.shape:
        raise ShapeError(f"shape mismatch: centroid {c.shape} vs series {x.shape}")
    if np.any(~np.any(c != 0.0, axis=1)):
        raise DegenerateRowError("reference shape has an all-zero row")
    return c, x


def distance(c, x, bound=0, backend=None) -> DistanceResult:
    """Distance from reference shape ``c`` to series ``x``.

    Shifts are scanned in the order 0, -1, 1, -2, 2, ... and only a strict
    improvement replaces the incumbent, so ties go to the smaller ``|q|``
    and then to the negative shift. Shifts that empty some row of ``x`` are
    skipped.
    """
    c, x = _check_pair(c, x)
    bound = _as_bound(bound)
    bound.check(c.shape[1])
    value, q, alphas = kernels.get_backend(backend).shift_search(c, x, bound.q_max)
    if not np.isfinite(value):
        raise DegenerateRowError(f"every shift in [-{bound.q_max}, {bound.q_max}] empties a row")
    return DistanceResult(float(value), int(q), np.asarray(alphas, dtype=np.float64))


@dataclass(frozen=True)
class BatchDistances:
    """Distances from every reference shape ``k`` to every series ``n``."""

    values: np.ndarray  # (K, N)
    shifts: np.ndarray  # (K, N) int64
    alphas: np.ndarray  # (K, N, D)


def batch_distances(C, X, bound, n_jobs: int = 1, backend=None) -> BatchDistances:
    """Evaluate ``distance(C[k], X[n])`` for all pairs.

    Rows of the output are split into contiguous blocks across ``n_jobs``
    threads; each cell is computed independently so the result does not
    depend on the thread count.
    """
    if isinstance(X, SeriesTensor):
        X = X.values
    C = np.ascontiguousarray(C, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    if C.ndim != 3 or X.ndim != 3 or C.shape[1:] != X.shape[1:]:
        raise ShapeError(f"shape mismatch: references {C.shape} vs series {X.shape}")
    if np.any(~np.any(C != 0.0, axis=2)):
        raise DegenerateRowError("a reference shape has an all-zero row")
    bound = _as_bound(bound)
    bound.check(C.shape[2])
    K, N, D = C.shape[0], X.shape[0], C.shape[1]
    values = np.empty((K, N))
    shifts = np.zeros((K, N), dtype=np.int64)
    alphas = np.empty((K, N, D))
    mod = kernels.get_backend(backend)
    n_jobs = max(1, min(int(n_jobs or 1), K))
    if n_jobs == 1:
        mod.batch_search(C, X, bound.q_max, values, shifts, alphas, 0, K)
    else:
        edges = np.linspace(0, K, n_jobs + 1).astype(int)
        with ThreadPoolExecutor(n_jobs) as pool:
            futures = [
                pool.submit(mod.batch_search, C, X, bound.q_max, values, shifts, alphas, int(a), int(b))
                for a, b in zip(edges[:-1], edges[1:])
                if b > a
            ]
            for f in futures:
                f.result()
    bad = ~np.isfinite(values)
    if bad.any():
        k, n = np.argwhere(bad)[0]
        raise DegenerateRowError(
            f"distance(reference {k}, series {n}): every shift in [-{bound.q_max}, {bound.q_max}] empties a row"
        )
    return BatchDistances(values, shifts, alphas)


def pairwise_distance_matrix(X: SeriesTensor, bound, n_jobs: int = 1, backend=None) -> np.ndarray:
    """N x N matrix with entry (i, j) = distance(X_i, X_j); rows use X_i as reference."""
    values = X.values if isinstance(X, SeriesTensor) else np.asarray(X, dtype=np.float64)
    out = batch_distances(values, values, bound, n_jobs=n_jobs, backend=backend).values
    np.fill_diagonal(out, 0.0)
    return out
