"""Spectral centroid update.

For fixed shifts, the centroid row of dimension ``d`` minimises the
Rayleigh quotient of the scatter matrix

    M_d = sum over members x of (I - x_d x_d^T / ||x_d||^2)

so it is the eigenvector of ``M_d`` with the smallest eigenvalue. Rows are
solved independently, normalised to unit length and sign-fixed.
"""
from __future__ import annotations

import numpy as np

from .distance import shift
from .errors import ConvergenceError, EmptyClusterError

DENSE_MAX_T = 512
RESIDUAL_TOL = 1e-8


def _scatter(rows: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(rows, axis=1)
    if np.any(nrm == 0):
        raise ConvergenceError("a member row vanishes after shifting")
    U = rows / nrm[:, None]
    M = U.shape[0] * np.eye(U.shape[1]) - U.T @ U
    return 0.5 * (M + M.T)


def _shifted_stack(members, shifts) -> np.ndarray:
    X = np.asarray(members, dtype=np.float64)
    if X.ndim == 2:
        X = X[:, None, :]
    if X.shape[0] == 0:
        raise EmptyClusterError("cannot build a scatter matrix for an empty cluster")
    if shifts is None:
        return X
    shifts = np.asarray(shifts, dtype=np.int64)
    if shifts.shape != (X.shape[0],):
        raise ValueError("need one shift per member")
    if not np.any(shifts):
        return X
    return np.stack([shift(x, q) if q else x for x, q in zip(X, shifts)])


def scatter_matrix(members, d: int, shifts=None) -> np.ndarray:
    """Accumulate ``sum (I - u u^T)`` over the unit-normalised shifted member rows."""
    return _scatter(_shifted_stack(members, shifts)[:, d, :])


def sign_fix(v: np.ndarray) -> np.ndarray:
    """Orient ``v`` so its entries sum to >= 0 (first nonzero entry positive on a tie)."""
    s = float(np.sum(v))
    if s < 0:
        return -v
    if s == 0:
        nz = np.flatnonzero(v)
        if nz.size and v[nz[0]] < 0:
            return -v
    return v


def _pick(vectors: np.ndarray) -> np.ndarray:
    """Deterministic choice among eigenvectors of a repeated eigenvalue.

    Candidates are sign-fixed; the one whose sequence of absolute values is
    lexicographically largest wins.
    """
    cands = [sign_fix(vectors[:, j] / np.linalg.norm(vectors[:, j])) for j in range(vectors.shape[1])]
    return max(cands, key=lambda v: tuple(np.abs(v)))


def smallest_eigenvector(m: np.ndarray, tol: float = RESIDUAL_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.shape[0] > DENSE_MAX_T:
        return _power_smallest(m, tol)
    w, V = np.linalg.eigh(m)
    scale = max(1.0, float(np.abs(w).max()))
    tied = np.flatnonzero(w - w[0] <= 1e-10 * scale)
    v = _pick(V[:, tied]) if tied.size > 1 else sign_fix(V[:, 0])
    _check_residual(m, v, tol)
    return v


def _check_residual(m, v, tol):
    lam = float(v @ m @ v)
    res = np.linalg.norm(m @ v - lam * v)
    if res > tol * max(np.linalg.norm(m, 2), 1.0):
        raise ConvergenceError(f"eigen-residual {res:.3e} exceeds tolerance")


def _power_smallest(m, tol, max_iter=20000):
    # shifted power iteration on (lambda_max I - M); its dominant
    # eigenvector is M's smallest one
    n = m.shape[0]
    shift_ = float(np.abs(m).sum(axis=1).max())
    B = shift_ * np.eye(n) - m
    limit = tol * max(np.linalg.norm(m, 2), 1.0)
    v = np.ones(n) / np.sqrt(n)
    for it in range(max_iter):
        w = B @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            break
        v = w / nrm
        if it % 10 == 9:
            mv = m @ v
            if np.linalg.norm(mv - (v @ mv) * v) < 0.1 * limit:
                break
    v = sign_fix(v)
    _check_residual(m, v, tol)
    return v


def update_centroid(members, shifts=None, D: int | None = None) -> np.ndarray:
    """D x T centroid with one smallest-eigenvector row per dimension."""
    if len(members) == 0:
        raise EmptyClusterError("cannot compute the centroid of an empty cluster")
    X = _shifted_stack(members, shifts)
    D = X.shape[1] if D is None else D
    return np.stack([smallest_eigenvector(_scatter(X[:, d, :])) for d in range(D)])
