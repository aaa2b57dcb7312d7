"""Pure-Python/NumPy versions of the compiled kernels.

Used when the extension is not built, or when ``DIPMSC_PURE_PYTHON`` is set.
Every function here has the same signature and semantics as its
counterpart in ``_ckernels``.
"""
import numpy as np


def _shift_order(q_max):
    yield 0
    for s in range(1, q_max + 1):
        yield -s
        yield s


def shift_search(c, x, q_max):
    """Scan q in [-q_max, q_max] for the best jointly shifted, per-row scaled fit.

    Returns ``(value, q, alphas)``; ``value`` is NaN when every shift leaves
    some row of ``x`` empty.
    """
    D, T = c.shape
    cnorm = np.sqrt(np.einsum("dt,dt->d", c, c))
    best, qbest, abest = np.inf, 0, np.full(D, np.nan)
    for q in _shift_order(q_max):
        lo, hi = max(q, 0), min(T + q, T)
        cs = c[:, lo:hi]
        xs = x[:, lo - q:hi - q]
        dot = np.einsum("dt,dt->d", cs, xs)
        nn = np.einsum("dt,dt->d", xs, xs)
        if np.any(nn == 0.0):
            continue
        a = dot / nn
        r = (
            np.einsum("dt,dt->d", c[:, :lo], c[:, :lo])
            + np.einsum("dt,dt->d", cs - a[:, None] * xs, cs - a[:, None] * xs)
            + np.einsum("dt,dt->d", c[:, hi:], c[:, hi:])
        )
        total = float(np.sum(np.sqrt(r) / cnorm)) / D
        if total < best:
            best, qbest, abest = total, q, a
    if not np.isfinite(best):
        return float("nan"), 0, np.full(D, np.nan)
    return best, qbest, np.array(abest, dtype=np.float64)


def batch_search(C, X, q_max, values, shifts, alphas, k_start, k_stop):
    for k in range(k_start, k_stop):
        for n in range(X.shape[0]):
            v, q, a = shift_search(C[k], X[n], q_max)
            values[k, n] = v
            shifts[k, n] = q
            alphas[k, n] = a


def dip_sorted(x):
    """Hartigan's dip of an ascending-sorted sample (greatest convex
    minorant / least concave majorant construction)."""
    x = [float(v) for v in x]
    n = len(x)
    if n == 0:
        return 0.0
    # running dip is kept in units of 2n; one jump of the ECDF is the floor
    dip = 1.0
    if n < 2 or x[-1] == x[0]:
        return dip / (2.0 * n)
    low, high = 0, n - 1

    mn = [0] * n
    for j in range(1, n):
        mn[j] = j - 1
        while True:
            mnj = mn[j]
            mnmnj = mn[mnj]
            if mnj == 0 or (x[j] - x[mnj]) * (mnj - mnmnj) < (x[mnj] - x[mnmnj]) * (j - mnj):
                break
            mn[j] = mnmnj
    mj = [0] * n
    mj[n - 1] = n - 1
    for k in range(n - 2, -1, -1):
        mj[k] = k + 1
        while True:
            mjk = mj[k]
            mjmjk = mj[mjk]
            if mjk == n - 1 or (x[k] - x[mjk]) * (mjk - mjmjk) < (x[mjk] - x[mjmjk]) * (k - mjk):
                break
            mj[k] = mjmjk

    gcm = [0] * (n + 1)
    lcm = [0] * (n + 1)
    while True:
        gcm[0] = high
        i = 0
        while gcm[i] > low:
            gcm[i + 1] = mn[gcm[i]]
            i += 1
        ig = l_gcm = i
        ix = ig - 1

        lcm[0] = low
        i = 0
        while lcm[i] < high:
            lcm[i + 1] = mj[lcm[i]]
            i += 1
        ih = l_lcm = i
        iv = 1

        d = 0.0
        if l_gcm != 1 or l_lcm != 1:
            while True:
                gcmix = gcm[ix]
                lcmiv = lcm[iv]
                if gcmix > lcmiv:
                    gcmil = gcm[ix + 1]
                    dx = (lcmiv - gcmil + 1) - (x[lcmiv] - x[gcmil]) * (gcmix - gcmil) / (x[gcmix] - x[gcmil])
                    iv += 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv - 1
                else:
                    lcmivl = lcm[iv - 1]
                    dx = (x[gcmix] - x[lcmivl]) * (lcmiv - lcmivl) / (x[lcmiv] - x[lcmivl]) - (gcmix - lcmivl - 1)
                    ix -= 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv
                if ix < 0:
                    ix = 0
                if iv > l_lcm:
                    iv = l_lcm
                if gcm[ix] == lcm[iv]:
                    break
        if d < dip:
            break

        dip_l = 0.0
        for j in range(ig, l_gcm):
            max_t = 1.0
            jb, je = gcm[j + 1], gcm[j]
            if je - jb > 1 and x[je] != x[jb]:
                C = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    t = (jj - jb + 1) - (x[jj] - x[jb]) * C
                    if max_t < t:
                        max_t = t
            if dip_l < max_t:
                dip_l = max_t

        dip_u = 0.0
        for j in range(ih, l_lcm):
            max_t = 1.0
            jb, je = lcm[j], lcm[j + 1]
            if je - jb > 1 and x[je] != x[jb]:
                C = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    t = (x[jj] - x[jb]) * C - (jj - jb - 1)
                    if max_t < t:
                        max_t = t
            if dip_u < max_t:
                dip_u = max_t

        dip = max(dip, dip_u, dip_l)
        if low == gcm[ig] and high == lcm[ih]:
            break
        low, high = gcm[ig], lcm[ih]

    return dip / (2.0 * n)


def dip_sorted_rows(xs):
    xs = np.asarray(xs, dtype=np.float64)
    return np.array([dip_sorted(row) for row in xs])
