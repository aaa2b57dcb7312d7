# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: shift-searched shape distance and the dip statistic.

Semantics mirror ``_pykernels`` exactly; see that module for the reference
description of each routine.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY, NAN
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef int _search(const double[:, ::1] c, const double[:, ::1] x, const double* cnorm,
                 int q_max, double* abuf, double* value, long* qbest, double* abest) noexcept nogil:
    cdef Py_ssize_t D = c.shape[0], T = c.shape[1]
    cdef Py_ssize_t d, t, lo, hi, i
    cdef int step, q, found = 0
    cdef double dot, nn, a, r, e, total, xv
    cdef double best = INFINITY
    cdef bint ok
    for step in range(2 * q_max + 1):
        # scan order 0, -1, +1, -2, +2, ... so strict improvement keeps
        # the smaller |q| and then the negative shift on ties
        if step == 0:
            q = 0
        elif step % 2 == 1:
            q = -((step + 1) // 2)
        else:
            q = step // 2
        lo = q if q > 0 else 0
        hi = T + q if q < 0 else T
        total = 0.0
        ok = True
        for d in range(D):
            dot = 0.0
            nn = 0.0
            for t in range(lo, hi):
                xv = x[d, t - q]
                dot += c[d, t] * xv
                nn += xv * xv
            if nn == 0.0:
                ok = False
                break
            a = dot / nn
            r = 0.0
            for t in range(lo):
                r += c[d, t] * c[d, t]
            for t in range(lo, hi):
                e = c[d, t] - a * x[d, t - q]
                r += e * e
            for t in range(hi, T):
                r += c[d, t] * c[d, t]
            total += sqrt(r) / cnorm[d]
            abuf[d] = a
        if not ok:
            continue
        total = total / D
        if total < best:
            best = total
            qbest[0] = q
            for i in range(D):
                abest[i] = abuf[i]
            found = 1
    value[0] = best if found else NAN
    return found


def shift_search(const double[:, ::1] c, const double[:, ::1] x, int q_max):
    cdef Py_ssize_t D = c.shape[0], T = c.shape[1], d, t
    cdef double[::1] cnorm = np.empty(D)
    cdef double[::1] abuf = np.empty(D)
    alphas = np.full(D, np.nan)
    cdef double[::1] aout = alphas
    cdef double value = NAN, s
    cdef long q = 0
    for d in range(D):
        s = 0.0
        for t in range(T):
            s += c[d, t] * c[d, t]
        cnorm[d] = sqrt(s)
    with nogil:
        _search(c, x, &cnorm[0], q_max, &abuf[0], &value, &q, &aout[0])
    return value, int(q), alphas


def batch_search(const double[:, :, ::1] C, const double[:, :, ::1] X, int q_max,
                 double[:, ::1] values, long[:, ::1] shifts, double[:, :, ::1] alphas,
                 Py_ssize_t k_start, Py_ssize_t k_stop):
    """Fill rows ``k_start:k_stop`` of the (K, N) output arrays in place.

    Releases the GIL so disjoint row blocks can run on separate threads.
    """
    cdef Py_ssize_t N = X.shape[0], D = C.shape[1], T = C.shape[2]
    cdef Py_ssize_t k, n, d, t
    cdef double s, v
    cdef long q
    cdef double* cnorm = <double*> malloc(D * sizeof(double))
    cdef double* abuf = <double*> malloc(D * sizeof(double))
    if cnorm == NULL or abuf == NULL:
        free(cnorm)
        free(abuf)
        raise MemoryError()
    try:
        with nogil:
            for k in range(k_start, k_stop):
                for d in range(D):
                    s = 0.0
                    for t in range(T):
                        s += C[k, d, t] * C[k, d, t]
                    cnorm[d] = sqrt(s)
                for n in range(N):
                    q = 0
                    _search(C[k], X[n], cnorm, q_max, abuf, &v, &q, &alphas[k, n, 0])
                    values[k, n] = v
                    shifts[k, n] = q
    finally:
        free(cnorm)
        free(abuf)


cdef double _dip(const double* x, Py_ssize_t n, Py_ssize_t* mn, Py_ssize_t* mj,
                 Py_ssize_t* gcm, Py_ssize_t* lcm) noexcept nogil:
    cdef Py_ssize_t low, high, i, j, k, jb, je, jj, ig, ih, ix, iv, l_gcm, l_lcm
    cdef Py_ssize_t mnj, mnmnj, mjk, mjmjk, gcmix, lcmiv, gcmil, lcmivl
    # running dip is kept in units of 2n; one jump of the ECDF is the floor
    cdef double dip = 1.0, d, dx, dip_l, dip_u, max_t, tt, C
    if n < 2 or x[n - 1] == x[0]:
        return dip / (2.0 * n)
    low = 0
    high = n - 1

    # convex minorant predecessors
    mn[0] = 0
    for j in range(1, n):
        mn[j] = j - 1
        while True:
            mnj = mn[j]
            mnmnj = mn[mnj]
            if mnj == 0 or (x[j] - x[mnj]) * (mnj - mnmnj) < (x[mnj] - x[mnmnj]) * (j - mnj):
                break
            mn[j] = mnmnj
    # concave majorant successors
    mj[n - 1] = n - 1
    for k in range(n - 2, -1, -1):
        mj[k] = k + 1
        while True:
            mjk = mj[k]
            mjmjk = mj[mjk]
            if mjk == n - 1 or (x[k] - x[mjk]) * (mjk - mjmjk) < (x[mjk] - x[mjmjk]) * (k - mjk):
                break
            mj[k] = mjmjk

    while True:
        gcm[0] = high
        i = 0
        while gcm[i] > low:
            gcm[i + 1] = mn[gcm[i]]
            i += 1
        ig = i
        l_gcm = i
        ix = ig - 1

        lcm[0] = low
        i = 0
        while lcm[i] < high:
            lcm[i + 1] = mj[lcm[i]]
            i += 1
        ih = i
        l_lcm = i
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
            jb = gcm[j + 1]
            je = gcm[j]
            if je - jb > 1 and x[je] != x[jb]:
                C = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    tt = (jj - jb + 1) - (x[jj] - x[jb]) * C
                    if max_t < tt:
                        max_t = tt
            if dip_l < max_t:
                dip_l = max_t

        dip_u = 0.0
        for j in range(ih, l_lcm):
            max_t = 1.0
            jb = lcm[j]
            je = lcm[j + 1]
            if je - jb > 1 and x[je] != x[jb]:
                C = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    tt = (x[jj] - x[jb]) * C - (jj - jb - 1)
                    if max_t < tt:
                        max_t = tt
            if dip_u < max_t:
                dip_u = max_t

        if dip_u > dip_l:
            if dip < dip_u:
                dip = dip_u
        elif dip < dip_l:
            dip = dip_l

        if low == gcm[ig] and high == lcm[ih]:
            break
        low = gcm[ig]
        high = lcm[ih]

    return dip / (2.0 * n)


def dip_sorted(const double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    if n == 0:
        return 0.0
    cdef Py_ssize_t[::1] work = np.empty(4 * n + 4, dtype=np.intp)
    cdef double out
    with nogil:
        out = _dip(&x[0], n, &work[0], &work[n + 1], &work[2 * n + 2], &work[3 * n + 3])
    return out


def dip_sorted_rows(const double[:, ::1] xs):
    """Dip of every row of a matrix whose rows are each sorted ascending."""
    cdef Py_ssize_t b = xs.shape[0], n = xs.shape[1], r
    out = np.empty(b)
    cdef double[::1] o = out
    if n == 0:
        out[:] = 0.0
        return out
    cdef Py_ssize_t[::1] work = np.empty(4 * n + 4, dtype=np.intp)
    with nogil:
        for r in range(b):
            o[r] = _dip(&xs[r, 0], n, &work[0], &work[n + 1], &work[2 * n + 2], &work[3 * n + 3])
    return out
