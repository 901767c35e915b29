# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bounded-variable simplex kernel.

Mirrors _simplex_py.run_phase operation-for-operation; see the contract and
status codes documented there.  Every floating-point update is the same
mul-then-sub / divide sequence (built with -ffp-contract=off, so no FMA), and
reductions run in the same sequential row order, which keeps the two kernels
bitwise interchangeable.  The iteration loop runs without the GIL so
branch-and-bound workers can overlap solves.
"""

from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "math.h":
    double INFINITY
    bint isfinite(double x) nogil

OPTIMAL = 0
REACHED_STOP = 1
UNBOUNDED = 2
TINY_PIVOT = 3
ITER_LIMIT = 4

cdef int _OPTIMAL = 0
cdef int _REACHED_STOP = 1
cdef int _UNBOUNDED = 2
cdef int _TINY_PIVOT = 3
cdef int _ITER_LIMIT = 4


cdef inline double _infeasibility(
    double* xB, cnp.int64_t* basis, int m, int n_art_start
) nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(m):
        if basis[i] >= n_art_start:
            s += xB[i]
    return s


cdef int _run(
    double* T, double* z, double* xB, cnp.int64_t* basis, cnp.int64_t* vstat,
    double* lo, double* hi, signed char* banned,
    int m, int n, int n_art_start, int phase1, double stop_sum,
    long long dantzig_limit, long long max_iter, double opt_tol, double tiny,
    long long* iters_out,
) nogil:
    cdef long long iters = 0
    cdef int bland, banned_any, skipped, q, r, i, j, leaving, leave_to
    cdef double zj, s, best, d, a, t, t_limit, span, blo, bhi
    cdef double tstep, vq, piv, zq, fac, tmin

    while True:
        if phase1 and _infeasibility(xB, basis, m, n_art_start) <= stop_sum:
            iters_out[0] = iters
            return _REACHED_STOP
        if iters >= max_iter:
            iters_out[0] = iters
            return _ITER_LIMIT

        bland = iters >= dantzig_limit
        for j in range(n):
            banned[j] = 0
        banned_any = 0

        while True:
            # ---- pricing ----
            q = -1
            d = 0.0
            if bland:
                for j in range(n):
                    if vstat[j] == 0 or banned[j] or lo[j] == hi[j]:
                        continue
                    zj = z[j]
                    if (vstat[j] == 1 or vstat[j] == 3) and zj < -opt_tol:
                        q = j
                        d = 1.0
                        break
                    if (vstat[j] == 2 or vstat[j] == 3) and zj > opt_tol:
                        q = j
                        d = -1.0
                        break
            else:
                best = opt_tol
                for j in range(n):
                    if vstat[j] == 0 or banned[j] or lo[j] == hi[j]:
                        continue
                    zj = z[j]
                    if (vstat[j] == 1 or vstat[j] == 3) and zj < -opt_tol:
                        s = -zj
                    elif (vstat[j] == 2 or vstat[j] == 3) and zj > opt_tol:
                        s = zj
                    else:
                        continue
                    if s > best:
                        best = s
                        q = j
                if q >= 0:
                    d = 1.0 if (vstat[q] == 1 or (vstat[q] == 3 and z[q] < 0.0)) else -1.0
            if q < 0:
                iters_out[0] = iters
                return _TINY_PIVOT if banned_any else _OPTIMAL

            # ---- ratio test ----
            span = hi[q] - lo[q]
            t_limit = span
            r = -1
            for i in range(m):
                a = d * T[i * n + q]
                if a > tiny:
                    blo = lo[basis[i]]
                    if blo > -INFINITY:
                        t = (xB[i] - blo) / a
                        if t < 0.0:
                            t = 0.0
                        if t < t_limit:
                            t_limit = t
                            r = i
                        elif bland and r >= 0 and t == t_limit and basis[i] < basis[r]:
                            r = i
                elif a < -tiny:
                    bhi = hi[basis[i]]
                    if bhi < INFINITY:
                        t = (xB[i] - bhi) / a
                        if t < 0.0:
                            t = 0.0
                        if t < t_limit:
                            t_limit = t
                            r = i
                        elif bland and r >= 0 and t == t_limit and basis[i] < basis[r]:
                            r = i

            if t_limit == INFINITY:
                skipped = 0
                for i in range(m):
                    a = d * T[i * n + q]
                    if a > 0.0 and a <= tiny and lo[basis[i]] > -INFINITY:
                        skipped = 1
                        break
                    if a < 0.0 and a >= -tiny and hi[basis[i]] < INFINITY:
                        skipped = 1
                        break
                if skipped:
                    banned[q] = 1
                    banned_any = 1
                    continue
                iters_out[0] = iters
                return _UNBOUNDED
            break

        t = t_limit
        if r < 0:
            # ---- bound flip ----
            tstep = d * t
            for i in range(m):
                xB[i] -= tstep * T[i * n + q]
            vstat[q] = 2 if d > 0.0 else 1
        else:
            # ---- pivot ----
            leaving = <int> basis[r]
            leave_to = 1 if d * T[r * n + q] > 0.0 else 2
            if vstat[q] == 1:
                vq = lo[q]
            elif vstat[q] == 2:
                vq = hi[q]
            else:
                vq = 0.0
            tstep = d * t
            for i in range(m):
                xB[i] -= tstep * T[i * n + q]
            xB[r] = vq + d * t
            piv = T[r * n + q]
            for j in range(n):
                T[r * n + j] /= piv
            zq = z[q]
            for j in range(n):
                z[j] -= zq * T[r * n + j]
            # all rows including r with fac forced to 0 there, matching the
            # numpy kernel's masked outer-product update byte for byte
            for i in range(m):
                fac = 0.0 if i == r else T[i * n + q]
                for j in range(n):
                    T[i * n + j] -= fac * T[r * n + j]
            basis[r] = q
            vstat[q] = 0
            vstat[leaving] = leave_to
            if leaving >= n_art_start:
                lo[leaving] = 0.0
                hi[leaving] = 0.0
        iters += 1


def run_phase(
    cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] T,
    cnp.ndarray[cnp.float64_t, ndim=1] z,
    cnp.ndarray[cnp.float64_t, ndim=1] xB,
    cnp.ndarray[cnp.int64_t, ndim=1] basis,
    cnp.ndarray[cnp.int64_t, ndim=1] vstat,
    cnp.ndarray[cnp.float64_t, ndim=1] lo,
    cnp.ndarray[cnp.float64_t, ndim=1] hi,
    int n_art_start,
    int phase1,
    double stop_sum,
    long long dantzig_limit,
    long long max_iter,
    double opt_tol,
    double tiny,
):
    """Drop-in replacement for _simplex_py.run_phase."""
    cdef int m = T.shape[0]
    cdef int n = T.shape[1]
    cdef signed char* banned = <signed char*> malloc(n * sizeof(signed char))
    if banned == NULL:
        raise MemoryError()
    cdef long long iters = 0
    cdef int status
    try:
        with nogil:
            status = _run(
                &T[0, 0] if m > 0 and n > 0 else NULL,
                &z[0] if n > 0 else NULL,
                &xB[0] if m > 0 else NULL,
                &basis[0] if m > 0 else NULL,
                &vstat[0] if n > 0 else NULL,
                &lo[0] if n > 0 else NULL,
                &hi[0] if n > 0 else NULL,
                banned,
                m, n, n_art_start, phase1, stop_sum,
                dantzig_limit, max_iter, opt_tol, tiny, &iters,
            )
    finally:
        free(banned)
    return status, int(iters)
