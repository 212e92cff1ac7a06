# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inertia and tridiagonal-QL kernels.

Every routine here mirrors one in ``_pykernels`` step for step; the two are
checked against each other in the test suite. A return value of -1 from an
inertia routine means a (numerically) zero pivot: the caller nudges the
shift and retries.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, hypot, copysign, isfinite

cnp.import_array()

cdef double BUNCH_ALPHA = 0.6180339887498949   # (sqrt(5) - 1) / 2
cdef double BK_ALPHA = 0.6403882032022076      # (1 + sqrt(17)) / 8
cdef double EPS = 2.220446049250313e-16


cdef double _band_absmax(double[:, ::1] W) nogil:
    cdef Py_ssize_t n = W.shape[0], b = W.shape[1], i, d
    cdef double s = 0.0
    for i in range(n):
        for d in range(b):
            if fabs(W[i, d]) > s:
                s = fabs(W[i, d])
    return s


cdef long _band_inertia(double[:, ::1] W) nogil:
    """Negative inertia of a symmetric band matrix, destroying ``W``.

    ``W[i, d]`` holds ``A[i + d, i]``. Pivots are 1x1 or 2x2 blocks on
    consecutive rows, so no interchanges are needed and fill stays inside
    the band.
    """
    cdef Py_ssize_t n = W.shape[0], bw = W.shape[1] - 1
    cdef Py_ssize_t k = 0, i, j, r, s, last, lim
    cdef double sigma = _band_absmax(W)
    cdef double tiny = 4.0 * EPS * sigma
    cdef double a, b, c, det, om, f, xr, yr, zs, ws
    cdef long neg = 0
    cdef bint two
    if sigma == 0.0:
        return -1 if n > 0 else 0
    while k < n:
        a = W[k, 0]
        if not isfinite(a):
            return -1
        last = n - 1 - k
        lim = bw if bw < last else last
        om = 0.0
        for i in range(1, lim + 1):
            if fabs(W[k, i]) > om:
                om = fabs(W[k, i])
        two = False
        if k + 1 < n and fabs(a) * sigma < BUNCH_ALPHA * om * om:
            b = W[k, 1]
            c = W[k + 1, 0]
            det = a * c - b * b
            if fabs(det) > tiny * sigma or fabs(a) <= tiny:
                two = True
        if not two:
            if fabs(a) <= tiny:
                return -1
            if a < 0.0:
                neg += 1
            for i in range(1, lim + 1):
                if W[k, i] != 0.0:
                    f = W[k, i] / a
                    for j in range(i, lim + 1):
                        W[k + i, j - i] -= f * W[k, j]
            k += 1
        else:
            if fabs(det) <= tiny * sigma or not isfinite(det):
                return -1
            if det < 0.0:
                neg += 1
            elif a + c < 0.0:
                neg += 2
            last = n - 1 - (k + 1)
            lim = bw if bw < last else last   # rows k+2 .. k+1+lim
            for s in range(k + 2, k + 2 + lim):
                xr = W[k, s - k] if s - k <= bw else 0.0
                yr = W[k + 1, s - k - 1]
                zs = (c * xr - b * yr) / det
                ws = (a * yr - b * xr) / det
                if zs == 0.0 and ws == 0.0:
                    continue
                for r in range(s, k + 2 + lim):
                    xr = W[k, r - k] if r - k <= bw else 0.0
                    yr = W[k + 1, r - k - 1]
                    W[s, r - s] -= xr * zs + yr * ws
            k += 2
    return neg


def band_inertia(double[:, ::1] W):
    cdef long r
    with nogil:
        r = _band_inertia(W)
    return r


def band_count_many(double[:, ::1] kband, double[::1] m, double[::1] ts):
    """Negative inertia of ``K - t M`` for every ``t`` in ``ts`` (-1 marks breakdown)."""
    cdef Py_ssize_t n = kband.shape[0], b = kband.shape[1], q, i, d
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(ts.shape[0], dtype=np.int64)
    cdef double[:, ::1] W = np.empty((n, b))
    cdef double t
    with nogil:
        for q in range(ts.shape[0]):
            t = ts[q]
            for i in range(n):
                W[i, 0] = kband[i, 0] - t * m[i]
                for d in range(1, b):
                    W[i, d] = kband[i, d]
            out[q] = _band_inertia(W)
    return out


cdef long _dense_inertia(double[:, ::1] A) nogil:
    """Bunch-Kaufman negative inertia on the lower triangle of ``A`` (destroyed)."""
    cdef Py_ssize_t n = A.shape[0], k = 0, i, j, imax, kp, kk, kstep
    cdef double sigma = 0.0, tiny, absakk, colmax, rowmax, tmp
    cdef double d, a, b, c, det, zj, wj
    cdef long neg = 0
    for j in range(n):
        for i in range(j, n):
            if fabs(A[i, j]) > sigma:
                sigma = fabs(A[i, j])
    if sigma == 0.0:
        return -1 if n > 0 else 0
    tiny = 4.0 * EPS * sigma
    while k < n:
        absakk = fabs(A[k, k])
        if not isfinite(absakk):
            return -1
        imax = k
        colmax = 0.0
        for i in range(k + 1, n):
            if fabs(A[i, k]) > colmax:
                colmax = fabs(A[i, k])
                imax = i
        if absakk <= tiny and colmax <= tiny:
            return -1
        kstep = 1
        kp = k
        if absakk < BK_ALPHA * colmax:
            rowmax = 0.0
            for j in range(k, imax):
                if fabs(A[imax, j]) > rowmax:
                    rowmax = fabs(A[imax, j])
            for j in range(imax + 1, n):
                if fabs(A[j, imax]) > rowmax:
                    rowmax = fabs(A[j, imax])
            if absakk * rowmax >= BK_ALPHA * colmax * colmax:
                kp = k
            elif fabs(A[imax, imax]) >= BK_ALPHA * rowmax:
                kp = imax
            else:
                kp = imax
                kstep = 2
        kk = k + kstep - 1
        if kp != kk:
            for i in range(kp + 1, n):
                tmp = A[i, kk]; A[i, kk] = A[i, kp]; A[i, kp] = tmp
            for j in range(kk + 1, kp):
                tmp = A[j, kk]; A[j, kk] = A[kp, j]; A[kp, j] = tmp
            tmp = A[kk, kk]; A[kk, kk] = A[kp, kp]; A[kp, kp] = tmp
            if kstep == 2:
                tmp = A[k + 1, k]; A[k + 1, k] = A[kp, k]; A[kp, k] = tmp
        if kstep == 1:
            d = A[k, k]
            if fabs(d) <= tiny:
                return -1
            if d < 0.0:
                neg += 1
            for j in range(k + 1, n):
                if A[j, k] != 0.0:
                    tmp = A[j, k] / d
                    for i in range(j, n):
                        A[i, j] -= tmp * A[i, k]
        else:
            a = A[k, k]
            b = A[k + 1, k]
            c = A[k + 1, k + 1]
            det = a * c - b * b
            if fabs(det) <= tiny * sigma or not isfinite(det):
                return -1
            if det < 0.0:
                neg += 1
            elif a + c < 0.0:
                neg += 2
            for j in range(k + 2, n):
                zj = (c * A[j, k] - b * A[j, k + 1]) / det
                wj = (a * A[j, k + 1] - b * A[j, k]) / det
                if zj == 0.0 and wj == 0.0:
                    continue
                for i in range(j, n):
                    A[i, j] -= A[i, k] * zj + A[i, k + 1] * wj
        k += kstep
    return neg


def dense_inertia(double[:, ::1] A):
    cdef long r
    with nogil:
        r = _dense_inertia(A)
    return r


cdef int _tql(double[::1] d, double[::1] e) nogil:
    cdef Py_ssize_t n = d.shape[0], l, m, i
    cdef int it
    cdef double g, r, s, c, p, f, b, dd
    cdef bint underflow
    if n > 0:
        e[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def tql_eigenvalues(double[::1] d, double[::1] e):
    """Implicit QL on a symmetric tridiagonal matrix, in place.

    ``d`` is the diagonal, ``e[i]`` couples rows i and i+1 (``e[n-1]`` is
    scratch). Returns 0, or -1 if some eigenvalue failed to converge.
    """
    cdef int r
    with nogil:
        r = _tql(d, e)
    return r
