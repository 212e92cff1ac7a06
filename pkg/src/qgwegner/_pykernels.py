"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same algorithms and pivot rules, with numpy slices for the inner updates.
Used when the extension is not built, or when forced via
``QGWEGNER_BACKEND=python``.
"""
import math

import numpy as np

BUNCH_ALPHA = (math.sqrt(5.0) - 1.0) / 2.0
BK_ALPHA = (1.0 + math.sqrt(17.0)) / 8.0
EPS = np.finfo(float).eps


def band_inertia(W):
    n, b = W.shape
    bw = b - 1
    sigma = float(np.max(np.abs(W))) if W.size else 0.0
    if sigma == 0.0:
        return -1 if n > 0 else 0
    tiny = 4.0 * EPS * sigma
    neg = 0
    k = 0
    while k < n:
        a = W[k, 0]
        if not math.isfinite(a):
            return -1
        lim = min(bw, n - 1 - k)
        om = float(np.max(np.abs(W[k, 1:lim + 1]))) if lim > 0 else 0.0
        two = False
        if k + 1 < n and abs(a) * sigma < BUNCH_ALPHA * om * om:
            b_, c = W[k, 1], W[k + 1, 0]
            det = a * c - b_ * b_
            if abs(det) > tiny * sigma or abs(a) <= tiny:
                two = True
        if not two:
            if abs(a) <= tiny:
                return -1
            if a < 0.0:
                neg += 1
            col = W[k, 1:lim + 1].copy()
            for i in range(1, lim + 1):
                if col[i - 1] != 0.0:
                    W[k + i, 0:lim - i + 1] -= (col[i - 1] / a) * col[i - 1:lim]
            k += 1
        else:
            if abs(det) <= tiny * sigma or not math.isfinite(det):
                return -1
            if det < 0.0:
                neg += 1
            elif a + c < 0.0:
                neg += 2
            lim = min(bw, n - 2 - k)
            # x[j], y[j]: entries of rows k+2+j in columns k and k+1
            x = np.zeros(lim)
            top = min(lim, bw - 1)
            x[:top] = W[k, 2:2 + top]
            y = W[k + 1, 1:1 + lim].copy()
            z = (c * x - b_ * y) / det
            w = (a * y - b_ * x) / det
            for j in range(lim):
                if z[j] == 0.0 and w[j] == 0.0:
                    continue
                s = k + 2 + j
                W[s, 0:lim - j] -= x[j:] * z[j] + y[j:] * w[j]
            k += 2
    return neg


def band_count_many(kband, m, ts):
    out = np.empty(len(ts), dtype=np.int64)
    for q, t in enumerate(ts):
        W = kband.copy()
        W[:, 0] -= t * m
        out[q] = band_inertia(W)
    return out


def dense_inertia(A):
    n = A.shape[0]
    if n == 0:
        return 0
    sigma = float(np.max(np.abs(np.tril(A))))
    if sigma == 0.0:
        return -1
    tiny = 4.0 * EPS * sigma
    neg = 0
    k = 0
    while k < n:
        absakk = abs(A[k, k])
        if not math.isfinite(absakk):
            return -1
        if k + 1 < n:
            col = np.abs(A[k + 1:, k])
            imax = k + 1 + int(np.argmax(col))
            colmax = float(col[imax - k - 1])
        else:
            imax, colmax = k, 0.0
        if absakk <= tiny and colmax <= tiny:
            return -1
        kstep, kp = 1, k
        if absakk < BK_ALPHA * colmax:
            rowmax = max(np.max(np.abs(A[imax, k:imax]), initial=0.0),
                         np.max(np.abs(A[imax + 1:, imax]), initial=0.0))
            if absakk * rowmax >= BK_ALPHA * colmax * colmax:
                kp = k
            elif abs(A[imax, imax]) >= BK_ALPHA * rowmax:
                kp = imax
            else:
                kp, kstep = imax, 2
        kk = k + kstep - 1
        if kp != kk:
            A[kp + 1:, [kk, kp]] = A[kp + 1:, [kp, kk]]
            tmp = A[kk + 1:kp, kk].copy()
            A[kk + 1:kp, kk] = A[kp, kk + 1:kp]
            A[kp, kk + 1:kp] = tmp
            A[kk, kk], A[kp, kp] = A[kp, kp], A[kk, kk]
            if kstep == 2:
                A[k + 1, k], A[kp, k] = A[kp, k], A[k + 1, k]
        if kstep == 1:
            d = A[k, k]
            if abs(d) <= tiny:
                return -1
            if d < 0.0:
                neg += 1
            v = A[k + 1:, k].copy()
            A[k + 1:, k + 1:] -= np.tril(np.outer(v, v / d))
        else:
            a, b, c = A[k, k], A[k + 1, k], A[k + 1, k + 1]
            det = a * c - b * b
            if abs(det) <= tiny * sigma or not math.isfinite(det):
                return -1
            if det < 0.0:
                neg += 1
            elif a + c < 0.0:
                neg += 2
            x = A[k + 2:, k].copy()
            y = A[k + 2:, k + 1].copy()
            z = (c * x - b * y) / det
            w = (a * y - b * x) / det
            A[k + 2:, k + 2:] -= np.tril(np.outer(x, z) + np.outer(y, w))
        k += kstep
    return neg


def tql_eigenvalues(d, e):
    n = len(d)
    if n:
        e[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
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
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0
