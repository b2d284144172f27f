# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the pure-Python matching kernels.

Operation-for-operation transliteration of ``_kernels_py`` so both
backends produce bit-identical floating point results.
"""

import numpy as np

BACKEND_NAME = "compiled"


def iou_matrix(preds, gts):
    """Pairwise IoU between two box arrays of shape (n, 4) and (m, 4)."""
    p_arr = np.ascontiguousarray(preds, dtype=np.float64)
    g_arr = np.ascontiguousarray(gts, dtype=np.float64)
    cdef Py_ssize_t n = p_arr.shape[0]
    cdef Py_ssize_t m = g_arr.shape[0]
    out = np.zeros((n, m), dtype=np.float64)
    if n == 0 or m == 0:
        return out

    cdef double[:, ::1] P = p_arr
    cdef double[:, ::1] G = g_arr
    cdef double[:, ::1] O = out
    cdef Py_ssize_t i, j
    cdef double iw, ih, inter, area_p, area_g, union_

    for i in range(n):
        area_p = (P[i, 2] - P[i, 0]) * (P[i, 3] - P[i, 1])
        for j in range(m):
            iw = (P[i, 2] if P[i, 2] < G[j, 2] else G[j, 2]) - \
                 (P[i, 0] if P[i, 0] > G[j, 0] else G[j, 0])
            ih = (P[i, 3] if P[i, 3] < G[j, 3] else G[j, 3]) - \
                 (P[i, 1] if P[i, 1] > G[j, 1] else G[j, 1])
            inter = (iw if iw > 0.0 else 0.0) * (ih if ih > 0.0 else 0.0)
            area_g = (G[j, 2] - G[j, 0]) * (G[j, 3] - G[j, 1])
            union_ = (area_p + area_g) - inter
            O[i, j] = inter / union_
    return out


def solve_assignment(cost):
    """Minimum-cost perfect assignment on a square cost matrix.

    Same shortest-augmenting-path algorithm as the pure backend; returns
    ``(col_of_row, u, v)`` with the optimal potentials.
    """
    a_arr = np.ascontiguousarray(cost, dtype=np.float64)
    if a_arr.shape[0] != a_arr.shape[1]:
        raise ValueError("cost matrix must be square")
    cdef Py_ssize_t n = a_arr.shape[0]
    if n == 0:
        return (np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0))

    u_arr = np.zeros(n + 1, dtype=np.float64)
    v_arr = np.zeros(n + 1, dtype=np.float64)
    p_arr = np.full(n + 1, n, dtype=np.int64)
    way_arr = np.zeros(n + 1, dtype=np.int64)
    minv_arr = np.empty(n + 1, dtype=np.float64)
    used_arr = np.empty(n + 1, dtype=np.uint8)

    cdef double[:, ::1] a = a_arr
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef long long[::1] p = p_arr
    cdef long long[::1] way = way_arr
    cdef double[::1] minv = minv_arr
    cdef unsigned char[::1] used = used_arr

    cdef double inf = float("inf")
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur, ui0

    for i in range(n):
        p[n] = i
        j0 = n
        for j in range(n + 1):
            minv[j] = inf
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            ui0 = u[i0]
            delta = inf
            j1 = -1
            for j in range(n):
                if not used[j]:
                    cur = a[i0, j] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == n:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == n:
                break

    col_of_row = np.empty(n, dtype=np.int64)
    cdef long long[::1] cr = col_of_row
    for j in range(n):
        cr[p[j]] = j
    return col_of_row, u_arr[:n].copy(), v_arr[:n].copy()
