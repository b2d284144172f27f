"""Pure-Python implementations of the hot matching kernels.

These mirror ``_kernels.pyx`` operation for operation so that both
backends produce bit-identical floating point results. Selected at
import time by ``_backend`` when the compiled extension is unavailable
or ``LOGOGROUND_PURE=1`` is set.
"""

import numpy as np

BACKEND_NAME = "pure"


def iou_matrix(preds, gts):
    """Pairwise IoU between two box arrays of shape (n, 4) and (m, 4).

    Boxes are [x1, y1, x2, y2] with x1 < x2 and y1 < y2 (validated by
    the caller). Returns an (n, m) float64 array.
    """
    preds = np.ascontiguousarray(preds, dtype=np.float64)
    gts = np.ascontiguousarray(gts, dtype=np.float64)
    n, m = preds.shape[0], gts.shape[0]
    if n == 0 or m == 0:
        return np.zeros((n, m), dtype=np.float64)

    px1, py1, px2, py2 = (preds[:, k][:, None] for k in range(4))
    gx1, gy1, gx2, gy2 = (gts[:, k][None, :] for k in range(4))

    iw = np.minimum(px2, gx2) - np.maximum(px1, gx1)
    ih = np.minimum(py2, gy2) - np.maximum(py1, gy1)
    inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)

    area_p = (px2 - px1) * (py2 - py1)
    area_g = (gx2 - gx1) * (gy2 - gy1)
    union = (area_p + area_g) - inter
    return inter / union


def solve_assignment(cost):
    """Minimum-cost perfect assignment on a square cost matrix.

    Shortest-augmenting-path algorithm with potentials, O(n^3).

    Returns ``(col_of_row, u, v)`` where ``col_of_row[i]`` is the column
    assigned to row ``i`` and ``u``/``v`` are the optimal row/column
    potentials (used by the caller to recover the tight-edge subgraph).
    """
    a = np.ascontiguousarray(cost, dtype=np.float64)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError("cost matrix must be square")
    if n == 0:
        return (np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0))

    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    # p[j] = row matched to column j; index n is the virtual start column
    # and value n means "no row".
    p = [n] * (n + 1)
    way = [0] * (n + 1)
    rows = a.tolist()

    for i in range(n):
        p[n] = i
        j0 = n
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = rows[i0]
            ui0 = u[i0]
            delta = inf
            j1 = -1
            for j in range(n):
                if not used[j]:
                    cur = row[j] - ui0 - v[j]
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
    for j in range(n):
        col_of_row[p[j]] = j
    return col_of_row, np.asarray(u[:n]), np.asarray(v[:n])
