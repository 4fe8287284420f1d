"""Exact rectangular linear assignment.

Shortest augmenting path with dual potentials (the Hungarian method in its
Jonker-Volgenant form), O(n^2 m) for an ``n x m`` cost matrix, ``n <= m``.
The inner column scans are vectorised with numpy.
"""
from __future__ import annotations

import numpy as np


def solve(cost) -> np.ndarray:
    """Assign every row of ``cost`` to a distinct column at minimum total cost.

    Returns ``cols`` with ``cols[i]`` the column assigned to row ``i``.
    Requires ``rows <= columns``.  Among equal-cost optima the result is
    fixed by row/column order (first minimum wins), so equal inputs give
    equal outputs.
    """
    a = np.asarray(cost, dtype=float)
    n, m = a.shape
    if n > m:
        raise ValueError("solve() needs at least as many columns as rows; transpose first")
    if n == 0:
        return np.empty(0, dtype=np.intp)
    if not np.isfinite(a).all():
        raise ValueError("cost matrix must be finite")

    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=np.intp)  # owner[j]: row (1-based) holding column j; 0 = free
    way = np.zeros(m + 1, dtype=np.intp)
    # 1-based padded copy so column 0 is the virtual source
    c = np.zeros((n + 1, m + 1))
    c[1:, 1:] = a

    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used
            free[0] = False
            cur = c[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            cand = np.where(free, minv, np.inf)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            held = np.flatnonzero(used)
            u[owner[held]] += delta
            v[held] -= delta
            minv[free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1

    cols = np.empty(n, dtype=np.intp)
    for j in range(1, m + 1):
        if owner[j]:
            cols[owner[j] - 1] = j - 1
    return cols
