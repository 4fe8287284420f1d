"""Uniform-grid point index for exact nearest-neighbour and region queries.

Answers are identical to a linear scan: the grid only prunes which points
get handed to the very same membership / distance expressions used by
:mod:`geokanon.geometry`.
"""
from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .geometry import Region, as_xy, distances, eps


class PointIndex:
    """Static grid of square buckets over a set of identified points.

    Points are stored sorted by ``(row, column, insertion order)`` so each
    grid row is a contiguous slice and a rectangular block of cells is a
    handful of slices.

    Parameters
    ----------
    xy
        ``(n, 2)`` coordinates; duplicates are kept.
    ids
        Optional identifiers, one per point (defaults to positions).
    cell
        Bucket side in meters.  Defaults to ``diagonal / sqrt(n)`` of the
        points' bounding box.
    """

    def __init__(self, xy, ids: Optional[Sequence] = None, cell: Optional[float] = None):
        xy = as_xy(xy)
        n = len(xy)
        self.ids = list(range(n)) if ids is None else list(ids)
        if len(self.ids) != n:
            raise ValueError("ids and coordinates differ in length")
        self.n = n
        if n == 0:
            self.cell = 1.0
            self.x0 = self.y0 = 0.0
            self.ncols = self.nrows = 0
            self._order = np.empty(0, dtype=np.intp)
            self._xy = xy
            self._keys = np.empty(0, dtype=np.int64)
            return
        lo, hi = xy.min(axis=0), xy.max(axis=0)
        if cell is None:
            diag = float(np.hypot(*(hi - lo)))
            cell = diag / math.sqrt(n) if diag > 0 else 1.0
        self.cell = float(cell)
        self.x0, self.y0 = float(lo[0]), float(lo[1])
        col = np.floor((xy[:, 0] - self.x0) / self.cell).astype(np.int64)
        row = np.floor((xy[:, 1] - self.y0) / self.cell).astype(np.int64)
        self.ncols = int(col.max()) + 1
        self.nrows = int(row.max()) + 1
        keys = row * self.ncols + col
        self._order = np.argsort(keys, kind="stable")
        self._keys = keys[self._order]
        self._xy = xy[self._order]

    @classmethod
    def from_records(cls, records, cell: Optional[float] = None) -> "PointIndex":
        records = list(records)
        return cls([r.location for r in records], [r.id for r in records], cell=cell)

    def __len__(self):
        return self.n

    # -- candidate gathering ------------------------------------------------

    def _col_range(self, xmin, xmax):
        c0 = max(0, math.floor((xmin - self.x0) / self.cell) - 1)
        c1 = min(self.ncols - 1, math.floor((xmax - self.x0) / self.cell) + 1)
        return c0, c1

    def _row_range(self, ymin, ymax):
        r0 = max(0, math.floor((ymin - self.y0) / self.cell) - 1)
        r1 = min(self.nrows - 1, math.floor((ymax - self.y0) / self.cell) + 1)
        return r0, r1

    def _slots_in_box(self, xmin, ymin, xmax, ymax) -> np.ndarray:
        """Sorted-array positions of points in the cells covering the box.

        One extra cell of margin on every side absorbs rounding in the
        bucket assignment, so no point inside the box is ever missed.
        """
        if self.n == 0:
            return np.empty(0, dtype=np.intp)
        c0, c1 = self._col_range(xmin, xmax)
        r0, r1 = self._row_range(ymin, ymax)
        if c0 > c1 or r0 > r1:
            return np.empty(0, dtype=np.intp)
        rows = np.arange(r0, r1 + 1, dtype=np.int64) * self.ncols
        starts = np.searchsorted(self._keys, rows + c0, side="left")
        stops = np.searchsorted(self._keys, rows + c1, side="right")
        lens = stops - starts
        total = int(lens.sum())
        if total == 0:
            return np.empty(0, dtype=np.intp)
        # concatenated ranges [start, stop) without a Python-level loop
        offsets = np.repeat(starts - np.cumsum(lens) + lens, lens)
        return (np.arange(total) + offsets).astype(np.intp)

    # -- queries ------------------------------------------------------------

    def query_region(self, region: Region) -> np.ndarray:
        """Original input positions of the points inside ``region``, ascending."""
        box = region.bbox()
        if box is None:
            return np.empty(0, dtype=np.intp)
        slots = self._slots_in_box(box.xmin, box.ymin, box.xmax, box.ymax)
        if len(slots) == 0:
            return slots
        hit = slots[region.mask(self._xy[slots])]
        return np.sort(self._order[hit])

    def count_in_region(self, region: Region, with_ids: bool = False):
        """Count points in ``region``; optionally also return their ids."""
        pos = self.query_region(region)
        if with_ids:
            return len(pos), [self.ids[i] for i in pos]
        return len(pos)

    def nn(self, q) -> Tuple[float, List[int]]:
        """Minimal distance from ``q`` and the input positions attaining it.

        Points within the boundary tolerance of the minimum are part of the tie set.
        """
        if self.n == 0:
            raise DomainError("nearest-neighbour query on an empty index")
        qx, qy = float(q[0]), float(q[1])
        # grow a square window until it holds a point, then one exact disk query
        half = self.cell
        span = max(self.ncols, self.nrows) * self.cell + self.cell
        while True:
            slots = self._slots_in_box(qx - half, qy - half, qx + half, qy + half)
            if len(slots) or half > span + abs(qx - self.x0) + abs(qy - self.y0):
                break
            half *= 2
        if len(slots) == 0:
            slots = np.arange(self.n)
        dmin = float(distances(self._xy[slots], (qx, qy)).min())
        reach = dmin + eps()
        slots = self._slots_in_box(qx - reach, qy - reach, qx + reach, qy + reach)
        d = distances(self._xy[slots], (qx, qy))
        best = float(d.min())
        ties = np.sort(self._order[slots[d <= best + eps()]])
        return best, [int(i) for i in ties]

    def nn_ids(self, q):
        d, pos = self.nn(q)
        return d, [self.ids[i] for i in pos]


def brute_nn(xy, q) -> Tuple[float, List[int]]:
    """Linear-scan reference for :meth:`PointIndex.nn`."""
    xy = as_xy(xy)
    if len(xy) == 0:
        raise DomainError("nearest-neighbour query on an empty point set")
    d = distances(xy, q)
    best = float(d.min())
    return best, [int(i) for i in np.flatnonzero(d <= best + eps())]
