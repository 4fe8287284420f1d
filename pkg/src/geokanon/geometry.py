"""Planar points, the Euclidean distance and membership-testable regions.

All regions are closed: a point lying exactly on the boundary is a member.
Boundary comparisons carry an absolute tolerance (``EPS`` by default,
see :func:`tolerance`) so that radii reconstructed from stored coordinates
never lose their own point to rounding.  The one exception is :class:`GridCell`, the exact preimage of a
grid snap, which is half-open by construction.

Every region offers a scalar test (:func:`region_contains`) and a
vectorised one (``region.mask(xy)``) that evaluate the same floating point
expression, so both paths agree bit for bit.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

EPS = 1e-9
_tol = EPS


def eps() -> float:
    """The boundary tolerance currently in force (default :data:`EPS`)."""
    return _tol


@contextmanager
def tolerance(value: float):
    """Temporarily replace the boundary tolerance, process wide.

    Not thread-local: set it before starting a computation, not during one.
    """
    global _tol
    value = float(value)
    if not (math.isfinite(value) and value >= 0):
        raise ValueError(f"tolerance must be finite and >= 0, got {value}")
    old, _tol = _tol, value
    try:
        yield value
    finally:
        _tol = old


class Point(NamedTuple):
    """Planar coordinate pair in a projected CRS (meters)."""

    x: float
    y: float


def as_point(p) -> Point:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite coordinate: {p!r}")
    return Point(x, y)


def as_xy(points) -> np.ndarray:
    """Coerce a sequence of points to a float ``(n, 2)`` array."""
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.empty((0, 2))
    return arr.reshape(-1, 2)


def distance(p, q) -> float:
    """Euclidean distance between two points.

    Evaluated as ``sqrt(dx*dx + dy*dy)`` so that it matches the vectorised
    :func:`distances` exactly.
    """
    dx = float(p[0]) - float(q[0])
    dy = float(p[1]) - float(q[1])
    return math.sqrt(dx * dx + dy * dy)


def distances(xy: np.ndarray, q) -> np.ndarray:
    """Distances from every row of ``xy`` to ``q``."""
    dx = xy[:, 0] - float(q[0])
    dy = xy[:, 1] - float(q[1])
    return np.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True)
class Box:
    """Axis-aligned bounding box ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def intersect(self, other: "Box") -> Optional["Box"]:
        xmin, ymin = max(self.xmin, other.xmin), max(self.ymin, other.ymin)
        xmax, ymax = min(self.xmax, other.xmax), min(self.ymax, other.ymax)
        if xmin > xmax or ymin > ymax:
            return None
        return Box(xmin, ymin, xmax, ymax)


@dataclass(frozen=True)
class StudyArea:
    """The study area: a rectangle, optionally refined by a polygon ring.

    When ``ring`` is given, membership requires being inside the rectangle
    and covered by the polygon (boundary included).
    """

    xmin: float
    ymin: float
    xmax: float
    ymax: float
    ring: Optional[tuple] = None

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("study area bounds must be finite")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("study area must have positive width and height")
        if self.ring is not None:
            object.__setattr__(self, "ring", tuple(as_point(p) for p in self.ring))
            if len(self.ring) < 3:
                raise ValueError("polygon ring needs at least three vertices")

    @classmethod
    def from_ring(cls, ring: Sequence) -> "StudyArea":
        pts = [as_point(p) for p in ring]
        xs = [p.x for p in pts]
        ys = [p.y for p in pts]
        return cls(min(xs), min(ys), max(xs), max(ys), ring=tuple(pts))

    @classmethod
    def bounding(cls, xy: np.ndarray, pad: float = 0.0) -> "StudyArea":
        """Smallest rectangle holding ``xy``, widened by ``pad`` on each side."""
        xy = as_xy(xy)
        if len(xy) == 0:
            raise ValueError("cannot bound an empty point set")
        lo = xy.min(axis=0) - pad
        hi = xy.max(axis=0) + pad
        # keep non-degenerate for single points / collinear sets
        hi = np.where(hi > lo, hi, lo + 1.0)
        return cls(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @property
    def box(self) -> Box:
        return Box(self.xmin, self.ymin, self.xmax, self.ymax)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> Point:
        return Point((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)

    def contains(self, p) -> bool:
        return bool(self.mask(as_xy([p]))[0])

    def mask(self, xy: np.ndarray) -> np.ndarray:
        x, y = xy[:, 0], xy[:, 1]
        inside = (
            (x >= self.xmin - _tol) & (x <= self.xmax + _tol)
            & (y >= self.ymin - _tol) & (y <= self.ymax + _tol)
        )
        if self.ring is not None and inside.any():
            import shapely

            poly = shapely.Polygon(self.ring)
            idx = np.flatnonzero(inside)
            inside[idx] = shapely.intersects_xy(poly, x[idx], y[idx])
        return inside

    def to_dict(self) -> dict:
        d = {"xmin": self.xmin, "ymin": self.ymin, "xmax": self.xmax, "ymax": self.ymax}
        if self.ring is not None:
            d["ring"] = [[p.x, p.y] for p in self.ring]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StudyArea":
        ring = d.get("ring")
        return cls(d["xmin"], d["ymin"], d["xmax"], d["ymax"],
                   ring=tuple(map(tuple, ring)) if ring else None)


# -- regions ---------------------------------------------------------------

@dataclass(frozen=True)
class ClosedDisk:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius >= 0:
            raise ValueError(f"disk radius must be >= 0, got {self.radius}")

    def mask(self, xy: np.ndarray) -> np.ndarray:
        return distances(xy, self.center) <= self.radius + _tol

    def bbox(self) -> Box:
        (cx, cy), r = self.center, self.radius + _tol
        return Box(cx - r, cy - r, cx + r, cy + r)


@dataclass(frozen=True)
class Annulus:
    center: Point
    r_min: float
    r_max: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not 0 <= self.r_min <= self.r_max:
            raise ValueError(f"annulus needs 0 <= r_min <= r_max, got {self.r_min}, {self.r_max}")

    def mask(self, xy: np.ndarray) -> np.ndarray:
        d = distances(xy, self.center)
        return (d >= self.r_min - _tol) & (d <= self.r_max + _tol)

    def bbox(self) -> Box:
        (cx, cy), r = self.center, self.r_max + _tol
        return Box(cx - r, cy - r, cx + r, cy + r)


@dataclass(frozen=True)
class Cell:
    """Closed axis-aligned rectangle; a zero-size cell is a single point."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin <= self.xmax and self.ymin <= self.ymax):
            raise ValueError("cell bounds are inverted")

    @classmethod
    def point(cls, p) -> "Cell":
        p = as_point(p)
        return cls(p.x, p.y, p.x, p.y)

    def mask(self, xy: np.ndarray) -> np.ndarray:
        x, y = xy[:, 0], xy[:, 1]
        return (
            (x >= self.xmin - _tol) & (x <= self.xmax + _tol)
            & (y >= self.ymin - _tol) & (y <= self.ymax + _tol)
        )

    def bbox(self) -> Box:
        return Box(self.xmin - _tol, self.ymin - _tol, self.xmax + _tol, self.ymax + _tol)


@dataclass(frozen=True)
class GridCell:
    """Half-open grid cell ``[x0, x0+size) x [y0, y0+size)`` of a regular grid.

    Membership is decided by recomputing the cell index with the same
    ``floor`` expression the grid snap uses, so the region is exactly the
    set of points that snap into cell ``(ix, iy)``.
    """

    origin: Point
    size: float
    ix: int
    iy: int

    def __post_init__(self):
        object.__setattr__(self, "origin", as_point(self.origin))

    def mask(self, xy: np.ndarray) -> np.ndarray:
        ix = np.floor((xy[:, 0] - self.origin.x) / self.size)
        iy = np.floor((xy[:, 1] - self.origin.y) / self.size)
        return (ix == self.ix) & (iy == self.iy)

    def bbox(self) -> Box:
        x0 = self.origin.x + self.ix * self.size
        y0 = self.origin.y + self.iy * self.size
        pad = 1e-9 * max(1.0, abs(x0), abs(y0), self.size)
        return Box(x0 - pad, y0 - pad, x0 + self.size + pad, y0 + self.size + pad)


@dataclass(frozen=True)
class IntersectionWithStudyArea:
    inner: "Region"
    area: StudyArea

    def mask(self, xy: np.ndarray) -> np.ndarray:
        m = self.inner.mask(xy)
        if m.any():
            idx = np.flatnonzero(m)
            m[idx] = self.area.mask(xy[idx])
        return m

    def bbox(self) -> Optional[Box]:
        pad = Box(self.area.xmin - _tol, self.area.ymin - _tol,
                  self.area.xmax + _tol, self.area.ymax + _tol)
        return self.inner.bbox().intersect(pad)


Region = Union[ClosedDisk, Annulus, Cell, GridCell, IntersectionWithStudyArea]


def clip(region: Region, area: Optional[StudyArea]) -> Region:
    return region if area is None else IntersectionWithStudyArea(region, area)


def region_contains(region: Region, p) -> bool:
    """Closed membership test of a single point."""
    return bool(region.mask(as_xy([p]))[0])


def restricted_count(points, region: Region) -> int:
    """Number of ``points`` inside ``region``, counted with multiplicity.

    Linear scan; this is the reference every accelerated path must match.
    """
    xy = as_xy(points)
    if len(xy) == 0:
        return 0
    return int(np.count_nonzero(region.mask(xy)))
