"""Geomasking methods and their forward / backward displacement areas.

The forward area of a point ``x`` is where the method may move it; the
backward area of a masked point ``x'`` is where its original must lie.
For every masked pair ``x' in forward_area(x)`` and
``x in backward_area(x')`` hold exactly.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .dataset import LinkedDatasets, Record
from .errors import ConfigError, DomainError, SamplingError
from .geometry import (
    Annulus, Cell, ClosedDisk, GridCell, Point, Region, StudyArea, as_point, clip,
)

MAX_DRAWS = 10_000
RNG_ALGORITHM = "numpy.random.PCG64; SeedSequence(seed, spawn_key=sha256(id)[:4 words])"


@dataclass(frozen=True)
class UniformDisk:
    """Displacement uniform by area over the closed disk of radius ``radius``."""

    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"uniform radius must be > 0, got {self.radius}")

    deterministic = False

    def descriptor(self) -> str:
        return f"uniform:{self.radius!r}"


@dataclass(frozen=True)
class Donut:
    """Displacement uniform by area over the annulus ``r_min <= d <= r_max``."""

    r_min: float
    r_max: float

    def __post_init__(self):
        if not (math.isfinite(self.r_max) and 0 < self.r_min < self.r_max):
            raise ConfigError(f"donut needs 0 < r_min < r_max, got {self.r_min}, {self.r_max}")

    deterministic = False

    def descriptor(self) -> str:
        return f"donut:{self.r_min!r},{self.r_max!r}"


@dataclass(frozen=True)
class GridSnap:
    """Snap every point to the center of its grid cell.

    Deterministic and therefore invertible up to the cell: kept as a
    negative example that drives the method-related metrics to 1.
    """

    cell: float
    origin: Point = Point(0.0, 0.0)

    def __post_init__(self):
        if not (math.isfinite(self.cell) and self.cell > 0):
            raise ConfigError(f"grid cell size must be > 0, got {self.cell}")
        object.__setattr__(self, "origin", as_point(self.origin))

    deterministic = True

    def cell_index(self, p) -> tuple:
        return (math.floor((p[0] - self.origin.x) / self.cell),
                math.floor((p[1] - self.origin.y) / self.cell))

    def center(self, ix: int, iy: int) -> Point:
        return Point(self.origin.x + (ix + 0.5) * self.cell,
                     self.origin.y + (iy + 0.5) * self.cell)

    def snap(self, p) -> Point:
        return self.center(*self.cell_index(p))

    def descriptor(self) -> str:
        if self.origin == (0.0, 0.0):
            return f"gridsnap:{self.cell!r}"
        return f"gridsnap:{self.cell!r},{self.origin.x!r},{self.origin.y!r}"


MaskMethod = Union[UniformDisk, Donut, GridSnap]


def parse_method(text: str) -> MaskMethod:
    """Parse ``uniform:R | donut:rmin,rmax | gridsnap:cell[,ox,oy]``."""
    name, _, args = text.strip().partition(":")
    try:
        vals = [float(v) for v in args.split(",")] if args else []
    except ValueError:
        raise ConfigError(f"bad method parameters in {text!r}") from None
    name = name.lower()
    if name == "uniform" and len(vals) == 1:
        return UniformDisk(vals[0])
    if name == "donut" and len(vals) == 2:
        return Donut(*vals)
    if name == "gridsnap" and len(vals) in (1, 3):
        return GridSnap(vals[0], Point(*vals[1:]) if len(vals) == 3 else Point(0.0, 0.0))
    raise ConfigError(
        f"unknown method descriptor {text!r}; expected uniform:R, donut:rmin,rmax "
        "or gridsnap:cell[,ox,oy]")


def method_to_dict(m: MaskMethod) -> dict:
    if isinstance(m, UniformDisk):
        return {"kind": "uniform", "radius": m.radius, "descriptor": m.descriptor()}
    if isinstance(m, Donut):
        return {"kind": "donut", "r_min": m.r_min, "r_max": m.r_max,
                "descriptor": m.descriptor()}
    return {"kind": "gridsnap", "cell": m.cell, "origin": list(m.origin),
            "descriptor": m.descriptor()}


def forward_area(m: MaskMethod, x, area: Optional[StudyArea] = None,
                 clip_to_area: bool = False) -> Region:
    """Region into which ``m`` can displace ``x``."""
    x = as_point(x)
    if area is not None and not area.contains(x):
        raise DomainError(f"point {tuple(x)} lies outside the study area")
    if isinstance(m, UniformDisk):
        region = ClosedDisk(x, m.radius)
    elif isinstance(m, Donut):
        region = Annulus(x, m.r_min, m.r_max)
    elif isinstance(m, GridSnap):
        region = Cell.point(m.snap(x))
    else:
        raise TypeError(f"not a mask method: {m!r}")
    return clip(region, area if clip_to_area else None)


def backward_area(m: MaskMethod, x_prime, area: Optional[StudyArea] = None,
                  clip_to_area: bool = False) -> Region:
    """Region that must contain the original of masked point ``x_prime``."""
    x_prime = as_point(x_prime)
    if isinstance(m, UniformDisk):
        region = ClosedDisk(x_prime, m.radius)
    elif isinstance(m, Donut):
        region = Annulus(x_prime, m.r_min, m.r_max)
    elif isinstance(m, GridSnap):
        region = GridCell(m.origin, m.cell, *m.cell_index(x_prime))
    else:
        raise TypeError(f"not a mask method: {m!r}")
    return clip(region, area if clip_to_area else None)


def _draw(m: MaskMethod, x: Point, rng: np.random.Generator) -> Point:
    u, v = rng.random(2)
    if isinstance(m, UniformDisk):
        r = m.radius * math.sqrt(u)
    else:
        r = math.sqrt(u * (m.r_max ** 2 - m.r_min ** 2) + m.r_min ** 2)
    theta = 2.0 * math.pi * v
    return Point(x.x + r * math.cos(theta), x.y + r * math.sin(theta))


def mask_point(m: MaskMethod, x, rng: np.random.Generator,
               area: Optional[StudyArea] = None, clip_to_area: bool = False) -> Point:
    """Displace ``x`` once.

    Draws are rejected until the result lies in the (possibly clipped)
    forward area; this also absorbs rounding at the outer radius.
    """
    x = as_point(x)
    target = forward_area(m, x, area, clip_to_area)
    if isinstance(m, GridSnap):
        p = m.snap(x)
        if not target.mask(np.array([p]))[0]:
            raise SamplingError(f"grid cell center {tuple(p)} lies outside the study area")
        return p
    for _ in range(MAX_DRAWS):
        p = _draw(m, x, rng)
        if target.mask(np.array([p]))[0]:
            return p
    raise SamplingError(
        f"no admissible draw after {MAX_DRAWS} attempts; "
        "the study area is too small relative to the displacement")


def record_rng(seed: int, record_id) -> np.random.Generator:
    """Independent generator for one record, derived from ``(seed, id)``.

    Makes a record's draws independent of processing order.
    """
    digest = hashlib.sha256(str(record_id).encode("utf-8")).digest()
    key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class MaskRun:
    method: MaskMethod
    seed: int = 0
    clip_to_area: bool = False

    def to_dict(self) -> dict:
        return {"method": method_to_dict(self.method), "seed": int(self.seed),
                "clip_to_area": self.clip_to_area, "rng": RNG_ALGORITHM}


def mask_dataset(original: Iterable[Record], run: MaskRun,
                 area: Optional[StudyArea] = None) -> LinkedDatasets:
    """Mask every record's location; ids and attributes carry over unchanged."""
    original = tuple(original)
    seen = set()
    masked = []
    for rec in original:
        if rec.id in seen:
            raise DomainError(f"duplicate record id {rec.id!r}")
        seen.add(rec.id)
        try:
            p = mask_point(run.method, rec.location, record_rng(run.seed, rec.id),
                           area, run.clip_to_area)
        except (SamplingError, DomainError) as exc:
            raise type(exc)(f"record {rec.id!r}: {exc}") from exc
        masked.append(rec.moved_to(p))
    return LinkedDatasets(original, tuple(masked), method=run.method)
