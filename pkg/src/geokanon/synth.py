"""Synthetic address universes and target samples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np

from .dataset import AddressUniverse, Record
from .errors import DomainError
from .geometry import Point, StudyArea


@dataclass(frozen=True)
class Clustered:
    clusters: int
    sigma: float

    def __post_init__(self):
        if self.clusters < 1:
            raise ValueError("need at least one cluster")
        if not self.sigma > 0:
            raise ValueError("cluster spread must be > 0")


@dataclass(frozen=True)
class SynthSpec:
    area: StudyArea
    universe_size: int
    sample_size: int = 0
    pattern: Optional[Clustered] = None  # None: homogeneous uniform
    attributes: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    seed: int = 0
    multiplicity: int = 1

    def __post_init__(self):
        if self.universe_size < 0 or self.sample_size < 0:
            raise ValueError("sizes must be non-negative")
        if self.sample_size > self.universe_size:
            raise DomainError(f"sample size {self.sample_size} exceeds universe size "
                              f"{self.universe_size}")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")


def _uniform_in(area: StudyArea, n: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((0, 2))
    while len(out) < n:
        need = n - len(out)
        batch = max(16, int(need * 1.2))
        xy = np.column_stack([rng.uniform(area.xmin, area.xmax, batch),
                              rng.uniform(area.ymin, area.ymax, batch)])
        if area.ring is not None:
            xy = xy[area.mask(xy)]
        out = np.vstack([out, xy[:need]])
    return out


def _clustered_in(area: StudyArea, n: int, pattern: Clustered,
                  rng: np.random.Generator) -> np.ndarray:
    centers = _uniform_in(area, pattern.clusters, rng)
    out = np.empty((0, 2))
    while len(out) < n:
        need = n - len(out)
        batch = max(16, int(need * 1.5))
        which = rng.integers(0, pattern.clusters, batch)
        xy = centers[which] + rng.normal(0.0, pattern.sigma, (batch, 2))
        # truncate the mixture to the study area
        xy = xy[area.mask(xy)]
        out = np.vstack([out, xy[:need]])
    return out


def generate_universe(spec: SynthSpec) -> AddressUniverse:
    """``spec.universe_size`` addresses inside the study area, reproducible per seed."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(0,)))
    m = spec.universe_size
    if m == 0:
        xy = np.empty((0, 2))
    elif spec.pattern is None:
        xy = _uniform_in(spec.area, m, rng)
    else:
        xy = _clustered_in(spec.area, m, spec.pattern, rng)
    width = len(str(max(m - 1, 0)))
    records = [Record(f"b{i:0{width}d}", Point(float(x), float(y))) for i, (x, y) in enumerate(xy)]
    return AddressUniverse(records, spec.area)


def sample_targets(universe: AddressUniverse, n: int,
                   attributes: Optional[Mapping[str, Mapping[str, float]]] = None,
                   seed: int = 0, multiplicity: int = 1) -> List[Record]:
    """Draw ``n`` distinct universe addresses as the target data.

    Each attribute is a categorical distribution ``{value: weight}``.
    With ``multiplicity > 1`` every sampled address hosts that many
    persons (records sharing one coordinate).
    """
    m = len(universe)
    if n > m:
        raise DomainError(f"cannot sample {n} addresses from a universe of {m}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    picks = rng.choice(m, size=n, replace=False) if n else np.empty(0, dtype=int)
    attributes = attributes or {}
    total = n * multiplicity
    drawn: Dict[str, list] = {}
    for name in sorted(attributes):
        dist = attributes[name]
        values = list(dist)
        w = np.asarray([dist[v] for v in values], dtype=float)
        if (w < 0).any() or w.sum() <= 0:
            raise ValueError(f"attribute {name!r} needs non-negative weights with a positive sum")
        idx = rng.choice(len(values), size=total, p=w / w.sum())
        drawn[name] = [values[i] for i in idx]
    width = len(str(max(total - 1, 0)))
    out = []
    k = 0
    for pick in picks:
        loc = universe.records[int(pick)].location
        for _ in range(multiplicity):
            attrs = {name: drawn[name][k] for name in drawn}
            out.append(Record(f"p{k:0{width}d}", loc, attrs))
            k += 1
    return out


def generate(spec: SynthSpec):
    """Universe plus target sample in one call."""
    universe = generate_universe(spec)
    targets = sample_targets(universe, spec.sample_size, spec.attributes, spec.seed,
                             spec.multiplicity)
    return universe, targets
