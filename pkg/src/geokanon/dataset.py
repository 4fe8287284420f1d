"""Records, the address universe and the original/masked/external datasets."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional

import numpy as np

from .geometry import Point, StudyArea, as_point, eps


@dataclass(frozen=True)
class Record:
    id: str
    location: Point
    attributes: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "location", as_point(self.location))
        object.__setattr__(self, "attributes", dict(self.attributes))

    def moved_to(self, location) -> "Record":
        return Record(self.id, location, self.attributes)


def coords(records: Iterable[Record]) -> np.ndarray:
    """Locations of ``records`` as an ``(n, 2)`` array."""
    xy = [r.location for r in records]
    return np.asarray(xy, dtype=float).reshape(-1, 2)


@dataclass(frozen=True)
class AddressUniverse:
    """All residential addresses of the study area."""

    records: tuple
    area: StudyArea

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self):
        return len(self.records)

    @property
    def xy(self) -> np.ndarray:
        return coords(self.records)


@dataclass(frozen=True)
class KnowledgeProfile:
    participation: bool = False
    method: bool = False


@dataclass(frozen=True)
class ExternalDataset:
    """The intruder's external data.

    ``filter_on`` names attributes the intruder also finds in the target
    data; attacks restrict each query's candidates to records agreeing on
    them before any spatial matching.
    """

    records: tuple
    participation_knowledge: bool = False
    filter_on: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "filter_on", tuple(self.filter_on))


@dataclass(frozen=True)
class LinkedDatasets:
    """Original records and their masked counterparts, linked by shared id.

    The link is ground truth for scoring; attacks never read it.
    """

    original: tuple
    masked: tuple
    universe: Optional[AddressUniverse] = None
    method: Any = None

    def __post_init__(self):
        object.__setattr__(self, "original", tuple(self.original))
        object.__setattr__(self, "masked", tuple(self.masked))

    def __len__(self):
        return len(self.original)

    @property
    def ids(self) -> List[str]:
        return [r.id for r in self.original]

    def pairs(self):
        """Yield ``(original, masked)`` record pairs in original order."""
        by_id = {r.id: r for r in self.masked}
        for r in self.original:
            yield r, by_id[r.id]


@dataclass(frozen=True)
class Violation:
    record_id: Optional[str]
    invariant: str
    detail: str = ""

    def __str__(self):
        where = f"record {self.record_id}: " if self.record_id is not None else ""
        return f"{where}{self.invariant}" + (f" ({self.detail})" if self.detail else "")


def _duplicate_ids(records, label) -> List[Violation]:
    seen, out = set(), []
    for r in records:
        if r.id in seen:
            out.append(Violation(r.id, f"unique id in {label}"))
        seen.add(r.id)
    return out


def _lookup(universe_xy: np.ndarray):
    """Exact-coordinate set plus a tolerant fallback for membership in B."""
    exact = {(float(x), float(y)) for x, y in universe_xy}

    def member(p: Point) -> bool:
        if (p.x, p.y) in exact:
            return True
        if len(universe_xy) == 0:
            return False
        d = np.abs(universe_xy - np.array(p)).max(axis=1)
        return bool((d <= eps()).any())

    return member


def validate(linked: LinkedDatasets) -> List[Violation]:
    """Check the structural invariants of a linked pair; never raises."""
    out: List[Violation] = []
    if len(linked.original) != len(linked.masked):
        out.append(Violation(
            None, "|P| = |P'|",
            f"{len(linked.original)} original vs {len(linked.masked)} masked records"))
    out += _duplicate_ids(linked.original, "original")
    out += _duplicate_ids(linked.masked, "masked")

    orig_ids = {r.id for r in linked.original}
    mask_ids = {r.id for r in linked.masked}
    for rid in sorted(orig_ids - mask_ids):
        out.append(Violation(rid, "link is a bijection", "original record has no masked partner"))
    for rid in sorted(mask_ids - orig_ids):
        out.append(Violation(rid, "link is a bijection", "masked record has no original partner"))

    if linked.universe is not None:
        member = _lookup(linked.universe.xy)
        area = linked.universe.area
        for r in linked.universe.records:
            if not area.contains(r.location):
                out.append(Violation(r.id, "universe address inside study area"))
        for r in linked.original:
            if not member(r.location):
                out.append(Violation(r.id, "A subset of B", "original address not in universe"))
    return out


def validate_external(external: ExternalDataset, linked: LinkedDatasets,
                      universe: Optional[AddressUniverse] = None) -> List[Violation]:
    out = _duplicate_ids(external.records, "external")
    if external.participation_knowledge:
        member = _lookup(np.asarray([r.location for r in linked.original]).reshape(-1, 2))
        rule = "A^q subset of A"
    elif universe is not None:
        member = _lookup(universe.xy)
        rule = "A^q subset of B"
    else:
        return out
    for r in external.records:
        if not member(r.location):
            out.append(Violation(r.id, rule))
    return out


def attribute_prefilter(records: Iterable[Record],
                        predicate: Callable[[Mapping[str, Any]], bool]) -> List[Record]:
    """Records whose attributes satisfy ``predicate``, order preserved.

    A predicate raising ``KeyError`` (missing attribute) counts as no match.
    """
    out = []
    for r in records:
        try:
            ok = predicate(r.attributes)
        except KeyError:
            ok = False
        if ok:
            out.append(r)
    return out


def equals(**expected) -> Callable[[Mapping[str, Any]], bool]:
    """Predicate matching records whose attributes equal all given values."""
    def pred(attrs):
        return all(attrs[k] == v for k, v in expected.items())
    return pred


def by_id(records: Iterable[Record]) -> Dict[str, Record]:
    return {r.id: r for r in records}
