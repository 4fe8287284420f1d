"""Anonymity metrics for geomasked point data.

Six per-record counts are produced:

``k_original_B`` / ``k_original_A``
    Around each masked point draw the closed circle reaching its true
    original address; count universe addresses (B) or original addresses
    (A) inside.  Guards against nearest-address attacks from the masked
    side.
``k_original_method_B`` / ``k_original_method_A``
    Count B or A inside the backward area of the masked point: what an
    intruder knowing the method can narrow the origin down to.
``k_moved``
    Around each original address draw the circle reaching its own masked
    point; count masked points inside.  This is the usual *spatial
    k-anonymity*.
``k_moved_method``
    Count masked points inside the forward area of the original address.

All counts include the record's own partner and count coincident
addresses with multiplicity.
"""
from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .dataset import AddressUniverse, LinkedDatasets, coords
from .errors import DomainError
from .geometry import ClosedDisk, StudyArea, as_xy, distance, eps, restricted_count
from .index import PointIndex
from .masking import MaskMethod, backward_area, forward_area, method_to_dict

METRICS = (
    "k_original_B", "k_original_A",
    "k_original_method_B", "k_original_method_A",
    "k_moved", "k_moved_method",
)
QUANTILES = (5, 25, 50, 75, 95)

SPATIAL_K_NOTE = (
    "k_moved is the conventional spatial k-anonymity: it only covers intruders "
    "linking known addresses to their nearest masked point without method knowledge.")
NON_INVERTIBLE_WARNING = (
    "the masking method is deterministic and therefore invertible: the method must "
    "not be invertible, and method-aware intruders recover each record's cell exactly")
UNSOUND_WARNING = (
    "the supplied method descriptor does not match the method that produced the masked "
    "data; method-related counts are not guarantees")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("GEOKANON_THREADS", "1")))
    except ValueError:
        return 1


def _require_member(p, candidates: np.ndarray, what: str):
    if len(candidates) == 0 or not (np.abs(candidates - np.asarray(p)).max(axis=1) <= eps()).any():
        raise DomainError(f"{what} {tuple(p)} is not among the candidates")


def k_original(a_prime, a, candidates) -> int:
    """Candidates at least as close to ``a_prime`` as the true original ``a``."""
    xy = as_xy(candidates)
    _require_member(a, xy, "original address")
    return restricted_count(xy, ClosedDisk(a_prime, distance(a_prime, a)))


def k_original_method(a_prime, candidates, m: MaskMethod, area: Optional[StudyArea] = None,
                      clip_to_area: bool = False) -> int:
    """Candidates inside the backward area of ``a_prime``."""
    return restricted_count(candidates, backward_area(m, a_prime, area, clip_to_area))


def k_moved(a, a_prime, masked) -> int:
    """Masked points at least as close to ``a`` as its own masked point."""
    xy = as_xy(masked)
    _require_member(a_prime, xy, "masked address")
    return restricted_count(xy, ClosedDisk(a, distance(a, a_prime)))


def k_moved_method(a, masked, m: MaskMethod, area: Optional[StudyArea] = None,
                   clip_to_area: bool = False) -> int:
    """Masked points inside the forward area of ``a``."""
    return restricted_count(masked, forward_area(m, a, area, clip_to_area))


# -- summaries -------------------------------------------------------------

def nearest_rank(sorted_values: Sequence, q: float):
    """Nearest-rank ``q``-th percentile of an ascending sequence."""
    n = len(sorted_values)
    if n == 0:
        return None
    rank = max(1, math.ceil(q / 100 * n))
    return sorted_values[rank - 1]


def summarize(values: Sequence[int]) -> dict:
    vals = sorted(int(v) for v in values)
    if not vals:
        return {"count": 0, "min": None, "max": None, "mean": None,
                "quantiles": {str(q): None for q in QUANTILES}, "histogram": {}}
    hist = Counter(vals)
    return {
        "count": len(vals),
        "min": vals[0],
        "max": vals[-1],
        "mean": sum(vals) / len(vals),
        "quantiles": {str(q): nearest_rank(vals, q) for q in QUANTILES},
        "histogram": {str(k): hist[k] for k in sorted(hist)},
    }


@dataclass
class MetricReport:
    per_record: Dict[str, Dict[str, int]]
    summary: Dict[str, dict]
    distinct_summary: Dict[str, dict]
    config: dict
    notes: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    unsound: bool = False

    def column(self, name: str) -> List[int]:
        return [row[name] for row in self.per_record.values() if name in row]

    def threshold_check(self, min_k: int) -> Dict[str, bool]:
        """Whether every record reaches ``min_k`` on each computed metric."""
        return {m: min(self.column(m)) >= min_k
                for m in METRICS if self.column(m)}

    def to_dict(self) -> dict:
        return {
            "per_record": self.per_record,
            "summary": self.summary,
            "distinct_coordinate_summary": self.distinct_summary,
            "config": self.config,
            "notes": list(self.notes),
            "warnings": list(self.warnings),
            "unsound": self.unsound,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(d["per_record"], d["summary"], d.get("distinct_coordinate_summary", {}),
                   d["config"], d.get("notes", []), d.get("warnings", []),
                   d.get("unsound", False))


def _distinct(xy: np.ndarray, positions) -> int:
    if len(positions) < 2:
        return len(positions)
    return len(set(map(tuple, xy[positions].tolist())))


def compute_report(linked: LinkedDatasets, universe: Optional[AddressUniverse] = None,
                   m: Optional[MaskMethod] = None, area: Optional[StudyArea] = None,
                   clip_to_area: bool = False, cell: Optional[float] = None,
                   brute_force: bool = False, workers: Optional[int] = None) -> MetricReport:
    """All applicable metrics for every linked record, plus summaries.

    B-variants need ``universe``; method-related metrics need ``m``.  When
    ``brute_force`` is set every count is a linear scan instead of an index
    query (used as the reference in tests).  ``workers`` threads share the
    per-record loop (default: ``$GEOKANON_THREADS`` or 1); output order is
    by record id regardless.
    """
    pairs = sorted(linked.pairs(), key=lambda pr: pr[0].id)
    a_xy = coords(p for p, _ in pairs)
    m_xy = coords(q for _, q in pairs)
    b_xy = universe.xy if universe is not None else None
    if area is None and universe is not None:
        area = universe.area
    clip_area = area if clip_to_area else None

    pools = {"A": a_xy, "M": m_xy}
    if b_xy is not None:
        pools["B"] = b_xy

    if brute_force:
        def query(pool, region):
            xy = pools[pool]
            return np.flatnonzero(region.mask(xy)) if len(xy) else np.empty(0, dtype=np.intp)
    else:
        indexes = {k: PointIndex(v, cell=cell) for k, v in pools.items()}

        def query(pool, region):
            return indexes[pool].query_region(region)

    def one(pair):
        (orig, msk), a, ap = pair
        if b_xy is not None and len(query("B", ClosedDisk(a, 0.0))) == 0:
            raise DomainError(f"record {orig.id!r}: original address {tuple(a)} "
                              "is not among the candidates")
        r = distance(ap, a)
        regions = {
            "k_original_A": ("A", ClosedDisk(ap, r)),
            "k_moved": ("M", ClosedDisk(a, r)),
        }
        if b_xy is not None:
            regions["k_original_B"] = ("B", ClosedDisk(ap, r))
        if m is not None:
            back = backward_area(m, ap, clip_area, clip_to_area)
            regions["k_original_method_A"] = ("A", back)
            if b_xy is not None:
                regions["k_original_method_B"] = ("B", back)
            regions["k_moved_method"] = ("M", forward_area(m, a, clip_area, clip_to_area))
        row, uniq = {}, {}
        for name in METRICS:
            if name in regions:
                pool, region = regions[name]
                hits = query(pool, region)
                row[name] = int(len(hits))
                uniq[name] = _distinct(pools[pool], hits)
        return orig.id, row, uniq

    work = zip(pairs, a_xy, m_xy)
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            rows = list(pool_exec.map(one, work))
    else:
        rows = [one(w) for w in work]

    per_record: Dict[str, Dict[str, int]] = {}
    distinct: Dict[str, List[int]] = {k: [] for k in METRICS}
    for rid, row, uniq in rows:
        per_record[rid] = row
        for name, v in uniq.items():
            distinct[name].append(v)

    computed = [k for k in METRICS if distinct[k]]
    summary = {k: summarize([row[k] for row in per_record.values()]) for k in computed}
    distinct_summary = {k: summarize(distinct[k]) for k in computed}

    config = {
        "n_records": len(pairs),
        "universe_size": None if b_xy is None else int(len(b_xy)),
        "method": None if m is None else method_to_dict(m),
        "generating_method": None if linked.method is None else method_to_dict(linked.method),
        "clip_to_area": clip_to_area,
        "area": None if area is None else area.to_dict(),
        "knowledge_variants": {
            "participation": ["A"] + (["B"] if b_xy is not None else []),
            "method": m is not None,
        },
        "metrics": computed,
        "epsilon": eps(),
    }
    report = MetricReport(per_record, summary, distinct_summary, config, notes=[SPATIAL_K_NOTE])
    if m is not None:
        if linked.method is not None and linked.method != m:
            report.unsound = True
        elif any(row.get("k_original_method_A", 1) < 1 or row.get("k_moved_method", 1) < 1
                 for row in per_record.values()):
            report.unsound = True
        if report.unsound:
            report.warnings.append(UNSOUND_WARNING)
        if getattr(m, "deterministic", False):
            report.warnings.append(NON_INVERTIBLE_WARNING)
        ones = sum(1 for row in per_record.values() if row.get("k_moved_method") == 1)
        if ones:
            report.warnings.append(
                f"{ones} of {len(per_record)} records have k_moved_method = 1: "
                "reproducing the method links them to a unique masked point")
    return report

