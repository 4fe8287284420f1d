"""Simulated re-identification attacks scored against ground truth.

Eight scenarios arise from three binary choices: the attack direction
(1: masked point -> original address, 2: known address -> masked point),
whether the intruder knows who participates, and whether the intruder
knows the masking method.

=========  ============================  ======================
scenario   candidate pool                method-aware strategy
=========  ============================  ======================
1.1 / 1.3  all addresses B               backward area (1.3)
1.2 / 1.4  participant addresses A       backward area (1.4)
2.1 / 2.3  masked points A', from B      forward area (2.3)
2.2 / 2.4  masked points A', from A      forward area (2.4)
=========  ============================  ======================

Every strategy works on coordinates only; ids and the original/masked link
are used for scoring and never consulted by the simulated intruder.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import lap
from .dataset import AddressUniverse, ExternalDataset, LinkedDatasets, Record
from .errors import ConfigError, DomainError
from .geometry import StudyArea, as_xy, distances, eps
from .index import PointIndex
from .masking import MaskMethod, backward_area, forward_area, method_to_dict

STRATEGIES = ("nn", "cross_match", "reversal")
DEFAULT_N_MAX = 5000


@dataclass(frozen=True)
class ScenarioId:
    perspective: int
    participation: bool
    method: bool

    def __post_init__(self):
        if self.perspective not in (1, 2):
            raise ConfigError(f"perspective must be 1 or 2, got {self.perspective}")

    @classmethod
    def parse(cls, text: str) -> "ScenarioId":
        try:
            p, s = (int(t) for t in str(text).split("."))
        except ValueError:
            raise ConfigError(f"scenario must look like '1.3', got {text!r}") from None
        if p not in (1, 2) or s not in (1, 2, 3, 4):
            raise ConfigError(f"unknown scenario {text!r}")
        return cls(p, participation=s in (2, 4), method=s in (3, 4))

    @property
    def label(self) -> str:
        return f"{self.perspective}.{1 + self.participation + 2 * self.method}"

    def __str__(self):
        return self.label


ALL_SCENARIOS = tuple(ScenarioId.parse(f"{p}.{s}") for p in (1, 2) for s in (1, 2, 3, 4))


@dataclass
class QueryResult:
    matched: List[str]
    truth: List[str]
    correct: bool
    weight: float
    candidate_set_size: Optional[int]
    rank_of_truth: Optional[int]
    ties_at_best: int
    structural_miss: bool = False

    def to_dict(self) -> dict:
        return {
            "matched": list(self.matched), "truth": list(self.truth),
            "correct": self.correct, "weight": self.weight,
            "candidate_set_size": self.candidate_set_size,
            "rank_of_truth": self.rank_of_truth, "ties_at_best": self.ties_at_best,
            "structural_miss": self.structural_miss,
        }


@dataclass
class AttackOutcome:
    per_query: Dict[str, QueryResult]
    strategy: str
    scenario: Optional[str] = None
    config: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    total_cost: Optional[float] = None

    @property
    def scored(self) -> List[QueryResult]:
        return [q for q in self.per_query.values() if not q.structural_miss]

    def aggregate(self) -> dict:
        """Success statistics over queries whose truth is in the pool.

        ``success_rate`` weights a tie of size t containing the truth as
        1/t; ``predicted_rate`` is the mean of 1/candidate_set_size.
        """
        scored = self.scored
        n = len(scored)
        sizes = [q.candidate_set_size for q in scored if q.candidate_set_size]
        weights = [q.weight for q in scored]
        total = len(self.per_query)
        return {
            "queries": total,
            "scored": n,
            "structural_misses": total - n,
            "correct_count": sum(1 for q in scored if q.correct),
            "unique_correct_count": sum(1 for q in scored if q.weight == 1.0),
            "success_rate": sum(weights) / n if n else None,
            "overall_success_rate": sum(weights) / total if total else None,
            "mean_candidate_set_size": float(np.mean(sizes)) if sizes else None,
            "predicted_rate": float(np.mean([1.0 / s for s in sizes])) if sizes else None,
            "no_candidate_count": sum(1 for q in scored if not q.matched),
        }

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "strategy": self.strategy,
            "per_query": {k: v.to_dict() for k, v in self.per_query.items()},
            "aggregate": self.aggregate(),
            "config": self.config,
            "warnings": list(self.warnings),
            "total_cost": self.total_cost,
        }


Pointset = Sequence[Tuple[str, object]]


def _split(items: Pointset):
    ids = [i for i, _ in items]
    xy = as_xy([p for _, p in items]) if items else np.empty((0, 2))
    return ids, xy


def _truth_geometry(q, xy, pos: Dict, truth_ids) -> Tuple[Optional[int], Optional[int]]:
    """Candidate-set size and rank of the closest truth member, by distance from ``q``."""
    members = [pos[t] for t in truth_ids if t in pos]
    if not members:
        return None, None
    d = distances(xy, q)
    dt = float(d[members].min())
    size = int(np.count_nonzero(d <= dt + eps()))
    rank = 1 + int(np.count_nonzero(d < dt - eps()))
    return size, rank


def _result(matched, truth, xy, pos, q, by_weight=True) -> QueryResult:
    truth = sorted(truth) if truth is not None else []
    tset = set(truth)
    size, rank = _truth_geometry(q, xy, pos, truth)
    structural = size is None
    hits = sum(1 for m in matched if m in tset)
    if by_weight:
        weight = hits / len(matched) if matched else 0.0
    else:
        weight = 1.0 if len(matched) == 1 and hits == 1 else 0.0
    return QueryResult(list(matched), truth, weight > 0, weight, size, rank,
                       len(matched), structural)


def nn_attack(queries: Pointset, candidates: Pointset,
              truth: Optional[Mapping[str, Iterable[str]]] = None,
              index: Optional[PointIndex] = None) -> AttackOutcome:
    """Link every query to its nearest candidate(s).

    All candidates within the boundary tolerance of the minimal distance form the tie set.
    ``truth`` maps query id to the candidate ids that count as correct.
    """
    if not candidates:
        raise DomainError("nearest-neighbour attack needs a non-empty candidate pool")
    ids, xy = _split(candidates)
    pos = {cid: i for i, cid in enumerate(ids)}
    index = index or PointIndex(xy, ids)
    out = {}
    for qid, q in queries:
        _, tie = index.nn_ids(q)
        out[qid] = _result(tie, (truth or {}).get(qid), xy, pos, q)
    return AttackOutcome(out, "nn")


def cross_match(set_x: Pointset, set_y: Pointset, n_max: int = DEFAULT_N_MAX,
                backend: str = "native") -> Tuple[Dict[str, str], float]:
    """One-to-one linkage of two point sets at minimal total distance.

    The smaller set is matched completely.  Both sets are put in id order
    before solving so equal inputs give equal pairings.  Returns the
    mapping from ids of ``set_x`` to ids of ``set_y`` (only the matched
    part when ``set_x`` is the larger set) and the total distance.
    """
    if not set_x or not set_y:
        raise DomainError("cross match needs two non-empty point sets")
    if min(len(set_x), len(set_y)) > n_max:
        raise ConfigError(f"assignment size {min(len(set_x), len(set_y))} exceeds n_max={n_max}")
    xs = sorted(set_x, key=lambda t: str(t[0]))
    ys = sorted(set_y, key=lambda t: str(t[0]))
    swap = len(xs) > len(ys)
    if swap:
        xs, ys = ys, xs
    x_ids, x_xy = _split(xs)
    y_ids, y_xy = _split(ys)
    cost = np.sqrt(((x_xy[:, None, :] - y_xy[None, :, :]) ** 2).sum(axis=2))
    if backend == "native":
        cols = lap.solve(cost)
    elif backend == "scipy":
        from scipy.optimize import linear_sum_assignment

        _, cols = linear_sum_assignment(cost)
    else:
        raise ConfigError(f"unknown assignment backend {backend!r}")
    total = float(sum(cost[i, j] for i, j in enumerate(cols)))
    pairs = {x_ids[i]: y_ids[j] for i, j in enumerate(cols)}
    if swap:
        pairs = {v: k for k, v in pairs.items()}
    return pairs, total


def greedy_match(set_x: Pointset, set_y: Pointset) -> Tuple[Dict[str, str], float]:
    """Each x in turn takes its nearest still-free y."""
    if len(set_x) > len(set_y):
        pairs, total = greedy_match(set_y, set_x)
        return {v: k for k, v in pairs.items()}, total
    y_ids, y_xy = _split(set_y)
    free = np.ones(len(y_ids), dtype=bool)
    pairs, total = {}, 0.0
    for xid, p in set_x:
        d = np.where(free, distances(y_xy, p), np.inf)
        j = int(np.argmin(d))
        free[j] = False
        pairs[xid] = y_ids[j]
        total += float(d[j])
    return pairs, total


def cross_match_attack(queries: Pointset, candidates: Pointset,
                       truth: Optional[Mapping[str, Iterable[str]]] = None,
                       n_max: int = DEFAULT_N_MAX, backend: str = "native") -> AttackOutcome:
    pairs, total = cross_match(queries, candidates, n_max, backend)
    ids, xy = _split(candidates)
    pos = {cid: i for i, cid in enumerate(ids)}
    out = {}
    for qid, q in queries:
        matched = [pairs[qid]] if qid in pairs else []
        out[qid] = _result(matched, (truth or {}).get(qid), xy, pos, q)
    return AttackOutcome(out, "cross_match", total_cost=total)


def reversal_attack(a_prime, candidates: Pointset, m: MaskMethod,
                    area: Optional[StudyArea] = None, clip_to_area: bool = False) -> List[str]:
    """Candidates that the method could have displaced onto ``a_prime``."""
    ids, xy = _split(candidates)
    if not ids:
        return []
    hit = backward_area(m, a_prime, area, clip_to_area).mask(xy)
    return [ids[i] for i in np.flatnonzero(hit)]


def forward_reproduction_attack(a, masked: Pointset, m: MaskMethod,
                                area: Optional[StudyArea] = None,
                                clip_to_area: bool = False) -> List[str]:
    """Masked points the method could have produced from ``a``."""
    ids, xy = _split(masked)
    if not ids:
        return []
    region = forward_area(m, a, area if clip_to_area else None, clip_to_area)
    return [ids[i] for i in np.flatnonzero(region.mask(xy))]


def method_attack(queries: Pointset, candidates: Pointset, m: MaskMethod, direction: int,
                  truth: Optional[Mapping[str, Iterable[str]]] = None,
                  area: Optional[StudyArea] = None, clip_to_area: bool = False) -> AttackOutcome:
    """Narrow each query's candidates by the method's areas.

    A query is answered only when exactly one candidate survives; an
    ambiguous or empty survivor set scores zero.
    """
    ids, xy = _split(candidates)
    pos = {cid: i for i, cid in enumerate(ids)}
    index = PointIndex(xy, ids) if ids else None
    out = {}
    for qid, q in queries:
        if direction == 1:
            region = backward_area(m, q, area, clip_to_area)
        else:
            region = forward_area(m, q, area if clip_to_area else None, clip_to_area)
        survivors = index.count_in_region(region, with_ids=True)[1] if index else []
        res = _result(survivors, (truth or {}).get(qid), xy, pos, q, by_weight=False)
        # size and rank count survivors only
        res.candidate_set_size = len(survivors)
        inside = [pos[t] for t in res.truth if t in set(survivors)]
        if inside:
            d = distances(xy[[pos[s] for s in survivors]], q)
            dt = float(distances(xy[inside], q).min())
            res.rank_of_truth = 1 + int(np.count_nonzero(d < dt - eps()))
        else:
            res.rank_of_truth = None
        out[qid] = res
    return AttackOutcome(out, "reversal" if direction == 1 else "forward")


# -- scenario driver -------------------------------------------------------

def _pts(records: Iterable[Record]) -> List[Tuple[str, object]]:
    return [(r.id, r.location) for r in records]


def _location_key(p):
    return (float(p[0]), float(p[1]))


def _ids_at(records: Sequence[Record]) -> Dict[tuple, List[str]]:
    out = defaultdict(list)
    for r in records:
        out[_location_key(r.location)].append(r.id)
    return out


def _matching(pool: Sequence[Record], query: Record, keys: Sequence[str]) -> List[Record]:
    want = {}
    for k in keys:
        if k not in query.attributes:
            return []
        want[k] = query.attributes[k]
    return [r for r in pool if all(k in r.attributes and r.attributes[k] == v
                                   for k, v in want.items())]


def disclosure_warnings(linked: LinkedDatasets, sensitive: Sequence[str]) -> List[str]:
    """Sensitive attributes that are constant across the whole target data.

    Then knowing that someone participates already discloses the value.
    """
    out = []
    for attr in sensitive:
        vals = {r.attributes.get(attr, None) for r in linked.masked}
        if len(linked.masked) and len(vals) == 1 and None not in vals:
            out.append(f"sensitive attribute {attr!r} takes the single value {vals.pop()!r}: "
                       "participation knowledge alone discloses it")
    return out


def run_scenario(s: ScenarioId, linked: LinkedDatasets,
                 universe: Optional[AddressUniverse] = None,
                 external: Optional[ExternalDataset] = None,
                 strategy: str = "nn", method: Optional[MaskMethod] = None,
                 area: Optional[StudyArea] = None, clip_to_area: bool = False,
                 sensitive: Sequence[str] = (), n_max: int = DEFAULT_N_MAX) -> AttackOutcome:
    """Run one attack scenario on a linked dataset and score it.

    Perspective 1 queries every masked record against B (or A with
    participation knowledge).  Perspective 2 queries the external records
    (default: all of B, or A with participation knowledge) against the
    masked points.  Queries whose address is not in A cannot succeed and
    are reported as structural misses.
    """
    if strategy == "forward":
        strategy = "reversal"
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    if strategy == "reversal":
        if not s.method:
            raise ConfigError(f"scenario {s} assumes no method knowledge; "
                              "the reversal strategy is not available")
        if method is None:
            raise ConfigError("the reversal strategy needs a method descriptor")
    if area is None and universe is not None:
        area = universe.area

    original = list(linked.original)
    masked = list(linked.masked)
    orig_by_id = {r.id: r for r in original}

    if s.perspective == 1:
        queries = masked
        if s.participation:
            pool = original
        else:
            if universe is None:
                raise ConfigError(f"scenario {s} needs the address universe B")
            pool = list(universe.records)
        at = _ids_at(pool)
        truth = {r.id: at.get(_location_key(orig_by_id[r.id].location), [])
                 for r in masked if r.id in orig_by_id}
    else:
        if external is not None:
            queries = list(external.records)
        elif s.participation:
            queries = original
        else:
            if universe is None:
                raise ConfigError(f"scenario {s} needs the address universe B or external data")
            queries = list(universe.records)
        pool = masked
        # masked ids whose true original sits at a given address
        owners = defaultdict(list)
        for r in original:
            owners[_location_key(r.location)].append(r.id)
        truth = {q.id: owners.get(_location_key(q.location), []) for q in queries}

    keys = tuple(external.filter_on) if external is not None else ()
    if keys:
        groups = defaultdict(list)
        for q in queries:
            sub = _matching(pool, q, keys)
            groups[tuple(r.id for r in sub)].append(q)
        pool_by_id = {r.id: r for r in pool}
        parts = [([pool_by_id[i] for i in sub_ids], qs) for sub_ids, qs in groups.items()]
    else:
        parts = [(pool, queries)]

    per_query: Dict[str, QueryResult] = {}
    total_cost = 0.0 if strategy == "cross_match" else None
    for sub_pool, qs in parts:
        qpts = _pts(qs)
        if not sub_pool:
            for qid, q in qpts:
                per_query[qid] = QueryResult([], sorted(truth.get(qid, [])), False, 0.0,
                                             None, None, 0, structural_miss=True)
            continue
        cpts = _pts(sub_pool)
        if strategy == "nn":
            part = nn_attack(qpts, cpts, truth)
        elif strategy == "cross_match":
            part = cross_match_attack(qpts, cpts, truth, n_max=n_max)
            total_cost += part.total_cost
        else:
            part = method_attack(qpts, cpts, method, s.perspective, truth, area, clip_to_area)
        per_query.update(part.per_query)

    ordered = {k: per_query[k] for k in sorted(per_query)}
    config = {
        "scenario": s.label,
        "perspective": s.perspective,
        "knowledge": {"participation": s.participation, "method": s.method},
        "strategy": strategy,
        "method": None if method is None else method_to_dict(method),
        "pool_size": len(pool),
        "query_count": len(queries),
        "filter_on": list(keys),
        "clip_to_area": clip_to_area,
        "n_max": n_max,
    }
    outcome = AttackOutcome(ordered, strategy, s.label, config, total_cost=total_cost)
    outcome.warnings += disclosure_warnings(linked, sensitive)
    if method is not None and linked.method is not None and method != linked.method:
        outcome.warnings.append("method descriptor differs from the generating method")
    return outcome
