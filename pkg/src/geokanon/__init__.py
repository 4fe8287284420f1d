"""Geomasking and scenario-aware anonymity metrics for point data."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    EPS, Annulus, Cell, ClosedDisk, GridCell, IntersectionWithStudyArea, Point, StudyArea,
    distance, eps, region_contains, restricted_count, tolerance,
)
from .dataset import (  # noqa: E402
    AddressUniverse, ExternalDataset, KnowledgeProfile, LinkedDatasets, Record,
    attribute_prefilter, validate,
)
from .masking import (  # noqa: E402
    Donut, GridSnap, MaskRun, UniformDisk, backward_area, forward_area, mask_dataset,
    mask_point, parse_method,
)
from .index import PointIndex  # noqa: E402
from .metrics import (  # noqa: E402
    MetricReport, compute_report, k_moved, k_moved_method, k_original, k_original_method,
)
from .attack import (  # noqa: E402
    AttackOutcome, ScenarioId, cross_match, forward_reproduction_attack, nn_attack,
    reversal_attack, run_scenario,
)
from .synth import Clustered, SynthSpec, generate_universe, sample_targets  # noqa: E402

__all__ = [
    "EPS", "Annulus", "Cell", "ClosedDisk", "GridCell", "IntersectionWithStudyArea", "Point",
    "StudyArea", "distance", "eps", "region_contains", "restricted_count", "tolerance",
    "AddressUniverse", "ExternalDataset", "KnowledgeProfile", "LinkedDatasets", "Record",
    "attribute_prefilter", "validate",
    "Donut", "GridSnap", "MaskRun", "UniformDisk", "backward_area", "forward_area",
    "mask_dataset", "mask_point", "parse_method",
    "PointIndex",
    "MetricReport", "compute_report", "k_moved", "k_moved_method", "k_original",
    "k_original_method",
    "AttackOutcome", "ScenarioId", "cross_match", "forward_reproduction_attack", "nn_attack",
    "reversal_attack", "run_scenario",
    "Clustered", "SynthSpec", "generate_universe", "sample_targets",
]
