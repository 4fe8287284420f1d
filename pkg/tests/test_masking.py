import numpy as np
import pytest
from scipy import integrate, stats

from geokanon import (
    Annulus, Cell, ClosedDisk, Donut, GridSnap, MaskRun, Point, Record, StudyArea, UniformDisk,
    backward_area, distance, forward_area, mask_dataset, mask_point, parse_method,
    region_contains,
)
from geokanon.errors import ConfigError, DomainError, SamplingError
from geokanon.geometry import GridCell
from geokanon.masking import record_rng

BIG = StudyArea(-1e4, -1e4, 1e4, 1e4)


def test_forward_area_shapes():
    assert forward_area(UniformDisk(100), (0, 0)) == ClosedDisk((0, 0), 100)
    assert forward_area(Donut(50, 200), (10, 10)) == Annulus((10, 10), 50, 200)
    assert forward_area(GridSnap(100), (130, 20)) == Cell.point((150, 50))


def test_forward_area_requires_point_inside_area():
    with pytest.raises(DomainError):
        forward_area(UniformDisk(10), (50, 50), StudyArea(0, 0, 10, 10))


def test_backward_area_shapes():
    assert backward_area(UniformDisk(100), (0, 0)) == ClosedDisk((0, 0), 100)
    assert backward_area(Donut(50, 200), (0, 0)) == Annulus((0, 0), 50, 200)
    cell = backward_area(GridSnap(100), (150, 50))
    assert cell == GridCell(Point(0, 0), 100.0, 1, 0)
    assert region_contains(cell, (100, 0)) and region_contains(cell, (199.99, 99.99))
    assert not region_contains(cell, (200, 0))


def test_gridsnap_point():
    assert mask_point(GridSnap(100), (130, 20), record_rng(0, "x")) == (150, 50)


def test_clipped_areas_are_intersections():
    area = StudyArea(0, 0, 100, 100)
    fa = forward_area(UniformDisk(50), (10, 10), area, clip_to_area=True)
    assert region_contains(fa, (40, 40)) and not region_contains(fa, (-5, 10))


@pytest.mark.parametrize("method", [UniformDisk(75), Donut(20, 90), GridSnap(40)])
def test_containment_both_ways(method):
    rng = np.random.default_rng(5)
    for i, x in enumerate(rng.uniform(-500, 500, (400, 2))):
        xp = mask_point(method, x, record_rng(1, i))
        assert region_contains(forward_area(method, x), xp)
        assert region_contains(backward_area(method, xp), x)


def test_donut_displacement_within_radii():
    m = Donut(50, 200)
    for i in range(2000):
        xp = mask_point(m, (0, 0), record_rng(9, i))
        assert 50 - 1e-9 <= distance((0, 0), xp) <= 200 + 1e-9


def _mean_radius_by_quadrature(r_min, r_max):
    # density of the radius is proportional to r on [r_min, r_max]
    num, _ = integrate.quad(lambda r: r * r, r_min, r_max)
    den, _ = integrate.quad(lambda r: r, r_min, r_max)
    return num / den


def test_donut_mean_radius():
    expected = _mean_radius_by_quadrature(50, 200)
    assert expected == pytest.approx(140.0, abs=1e-9)
    rng = record_rng(123, "donut")
    r = [distance((0, 0), mask_point(Donut(50, 200), (0, 0), rng)) for _ in range(10_000)]
    assert np.mean(r) == pytest.approx(expected, abs=2.0)


def test_uniform_disk_radius_distribution_ks():
    rng = record_rng(2024, "ks")
    R = 100.0
    r = np.array([distance((0, 0), mask_point(UniformDisk(R), (0, 0), rng))
                  for _ in range(10_000)])
    res = stats.kstest(r, lambda t: np.clip(t / R, 0, 1) ** 2)
    assert res.pvalue > 0.01


def test_clipped_sampling_stays_in_area():
    area = StudyArea(0, 0, 100, 100)
    for i in range(300):
        p = mask_point(UniformDisk(80), (1, 1), record_rng(0, i), area, clip_to_area=True)
        assert area.contains(p)


def test_rejection_gives_up():
    tiny = StudyArea(0, 0, 1, 1)
    with pytest.raises(SamplingError):
        mask_point(Donut(50, 60), (0.5, 0.5), record_rng(0, 0), tiny, clip_to_area=True)


def test_gridsnap_center_outside_area_is_a_sampling_error():
    with pytest.raises(SamplingError):
        mask_point(GridSnap(100), (1, 1), record_rng(0, 0), StudyArea(0, 0, 10, 10), True)


def _recs(n):
    rng = np.random.default_rng(17)
    return [Record(f"id{i}", tuple(p), {"age": i}) for i, p in enumerate(rng.uniform(0, 1e3, (n, 2)))]


def test_mask_dataset_empty():
    linked = mask_dataset([], MaskRun(UniformDisk(10), 1))
    assert linked.original == () and linked.masked == ()


def test_mask_dataset_is_deterministic():
    run = MaskRun(Donut(10, 50), seed=42)
    a = mask_dataset(_recs(5), run)
    b = mask_dataset(_recs(5), run)
    assert [r.location for r in a.masked] == [r.location for r in b.masked]


def test_mask_dataset_independent_of_record_order():
    recs = _recs(20)
    run = MaskRun(UniformDisk(30), seed=3)
    fwd = {r.id: r.location for r in mask_dataset(recs, run).masked}
    rev = {r.id: r.location for r in mask_dataset(recs[::-1], run).masked}
    assert fwd == rev


def test_mask_dataset_uniform_displacement_bound():
    linked = mask_dataset(_recs(100), MaskRun(UniformDisk(100), seed=8))
    for o, m in linked.pairs():
        assert distance(o.location, m.location) <= 100 + 1e-9
        assert o.attributes == m.attributes and o.id == m.id


def test_mask_dataset_reports_offending_id():
    recs = [Record("far", (5000, 5000))]
    with pytest.raises(DomainError, match="far"):
        mask_dataset(recs, MaskRun(UniformDisk(1), 0), StudyArea(0, 0, 10, 10))


def test_different_seeds_differ():
    a = mask_dataset(_recs(5), MaskRun(UniformDisk(10), 1))
    b = mask_dataset(_recs(5), MaskRun(UniformDisk(10), 2))
    assert [r.location for r in a.masked] != [r.location for r in b.masked]


@pytest.mark.parametrize("text, method", [
    ("uniform:100", UniformDisk(100)),
    ("donut:50,200", Donut(50, 200)),
    ("gridsnap:100", GridSnap(100)),
    ("gridsnap:100,5,7", GridSnap(100, Point(5, 7))),
])
def test_descriptor_round_trip(text, method):
    assert parse_method(text) == method
    assert parse_method(method.descriptor()) == method


@pytest.mark.parametrize("text", ["donut:200,50", "uniform:-1", "spiral:3", "donut:1", "uniform:x"])
def test_bad_descriptors(text):
    with pytest.raises(ConfigError):
        parse_method(text)
