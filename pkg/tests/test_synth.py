import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geokanon import StudyArea, SynthSpec
from geokanon.errors import DomainError
from geokanon.synth import Clustered, generate, generate_universe, sample_targets

AREA = StudyArea(0, 0, 1000, 500)


def test_empty_universe():
    universe, targets = generate(SynthSpec(AREA, 0, 0))
    assert len(universe) == 0 and targets == []


def test_uniform_universe_is_centered():
    u = generate_universe(SynthSpec(AREA, 10_000, seed=1))
    xy = u.xy
    assert len(u) == 10_000 and AREA.mask(xy).all()
    # a uniform coordinate on [0, L] has sd L / sqrt(12)
    se = np.array([1000, 500]) / np.sqrt(12) / np.sqrt(len(xy))
    assert np.all(np.abs(xy.mean(axis=0) - np.array(AREA.center)) < 3 * se)


def test_same_seed_same_output():
    spec = SynthSpec(AREA, 300, 40, attributes={"sex": {"f": 1, "m": 1}}, seed=9)
    u1, t1 = generate(spec)
    u2, t2 = generate(spec)
    assert u1.records == u2.records and t1 == t2
    _, t3 = generate(SynthSpec(AREA, 300, 40, seed=10))
    assert [r.location for r in t3] != [r.location for r in t1]


@pytest.mark.parametrize("n", [1, 250])
def test_sample_sizes_at_the_edges(n):
    universe, targets = generate(SynthSpec(AREA, 250, n, seed=2))
    locs = {tuple(r.location) for r in universe.records}
    assert len(targets) == n
    assert all(tuple(r.location) in locs for r in targets)
    assert len({r.id for r in targets}) == n


def test_sample_larger_than_universe():
    with pytest.raises(DomainError):
        SynthSpec(AREA, 10, 11)
    with pytest.raises(DomainError):
        sample_targets(generate_universe(SynthSpec(AREA, 5)), 6)


def test_sampling_without_replacement():
    _, targets = generate(SynthSpec(AREA, 500, 500, seed=3))
    assert len({tuple(r.location) for r in targets}) == 500


def test_categorical_attribute_share():
    _, targets = generate(SynthSpec(AREA, 5000, 2000, attributes={"sex": {"f": 0.5, "m": 0.5}},
                                    seed=4))
    n_f = sum(r.attributes["sex"] == "f" for r in targets)
    assert abs(n_f - 1000) <= 100


def test_clustered_pattern_stays_inside_and_clusters():
    spec = SynthSpec(AREA, 2000, pattern=Clustered(3, 20.0), seed=5)
    xy = generate_universe(spec).xy
    assert AREA.mask(xy).all()
    # tighter than uniform: mean nearest-neighbour distance well below the uniform value
    d = np.linalg.norm(xy[:, None] - xy[None], axis=2)
    np.fill_diagonal(d, np.inf)
    uniform_nn = 0.5 * np.sqrt(1000 * 500 / 2000)
    assert d.min(axis=1).mean() < 0.5 * uniform_nn


def test_polygon_area_is_respected():
    tri = StudyArea.from_ring([(0, 0), (100, 0), (0, 100)])
    xy = generate_universe(SynthSpec(tri, 500, seed=6)).xy
    assert (xy.sum(axis=1) <= 100 + 1e-9).all()


def test_multiplicity_shares_addresses():
    _, targets = generate(SynthSpec(AREA, 100, 10, seed=7, multiplicity=3))
    assert len(targets) == 30
    locs = [tuple(r.location) for r in targets]
    assert all(locs.count(p) == 3 for p in set(locs))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 200), st.integers(0, 2 ** 32 - 1), st.data())
def test_targets_are_universe_addresses(m, seed, data):
    n = data.draw(st.integers(0, m))
    universe, targets = generate(SynthSpec(AREA, m, n, seed=seed))
    locs = {tuple(r.location) for r in universe.records}
    assert len(universe) == m and len(targets) == n
    assert all(tuple(r.location) in locs for r in targets)
