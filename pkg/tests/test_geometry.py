import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ogc.geometry import (
    Ball,
    Box,
    DimensionMismatch,
    EmptySet,
    FinitePoints,
    Halfspace,
    HalfspaceBand,
    Intersection,
    Interval,
    InverterDisk,
    NoConvergence,
    Product,
    Simplex,
    UnboundedSet,
    bounds,
    project,
    project_intersection,
    project_simplex,
    sample_uniform_ball,
)

from oracles import grid_nearest, in_all, in_box, in_disk, in_halfspace, polyhedron_projection

coord = st.floats(-5, 5, allow_nan=False)


def vec(d):
    return st.lists(coord, min_size=d, max_size=d).map(np.array)


# --- examples -----------------------------------------------------------------

def test_box_interior_point_fixed():
    assert np.array_equal(project(Box([0, 0], [1, 1]), [0.5, 0.5]), [0.5, 0.5])


def test_simplex_vertex():
    assert np.allclose(project(Simplex(2), [2, 0]), [1, 0])


def test_simplex_matches_kkt_oracle():
    # simplex as polyhedron: -x <= 0, x1+x2 <= 1, -(x1+x2) <= -1
    G = np.array([[-1, 0], [0, -1], [1, 1], [-1, -1]], float)
    g = np.array([0, 0, 1, -1], float)
    ref = polyhedron_projection(G, g, [0.4, 0.2])
    assert np.allclose(ref, [0.6, 0.4])
    assert np.allclose(project(Simplex(2), [0.4, 0.2]), ref, atol=1e-12)


def test_inverter_disk_corner_region_matches_grid():
    d, _ = grid_nearest([2, 2], in_disk(1, 1), [0, -1], [1, 1])
    got = project(InverterDisk(1, 1), [2, 2])
    assert np.allclose(got, [np.sqrt(0.5), np.sqrt(0.5)], atol=1e-12)
    assert abs(np.linalg.norm(got - [2, 2]) - d) <= 1e-4


def test_ball_radial():
    assert np.allclose(project(Ball([0, 0], 1), [3, 4]), [0.6, 0.8])


def test_intersection_examples():
    box = Box([0, 0], [1, 1])
    assert np.array_equal(project_intersection([box, Halfspace([1, 1], 2)], [0.5, 0.5], 1e-9, 1000), [0.5, 0.5])
    got = project_intersection([box, Halfspace([1, 1], 1)], [1, 1], 1e-12, 10_000)
    ref = polyhedron_projection(np.vstack([np.eye(2), -np.eye(2), [[1, 1]]]), [1, 1, 0, 0, 1], [1, 1])
    assert np.allclose(ref, [0.5, 0.5])
    assert np.allclose(got, ref, atol=1e-9)
    assert np.allclose(project_intersection([Interval(0, 1)], [1.7], 1e-9, 10), [1.0])


def test_bounds_examples():
    b = bounds(Ball([0, 0], 2))
    assert (b.norm_bound, b.diameter) == (2, 4)
    b = bounds(Simplex(3))
    assert b.norm_bound == pytest.approx(1) and b.diameter == pytest.approx(np.sqrt(2))
    b = bounds(Box([-1, -1], [1, 1]))
    assert b.norm_bound == pytest.approx(np.sqrt(2)) and b.diameter == pytest.approx(2 * np.sqrt(2))


def test_inverter_disk_bounds():
    b = InverterDisk(0.8, 1.0).bounds()
    assert b.norm_bound == pytest.approx(1.0)
    assert b.diameter == pytest.approx(2.0)  # the two points (0, +-1)
    b = InverterDisk(0.9, 1.0, p_min=0.6).bounds()
    assert b.diameter == pytest.approx(1.6)  # (0.6, +-0.8)


def test_sample_uniform_ball_examples():
    rng = np.random.default_rng(0)
    assert np.array_equal(sample_uniform_ball(3, 0.0, rng), np.zeros(3))
    for seed in range(20):
        assert np.linalg.norm(sample_uniform_ball(2, 1.0, np.random.default_rng(seed))) <= 1


def test_sample_uniform_ball_mean_norm():
    rng = np.random.default_rng(123)
    eps = 0.01
    norms = np.array([np.linalg.norm(sample_uniform_ball(2, eps, rng)) for _ in range(100_000)])
    assert abs(norms.mean() - 2 / 3 * eps) <= 0.01 * 2 / 3 * eps


def test_sample_radius_zero_draws_nothing():
    rng = np.random.default_rng(5)
    sample_uniform_ball(4, 0.0, rng)
    assert rng.random() == np.random.default_rng(5).random()


# --- error cases ----------------------------------------------------------------

def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        project(Box([0, 0], [1, 1]), [1, 2, 3])


def test_empty_descriptions_rejected():
    with pytest.raises(EmptySet):
        Box([0, 1], [1, 0])
    with pytest.raises(EmptySet):
        Ball([0], -1)
    with pytest.raises((EmptySet, ValueError)):
        InverterDisk(0.5, 1.0, p_min=0.7)


def test_unbounded_bounds_rejected():
    with pytest.raises(UnboundedSet):
        bounds(Halfspace([1, 0], 1))
    with pytest.raises((UnboundedSet, ValueError)):
        Intersection([Halfspace([1, 0], 1)])


def test_empty_intersection_raises():
    with pytest.raises(NoConvergence) as info:
        project_intersection([Box([0, 0], [1, 1]), Halfspace([1, 1], -1)], [3, 3], 1e-9, 500)
    assert info.value.max_iter == 500
    assert info.value.violations.max() > 0


def test_finite_points_tie_lowest_index():
    s = FinitePoints([[1, 0], [-1, 0]])
    assert np.array_equal(s.project([0, 0]), [1, 0])


def test_product_projects_blockwise():
    s = Product([Interval(0, 1), Ball([0, 0], 1)])
    assert np.allclose(s.project([2, 3, 4]), [1, 0.6, 0.8])


def test_halfspace_band_skips_infinite_sides():
    band = HalfspaceBand([[1.0, 0.0]], [0.0], [-np.inf], [1.0])
    assert len(band.halfspaces()) == 1
    assert np.allclose(band.project([3, 2]), [1, 2])


# --- properties -------------------------------------------------------------------

SETS = {
    "box": Box([-1, 0], [1, 2]),
    "ball": Ball([0.5, -0.5, 0], 1.5),
    "simplex": Simplex(3),
    "disk": InverterDisk(0.7, 1.0),
    "interval": Interval(-1, 2),
    "product": Product([InverterDisk(0.4, 0.5), Interval(0, 1)]),
    "intersection": Intersection([Box([0, 0], [1, 1]), Halfspace([1, 2], 1.5)], tol=1e-13),
}


@pytest.mark.parametrize("name", SETS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_projection_feasible_idempotent_nonexpansive(name, data):
    s = SETS[name]
    x = data.draw(vec(s.dim))
    y = data.draw(vec(s.dim))
    px, py = s.project(x), s.project(y)
    assert s.contains(px, 1e-9)
    assert np.linalg.norm(s.project(px) - px) <= 1e-12
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


@pytest.mark.parametrize("name", SETS)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_variational_inequality(name, data):
    """<x - P(x), z - P(x)> <= 0 for feasible z characterises the projection."""
    s = SETS[name]
    x = data.draw(vec(s.dim))
    z = s.project(data.draw(vec(s.dim)))
    px = s.project(x)
    assert np.dot(x - px, z - px) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8).map(np.array))
def test_simplex_projection_sums_to_one(v):
    p = project_simplex(v)
    assert np.all(p >= 0) and abs(p.sum() - 1) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(vec(2), st.floats(0.1, 3), st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.5, 2))
def test_dykstra_matches_polyhedron_oracle(x, size, a1, a2, b):
    if abs(a1) + abs(a2) < 1e-3:
        a1 = 1.0
    box = Box([0, 0], [size, size])
    hs = Halfspace([a1, a2], b)
    G = np.vstack([np.eye(2), -np.eye(2), [[a1, a2]]])
    g = np.array([size, size, 0, 0, b])
    ref = polyhedron_projection(G, g, x)
    if ref is None:  # empty polyhedron
        with pytest.raises(NoConvergence):
            project_intersection([box, hs], x, 1e-9, 2000)
        return
    try:
        got = project_intersection([box, hs], x, 1e-12, 100_000)
    except NoConvergence:
        assume(False)  # degenerate (single-point) intersection
    assert np.linalg.norm(got - ref) <= 1e-6


def test_grid_oracle_on_mixed_sets():
    rng = np.random.default_rng(11)
    s = Intersection([InverterDisk(0.8, 1.0), Halfspace([1, 1], 0.9)], tol=1e-12, max_iter=100_000)
    member = in_all(in_disk(0.8, 1.0), in_halfspace([1, 1], 0.9))
    for _ in range(10):
        x = rng.uniform(-2, 2, 2)
        d, _ = grid_nearest(x, member, [0, -1], [0.8, 1])
        got = s.project(x)
        assert abs(np.linalg.norm(got - x) - d) <= 1e-4
        assert np.linalg.norm(got - x) <= d + 1e-12


def test_grid_oracle_sanity():
    d, p = grid_nearest([2.0, 0.5], in_box([0, 0], [1, 1]), [0, 0], [1, 1])
    assert np.allclose(p, [1, 0.5], atol=1e-4) and abs(d - 1) <= 1e-4
