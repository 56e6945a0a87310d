import itertools
import math

import numpy as np
import pytest

from boxfix.correspondences import (
    ConvexImage,
    EvaluationError,
    MapSpecError,
    best_response_correspondence,
    bimatrix_map_spec,
    build_correspondence,
    distance_to_hull,
    image_hull_over_box,
    lgdp_sample_check,
    load_map_spec,
    representative,
    residual,
    separating_hyperplane,
)
from boxfix.geometry import BoxDomain


def brute_hull_distance(z, vertices, grain=24):
    """Independent oracle: minimize |z - sum(w_i v_i)| over a grid of convex
    weights (compositions of `grain`).  Always an upper bound on the true
    distance; over-estimates by at most diam * k / grain."""
    z = np.asarray(z, dtype=float)
    v = np.asarray(vertices, dtype=float)
    k = len(v)
    best = np.inf
    for combo in itertools.combinations(range(grain + k - 1), k - 1):
        parts = []
        prev = -1
        for c in combo:
            parts.append(c - prev - 1)
            prev = c
        parts.append(grain + k - 2 - prev)
        w = np.asarray(parts, dtype=float) / grain
        best = min(best, float(np.linalg.norm(z - w @ v)))
    return best


def pairwise_diameter(vertices):
    v = np.asarray(vertices, dtype=float)
    return max(
        (float(np.linalg.norm(a - b)) for a, b in itertools.combinations(v, 2)),
        default=0.0,
    )


STEP_USC = {
    "dimension": 1,
    "domain": {"lo": [0.0], "hi": [1.0]},
    "kind": "builtin",
    "builtin": {"name": "step-usc", "params": {}},
}

STEP_LGDP = {
    "dimension": 1,
    "domain": {"lo": [0.0], "hi": [1.0]},
    "kind": "builtin",
    "builtin": {"name": "step-lgdp", "params": {}},
}

PENNIES = ([[1.0, -1.0], [-1.0, 1.0]], [[-1.0, 1.0], [1.0, -1.0]])


def test_evaluate_constant():
    spec = load_map_spec(
        {
            "dimension": 2,
            "domain": {"lo": [-1, -1], "hi": [1, 1]},
            "kind": "builtin",
            "builtin": {"name": "constant", "params": {"value": [0.0, 0.0]}},
        }
    )
    f = build_correspondence(spec)
    for z in ([0.3, -0.2], [1, 1], [-1, 0]):
        img = f.evaluate(z)
        assert np.array_equal(img.vertices, [[0.0, 0.0]])


def test_evaluate_step_usc_at_jump():
    f = build_correspondence(load_map_spec(STEP_USC))
    img = f.evaluate([0.5])
    assert sorted(x[0] for x in img.vertices.tolist()) == [0.25, 0.75]
    assert f.evaluate([0.49]).vertices.tolist() == [[0.75]]
    assert f.evaluate([0.51]).vertices.tolist() == [[0.25]]


def test_evaluate_pennies_center_is_square():
    f = best_response_correspondence(*PENNIES)
    img = f.evaluate([0.5, 0.5])
    got = {tuple(v) for v in img.vertices.tolist()}
    assert got == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_evaluate_rejects_bad_images():
    dom = BoxDomain([0.0], [1.0])

    def bad(z):
        return ConvexImage(np.empty((0, 1)))

    from boxfix.correspondences import Correspondence

    f = Correspondence(1, dom, bad)
    with pytest.raises(EvaluationError):
        f.evaluate([0.5])

    def outside(z):
        return ConvexImage([[2.0]])

    f = Correspondence(1, dom, outside)
    with pytest.raises(EvaluationError):
        f.evaluate([0.5])
    with pytest.raises(EvaluationError):
        f.evaluate([1.5])  # point outside the domain


def test_representative():
    img = ConvexImage([[0.25], [0.75]])
    assert representative(img, "centroid").tolist() == [0.5]
    assert representative(img, "first").tolist() == [0.25]
    sq = ConvexImage([[0, 0], [0, 1], [1, 0], [1, 1]])
    assert representative(sq).tolist() == [0.5, 0.5]
    with pytest.raises(ValueError):
        representative(img, "median")


def test_residual_segment_frozen_value():
    # projection of the origin onto the segment (1,0)-(0,1): minimize
    # |z - (t, 1-t)| over t, analytic minimum at t = 1/2, distance sqrt(1/2)
    img = ConvexImage([[1.0, 0.0], [0.0, 1.0]])
    r = residual([0.0, 0.0], img)
    assert r == pytest.approx(math.sqrt(0.5), abs=1e-12)
    oracle = brute_hull_distance([0.0, 0.0], img.vertices)
    assert r <= oracle + 1e-9


def test_residual_inside_and_endpoint():
    sq = ConvexImage([[0, 0], [0, 1], [1, 0], [1, 1]])
    assert residual([0.4, 0.7], sq) == 0.0
    seg = ConvexImage([[0.0, 0.0], [1.0, 0.0]])
    assert residual([2.0, 0.0], seg) == pytest.approx(1.0, abs=1e-12)


def test_residual_matches_brute_oracle_random():
    rng = np.random.default_rng(7)
    for d in (1, 2, 3):
        for _ in range(25):
            k = int(rng.integers(1, 7))
            v = rng.uniform(-1, 1, size=(k, d))
            z = rng.uniform(-1.5, 1.5, size=d)
            r = distance_to_hull(z, v)
            oracle = brute_hull_distance(z, v)
            assert r <= oracle + 1e-9
            slack = pairwise_diameter(v) * k / 24 + 1e-9
            assert oracle - r <= slack


def test_residual_zero_iff_inside():
    rng = np.random.default_rng(3)
    for _ in range(40):
        v = rng.uniform(-1, 1, size=(4, 2))
        w = rng.dirichlet(np.ones(4))
        inside = w @ v
        assert distance_to_hull(inside, v) <= 1e-9
        far = v.mean(axis=0) + np.array([5.0, 0.0])
        assert distance_to_hull(far, v) > 1.0


def test_residual_nonconvex_uses_points_and_segments():
    img = ConvexImage([[0.0, 0.0], [1.0, 0.0]], convex=False)
    # midpoint of the segment counts for the polyline criterion
    assert residual([0.5, 0.1], img) == pytest.approx(0.1, abs=1e-12)
    # non-consecutive pairs contribute nothing: only the polyline counts
    tri = ConvexImage([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], convex=False)
    assert residual([0.5, 0.5], tri) == pytest.approx(0.5, abs=1e-12)
    lone = ConvexImage([[3.0]], convex=False)
    assert residual([2.0], lone) == pytest.approx(1.0, abs=1e-12)


def test_separating_hyperplane_examples():
    A = BoxDomain([0.1, 0.1], [0.2, 0.2])
    B = [[0.6, 0.6], [0.9, 0.7]]
    cert = separating_hyperplane(A, B)
    assert cert is not None and cert.margin > 0
    assert cert.check(A.corners(), np.asarray(B))

    assert separating_hyperplane([[0.0, 0.0]], [[0.0, 0.0]]) is None

    cert = separating_hyperplane([[0.0, 0.0]], [[1.0, 0.0]])
    assert cert is not None
    assert cert.normal.tolist() == [1.0, 0.0]
    assert cert.offset == pytest.approx(0.5)
    assert cert.margin == pytest.approx(0.5)


def test_separating_hyperplane_none_when_intersecting():
    A = [[0, 0], [2, 0], [0, 2]]
    B = [[1, 1], [3, 3]]
    assert separating_hyperplane(A, B) is None
    with pytest.raises(ValueError):
        separating_hyperplane([[0, 0]], [[0.0]])


def test_separating_hyperplane_high_dim_fallback():
    A = np.zeros((1, 5))
    B = np.ones((1, 5))
    cert = separating_hyperplane(A, B)
    assert cert is not None and cert.check(A, B)


def test_image_hull_over_box_step():
    spec = load_map_spec(STEP_USC)
    hull = image_hull_over_box(spec, (np.array([0.1]), np.array([0.3])))
    assert hull.vertices.tolist() == [[0.75]]
    hull = image_hull_over_box(spec, (np.array([0.4]), np.array([0.6])))
    assert sorted(v[0] for v in hull.vertices.tolist()) == [0.25, 0.75]
    spec = bimatrix_map_spec(*PENNIES)
    assert image_hull_over_box(spec, (np.array([0, 0]), np.array([1, 1]))) is None


def test_image_hull_over_box_piecewise_cover():
    spec = load_map_spec(
        {
            "dimension": 1,
            "domain": {"lo": [0.0], "hi": [1.0]},
            "kind": "piecewise",
            "piecewise": {
                "regions": [
                    {"box": {"lo": [0.0], "hi": [0.5]}, "image": [[0.9]]},
                    {"box": {"lo": [0.5], "hi": [1.0]}, "image": [[0.1]]},
                ],
                "default_image": [[0.5]],
                "convex_valued": True,
            },
        }
    )
    hull = image_hull_over_box(spec, (np.array([0.2]), np.array([0.8])))
    # both regions intersect and fully cover: the default never enters
    assert sorted(v[0] for v in hull.vertices.tolist()) == [0.1, 0.9]
    hull = image_hull_over_box(spec, (np.array([0.0]), np.array([0.4])))
    assert hull.vertices.tolist() == [[0.9]]


@pytest.mark.parametrize(
    "spec_dict",
    [
        STEP_USC,
        STEP_LGDP,
        {
            "dimension": 2,
            "domain": {"lo": [-1, -1], "hi": [1, 1]},
            "kind": "builtin",
            "builtin": {"name": "contraction", "params": {"rate": 0.5, "offset": [0.3, 0.1]}},
        },
        {
            "dimension": 2,
            "domain": {"lo": [0, 0], "hi": [1, 1]},
            "kind": "piecewise",
            "piecewise": {
                "regions": [
                    {"box": {"lo": [0, 0], "hi": [0.5, 1]}, "image": [[0.75, 0.25], [0.75, 0.75]]}
                ],
                "default_image": [[0.25, 0.5]],
                "convex_valued": True,
            },
        },
    ],
)
def test_hull_containment_sampled(spec_dict):
    spec = load_map_spec(spec_dict)
    f = build_correspondence(spec)
    rng = np.random.default_rng(11)
    d = spec.dimension
    span = spec.domain.hi - spec.domain.lo
    for _ in range(25):
        lo = spec.domain.lo + rng.uniform(0, 0.6, d) * span
        hi = lo + rng.uniform(0.05, 0.4, d) * span
        hi = np.minimum(hi, spec.domain.hi)
        hull = image_hull_over_box(spec, (lo, hi))
        assert hull is not None
        for _ in range(40):
            x = rng.uniform(lo, hi)
            img = f.evaluate(x)
            for vert in img.vertices:
                assert distance_to_hull(vert, hull.vertices) <= 1e-9


def test_best_response_examples():
    f = best_response_correspondence(*PENNIES)
    assert f.evaluate([0.9, 0.9]).vertices.tolist() == [[1.0, 0.0]]
    assert len(f.evaluate([0.5, 0.5]).vertices) == 4
    coord = best_response_correspondence([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    assert coord.evaluate([1.0, 1.0]).vertices.tolist() == [[1.0, 1.0]]
    assert residual([1.0, 1.0], coord.evaluate([1.0, 1.0])) == 0.0


def test_best_response_images_are_unit_boxes():
    f = best_response_correspondence(*PENNIES)
    rng = np.random.default_rng(5)
    for _ in range(200):
        z = rng.uniform(0, 1, 2)
        img = f.evaluate(z)
        for v in img.vertices.tolist():
            assert set(v) <= {0.0, 1.0}


def test_best_response_graph_closed_sampled():
    # upper semicontinuity at sampled near-limits: the image at x must
    # absorb images of points converging to x
    f = best_response_correspondence(*PENNIES)
    rng = np.random.default_rng(13)
    targets = [rng.uniform(0, 1, 2) for _ in range(20)]
    targets += [np.array([0.5, rng.uniform(0, 1)]) for _ in range(10)]
    targets += [np.array([rng.uniform(0, 1), 0.5]) for _ in range(10)]
    for x in targets:
        img_x = f.evaluate(x)
        for _ in range(25):
            step = rng.uniform(-1, 1, 2) * 1e-7
            y = np.clip(x + step, 0, 1)
            if np.any(np.abs(np.asarray(x) - 0.5) < 1e-6 - np.abs(step)):
                continue  # y may cross a tie line that x sits short of
            for v in f.evaluate(y).vertices:
                assert distance_to_hull(v, img_x.vertices) <= 1e-9


def test_bimatrix_rejects_bad_matrices():
    with pytest.raises(MapSpecError):
        bimatrix_map_spec([[1, 2, 3], [4, 5, 6]], [[1, 2], [3, 4]])
    with pytest.raises(MapSpecError):
        bimatrix_map_spec([[1, float("nan")], [0, 0]], [[1, 2], [3, 4]])


def test_map_spec_validation_errors():
    with pytest.raises(MapSpecError) as err:
        load_map_spec({"domain": {"lo": [0], "hi": [1]}, "kind": "builtin"})
    assert err.value.field == "dimension"
    with pytest.raises(MapSpecError) as err:
        load_map_spec(
            {
                "dimension": 1,
                "domain": {"lo": [0], "hi": [1]},
                "kind": "piecewise",
                "piecewise": {"regions": []},
            }
        )
    assert "default_image" in err.value.field
    with pytest.raises(MapSpecError):
        load_map_spec("{not json")


def test_piecewise_first_match_priority():
    spec = load_map_spec(
        {
            "dimension": 1,
            "domain": {"lo": [0.0], "hi": [1.0]},
            "kind": "piecewise",
            "piecewise": {
                "regions": [
                    {"box": {"lo": [0.0], "hi": [0.5]}, "image": [[0.9]]},
                    {"box": {"lo": [0.25], "hi": [1.0]}, "image": [[0.1]]},
                ],
                "default_image": [[0.5]],
            },
        }
    )
    f = build_correspondence(spec)
    assert f.evaluate([0.3]).vertices.tolist() == [[0.9]]  # first region wins
    assert f.evaluate([0.5]).vertices.tolist() == [[0.9]]  # boundary: first match
    assert f.evaluate([0.6]).vertices.tolist() == [[0.1]]


def test_lgdp_check_contraction_passes():
    spec = load_map_spec(
        {
            "dimension": 2,
            "domain": {"lo": [-1, -1], "hi": [1, 1]},
            "kind": "builtin",
            "builtin": {"name": "contraction", "params": {"rate": 0.5, "offset": [0.3, 0.1]}},
        }
    )
    f = build_correspondence(spec)
    rep = lgdp_sample_check(f, [-0.5, -0.5], delta=0.05, samples=50, seed=1)
    assert rep.passed and rep.violations == 0
    assert rep.separation is not None


def test_lgdp_check_step_lgdp_at_jump():
    f = build_correspondence(load_map_spec(STEP_LGDP))
    rep = lgdp_sample_check(f, [0.4], delta=0.05, samples=100, seed=2)
    assert rep.passed
    assert rep.dot_min >= 0.4 * 0.4 - 1e-9  # displacements at least 0.4 nearby


def test_lgdp_check_affine_reflection():
    spec = load_map_spec(
        {
            "dimension": 1,
            "domain": {"lo": [0.0], "hi": [1.0]},
            "kind": "piecewise",
            "piecewise": {"regions": [], "default_image": [[1.0]]},
        }
    )

    # f(x) = 1 - x via a custom evaluator on the parsed domain
    from boxfix.correspondences import Correspondence

    f = Correspondence(1, spec.domain, lambda z: ConvexImage([[1.0 - z[0]]]))
    rep = lgdp_sample_check(f, [0.8], delta=0.05, samples=100, seed=3)
    assert rep.passed
    with pytest.raises(ValueError):
        lgdp_sample_check(f, [0.5], delta=0.05)  # fixed point: check undefined
    with pytest.raises(ValueError):
        lgdp_sample_check(f, [0.8], delta=-1.0)


def test_lgdp_check_detects_violation():
    from boxfix.correspondences import Correspondence

    dom = BoxDomain([0.0], [1.0])
    # rounds toward the nearest end: displacements oppose across 0.5
    f = Correspondence(1, dom, lambda z: ConvexImage([[0.0 if z[0] < 0.5 else 1.0]]))
    rep = lgdp_sample_check(f, [0.5], delta=0.05, samples=100, seed=4)
    assert not rep.passed and rep.violations > 0
