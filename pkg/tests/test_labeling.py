import numpy as np
import pytest
from hypothesis import given, strategies as st

from boxfix.correspondences import (
    ConvexImage,
    Correspondence,
    build_correspondence,
    load_map_spec,
)
from boxfix.geometry import BoxDomain, GridSpec
from boxfix.labeling import (
    GridLabeling,
    LabelingConfig,
    LabelingError,
    admissible_labels,
    choose_label,
    dump_grid_csv,
    label_grid,
)


def constant_map(value, lo, hi):
    value = np.asarray(value, dtype=float)
    dom = BoxDomain(lo, hi)
    return Correspondence(len(value), dom, lambda z: ConvexImage(value.reshape(1, -1)))


def test_admissible_labels_examples():
    assert admissible_labels([0.3, -0.2]) == [(1, -1)]
    assert admissible_labels([0.0, 0.5]) == [(1, 1), (-1, 1)]
    assert set(admissible_labels([0.0, 0.0])) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


@given(
    st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=4),
    st.floats(1e-12, 1e-3),
)
def test_admissible_labels_size_property(dz, tau):
    labels = admissible_labels(dz, tau)
    zeros = sum(1 for c in dz if abs(c) <= tau)
    assert len(labels) == 2**zeros
    assert len(set(labels)) == len(labels)
    for lab in labels:
        for c, l in zip(dz, lab):
            if abs(c) > tau:
                assert (c > 0) == (l > 0)


def test_choose_label_interior():
    dom = BoxDomain([-1, -1], [1, 1])
    img = ConvexImage([[0.5, 0.0]])  # dz = (0.3, -0.2) from z
    vl = choose_label(np.array([0.2, 0.2]), img, dom)
    assert vl.label == (1, -1) and not vl.fixed


def test_choose_label_wall_forcing():
    dom = BoxDomain([-1, -1], [1, 1])
    z = np.array([1.0, 0.0])
    img = ConvexImage([[1.0, 0.4]])  # dz = (0, 0.4): wall forces axis 1 inward
    vl = choose_label(z, img, dom)
    assert vl.label == (-1, 1)


def test_choose_label_corner_matches_corner_label():
    dom = BoxDomain([-1, -1], [1, 1])
    z = np.array([1.0, 1.0])
    img = ConvexImage([[0.99, 0.99]])  # small inward displacement
    vl = choose_label(z, img, dom)
    assert vl.label == (-1, -1)


def test_choose_label_fixed_hit_by_residual():
    dom = BoxDomain([0, 0], [1, 1])
    z = np.array([0.5, 0.5])
    # fat image containing z with a far-away centroid
    img = ConvexImage([[0, 0], [1, 0], [0, 1], [1, 1]])
    vl = choose_label(z, img, dom)
    assert vl.fixed and vl.residual == 0.0


def test_choose_label_outward_displacement_errors():
    dom = BoxDomain([0, 0], [1, 1])
    z = np.array([1.0, 0.5])

    img = ConvexImage([[1.0 + 5e-9, 0.5 + 0.2]])  # leaves through the wall
    with pytest.raises(LabelingError):
        choose_label(z, img, dom, tau_sign=1e-12)


def test_label_grid_identity_all_fixed():
    spec = load_map_spec(
        {
            "dimension": 1,
            "domain": {"lo": [0.0], "hi": [1.0]},
            "kind": "builtin",
            "builtin": {"name": "identity", "params": {}},
        }
    )
    f = build_correspondence(spec)
    gl = label_grid(GridSpec(f.domain, 4), f, LabelingConfig(early_exit=False))
    assert gl.is_total and gl.fixed.all()
    assert np.allclose(gl.residuals, 0.0)
    gl = label_grid(GridSpec(f.domain, 4), f)  # early exit at the first vertex
    assert gl.early_hit == 0 and gl.labeled == 1


def test_label_grid_constant_example():
    f = constant_map([0.0, 0.0], [-1, -1], [1, 1])
    gl = label_grid(GridSpec(f.domain, 2), f, LabelingConfig(early_exit=False))
    assert gl.vertex_label((2, 2)).label == (-1, -1)  # vertex (1, 1)
    assert gl.vertex_label((0, 0)).label == (1, 1)  # vertex (-1, -1)
    center = gl.vertex_label((1, 1))
    assert center.fixed and center.residual == 0.0


def test_label_grid_step_usc():
    f = build_correspondence(load_map_spec(
        {
            "dimension": 1,
            "domain": {"lo": [0.0], "hi": [1.0]},
            "kind": "builtin",
            "builtin": {"name": "step-usc", "params": {}},
        }
    ))
    gl = label_grid(GridSpec(f.domain, 10), f, LabelingConfig(early_exit=False))
    for i in range(11):
        x = i / 10
        vl = gl.vertex_label((i,))
        if x < 0.5:
            assert vl.label == (1,)
        elif x > 0.5:
            assert vl.label == (-1,)
        else:
            assert vl.fixed and vl.residual == 0.0


def test_label_grid_matches_choose_label():
    f = constant_map([0.3, -0.2], [-1, -1], [1, 1])
    grid = GridSpec(f.domain, 5)
    gl = label_grid(grid, f, LabelingConfig(early_exit=False))
    import itertools

    for multi in itertools.product(range(6), repeat=2):
        z = grid.vertex(multi)
        want = choose_label(z, f.evaluate(z), f.domain)
        got = gl.vertex_label(multi)
        assert got.fixed == want.fixed
        assert got.label == want.label


@pytest.mark.parametrize("N", [3, 8])
def test_boundary_invariant(N):
    f = constant_map([0.1, 0.2], [0, 0], [1, 1])
    grid = GridSpec(f.domain, N)
    gl = label_grid(grid, f, LabelingConfig(early_exit=False))
    import itertools

    for multi in itertools.product(range(N + 1), repeat=2):
        vl = gl.vertex_label(multi)
        if vl.fixed:
            continue
        for axis, i in enumerate(multi):
            if i == 0:
                assert vl.label[axis] == 1
            elif i == N:
                assert vl.label[axis] == -1


def test_label_grid_deterministic():
    f = constant_map([0.3, -0.2], [-1, -1], [1, 1])
    grid = GridSpec(f.domain, 6)
    a = label_grid(grid, f, LabelingConfig(early_exit=False))
    b = label_grid(grid, f, LabelingConfig(early_exit=False))
    assert np.array_equal(a.signs, b.signs)
    assert np.array_equal(a.fixed, b.fixed)


@given(
    st.tuples(st.floats(-1, 1), st.floats(-1, 1)).filter(
        lambda dz: all(abs(c) > 4e-6 for c in dz)
    ),
    st.tuples(st.floats(-1e-6, 1e-6), st.floats(-1e-6, 1e-6)),
)
def test_label_perturbation_stability(dz, noise):
    # components above 2 * tau_sign keep their label under sub-tau noise
    tau = 2e-6
    base = admissible_labels(dz, tau)
    shifted = admissible_labels([c + n for c, n in zip(dz, noise)], tau)
    assert base == shifted
    assert len(base) == 1


def test_dump_grid_csv_roundtrip(tmp_path):
    f = constant_map([0.25, 0.25], [0, 0], [1, 1])
    grid = GridSpec(f.domain, 4)
    gl = label_grid(grid, f, LabelingConfig(early_exit=False))
    out = tmp_path / "grid.csv"
    dump_grid_csv(gl, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "i1,i2,x1,x2,s1,s2,is_fixed,residual"
    assert len(lines) == 1 + 25
    # the fixed vertex (1, 1): signs empty, residual recorded
    row = dict(zip(lines[0].split(","), lines[6].split(",")))
    assert (row["i1"], row["i2"]) == ("1", "1")
    assert row["is_fixed"] == "1" and row["s1"] == "" and row["residual"] == "0.0"
    partial = label_grid(grid, f)  # early exit leaves the dump undefined
    with pytest.raises(ValueError):
        dump_grid_csv(partial, tmp_path / "nope.csv")
