import itertools

import pytest
from hypothesis import given, settings, strategies as st

from boxfix.dcn import (
    all_dcn_sets,
    brute_force_is_dcn,
    dcn_extension,
    face_safe,
    is_affinely_separable,
    is_dcn,
    subcube,
)
from boxfix.geometry import all_labels


def all_subsets(d):
    labels = all_labels(d)
    for r in range(len(labels) + 1):
        for combo in itertools.combinations(labels, r):
            yield frozenset(combo)


def test_subcube_examples():
    assert subcube((1, 0)) == {(1, 1), (1, -1)}
    assert subcube((1, 1, 1)) == {(1, 1, 1)}
    assert subcube((-1, 1)) == {(-1, 1)}
    assert len(subcube((0, 1, 0))) == 4
    with pytest.raises(ValueError):
        subcube((0, 0))


def test_is_dcn_examples():
    for lab in all_labels(2):
        assert is_dcn([lab])  # any singleton
    assert not is_dcn(all_labels(2))  # the full set
    assert not is_dcn([(1, 1), (-1, -1)])
    assert not is_dcn(frozenset(), d=2)


def test_is_dcn_witness_is_valid():
    res = is_dcn([(1, 1), (1, -1)])
    assert res and res.witness == (1, 0) and res.cut_included is False
    res = is_dcn([(1, 1), (1, -1), (-1, 1)])  # complement of a singleton
    assert res and res.cut_included is True
    assert subcube(res.witness) == {(-1, -1)}


def test_is_dcn_six_label_sets_d3():
    labels = all_labels(3)
    # missing pair differing in exactly one coordinate: complement is a subcube
    miss_edge = [(1, 1, 1), (1, 1, -1)]
    S = frozenset(labels) - frozenset(miss_edge)
    assert is_dcn(S)
    # missing pair differing in two coordinates: not a dcn set
    miss_far = [(1, 1, 1), (1, -1, -1)]
    S = frozenset(labels) - frozenset(miss_far)
    assert not is_dcn(S)


def test_face_safe_modes():
    assert face_safe([(1, 1, 1)], "equality")
    assert face_safe([(1, 1, 1)], "subcube")
    pair = [(1, 1, 1), (-1, -1, 1)]
    assert not face_safe(pair, "equality")
    assert face_safe(pair, "subcube")  # shared third coordinate
    big = frozenset(all_labels(3)) - {(1, 1, 1), (1, -1, -1)}
    assert not face_safe(big, "equality")
    assert not face_safe(big, "subcube")
    with pytest.raises(ValueError):
        face_safe([(1, 1)], "bogus")
    with pytest.raises(ValueError):
        face_safe([], "equality", d=2)


def test_dcn_extension_examples():
    # missing exactly one label: already the complement of a singleton subcube
    S = frozenset(all_labels(2)) - {(1, -1)}
    assert dcn_extension(S) == frozenset()
    # antipodal pair: one added label suffices; deterministic choice
    add = dcn_extension([(1, 1), (-1, -1)])
    assert add == frozenset({(1, -1)})
    assert is_dcn(frozenset({(1, 1), (-1, -1)}) | add)
    assert dcn_extension(all_labels(2)) is None


@pytest.mark.parametrize("d", [2, 3])
def test_dcn_extension_minimal_and_valid(d):
    for S in all_subsets(d):
        if S == frozenset(all_labels(d)):
            assert dcn_extension(S, d) is None
            continue
        add = dcn_extension(S, d)
        assert is_dcn(S | add, d) or (not S and is_dcn(add, d))
        # minimality by exhaustive search over smaller additions
        rest = frozenset(all_labels(d)) - S
        for r in range(len(add)):
            for combo in itertools.combinations(rest, r):
                assert not is_dcn(S | frozenset(combo), d)


@pytest.mark.parametrize("d", [2, 3])
def test_oracle_equivalence_exhaustive(d):
    for S in all_subsets(d):
        assert bool(is_dcn(S, d)) == brute_force_is_dcn(S, d, K=d), S


@pytest.mark.parametrize("d", [2, 3])
def test_complement_closure(d):
    full = frozenset(all_labels(d))
    for S in all_subsets(d):
        if not S or S == full:
            continue
        assert bool(is_dcn(S, d)) == bool(is_dcn(full - S, d))


@settings(max_examples=60)
@given(st.data())
def test_symmetry_d3(data):
    d = 3
    labels = all_labels(d)
    S = frozenset(
        lab for lab in labels if data.draw(st.booleans(), label=f"in_{lab}")
    )
    perm = data.draw(st.permutations(range(d)))
    flips = data.draw(st.tuples(*[st.sampled_from((1, -1))] * d))
    mapped = frozenset(
        tuple(lab[perm[i]] * flips[i] for i in range(d)) for lab in S
    )
    if not S or S == frozenset(labels):
        return
    assert bool(is_dcn(S, d)) == bool(is_dcn(mapped, d))


@pytest.mark.parametrize("d", [2, 3])
def test_dcn_implies_face_safe_equality(d):
    for S in all_subsets(d):
        if S and is_dcn(S, d):
            assert face_safe(S, "equality", d=d)
        if S and face_safe(S, "subcube", d=d):
            assert S != frozenset(all_labels(d))


def test_affine_separability_examples():
    cube = list(itertools.product((0, 1), repeat=3))
    V = [(0, 0, 0), (1, 0, 0), (0, 1, 0)]
    W = [c for c in cube if c not in V]
    assert is_affinely_separable(V, W)
    # antipodal corners of a square: the diagonals cross
    assert not is_affinely_separable([(0, 0), (1, 1)], [(1, 0), (0, 1)])
    # singleton vs the rest of the square
    sq = list(itertools.product((0, 1), repeat=2))
    assert is_affinely_separable([(0, 0)], [c for c in sq if c != (0, 0)])
    with pytest.raises(ValueError):
        is_affinely_separable([], [(0, 0)])
    with pytest.raises(ValueError):
        is_affinely_separable([(0,) * 4], [(1,) * 4])


@pytest.mark.parametrize("d", [2, 3])
def test_dcn_sets_are_affinely_separable_on_cube_corners(d):
    # the central-hyperplane family is a subfamily of the cross-section one
    full = frozenset(all_labels(d))
    for S in all_dcn_sets(d):
        if S == full or not (full - S):
            continue
        V = [tuple(lab) for lab in S]
        W = [tuple(lab) for lab in full - S]
        assert is_affinely_separable(V, W)


def test_cross_section_admits_non_dcn_sets():
    # a 3-element corner set of the 3-cube separates affinely but has no
    # central-hyperplane realization (sizes are 2^k or 2^d - 2^k only)
    V = [(1, 1, 1), (1, 1, -1), (1, -1, 1)]
    rest = [lab for lab in all_labels(3) if lab not in V]
    assert is_affinely_separable(V, rest)
    assert not is_dcn(V)
