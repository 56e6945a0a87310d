"""Label-set families cut out by hyperplanes through the origin ("dcn sets").

A hyperplane through the origin with normal w splits the 2^d orthants into
those entirely on its positive side, those entirely on its negative side,
and those it cuts.  An orthant with sign vector l lies entirely in the
closed halfspace {w.x >= 0} iff l agrees with sign(w) on every coordinate
where w is nonzero: the orthant's extreme rays are l_i * e_i and the ray
values w.(l_i e_i) = w_i l_i must all be nonnegative.  Hence the orthants
entirely on one side form exactly a *subcube* of the label hypercube,

    subcube(sigma) = { l : l_i = sigma_i for all i with sigma_i != 0 },

where sigma is the sign pattern of w.  Making one collective side-choice for
the cut orthants then yields either a subcube (cut orthants excluded) or the
complement of a subcube (cut orthants included).  A set of orthant labels is
a *dcn set* iff it is of one of these two forms; this module decides that
exactly, by enumerating all 3^d - 1 sign patterns.

Why only sign patterns: the magnitude of w never matters for orthant
membership, so the oracle is free of floating point entirely.

The module also provides the general affine-separability predicate on
polytope vertex subsets (the cross-section reading of the same idea), kept
for study; it admits sets, such as 3-element vertex sets of the cube, that
the central-hyperplane family cannot produce.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .geometry import all_labels, label_index

# Entries in {-1, 0, +1}, not all zero: the sign pattern of a hyperplane normal.
PartialSign = tuple


def partial_signs(d: int):
    """All 3^d - 1 nonzero sign patterns, deterministic order (+1, -1, 0 per axis)."""
    for sigma in itertools.product((1, -1, 0), repeat=d):
        if any(s != 0 for s in sigma):
            yield sigma


def subcube(sigma) -> frozenset:
    """Labels of the orthants entirely on the positive side of the hyperplane
    with normal-sign pattern sigma.  Size is 2^(d - |support|)."""
    d = len(sigma)
    if all(s == 0 for s in sigma):
        raise ValueError("sign pattern must not be all zero")
    if any(s not in (-1, 0, 1) for s in sigma):
        raise ValueError(f"invalid sign pattern {sigma!r}")
    out = []
    for label in all_labels(d):
        if all(s == 0 or l == s for l, s in zip(label, sigma)):
            out.append(label)
    return frozenset(out)


def complement_labels(labels, d: int) -> frozenset:
    return frozenset(all_labels(d)) - frozenset(labels)


@dataclass(frozen=True)
class DcnResult:
    """Decision plus witness: `witness` is the normal sign pattern and
    `cut_included` tells whether the cut orthants were taken with the set
    (complement-of-subcube form) or left out (subcube form)."""

    matched: bool
    witness: tuple | None = None
    cut_included: bool | None = None

    def __bool__(self) -> bool:
        return self.matched


def _infer_dim(labels, d):
    labels = list(labels)
    if d is None:
        if not labels:
            raise ValueError("cannot infer dimension from an empty label set")
        d = len(labels[0])
    for l in labels:
        if len(l) != d:
            raise ValueError("mixed label dimensions")
    return frozenset(labels), d


def is_dcn(labels, d: int | None = None) -> DcnResult:
    """Exact decision whether a label set is a dcn set.

    Subcube witnesses are searched first, then complements, each over the
    deterministic pattern order of :func:`partial_signs`, so the returned
    witness is stable.  The empty set and the full set are never dcn sets.
    """
    S, d = _infer_dim(labels, d)
    for sigma in partial_signs(d):
        if S == subcube(sigma):
            return DcnResult(True, sigma, cut_included=False)
    full = frozenset(all_labels(d))
    for sigma in partial_signs(d):
        if S == full - subcube(sigma):
            return DcnResult(True, sigma, cut_included=True)
    return DcnResult(False)


def face_safe(labels, mode: str = "equality", d: int | None = None) -> bool:
    """Whether a face's label set needs no repair.

    mode "equality": safe iff the set is a dcn set.
    mode "subcube": safe iff the set is contained in some subcube, i.e. all
    labels share a sign on some coordinate.  A face that is not safe is
    called problematic and is a fixed-point candidate.
    """
    S, d = _infer_dim(labels, d)
    if not S:
        raise ValueError("face label set must be nonempty")
    if mode == "equality":
        return bool(is_dcn(S, d))
    if mode == "subcube":
        for i in range(d):
            for s in (1, -1):
                if all(l[i] == s for l in S):
                    return True
        return False
    raise ValueError(f"unknown face-safe mode {mode!r}")


def all_dcn_sets(d: int) -> list:
    """Every dcn set in dimension d, deduplicated, deterministic order."""
    full = frozenset(all_labels(d))
    seen = []
    have = set()
    for sigma in partial_signs(d):
        for S in (subcube(sigma), full - subcube(sigma)):
            if S not in have:
                have.add(S)
                seen.append(S)
    return seen


def dcn_extension(labels, d: int | None = None) -> frozenset | None:
    """A minimal-cardinality set of labels whose addition makes the set dcn.

    Returns the empty frozenset when the set already is a dcn set and None
    when the set is full (no proper superset exists).  Ties between minimal
    additions are broken lexicographically on the sorted index tuple of the
    added labels, so the result is deterministic.
    """
    S, d = _infer_dim(labels, d)
    full = frozenset(all_labels(d))
    if S == full:
        return None
    if is_dcn(S, d):
        return frozenset()
    best = None
    best_key = None
    for T in all_dcn_sets(d):
        if S <= T:
            added = T - S
            key = (len(added), tuple(sorted(label_index(l) for l in added)))
            if best_key is None or key < best_key:
                best, best_key = added, key
    return best


@lru_cache(maxsize=None)
def _brute_family(d: int, K: int) -> frozenset:
    """All label sets realizable from integer normals w in {-K..K}^d \\ {0}:
    for each w, classify every orthant by the signs of its extreme-ray values
    w_i * l_i, then take each side with and without the cut orthants."""
    labels = all_labels(d)
    family = set()
    for w in itertools.product(range(-K, K + 1), repeat=d):
        if all(c == 0 for c in w):
            continue
        pos, neg, cut = [], [], []
        for l in labels:
            vals = [w[i] * l[i] for i in range(d) if w[i] != 0]
            if all(v > 0 for v in vals):
                pos.append(l)
            elif all(v < 0 for v in vals):
                neg.append(l)
            else:
                cut.append(l)
        for side in (pos, neg):
            family.add(frozenset(side))
            family.add(frozenset(side) | frozenset(cut))
    family.discard(frozenset())
    family.discard(frozenset(labels))
    return frozenset(family)


def brute_force_is_dcn(labels, d: int | None = None, K: int = 2) -> bool:
    """Independent geometric oracle for :func:`is_dcn` (d <= 3 practical)."""
    S, d = _infer_dim(labels, d)
    if K < 1:
        raise ValueError("K must be >= 1")
    return S in _brute_family(d, K)


# ---------------------------------------------------------------------------
# Affine separability of vertex subsets (exact, d <= 3)


def _frac_points(pts):
    return [tuple(Fraction(float(c)) for c in p) for p in pts]


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _cross3(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _candidate_axes(V, W):
    """Axes that realize the closest pair between two disjoint polytopes:
    vertex-vertex differences, edge perpendiculars / vertex-edge rejections,
    and in 3D face normals and edge-edge cross products."""
    d = len(V[0])
    axes = []
    if d == 1:
        axes.append((Fraction(1),))
        return axes
    for a in V:
        for b in W:
            axes.append(_sub(b, a))
    pairs_V = [(_sub(q, p), p) for p, q in itertools.combinations(V, 2)]
    pairs_W = [(_sub(q, p), p) for p, q in itertools.combinations(W, 2)]
    if d == 2:
        for e, _ in pairs_V + pairs_W:
            axes.append((-e[1], e[0]))
    else:
        for pts in (V, W):
            for p, q, r in itertools.combinations(pts, 3):
                axes.append(_cross3(_sub(q, p), _sub(r, p)))
        for eV, _ in pairs_V:
            for eW, _ in pairs_W:
                axes.append(_cross3(eV, eW))
        for edges, verts in ((pairs_V, W), (pairs_W, V)):
            for e, origin in edges:
                ee = _dot(e, e)
                for v in verts:
                    u = _sub(v, origin)
                    axes.append(tuple(ui * ee - ei * _dot(u, e) for ui, ei in zip(u, e)))
    return axes


def is_affinely_separable(V, W) -> bool:
    """Exact decision of conv(V) and conv(W) being disjoint, d <= 3.

    Implements the cross-section reading of face safety on general polytope
    vertex subsets.  Decided by enumerating every axis that can realize the
    closest pair of two disjoint convex polytopes and testing strict
    separation in rational arithmetic.  Provided for study; the solver uses
    the central-hyperplane family (:func:`is_dcn`) exclusively.
    """
    V, W = list(V), list(W)
    if not V or not W:
        raise ValueError("vertex sets must be nonempty")
    d = len(V[0])
    if d > 3:
        raise ValueError("exact affine separability supports d <= 3 only")
    if any(len(p) != d for p in V + W):
        raise ValueError("mixed point dimensions")
    Vf, Wf = _frac_points(V), _frac_points(W)
    for axis in _candidate_axes(Vf, Wf):
        if all(c == 0 for c in axis):
            continue
        vV = [_dot(axis, p) for p in Vf]
        vW = [_dot(axis, p) for p in Wf]
        if max(vV) < min(vW) or max(vW) < min(vV):
            return True
    return False
