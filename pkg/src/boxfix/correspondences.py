"""Multivalued maps on box domains.

A correspondence maps each point of a box to a compact set represented by a
finite vertex list (a ConvexImage): the set is the convex hull of the
vertices, or, for maps admitted with convex_valued=False, the listed point
cloud itself.  This module provides evaluation, representative selection,
the distance-to-image residual, separation certificates, a small builtin
catalog, serializable map specs, 2x2 best-response correspondences, and the
sampled direction-preservation check for discontinuous maps.

Upper semicontinuity of user-supplied evaluators is an input assumption: it
is undecidable from finitely many evaluations and is verified analytically
only for the builtin catalog.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import BoxDomain, DEFAULT_SIGN_TOL, sign_of

BUILTIN_NAMES = ("constant", "contraction", "step-usc", "step-lgdp", "identity")


class MapSpecError(ValueError):
    """Invalid map description; `field` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class EvaluationError(RuntimeError):
    """An evaluator returned an unusable image."""


@dataclass
class ConvexImage:
    """One correspondence value: conv(vertices), or the raw point cloud when
    convex is False."""

    vertices: np.ndarray
    convex: bool = True

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1) if v.size else v.reshape(0, 1)
        self.vertices = v


@dataclass
class MapSpec:
    """Serializable description of a correspondence (see the JSON schema in
    the README).  kind is one of builtin / piecewise / bimatrix."""

    dimension: int
    domain: BoxDomain
    kind: str
    payload: dict
    raw: dict = field(repr=False, default_factory=dict)


@dataclass
class Correspondence:
    """Evaluable multivalued map on a box: evaluator is a pure function
    point -> ConvexImage, deterministic bit for bit."""

    dimension: int
    domain: BoxDomain
    evaluator: object
    convex_valued: bool = True
    spec: MapSpec | None = None

    def evaluate(self, z, tol: float = DEFAULT_SIGN_TOL) -> ConvexImage:
        """Evaluate at z, validating the image.

        Raises EvaluationError (naming z) when the image is empty, not
        finite, of wrong dimension, or leaves the domain beyond tol.
        Scalar loops on purpose: this runs once per grid vertex.
        """
        z = np.asarray(z, dtype=float).reshape(-1)
        d = self.dimension
        if z.size != d:
            raise EvaluationError(f"point {z.tolist()} has wrong dimension")
        lo, hi = self.domain.lo, self.domain.hi
        for j in range(d):
            if not lo[j] - tol <= z[j] <= hi[j] + tol:  # NaN fails too
                raise EvaluationError(f"point {z.tolist()} outside the domain")
        img = self.evaluator(z)
        v = img.vertices
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] != d:
            raise EvaluationError(f"empty or misshapen image at z={z.tolist()}")
        for row in v.tolist():
            for j in range(d):
                if not lo[j] - tol <= row[j] <= hi[j] + tol:
                    if not np.isfinite(row[j]):
                        raise EvaluationError(f"non-finite image vertex at z={z.tolist()}")
                    raise EvaluationError(f"image vertex outside the domain at z={z.tolist()}")
        img.convex = self.convex_valued
        return img

    __call__ = evaluate


def evaluate(f: Correspondence, z, tol: float = DEFAULT_SIGN_TOL) -> ConvexImage:
    return f.evaluate(z, tol)


def representative(img: ConvexImage, policy: str = "centroid") -> np.ndarray:
    """One point of the image: "centroid" is the vertex average (always in
    the hull), "first" is the first listed vertex."""
    if policy == "centroid":
        return img.vertices.mean(axis=0)
    if policy == "first":
        return img.vertices[0].copy()
    raise ValueError(f"unknown representative policy {policy!r}")


# ---------------------------------------------------------------------------
# Distance to a convex hull (exact at desk scale)


def _point_segment_distance(z, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(z - a))
    t = float((z - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(z - (a + t * ab)))


def distance_to_hull(z, vertices) -> float:
    """Euclidean distance from z to conv(vertices).

    By Caratheodory the nearest point lies in a simplex spanned by at most
    d+1 affinely independent vertices, so the exact distance is the minimum
    over all such subsets of the distance to that simplex (computed by
    projecting onto the affine hull and checking the affine weights).
    Intended for small vertex lists; cost grows combinatorially.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    v = np.asarray(vertices, dtype=float)
    if v.ndim == 1:
        v = v.reshape(-1, 1)
    k, d = v.shape
    if k == 0:
        raise ValueError("empty vertex list")
    if k == 1:
        return float(np.linalg.norm(z - v[0]))
    if k == 2:
        return _point_segment_distance(z, v[0], v[1])
    best = min(float(np.linalg.norm(z - v[i])) for i in range(k))
    if best <= 1e-15:
        return 0.0
    for size in range(2, min(k, d + 1) + 1):
        for subset in itertools.combinations(range(k), size):
            pts = v[list(subset)]
            base = pts[0]
            B = (pts[1:] - base).T  # (d, size-1)
            mu, _, rank, _ = np.linalg.lstsq(B, z - base, rcond=None)
            if rank < size - 1:
                continue  # affinely dependent; faces covered by smaller subsets
            coeffs = np.concatenate(([1.0 - mu.sum()], mu))
            if (coeffs >= -1e-12).all():
                dist = float(np.linalg.norm(z - (base + B @ mu)))
                if dist < best:
                    best = dist
    return max(best, 0.0)


def residual(z, img: ConvexImage) -> float:
    """Distance from z to the image set; zero exactly at fixed points for
    convex-valued maps.

    For non-convex images the set is the listed cloud; the reported value is
    the minimum distance to the listed points and the segments between
    consecutive listed points, an upper-bound style criterion (the true
    membership test is distance to the points alone).
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    v = img.vertices
    if img.convex:
        return distance_to_hull(z, v)
    best = min(float(np.linalg.norm(z - v[i])) for i in range(len(v)))
    for i in range(len(v) - 1):
        best = min(best, _point_segment_distance(z, v[i], v[i + 1]))
    return best


# ---------------------------------------------------------------------------
# Separation certificates


@dataclass
class SeparationCertificate:
    """Hyperplane normal.x = offset with normal.x <= offset - margin on the
    low set and normal.y >= offset + margin on the high set; margin > 0."""

    normal: np.ndarray
    offset: float
    margin: float

    def check(self, low_points, high_points, slack: float = 1e-12) -> bool:
        w = np.asarray(self.normal, dtype=float)
        lo = np.asarray(low_points, dtype=float)
        hi = np.asarray(high_points, dtype=float)
        if self.margin <= 0 or not np.any(w != 0.0):
            return False
        return bool(
            (lo @ w <= self.offset - self.margin + slack).all()
            and (hi @ w >= self.offset + self.margin - slack).all()
        )


def _as_point_set(obj) -> np.ndarray:
    if isinstance(obj, BoxDomain):
        return obj.corners()
    if isinstance(obj, ConvexImage):
        return obj.vertices
    if isinstance(obj, tuple) and len(obj) == 2:
        lo = np.asarray(obj[0], dtype=float).reshape(-1)
        hi = np.asarray(obj[1], dtype=float).reshape(-1)
        if lo.shape == hi.shape and (lo <= hi).all():
            from .geometry import corner_offsets

            offs = corner_offsets(lo.size)
            return np.where(offs == 1, hi[None, :], lo[None, :])
    a = np.asarray(obj, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return a


def _separation_axes(A, B, d):
    axes = []
    if d == 1:
        axes.append(np.array([1.0]))
        return axes
    for a in A:
        for b in B:
            axes.append(b - a)
    if d == 2:
        for pts in (A, B):
            for p, q in itertools.combinations(pts, 2):
                e = q - p
                axes.append(np.array([-e[1], e[0]]))
    elif d == 3:
        for pts in (A, B):
            for p, q, r in itertools.combinations(pts, 3):
                axes.append(np.cross(q - p, r - p))
        for (p, q), (r, s) in itertools.product(
            itertools.combinations(A, 2), itertools.combinations(B, 2)
        ):
            axes.append(np.cross(q - p, s - r))
        for edges, verts in ((A, B), (B, A)):
            for p, q in itertools.combinations(edges, 2):
                e = q - p
                ee = float(e @ e)
                for vtx in verts:
                    u = vtx - p
                    axes.append(u * ee - e * float(u @ e))
    return axes


def _best_axis_certificate(A, B, axes):
    best = None
    for axis in axes:
        n = float(np.linalg.norm(axis))
        if n < 1e-300:
            continue
        u = axis / n
        for w in (u, -u):
            hi_a = float((A @ w).max())
            lo_b = float((B @ w).min())
            margin = 0.5 * (lo_b - hi_a)
            if margin > 1e-12 and (best is None or margin > best.margin):
                best = SeparationCertificate(w, hi_a + margin, margin)
    return best


def separating_hyperplane(A, B) -> SeparationCertificate | None:
    """A strict separation certificate between conv(A) and conv(B), or None.

    A box may be passed as a BoxDomain or an (lo, hi) pair; it contributes
    its corners.  For d <= 3 the search enumerates every axis that can
    realize the closest pair of two disjoint polytopes, so a None answer is
    a proof of intersection.  For d >= 4 an alternating-projection fallback
    is used: a returned certificate is sound (verified by the inequalities)
    but None only means "not found".
    """
    Ap, Bp = _as_point_set(A), _as_point_set(B)
    if Ap.shape[1] != Bp.shape[1]:
        raise ValueError("dimension mismatch between point sets")
    d = Ap.shape[1]
    if d <= 3:
        return _best_axis_certificate(Ap, Bp, _separation_axes(Ap, Bp, d))
    # fallback: alternate projections between the hulls, then try that axis
    x = Ap.mean(axis=0)
    y = Bp.mean(axis=0)
    for _ in range(64):
        y = _project_to_hull(x, Bp)
        x = _project_to_hull(y, Ap)
    axis = y - x
    cert = _best_axis_certificate(Ap, Bp, [axis])
    if cert is not None and cert.check(Ap, Bp):
        return cert
    return None


def _project_to_hull(z, vertices) -> np.ndarray:
    """Nearest point of conv(vertices) to z, by the same subset enumeration
    as distance_to_hull."""
    z = np.asarray(z, dtype=float).reshape(-1)
    v = np.asarray(vertices, dtype=float)
    k, d = v.shape
    best_p = v[0]
    best = float(np.linalg.norm(z - v[0]))
    for i in range(1, k):
        dist = float(np.linalg.norm(z - v[i]))
        if dist < best:
            best, best_p = dist, v[i]
    for size in range(2, min(k, d + 1) + 1):
        for subset in itertools.combinations(range(k), size):
            pts = v[list(subset)]
            base = pts[0]
            B = (pts[1:] - base).T
            mu, _, rank, _ = np.linalg.lstsq(B, z - base, rcond=None)
            if rank < size - 1:
                continue
            if (np.concatenate(([1.0 - mu.sum()], mu)) >= -1e-12).all():
                p = base + B @ mu
                dist = float(np.linalg.norm(z - p))
                if dist < best:
                    best, best_p = dist, p
    return best_p


# ---------------------------------------------------------------------------
# Map specs: parsing and builders


def _parse_point(obj, d, field_name):
    try:
        p = np.asarray(obj, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise MapSpecError(field_name, f"not a numeric vector: {obj!r}") from None
    if p.size != d:
        raise MapSpecError(field_name, f"expected {d} coordinates, got {p.size}")
    if not np.isfinite(p).all():
        raise MapSpecError(field_name, "coordinates must be finite")
    return p


def _parse_points(obj, d, field_name):
    if not isinstance(obj, (list, tuple)) or not obj:
        raise MapSpecError(field_name, "expected a nonempty list of points")
    return np.stack([_parse_point(p, d, f"{field_name}[{i}]") for i, p in enumerate(obj)])


def _parse_box(obj, d, field_name):
    if not isinstance(obj, dict) or "lo" not in obj or "hi" not in obj:
        raise MapSpecError(field_name, 'expected {"lo": [..], "hi": [..]}')
    lo = _parse_point(obj["lo"], d, f"{field_name}.lo")
    hi = _parse_point(obj["hi"], d, f"{field_name}.hi")
    try:
        return BoxDomain(lo, hi)
    except ValueError as exc:
        raise MapSpecError(field_name, str(exc)) from None


def load_map_spec(source) -> MapSpec:
    """Parse a MapSpec from a dict, a JSON string, or a file path."""
    if isinstance(source, MapSpec):
        return source
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise MapSpecError("map", f"cannot read {source}: {exc}") from None
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MapSpecError("map", f"malformed JSON in {source}: {exc}") from None
    elif isinstance(source, (str, Path)):
        try:
            obj = json.loads(str(source))
        except json.JSONDecodeError as exc:
            raise MapSpecError("map", f"malformed JSON: {exc}") from None
    else:
        obj = source
    if not isinstance(obj, dict):
        raise MapSpecError("map", "spec must be a JSON object")

    if "dimension" not in obj:
        raise MapSpecError("dimension", "missing")
    try:
        d = int(obj["dimension"])
    except (TypeError, ValueError):
        raise MapSpecError("dimension", f"not an integer: {obj['dimension']!r}") from None
    if d < 1:
        raise MapSpecError("dimension", "must be >= 1")
    if "domain" not in obj:
        raise MapSpecError("domain", "missing")
    domain = _parse_box(obj["domain"], d, "domain")
    kind = obj.get("kind")
    if kind not in ("builtin", "piecewise", "bimatrix"):
        raise MapSpecError("kind", f"must be builtin, piecewise or bimatrix, got {kind!r}")
    if kind not in obj:
        raise MapSpecError(kind, f'missing payload object "{kind}"')
    payload = obj[kind]
    if not isinstance(payload, dict):
        raise MapSpecError(kind, "payload must be an object")
    spec = MapSpec(dimension=d, domain=domain, kind=kind, payload=payload, raw=obj)
    build_correspondence(spec)  # validates the payload eagerly
    return spec


def _builtin_params(spec: MapSpec):
    name = spec.payload.get("name")
    if name not in BUILTIN_NAMES:
        raise MapSpecError("builtin.name", f"unknown builtin {name!r}")
    params = spec.payload.get("params", {})
    if not isinstance(params, dict):
        raise MapSpecError("builtin.params", "must be an object")
    return name, params


def _build_builtin(spec: MapSpec) -> Correspondence:
    d, dom = spec.dimension, spec.domain
    name, params = _builtin_params(spec)
    if name == "constant":
        value = _parse_point(params.get("value"), d, "builtin.params.value")
        img = value.reshape(1, -1)

        def ev(z, img=img):
            return ConvexImage(img.copy())

    elif name == "contraction":
        rate = float(params.get("rate", 0.5))
        offset = _parse_point(params.get("offset"), d, "builtin.params.offset")
        if not 0.0 <= rate < 1.0:
            raise MapSpecError("builtin.params.rate", "must be in [0, 1)")

        def ev(z, rate=rate, offset=offset):
            return ConvexImage((rate * z + offset).reshape(1, -1))

    elif name == "identity":

        def ev(z):
            return ConvexImage(z.reshape(1, -1))

    elif name in ("step-usc", "step-lgdp"):
        if d != 1:
            raise MapSpecError("dimension", f"{name} is one-dimensional")
        if name == "step-usc":
            jump = float(params.get("jump", 0.5))
            left = float(params.get("left", 0.75))
            right = float(params.get("right", 0.25))

            def ev(z, jump=jump, left=left, right=right):
                x = z[0]
                if x < jump:
                    return ConvexImage([[left]])
                if x > jump:
                    return ConvexImage([[right]])
                return ConvexImage([[min(left, right)], [max(left, right)]])

        else:
            jump = float(params.get("jump", 0.4))
            left = float(params.get("left", 0.8))
            right = float(params.get("right", 0.9))

            def ev(z, jump=jump, left=left, right=right):
                return ConvexImage([[left if z[0] <= jump else right]])

    return Correspondence(d, dom, ev, convex_valued=True, spec=spec)


def _build_piecewise(spec: MapSpec) -> Correspondence:
    d, dom = spec.dimension, spec.domain
    p = spec.payload
    regions_raw = p.get("regions")
    if not isinstance(regions_raw, list):
        raise MapSpecError("piecewise.regions", "expected a list")
    regions = []
    for i, r in enumerate(regions_raw):
        if not isinstance(r, dict) or "box" not in r or "image" not in r:
            raise MapSpecError(f"piecewise.regions[{i}]", 'expected {"box":.., "image":..}')
        box = _parse_box(r["box"], d, f"piecewise.regions[{i}].box")
        img = _parse_points(r["image"], d, f"piecewise.regions[{i}].image")
        regions.append((box, img))
    if "default_image" not in p:
        raise MapSpecError("piecewise.default_image", "missing (mandatory)")
    default = _parse_points(p["default_image"], d, "piecewise.default_image")
    convex = bool(p.get("convex_valued", True))

    def ev(z, regions=regions, default=default):
        for box, img in regions:
            if box.contains(z):
                return ConvexImage(img.copy(), convex=convex)
        return ConvexImage(default.copy(), convex=convex)

    return Correspondence(d, dom, ev, convex_valued=convex, spec=spec)


def _parse_matrix(obj, field_name):
    try:
        m = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise MapSpecError(field_name, f"not a numeric matrix: {obj!r}") from None
    if m.shape != (2, 2):
        raise MapSpecError(field_name, f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise MapSpecError(field_name, "entries must be finite")
    return m


def _build_bimatrix(spec: MapSpec) -> Correspondence:
    if spec.dimension != 2:
        raise MapSpecError("dimension", "bimatrix specs are two-dimensional")
    unit = BoxDomain([0.0, 0.0], [1.0, 1.0])
    if spec.domain != unit:
        raise MapSpecError("domain", "bimatrix specs live on [0,1]^2")
    A = _parse_matrix(spec.payload.get("A"), "bimatrix.A")
    B = _parse_matrix(spec.payload.get("B"), "bimatrix.B")
    f = best_response_correspondence(A, B)
    f.spec = spec
    return f


def build_correspondence(spec: MapSpec) -> Correspondence:
    """Turn a parsed MapSpec into an evaluable Correspondence."""
    if spec.kind == "builtin":
        return _build_builtin(spec)
    if spec.kind == "piecewise":
        return _build_piecewise(spec)
    if spec.kind == "bimatrix":
        return _build_bimatrix(spec)
    raise MapSpecError("kind", f"unknown kind {spec.kind!r}")


def bimatrix_map_spec(A, B) -> MapSpec:
    """MapSpec wrapper around a 2x2 best-response correspondence."""
    A = _parse_matrix(A, "bimatrix.A")
    B = _parse_matrix(B, "bimatrix.B")
    raw = {
        "dimension": 2,
        "domain": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]},
        "kind": "bimatrix",
        "bimatrix": {"A": A.tolist(), "B": B.tolist()},
    }
    return load_map_spec(raw)


def best_response_correspondence(A, B, tie_tol: float = DEFAULT_SIGN_TOL) -> Correspondence:
    """Joint best-response correspondence of a 2x2 bimatrix game on [0,1]^2.

    Coordinates (p, q) are the probabilities of each player's first
    strategy.  The image at (p, q) is BR1(q) x BR2(p) where each factor is
    {0}, {1}, or [0,1], decided by comparing expected payoffs with tie
    tolerance tie_tol, so images are boxes and the correspondence is upper
    semicontinuous by construction.  Fixed points are Nash equilibria.
    """
    A = _parse_matrix(A, "bimatrix.A")
    B = _parse_matrix(B, "bimatrix.B")
    dom = BoxDomain([0.0, 0.0], [1.0, 1.0])

    def br_points(diff):
        s = sign_of(diff, tie_tol)
        if s > 0:
            return (1.0,)
        if s < 0:
            return (0.0,)
        return (0.0, 1.0)

    def ev(z, A=A, B=B):
        p, q = z
        diff1 = (A[0, 0] - A[1, 0]) * q + (A[0, 1] - A[1, 1]) * (1.0 - q)
        diff2 = (B[0, 0] - B[0, 1]) * p + (B[1, 0] - B[1, 1]) * (1.0 - p)
        br1 = br_points(diff1)
        br2 = br_points(diff2)
        return ConvexImage([[a, b] for a in br1 for b in br2])

    return Correspondence(2, dom, ev, convex_valued=True)


# ---------------------------------------------------------------------------
# Image hull over a box (for sound spurious-candidate filtering)


def _boxes_cover(lo, hi, boxes) -> bool:
    """Whether the closed box [lo, hi] is covered by the union of the closed
    boxes in `boxes`.

    Subtracts the first box: the part of [lo, hi] inside it is covered, and
    the remaining slabs are checked against the rest.  May report False for
    boxes covered only along measure-zero seams, which is the conservative
    direction for its caller (the default image is then included)."""
    if (lo > hi).any():
        return True
    if not boxes:
        return False
    blo, bhi = boxes[0]
    ilo, ihi = np.maximum(lo, blo), np.minimum(hi, bhi)
    if (ilo > ihi).any():
        return _boxes_cover(lo, hi, boxes[1:])
    rest = boxes[1:]
    cur_lo, cur_hi = lo.copy(), hi.copy()
    for axis in range(lo.size):
        if cur_lo[axis] < ilo[axis]:
            nlo, nhi = cur_lo.copy(), cur_hi.copy()
            nhi[axis] = ilo[axis]
            if not _boxes_cover(nlo, nhi, rest):
                return False
            cur_lo[axis] = ilo[axis]
        if ihi[axis] < cur_hi[axis]:
            nlo, nhi = cur_lo.copy(), cur_hi.copy()
            nlo[axis] = ihi[axis]
            if not _boxes_cover(nlo, nhi, rest):
                return False
            cur_hi[axis] = ihi[axis]
    return True


def image_hull_over_box(spec: MapSpec, box) -> ConvexImage | None:
    """A ConvexImage whose hull contains f(x) for every x in the box, or
    None when not computable for this spec kind (e.g. bimatrix).

    For piecewise specs this is the hull of the images of every region
    intersecting the box, plus the default image unless the regions cover
    the box.  First-match priority can only shrink the true image union, so
    the result is a sound superset.
    """
    if isinstance(box, BoxDomain):
        lo, hi = box.lo.copy(), box.hi.copy()
    else:
        lo = np.asarray(box[0], dtype=float).reshape(-1)
        hi = np.asarray(box[1], dtype=float).reshape(-1)
    if spec.kind == "bimatrix":
        return None
    if spec.kind == "piecewise":
        f = build_correspondence(spec)
        p = spec.payload
        pieces = []
        hit_boxes = []
        for r in p["regions"]:
            rbox = _parse_box(r["box"], spec.dimension, "piecewise.regions[].box")
            if (np.maximum(lo, rbox.lo) <= np.minimum(hi, rbox.hi)).all():
                pieces.append(_parse_points(r["image"], spec.dimension, "image"))
                hit_boxes.append((rbox.lo, rbox.hi))
        if not _boxes_cover(lo, hi, hit_boxes):
            pieces.append(_parse_points(p["default_image"], spec.dimension, "default_image"))
        return ConvexImage(np.unique(np.vstack(pieces), axis=0), convex=f.convex_valued)
    name, params = _builtin_params(spec)
    if name == "constant":
        return ConvexImage(_parse_point(params["value"], spec.dimension, "value").reshape(1, -1))
    if name == "identity":
        return ConvexImage(np.stack([lo, hi]) if spec.dimension == 1 else _box_corners(lo, hi))
    if name == "contraction":
        rate = float(params.get("rate", 0.5))
        offset = _parse_point(params["offset"], spec.dimension, "offset")
        corners = np.stack([lo, hi]) if spec.dimension == 1 else _box_corners(lo, hi)
        return ConvexImage(rate * corners + offset)
    if name in ("step-usc", "step-lgdp"):
        jump = float(params.get("jump", 0.5 if name == "step-usc" else 0.4))
        left = float(params.get("left", 0.75 if name == "step-usc" else 0.8))
        right = float(params.get("right", 0.25 if name == "step-usc" else 0.9))
        vals = set()
        if lo[0] <= jump:
            vals.add(left)
        if hi[0] > jump or (name == "step-usc" and hi[0] >= jump):
            vals.add(right)
        return ConvexImage([[v] for v in sorted(vals)])
    return None


def _box_corners(lo, hi):
    from .geometry import corner_offsets

    offs = corner_offsets(lo.size)
    return np.where(offs == 1, hi[None, :], lo[None, :])


# ---------------------------------------------------------------------------
# Sampled direction-preservation check (discontinuous maps)


@dataclass
class LgdpReport:
    """Result of a sampled locally-gross-direction-preserving check.

    dot form: displacement inner products over sampled pairs near x must be
    nonnegative.  separation form: a verified certificate splitting the
    sampled neighborhood from the hull of the sampled images, when found.
    A pass is evidence, not proof.
    """

    passed: bool
    dot_min: float
    violations: int
    pairs: int
    delta: float
    seed: int
    separation: SeparationCertificate | None = None


def lgdp_sample_check(
    f: Correspondence,
    x,
    delta: float,
    samples: int = 200,
    seed: int = 0,
    eps_fix: float = 1e-7,
    policy: str = "centroid",
) -> LgdpReport:
    """Check direction preservation near a non-fixed point x, by sampling.

    Draws `samples` pseudo-random pairs (y, z) in the radius-delta ball
    around x intersected with the domain, and tests that the displacement
    representatives never oppose each other (inner product >= 0 up to
    rounding).  Additionally attempts a separation certificate between the
    sampled neighborhood and all sampled image vertices; the certificate is
    reported only when it verifies against the full samples.

    Raises ValueError when delta <= 0 or when x is (nearly) fixed, since the
    property is only defined away from fixed points.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    r0 = residual(x, f.evaluate(x))
    if r0 <= eps_fix:
        raise ValueError(f"x={x.tolist()} is a fixed point up to eps_fix; check undefined")
    rng = np.random.default_rng(seed)
    lo = np.maximum(f.domain.lo, x - delta)
    hi = np.minimum(f.domain.hi, x + delta)

    def draw():
        for _ in range(10_000):
            p = rng.uniform(lo, hi)
            if np.linalg.norm(p - x) <= delta:
                return p
        return x.copy()  # degenerate sliver; x itself is in the ball

    points = []
    dot_min = np.inf
    violations = 0
    image_vertices = []
    for _ in range(samples):
        y, z = draw(), draw()
        img_y, img_z = f.evaluate(y), f.evaluate(z)
        dy = representative(img_y, policy) - y
        dz = representative(img_z, policy) - z
        dot = float(dy @ dz)
        dot_min = min(dot_min, dot)
        if dot < -1e-12:
            violations += 1
        points.extend((y, z))
        image_vertices.extend((img_y.vertices, img_z.vertices))
    neighborhood = np.stack(points)
    images = np.unique(np.vstack(image_vertices), axis=0)
    cert = None
    axes = [images.mean(axis=0) - neighborhood.mean(axis=0)]
    axes.extend(np.eye(x.size))
    found = _best_axis_certificate(neighborhood, images, axes)
    if found is not None and found.check(neighborhood, images):
        cert = found
    return LgdpReport(
        passed=violations == 0,
        dot_min=float(dot_min),
        violations=violations,
        pairs=samples,
        delta=float(delta),
        seed=int(seed),
        separation=cert,
    )
