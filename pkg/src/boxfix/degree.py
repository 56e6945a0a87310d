"""Combinatorial boundary degree and completely labeled simplices / cells.

Works with labeled triangulations of convex polygons in the plane.  A
boundary labeling induces a map of the polygon boundary onto the boundary
of a target polygon with cyclically placed vertices a_1..a_n; its degree is
the winding number of the induced label cycle, computed combinatorially.
Nonzero degree forces a completely labeled simplex in any valid
triangulation, which is what makes the degree worth computing.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import GridSpec

_GEOM_TOL = 1e-9


@dataclass
class LabeledTriangulation:
    """A triangulation of a convex polygon with integer vertex labels.

    vertices: (V, 2) coordinates of every triangulation vertex (the polygon
    corners must be among them).  triangles: index triples.  labels: one
    label in 1..target_n per vertex.  polygon / corner_labels: the outer
    polygon in counterclockwise order with its corner labels.
    """

    vertices: np.ndarray
    triangles: list
    labels: list
    polygon: np.ndarray
    corner_labels: list
    target_n: int
    _corner_idx: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        self.polygon = np.asarray(self.polygon, dtype=float).reshape(-1, 2)
        self.triangles = [tuple(int(i) for i in t) for t in self.triangles]
        self.labels = [int(l) for l in self.labels]
        self.corner_labels = [int(l) for l in self.corner_labels]
        self.target_n = int(self.target_n)
        if _polygon_area(self.polygon) < 0:
            self.polygon = self.polygon[::-1].copy()
            self.corner_labels = self.corner_labels[::-1]
        self.validate()

    def validate(self):
        V = len(self.vertices)
        if len(self.labels) != V:
            raise ValueError("one label per vertex required")
        if self.target_n < 3:
            raise ValueError("target polygon needs at least 3 vertices")
        for l in self.labels + self.corner_labels:
            if not 1 <= l <= self.target_n:
                raise ValueError(f"label {l} out of range 1..{self.target_n}")
        if len(self.polygon) != len(self.corner_labels):
            raise ValueError("one corner label per polygon corner required")
        for t in self.triangles:
            if len(t) != 3 or not all(0 <= i < V for i in t):
                raise ValueError(f"bad triangle {t}")
            if abs(_tri_area(self.vertices[list(t)])) <= _GEOM_TOL:
                raise ValueError(f"degenerate triangle {t}")
        # corners must be triangulation vertices, with consistent labels
        self._corner_idx = []
        for c, (corner, lab) in enumerate(zip(self.polygon, self.corner_labels)):
            hits = np.nonzero(np.all(np.abs(self.vertices - corner) <= _GEOM_TOL, axis=1))[0]
            if hits.size != 1:
                raise ValueError(f"polygon corner {corner.tolist()} not a unique vertex")
            if self.labels[int(hits[0])] != lab:
                raise ValueError(f"corner {c} label mismatch")
            self._corner_idx.append(int(hits[0]))
        # areas must tile the polygon; interior edges must be shared exactly twice
        total = sum(abs(_tri_area(self.vertices[list(t)])) for t in self.triangles)
        poly_area = abs(_polygon_area(self.polygon))
        if abs(total - poly_area) > 1e-6 * max(1.0, poly_area):
            raise ValueError("triangle areas do not tile the polygon")
        edge_use = {}
        for t in self.triangles:
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                key = (min(a, b), max(a, b))
                edge_use[key] = edge_use.get(key, 0) + 1
        for (a, b), count in edge_use.items():
            if count > 2:
                raise ValueError(f"edge {(a, b)} shared by {count} triangles")
            if count == 1:
                mid = 0.5 * (self.vertices[a] + self.vertices[b])
                if not _on_polygon_boundary(mid, self.polygon):
                    raise ValueError(f"interior edge {(a, b)} used only once")

    def to_json(self) -> dict:
        return {
            "n": self.target_n,
            "polygon": self.polygon.tolist(),
            "corner_labels": list(self.corner_labels),
            "vertices": self.vertices.tolist(),
            "triangles": [list(t) for t in self.triangles],
            "labels": list(self.labels),
        }

    @classmethod
    def from_json(cls, obj) -> "LabeledTriangulation":
        if isinstance(obj, (str, Path)):
            obj = json.loads(Path(obj).read_text())
        for key in ("n", "polygon", "corner_labels", "vertices", "triangles", "labels"):
            if key not in obj:
                raise ValueError(f"triangulation JSON missing field {key!r}")
        return cls(
            vertices=obj["vertices"],
            triangles=obj["triangles"],
            labels=obj["labels"],
            polygon=obj["polygon"],
            corner_labels=obj["corner_labels"],
            target_n=obj["n"],
        )


def _tri_area(pts) -> float:
    (x0, y0), (x1, y1), (x2, y2) = pts
    return 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


def _polygon_area(pts) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segment_param(p, a, b):
    """Parameter t in [0,1] if p lies on segment a-b (within tol), else None."""
    ab = b - a
    ap = p - a
    cross = ab[0] * ap[1] - ab[1] * ap[0]
    L = float(np.linalg.norm(ab))
    if L == 0.0 or abs(cross) > _GEOM_TOL * max(1.0, L):
        return None
    t = float(ap @ ab) / (L * L)
    if -_GEOM_TOL <= t <= 1.0 + _GEOM_TOL:
        return min(1.0, max(0.0, t))
    return None


def _on_polygon_boundary(p, polygon) -> bool:
    k = len(polygon)
    return any(
        _segment_param(p, polygon[i], polygon[(i + 1) % k]) is not None for i in range(k)
    )


def _carrier_edges(t: LabeledTriangulation):
    """For each vertex: list of (edge index, param) of polygon edges it lies
    on.  Corners lie on two edges, edge-interior vertices on one, interior
    vertices on none."""
    k = len(t.polygon)
    out = []
    for v in t.vertices:
        hits = []
        for e in range(k):
            param = _segment_param(v, t.polygon[e], t.polygon[(e + 1) % k])
            if param is not None and param < 1.0 - _GEOM_TOL:
                hits.append((e, param))
            elif param is not None and param >= 1.0 - _GEOM_TOL:
                hits.append(((e + 1) % k, 0.0))
        dedup = {}
        for e, param in hits:
            dedup[e] = param
        out.append(sorted(dedup.items()))
    return out


def sperner_valid(t: LabeledTriangulation) -> bool:
    """Classic validity on a triangle: distinct corner labels {1,2,3} and
    every boundary vertex labeled from its carrier's corner labels.
    Interior vertex labels never affect validity."""
    if len(t.polygon) != 3 or t.target_n != 3:
        raise ValueError("sperner_valid expects a triangle with target_n = 3")
    if sorted(t.corner_labels) != [1, 2, 3]:
        return False
    carriers = _carrier_edges(t)
    for vi, hits in enumerate(carriers):
        if not hits:
            continue
        e, param = hits[0]
        if param <= _GEOM_TOL:  # polygon corner: checked during validation
            continue
        allowed = {t.corner_labels[e], t.corner_labels[(e + 1) % 3]}
        if t.labels[vi] not in allowed:
            return False
    return True


def nondegenerate_valid(t: LabeledTriangulation, n: int | None = None) -> bool:
    """No polygon boundary edge may carry the complete label set among its
    two corners plus the triangulation vertices on it."""
    n = t.target_n if n is None else n
    k = len(t.polygon)
    edge_labels = [set() for _ in range(k)]
    for e in range(k):
        edge_labels[e].add(t.corner_labels[e])
        edge_labels[e].add(t.corner_labels[(e + 1) % k])
    for vi, hits in enumerate(_carrier_edges(t)):
        if len(hits) == 1:
            edge_labels[hits[0][0]].add(t.labels[vi])
    full = set(range(1, n + 1))
    return all(labels != full for labels in edge_labels)


@dataclass(frozen=True)
class DegreeResult:
    """degree: winding number of the induced boundary cycle.  ambiguous is
    set when some consecutive label pair is diametrically opposite on the
    target (possible only for even n), where the traversal direction is a
    genuine convention; the tie is broken positively."""

    degree: int
    ambiguous: bool = False


def boundary_degree_2d(cycle, n: int) -> DegreeResult:
    """Winding number of a label cycle read along a polygon boundary.

    Target vertices a_1..a_n sit cyclically (counterclockwise) on a circle.
    Each consecutive label pair contributes the signed number of steps of
    the shorter arc between the two target vertices; equal labels contribute
    nothing.  The total is a multiple of n and the degree is total / n.
    """
    cycle = [int(c) for c in cycle]
    if n < 3:
        raise ValueError("target polygon needs n >= 3")
    if not cycle:
        raise ValueError("empty boundary cycle")
    for c in cycle:
        if not 1 <= c <= n:
            raise ValueError(f"cycle label {c} out of range 1..{n}")
    total = 0
    ambiguous = False
    for p, q in zip(cycle, cycle[1:] + cycle[:1]):
        step = (q - p) % n
        if step > n / 2:
            step -= n
        elif step == n / 2 and n % 2 == 0 and step != 0:
            ambiguous = True  # opposite vertices: positive arc by convention
        total += step
    if total % n != 0:
        raise AssertionError("label cycle winding must be a multiple of n")
    return DegreeResult(total // n, ambiguous)


def boundary_label_cycle(t: LabeledTriangulation) -> list:
    """Labels of all triangulation vertices on the polygon boundary, in
    counterclockwise order starting at the first polygon corner."""
    k = len(t.polygon)
    per_edge = [[] for _ in range(k)]
    for vi, hits in enumerate(_carrier_edges(t)):
        if len(hits) == 1:
            e, param = hits[0]
            if param > _GEOM_TOL:
                per_edge[e].append((param, vi))
    cycle = []
    for e in range(k):
        cycle.append(t.corner_labels[e])
        for _, vi in sorted(per_edge[e]):
            cycle.append(t.labels[vi])
    return cycle


def completely_labeled_triangles(t: LabeledTriangulation) -> list:
    """Indices of triangles whose three labels are exactly {1, 2, 3}.

    Meaningful for target_n = 3 (a triangle cannot carry more than three
    distinct labels); for larger targets the result is always empty.
    """
    want = {1, 2, 3}
    if t.target_n != 3:
        return []
    out = [
        i
        for i, tri in enumerate(t.triangles)
        if {t.labels[tri[0]], t.labels[tri[1]], t.labels[tri[2]]} == want
    ]
    return sorted(out)


def completely_labeled_cells(gl) -> list:
    """Cells of a total grid labeling whose 2^d vertices carry all 2^d
    distinct orthant labels.  Cells containing a fixed hit are excluded here
    (they are reported through the hit itself).  Sorted by cell base."""
    from .geometry import Cell

    if not gl.is_total:
        raise ValueError("completely labeled cell search requires a total labeling")
    d = gl.dimension
    N = gl.grid.resolution
    codes = gl.label_codes().reshape(gl.grid.vertex_shape)
    fixed = gl.fixed.reshape(gl.grid.vertex_shape)
    out = []
    for base in itertools.product(range(N), repeat=d):
        seen = set()
        ok = True
        for off in itertools.product((0, 1), repeat=d):
            idx = tuple(b + o for b, o in zip(base, off))
            if fixed[idx]:
                ok = False
                break
            seen.add(int(codes[idx]))
        if ok and len(seen) == 2**d:
            out.append(Cell(base))
    return out


def inward_labeling_degree(d: int) -> int:
    """Boundary degree of the inward corner labeling of a d-box.

    Labeling every corner with the opposite sign vector sends each corner to
    the antipodal corner, so the induced boundary map is the antipodal map
    of the (d-1)-sphere, of degree (-1)^d: nonzero for every d, and +1 only
    for even d.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return -1 if d % 2 else 1


# ---------------------------------------------------------------------------
# Instance generators (fixtures for property suites and the CLI)


def triangle_grid_triangulation(corners, N: int):
    """Regular N-fold subdivision of a triangle.

    Returns (vertices, triangles, on_edge) where on_edge[v] is None for
    interior vertices or the index 0/1/2 of the triangle edge the vertex
    lies on (corners report the edge preceding them).
    """
    corners = np.asarray(corners, dtype=float).reshape(3, 2)
    A, B, C = corners
    index = {}
    vertices = []
    on_edge = []
    for i in range(N + 1):
        for j in range(N + 1 - i):
            index[(i, j)] = len(vertices)
            vertices.append(A + (i / N) * (B - A) + (j / N) * (C - A))
            if j == 0 and 0 < i < N:
                on_edge.append(0)  # edge A-B
            elif i == 0 and 0 < j < N:
                on_edge.append(2)  # edge C-A
            elif i + j == N and i not in (0, N):
                on_edge.append(1)  # edge B-C
            elif (i, j) in ((0, 0), (N, 0), (0, N)):
                on_edge.append(-1)  # corner
            else:
                on_edge.append(None)
    triangles = []
    for i in range(N):
        for j in range(N - i):
            triangles.append((index[(i, j)], index[(i + 1, j)], index[(i, j + 1)]))
            if i + j < N - 1:
                triangles.append(
                    (index[(i + 1, j)], index[(i + 1, j + 1)], index[(i, j + 1)])
                )
    return np.asarray(vertices), triangles, on_edge


def random_sperner_triangulation(N: int, rng, corners=((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))):
    """A valid random labeling of the regular N-grid of a triangle: corners
    1,2,3, edge vertices drawn from their edge's corner labels, interior
    vertices uniform over {1,2,3}."""
    vertices, triangles, on_edge = triangle_grid_triangulation(corners, N)
    corner_labels = [1, 2, 3]
    edge_pair = {0: (1, 2), 1: (2, 3), 2: (3, 1)}
    corners_arr = np.asarray(corners, dtype=float)
    labels = []
    for v, tag in zip(vertices, on_edge):
        if tag == -1:
            near = int(np.argmin(np.linalg.norm(corners_arr - v, axis=1)))
            labels.append(corner_labels[near])
        elif tag is None:
            labels.append(int(rng.integers(1, 4)))
        else:
            labels.append(int(rng.choice(edge_pair[tag])))
    return LabeledTriangulation(
        vertices=vertices,
        triangles=triangles,
        labels=labels,
        polygon=corners_arr,
        corner_labels=corner_labels,
        target_n=3,
    )


def fan_triangulation(polygon, corner_labels, center_label: int, target_n: int = 3,
                      midpoint_labels=None):
    """Fan a convex polygon from its centroid, optionally splitting each
    boundary edge at its midpoint with a supplied label (which must come
    from the edge's corner labels to preserve non-degeneracy)."""
    polygon = np.asarray(polygon, dtype=float).reshape(-1, 2)
    k = len(polygon)
    center = polygon.mean(axis=0)
    if midpoint_labels is None:
        vertices = np.vstack([polygon, center[None, :]])
        labels = list(corner_labels) + [int(center_label)]
        c = k
        triangles = [(i, (i + 1) % k, c) for i in range(k)]
    else:
        mids = 0.5 * (polygon + np.roll(polygon, -1, axis=0))
        vertices = np.vstack([polygon, mids, center[None, :]])
        labels = list(corner_labels) + [int(l) for l in midpoint_labels] + [int(center_label)]
        c = 2 * k
        triangles = []
        for i in range(k):
            m = k + i
            triangles.append((i, m, c))
            triangles.append((m, (i + 1) % k, c))
    return LabeledTriangulation(
        vertices=vertices,
        triangles=triangles,
        labels=labels,
        polygon=polygon,
        corner_labels=list(corner_labels),
        target_n=target_n,
    )
