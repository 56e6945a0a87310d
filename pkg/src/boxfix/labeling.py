"""Orthant labeling of grid vertices.

Each grid vertex z gets the orthant label of its displacement
dz = representative(f(z)) - z, with deterministic tie-breaking on zero
coordinates and with boundary vertices forced inward along every domain
wall they lie on (so boundary labels always come from the carrier's corner
labels).  Vertices whose displacement or residual falls below eps_fix are
flagged as fixed hits instead of labeled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .correspondences import ConvexImage, Correspondence, representative, residual
from .geometry import (
    DEFAULT_SIGN_TOL,
    BoxDomain,
    GridSpec,
    carrier,
    label_index,
    sign_of,
)

DEFAULT_EPS_FIX = 1e-7


class LabelingError(RuntimeError):
    """Carrier forcing emptied the admissible set: the map leaves the domain
    beyond tolerance at the named vertex."""


@dataclass(frozen=True)
class LabelingConfig:
    eps_fix: float = DEFAULT_EPS_FIX
    tau_sign: float = DEFAULT_SIGN_TOL
    policy: str = "centroid"
    early_exit: bool = True
    carrier_domain: BoxDomain | None = None

    def __post_init__(self):
        if self.eps_fix <= 0 or self.tau_sign < 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class VertexLabel:
    """Either an orthant label or a fixed-point hit at this vertex."""

    label: tuple | None
    fixed: bool
    point: tuple
    residual: float | None


def admissible_labels(dz, tau_sign: float = DEFAULT_SIGN_TOL) -> list:
    """All orthant labels compatible with the nonzero signs of dz, in label
    index order.  Size is 2^(number of zero coordinates); never empty."""
    dz = np.asarray(dz, dtype=float).reshape(-1)
    choices = []
    for c in dz:
        s = sign_of(float(c), tau_sign)
        choices.append((s,) if s != 0 else (1, -1))
    return [label for label in itertools.product(*choices)]


def _bbox_distance(z, vertices) -> float:
    lo = vertices.min(axis=0)
    hi = vertices.max(axis=0)
    gap = np.maximum(np.maximum(lo - z, z - hi), 0.0)
    return float(np.linalg.norm(gap))


def choose_label(
    z,
    img: ConvexImage,
    dom: BoxDomain,
    policy: str = "centroid",
    eps_fix: float = DEFAULT_EPS_FIX,
    tau_sign: float = DEFAULT_SIGN_TOL,
) -> VertexLabel:
    """Label one vertex from its image.

    Fixed hit when ||dz||_inf <= eps_fix or residual(z, img) <= eps_fix
    (the residual is only computed when a cheap bounding-box lower bound
    allows it to be that small).  Otherwise the label is the admissible
    label that (a) points inward on every domain wall in carrier(z) and
    (b) is smallest in the +1 < -1 per-coordinate order, which equals label
    index order.  Raises LabelingError when wall forcing conflicts with a
    strict displacement sign.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    dz = representative(img, policy) - z
    linf = float(np.abs(dz).max())
    res = None
    if linf <= eps_fix:
        res = residual(z, img)
    elif _bbox_distance(z, img.vertices) <= eps_fix:
        res = residual(z, img)
    if linf <= eps_fix or (res is not None and res <= eps_fix):
        if res is None:
            res = residual(z, img)
        return VertexLabel(None, True, tuple(z.tolist()), float(res))

    walls = carrier(z, dom, tau_sign)
    candidates = admissible_labels(dz, tau_sign)
    for i, s in enumerate(walls):
        if s != 0:
            candidates = [l for l in candidates if l[i] == -s]
    if not candidates:
        raise LabelingError(
            f"no admissible label at z={z.tolist()}: displacement {dz.tolist()} points "
            f"outside the domain wall(s) {walls} beyond tolerance"
        )
    best = min(candidates, key=label_index)
    return VertexLabel(best, False, tuple(z.tolist()), None)


class GridLabeling:
    """Labels for every vertex of a grid (or a prefix, after an early exit).

    Internally array-backed: signs holds the per-vertex label entries
    (0 rows for fixed hits), fixed flags the hits, residuals holds the hit
    residuals (nan elsewhere).  Vertices are ordered C-style over their
    multi-indices.
    """

    def __init__(self, grid: GridSpec, config: LabelingConfig):
        self.grid = grid
        self.config = config
        V = grid.n_vertices
        d = grid.dimension
        self.signs = np.zeros((V, d), dtype=np.int8)
        self.fixed = np.zeros(V, dtype=bool)
        self.residuals = np.full(V, np.nan)
        self.labeled = 0
        self.early_hit: int | None = None

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @property
    def is_total(self) -> bool:
        return self.labeled == self.grid.n_vertices

    def vertex_label(self, idx) -> VertexLabel:
        """The VertexLabel at a multi-index (tuple) or flat index (int)."""
        if isinstance(idx, (int, np.integer)):
            flat = int(idx)
            multi = np.unravel_index(flat, self.grid.vertex_shape)
        else:
            multi = tuple(int(i) for i in idx)
            flat = int(np.ravel_multi_index(multi, self.grid.vertex_shape))
        if flat >= self.labeled:
            raise IndexError(f"vertex {multi} was not labeled (early exit)")
        point = tuple(self.grid.vertex(multi).tolist())
        if self.fixed[flat]:
            return VertexLabel(None, True, point, float(self.residuals[flat]))
        return VertexLabel(tuple(int(s) for s in self.signs[flat]), False, point, None)

    def label_codes(self) -> np.ndarray:
        """0-based label codes per vertex (garbage on fixed rows)."""
        d = self.dimension
        bits = (self.signs < 0).astype(np.int64)
        weights = 1 << np.arange(d - 1, -1, -1, dtype=np.int64)
        return bits @ weights

    def sentinel_codes(self) -> np.ndarray:
        """Label codes with fixed vertices replaced by unique sentinels
        >= 2^d, so 'pairwise distinct' treats hits as wildcards."""
        codes = self.label_codes()
        v = np.arange(codes.size, dtype=np.int64)
        return np.where(self.fixed, (1 << self.dimension) + v, codes)

    def fixed_indices(self) -> np.ndarray:
        return np.nonzero(self.fixed[: self.labeled])[0]


def label_grid(grid: GridSpec, f: Correspondence, config: LabelingConfig | None = None) -> GridLabeling:
    """Label every vertex of the grid under the correspondence.

    Wall forcing is applied against config.carrier_domain (default: the
    grid's own domain); a refinement sub-grid interior to the map's domain
    therefore passes the original domain so only genuine walls constrain.
    With early_exit, labeling stops at the first hit whose residual is at
    most eps_fix and the labeling is left partial.  Vertices run in C order
    over their multi-indices; the loop inlines the choose_label rule (the
    admissible set is a per-coordinate product, so its lexicographic
    minimum is the coordinate-wise minimum) and stays bit-identical to it.
    """
    cfg = config or LabelingConfig()
    if f.domain.dimension != grid.dimension:
        raise ValueError("correspondence and grid dimensions differ")
    dom = cfg.carrier_domain or grid.domain
    gl = GridLabeling(grid, cfg)
    d, N = grid.dimension, grid.resolution
    axes = [grid.axis_coords(j) for j in range(d)]
    dlo, dhi = dom.lo.tolist(), dom.hi.tolist()
    eps, tau, policy = cfg.eps_fix, cfg.tau_sign, cfg.policy
    label_buf = [0] * d
    for flat, multi in enumerate(itertools.product(range(N + 1), repeat=d)):
        z = np.array([axes[j][multi[j]] for j in range(d)])
        img = f.evaluate(z, tau)
        v = img.vertices
        k = v.shape[0]
        rep = v[0] if (k == 1 or policy == "first") else v.mean(axis=0)
        zl = z.tolist()
        dzl = (rep - z).tolist()
        linf = max(abs(c) for c in dzl)
        res = None
        if linf <= eps:
            res = residual(z, img)
        elif k > 1:
            bb = 0.0
            for j in range(d):
                col = v[:, j]
                gap = max(float(col.min()) - zl[j], zl[j] - float(col.max()), 0.0)
                bb += gap * gap
            if bb <= eps * eps:
                res = residual(z, img)
        if linf <= eps or (res is not None and res <= eps):
            if res is None:
                res = residual(z, img)
            gl.fixed[flat] = True
            gl.residuals[flat] = res
            gl.labeled = flat + 1
            if cfg.early_exit and res <= eps:
                gl.early_hit = flat
                break
            continue
        for j in range(d):
            zj = zl[j]
            c = dzl[j]
            s = 0 if -tau <= c <= tau else (1 if c > 0 else -1)
            if zj > dhi[j] + tau or zj < dlo[j] - tau:
                raise ValueError(f"point {zl} outside domain beyond tol on axis {j + 1}")
            if zj >= dhi[j] - tau:
                w = 1
            elif zj <= dlo[j] + tau:
                w = -1
            else:
                w = 0
            if w != 0:
                if s == w:
                    raise LabelingError(
                        f"no admissible label at z={zl}: displacement {dzl} points "
                        f"outside the domain wall (axis {j + 1}, side {w}) beyond tolerance"
                    )
                label_buf[j] = -w
            else:
                label_buf[j] = s if s != 0 else 1
        gl.signs[flat] = label_buf
        gl.labeled = flat + 1
    return gl


def dump_grid_csv(gl: GridLabeling, path) -> None:
    """Write one row per vertex: i1..id, x1..xd, s1..sd, is_fixed, residual.

    Sign columns are empty on fixed rows; the residual column is filled only
    for fixed rows.  Requires a total labeling.
    """
    if not gl.is_total:
        raise ValueError("grid dump requires a total labeling (disable early exit)")
    d = gl.dimension
    header = (
        [f"i{j + 1}" for j in range(d)]
        + [f"x{j + 1}" for j in range(d)]
        + [f"s{j + 1}" for j in range(d)]
        + ["is_fixed", "residual"]
    )
    coords = gl.grid.vertex_grid()
    lines = [",".join(header)]
    for flat, multi in enumerate(
        itertools.product(range(gl.grid.resolution + 1), repeat=d)
    ):
        row = [str(i) for i in multi]
        row += [repr(float(c)) for c in coords[flat]]
        if gl.fixed[flat]:
            row += [""] * d + ["1", repr(float(gl.residuals[flat]))]
        else:
            row += [str(int(s)) for s in gl.signs[flat]] + ["0", ""]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
