"""Fixed-point search on cubical grids.

One round labels a grid, scans it for candidates, and measures each
candidate's residual.  Candidates come in three kinds:

* FixedVertex: a vertex whose displacement or residual fell below eps_fix;
* CompleteCell: a cell whose vertices carry pairwise-distinct labels that,
  together with any fixed-hit vertices acting as wildcards, exhaust all 2^d
  orthant labels;
* ProblematicFace: a (d-1)-face whose distinct-label set is not face-safe
  under the configured mode.

Problematic faces are consumed as candidates and never repaired by adding
labeled points; either stream shrinks onto a fixed point as the grid
refines.  Refinement is adaptive: live candidates are wrapped in sub-boxes
that are re-gridded at a resolution growing geometrically with depth, and
only walls shared with the original domain keep their inward-label
constraint.  Residual verification, not candidacy, is ground truth: the
report's status is decided by re-measuring the best witness.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .correspondences import (
    Correspondence,
    MapSpec,
    build_correspondence,
    image_hull_over_box,
    residual,
    separating_hyperplane,
)
from .dcn import all_dcn_sets, subcube
from .geometry import (
    DEFAULT_SIGN_TOL,
    BoxDomain,
    GridSpec,
    all_labels,
    corner_offsets,
    label_index,
)
from .labeling import DEFAULT_EPS_FIX, GridLabeling, LabelingConfig, label_grid

FACE_MODES = ("equality", "subcube")
FILTERS = ("off", "piecewise-exact")


class SolverAbort(RuntimeError):
    """Depth-0 scan produced no candidates at all."""


@dataclass(frozen=True)
class SolverConfig:
    initial_resolution: int = 8
    max_depth: int = 6
    refinement_factor: int = 2
    eps_fix: float = DEFAULT_EPS_FIX
    tau_sign: float = DEFAULT_SIGN_TOL
    face_mode: str = "equality"
    filter: str = "off"
    adaptive_radius: int = 2
    policy: str = "centroid"
    seed: int = 0
    early_exit: bool = True
    global_pass: bool = False
    max_subboxes: int = 8
    max_resolution: int = 65536

    def __post_init__(self):
        if self.initial_resolution < 2:
            raise ValueError("initial_resolution must be >= 2")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.refinement_factor < 2:
            raise ValueError("refinement_factor must be >= 2")
        if self.eps_fix <= 0 or self.tau_sign < 0:
            raise ValueError("tolerances must be positive")
        if self.face_mode not in FACE_MODES:
            raise ValueError(f"face_mode must be one of {FACE_MODES}")
        if self.filter not in FILTERS:
            raise ValueError(f"filter must be one of {FILTERS}")
        if self.adaptive_radius < 1:
            raise ValueError("adaptive_radius must be >= 1")

    def labeling(self, carrier_domain=None) -> LabelingConfig:
        return LabelingConfig(
            eps_fix=self.eps_fix,
            tau_sign=self.tau_sign,
            policy=self.policy,
            early_exit=self.early_exit,
            carrier_domain=carrier_domain,
        )


@dataclass
class Candidate:
    """A fixed-point candidate with its location box and measured residual."""

    kind: str  # FixedVertex | CompleteCell | ProblematicFace
    lo: np.ndarray
    hi: np.ndarray
    witness: np.ndarray
    residual: float
    depth: int
    cell_size: np.ndarray
    spurious: bool = False
    certificate: object = None

    def sort_key(self):
        return (self.residual, tuple(self.witness.tolist()))


@dataclass
class DepthStats:
    depth: int
    resolution: int
    complete_cells: int
    problematic_faces: int
    fixed_vertices: int
    best_residual: float


@dataclass
class SolveReport:
    status: str
    point: list
    residual: float
    face_mode: str
    depth_trace: list
    config: dict

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "point": self.point,
            "residual": self.residual,
            "face_mode": self.face_mode,
            "depth_trace": [asdict(s) for s in self.depth_trace],
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


@lru_cache(maxsize=None)
def _face_safe_table(d: int, mode: str) -> np.ndarray:
    """face-safe decision for every label-set bitmask in dimension d."""
    n = 1 << d
    table = np.zeros(1 << n, dtype=bool)
    table[0] = True
    if mode == "equality":
        for S in all_dcn_sets(d):
            mask = 0
            for l in S:
                mask |= 1 << (label_index(l) - 1)
            table[mask] = True
    else:
        masks = np.arange(1 << n, dtype=np.int64)
        for i in range(d):
            for s in (1, -1):
                sigma = tuple(s if j == i else 0 for j in range(d))
                m = 0
                for l in subcube(sigma):
                    m |= 1 << (label_index(l) - 1)
                table |= (masks & ~m) == 0
    return table


def _cell_corner_stack(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Gather per-cell corner values, shape (n_cells, 2^d), C-order bases."""
    d, N = grid.dimension, grid.resolution
    arr = values.reshape(grid.vertex_shape)
    stacks = []
    for off in corner_offsets(d):
        sl = tuple(slice(int(o), int(o) + N) for o in off)
        stacks.append(arr[sl])
    return np.stack(stacks, axis=-1).reshape(-1, 1 << d)


def _face_corner_stack(values: np.ndarray, grid: GridSpec, axis: int):
    """Gather per-face corner values for faces orthogonal to `axis`
    (0-based).  Returns (stack, shape): stack has one row per face in
    C-order over `shape`, where shape spans N+1 layers along `axis` and N
    cells along every other axis."""
    d, N = grid.dimension, grid.resolution
    arr = values.reshape(grid.vertex_shape)
    offs = corner_offsets(d - 1) if d > 1 else np.zeros((1, 0), dtype=np.int64)
    stacks = []
    for off in offs:
        sl = []
        k = 0
        for j in range(d):
            if j == axis:
                sl.append(slice(0, N + 1))
            else:
                sl.append(slice(int(off[k]), int(off[k]) + N))
                k += 1
        stacks.append(arr[tuple(sl)])
    shape = tuple(N + 1 if j == axis else N for j in range(d))
    return np.stack(stacks, axis=-1).reshape(-1, 1 << (d - 1)), shape


def scan(gl: GridLabeling, f: Correspondence, cfg: SolverConfig, depth: int = 0) -> list:
    """All candidates of a labeled grid, sorted by (residual, witness).

    Fixed vertices are always candidates.  Cell completeness treats fixed
    vertices as wildcards (each hit is a distinct free label), which matches
    the displacement picture: a hit's zero displacement lies in every
    orthant.  Faces touching a fixed vertex are skipped, since the vertex
    itself already covers that location.  On a partial labeling (early
    exit) only the fixed vertices found so far are reported.
    """
    grid = gl.grid
    d = grid.dimension
    out = []
    for flat in gl.fixed_indices():
        multi = np.unravel_index(int(flat), grid.vertex_shape)
        z = grid.vertex(multi)
        out.append(
            Candidate(
                kind="FixedVertex",
                lo=z.copy(),
                hi=z.copy(),
                witness=z,
                residual=float(gl.residuals[flat]),
                depth=depth,
                cell_size=grid.cell_size,
            )
        )
    if not gl.is_total:
        out.sort(key=Candidate.sort_key)
        return out

    codes = gl.sentinel_codes()
    n_labels = 1 << d

    cell_stack = _cell_corner_stack(codes, grid)
    sorted_stack = np.sort(cell_stack, axis=1)
    complete = np.all(np.diff(sorted_stack, axis=1) != 0, axis=1)
    pure = (cell_stack < n_labels).all(axis=1)
    has_fix = ~pure
    cell_shape = (grid.resolution,) * d
    for flat in np.nonzero(complete)[0]:
        base = np.asarray(np.unravel_index(int(flat), cell_shape))
        lo = grid.vertex(base)
        hi = grid.vertex(base + 1)
        witness = 0.5 * (lo + hi)
        out.append(
            Candidate(
                kind="CompleteCell",
                lo=lo,
                hi=hi,
                witness=witness,
                residual=residual(witness, f.evaluate(witness)),
                depth=depth,
                cell_size=grid.cell_size,
            )
        )

    if d >= 2:
        table = _face_safe_table(d, cfg.face_mode)
        for axis in range(d):
            stack, shape = _face_corner_stack(codes, grid, axis)
            no_fix = (stack < n_labels).all(axis=1)
            masks = np.bitwise_or.reduce(
                np.left_shift(np.int64(1), stack.clip(max=n_labels - 1)), axis=1
            )
            problematic = no_fix & ~table[masks]
            for flat in np.nonzero(problematic)[0]:
                pos = np.asarray(np.unravel_index(int(flat), shape))
                lo = grid.vertex(pos)
                hi_idx = pos + 1
                hi_idx[axis] = pos[axis]
                hi = grid.vertex(hi_idx)
                witness = 0.5 * (lo + hi)
                out.append(
                    Candidate(
                        kind="ProblematicFace",
                        lo=np.minimum(lo, hi),
                        hi=np.maximum(lo, hi),
                        witness=witness,
                        residual=residual(witness, f.evaluate(witness)),
                        depth=depth,
                        cell_size=grid.cell_size,
                    )
                )
    out.sort(key=Candidate.sort_key)
    return out


def filter_spurious(cands: list, spec: MapSpec | None, gl: GridLabeling, cfg: SolverConfig) -> list:
    """Mark candidates whose box provably contains no fixed point.

    Sound because image_hull_over_box bounds f over the box: a certificate
    strictly separating the box from the hull means dist(x, f(x)) > 0
    throughout.  Requires filter "piecewise-exact" and a spec that supports
    hull bounds; anything else leaves every candidate live.
    """
    if cfg.filter != "piecewise-exact" or spec is None:
        return cands
    out = []
    for c in cands:
        if c.kind == "FixedVertex":
            out.append(c)
            continue
        hull = image_hull_over_box(spec, (c.lo, c.hi))
        if hull is None:
            out.append(c)
            continue
        cert = separating_hyperplane((c.lo, c.hi), hull.vertices)
        if cert is not None:
            c.spurious = True
            c.certificate = cert
        out.append(c)
    return out


def _boxes_overlap(alo, ahi, blo, bhi) -> bool:
    return bool(np.all(alo <= bhi) and np.all(blo <= ahi))


def refine(
    cands: list,
    grid: GridSpec,
    cfg: SolverConfig,
    resolution: int | None = None,
    domain: BoxDomain | None = None,
) -> list:
    """Sub-grids for the next round: each live candidate's box grown by
    adaptive_radius cells (of its source grid), clipped to the domain, with
    overlapping boxes merged to their bounding box and the list capped at
    max_subboxes by merging nearest pairs.  Coverage of every live candidate
    is preserved by construction."""
    live = [c for c in cands if not c.spurious]
    if not live:
        raise ValueError("refine requires at least one live candidate")
    domain = domain or grid.domain
    resolution = resolution or grid.resolution * cfg.refinement_factor
    boxes = []
    for c in live:
        pad = cfg.adaptive_radius * c.cell_size
        lo = np.maximum(domain.lo, c.lo - pad)
        hi = np.minimum(domain.hi, c.hi + pad)
        boxes.append((lo, hi))
    boxes.sort(key=lambda b: (tuple(b[0].tolist()), tuple(b[1].tolist())))

    merged = True
    while merged:
        merged = False
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if _boxes_overlap(*boxes[i], *boxes[j]):
                    lo = np.minimum(boxes[i][0], boxes[j][0])
                    hi = np.maximum(boxes[i][1], boxes[j][1])
                    boxes[i] = (lo, hi)
                    del boxes[j]
                    merged = True
                    break
            if merged:
                break
    while len(boxes) > cfg.max_subboxes:
        best = None
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                lo = np.minimum(boxes[i][0], boxes[j][0])
                hi = np.maximum(boxes[i][1], boxes[j][1])
                vol = float(np.prod(hi - lo))
                key = (vol, i, j)
                if best is None or key < best[0:3]:
                    best = (vol, i, j, lo, hi)
        _, i, j, lo, hi = best
        boxes[i] = (lo, hi)
        del boxes[j]
    return [GridSpec(BoxDomain(lo, hi), resolution) for lo, hi in boxes]


def solve(spec, cfg: SolverConfig | None = None) -> SolveReport:
    """Run the full search on a MapSpec (or a prebuilt Correspondence).

    Deterministic for a fixed config.  Terminates within max_depth
    refinement rounds, earlier when a fixed hit at residual <= eps_fix
    fires or when a round leaves no live candidate.  The returned point is
    the minimum-residual witness over all rounds (ties broken by the
    lexicographically smallest witness), re-measured independently; status
    is fixed_point_found iff that residual is at most eps_fix.
    """
    cfg = cfg or SolverConfig()
    if isinstance(spec, Correspondence):
        f = spec
        map_spec = spec.spec
    else:
        map_spec = spec
        f = build_correspondence(spec)
    domain = f.domain
    grids = [GridSpec(domain, cfg.initial_resolution)]
    best: Candidate | None = None
    trace = []
    hit_fired = False
    for depth in range(cfg.max_depth + 1):
        res = cfg.initial_resolution * cfg.refinement_factor**depth
        if res > cfg.max_resolution:
            break
        if cfg.global_pass and depth > 0:
            full = GridSpec(domain, res)
            if not any(g == full for g in grids):
                grids = grids + [full]
        depth_cands = []
        counts = {"CompleteCell": 0, "ProblematicFace": 0, "FixedVertex": 0}
        for g in grids:
            gl = label_grid(g, f, cfg.labeling(carrier_domain=domain))
            cands = scan(gl, f, cfg, depth)
            cands = filter_spurious(cands, map_spec, gl, cfg)
            for c in cands:
                counts[c.kind] += 1
            depth_cands.extend(cands)
            if gl.early_hit is not None:
                hit_fired = True
                break
        live = [c for c in depth_cands if not c.spurious]
        for c in live:
            if best is None or c.sort_key() < best.sort_key():
                best = c
        trace.append(
            DepthStats(
                depth=depth,
                resolution=res,
                complete_cells=counts["CompleteCell"],
                problematic_faces=counts["ProblematicFace"],
                fixed_vertices=counts["FixedVertex"],
                best_residual=float(best.residual) if best else float("nan"),
            )
        )
        if hit_fired or (best is not None and best.residual <= cfg.eps_fix):
            break
        if not live:
            if depth == 0:
                raise SolverAbort(
                    "no candidates at depth 0 (and no fixed hit): check that the map is "
                    "upper semicontinuous and maps into its domain"
                )
            break
        if depth == cfg.max_depth:
            break
        grids = refine(
            live,
            grids[0],
            cfg,
            resolution=cfg.initial_resolution * cfg.refinement_factor ** (depth + 1),
            domain=domain,
        )
    if best is None:
        raise SolverAbort("search ended with no live candidate to report")
    point = best.witness
    final_res = residual(point, f.evaluate(point))
    status = "fixed_point_found" if final_res <= cfg.eps_fix else "best_candidate_returned"
    return SolveReport(
        status=status,
        point=[float(x) for x in point],
        residual=float(final_res),
        face_mode=cfg.face_mode,
        depth_trace=trace,
        config=asdict(cfg),
    )
