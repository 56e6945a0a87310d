"""Axis-aligned boxes, uniform cubical grids, and orthant sign labels.

An orthant label is a vector of d signs picking out one of the 2^d closed
hyperoctants of R^d.  Labels classify displacement directions of a map and
double as names for the 2^d corners of a box.  This module owns the label
encoding plus the box / grid / cell / face bookkeeping everything else
builds on.

Grid vertex coordinates are always generated from integer multi-indices
through a single interpolation formula, so two cells that share a face see
bit-identical vertex coordinates and face-sharing can be tested exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SIGN_TOL = 1e-9

# An orthant label is a tuple of d entries, each -1 or +1.
OrthantLabel = tuple


def sign_of(x: float, tol: float = DEFAULT_SIGN_TOL) -> int:
    """Sign with a dead zone: 0 iff |x| <= tol, otherwise the strict sign."""
    if math.isnan(x):
        raise ValueError("sign_of: x is NaN")
    if abs(x) <= tol:
        return 0
    return 1 if x > 0.0 else -1


def label_index(label) -> int:
    """1-based index of an orthant label.

    Fixed binary encoding: sign +1 is bit 0, sign -1 is bit 1, and the first
    coordinate is the most significant bit.  (+,+,...,+) is index 1 and
    (-,-,...,-) is index 2^d.
    """
    k = 0
    for s in label:
        if s not in (-1, 1):
            raise ValueError(f"invalid orthant label entry {s!r}")
        k = (k << 1) | (s < 0)
    return k + 1


def index_label(index: int, d: int) -> OrthantLabel:
    """Inverse of :func:`label_index`."""
    if not 1 <= index <= 2**d:
        raise ValueError(f"label index {index} out of range 1..{2 ** d}")
    bits = index - 1
    return tuple(-1 if (bits >> (d - 1 - i)) & 1 else 1 for i in range(d))


def all_labels(d: int) -> list:
    """All 2^d orthant labels in index order."""
    return [index_label(k, d) for k in range(1, 2**d + 1)]


def corner_offsets(d: int) -> np.ndarray:
    """(2^d, d) matrix of 0/1 corner offsets; row j holds the bits of j,
    first axis most significant (consistent with the label encoding)."""
    js = np.arange(2**d, dtype=np.int64)
    return ((js[:, None] >> np.arange(d - 1, -1, -1)[None, :]) & 1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned box {x : lo <= x <= hi} with lo < hi on every axis."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float).reshape(-1)
        hi = np.array(self.hi, dtype=float).reshape(-1)
        if lo.size == 0 or lo.shape != hi.shape:
            raise ValueError("box bounds must be nonempty vectors of equal length")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("box bounds must be finite")
        if not (lo < hi).all():
            raise ValueError("box requires lo < hi on every axis")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self) -> int:
        return self.lo.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def edge_lengths(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, z, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= self.lo - tol) and np.all(z <= self.hi + tol))

    def corner(self, j: int) -> np.ndarray:
        offs = corner_offsets(self.dimension)[j]
        return np.where(offs == 1, self.hi, self.lo)

    def corners(self) -> np.ndarray:
        """(2^d, d) array of box corners, binary order (lo first, hi last)."""
        offs = corner_offsets(self.dimension)
        return np.where(offs == 1, self.hi[None, :], self.lo[None, :])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BoxDomain)
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
        )

    def __repr__(self) -> str:
        return f"BoxDomain(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform cubical grid: `resolution` cells per axis on `domain`."""

    domain: BoxDomain
    resolution: int

    def __post_init__(self):
        if int(self.resolution) < 1:
            raise ValueError("grid resolution must be a positive integer")
        object.__setattr__(self, "resolution", int(self.resolution))

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def cell_size(self) -> np.ndarray:
        return self.domain.edge_lengths / self.resolution

    @property
    def cell_diameter(self) -> float:
        return float(self.cell_size.max())

    @property
    def vertex_shape(self) -> tuple:
        return (self.resolution + 1,) * self.dimension

    @property
    def n_vertices(self) -> int:
        return (self.resolution + 1) ** self.dimension

    @property
    def n_cells(self) -> int:
        return self.resolution**self.dimension

    def axis_coords(self, i: int) -> np.ndarray:
        """Vertex coordinates along axis i.  Endpoints are exactly lo_i, hi_i."""
        t = np.arange(self.resolution + 1, dtype=float) / self.resolution
        return self.domain.lo[i] * (1.0 - t) + self.domain.hi[i] * t

    def vertex(self, idx) -> np.ndarray:
        """Coordinates of the vertex with multi-index idx in {0..N}^d."""
        idx = np.asarray(idx, dtype=float)
        t = idx / self.resolution
        return self.domain.lo * (1.0 - t) + self.domain.hi * t

    def vertex_grid(self) -> np.ndarray:
        """All vertex coordinates, C-order over multi-indices, shape (V, d)."""
        axes = [self.axis_coords(i) for i in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dimension)

    def cells(self):
        """Iterate all cells in lexicographic base order."""
        for base in itertools.product(range(self.resolution), repeat=self.dimension):
            yield Cell(base)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GridSpec)
            and self.domain == other.domain
            and self.resolution == other.resolution
        )

    def __repr__(self) -> str:
        return f"GridSpec({self.domain!r}, N={self.resolution})"


@dataclass(frozen=True)
class Cell:
    """One subcube of a grid, identified by its low-corner multi-index."""

    base: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(b) for b in self.base))


@dataclass(frozen=True)
class Face:
    """A (d-1)-face of a cell: `axis` is 1-based, `side` is -1 (low) or +1."""

    cell: Cell
    axis: int
    side: int

    def __post_init__(self):
        if self.side not in (-1, 1):
            raise ValueError("face side must be -1 or +1")
        d = len(self.cell.base)
        if not 1 <= self.axis <= d:
            raise ValueError(f"face axis {self.axis} out of range 1..{d}")


def _check_cell(grid: GridSpec, cell: Cell) -> None:
    if len(cell.base) != grid.dimension:
        raise ValueError("cell dimension does not match grid")
    for b in cell.base:
        if not 0 <= b < grid.resolution:
            raise ValueError(f"cell base {cell.base} out of range for N={grid.resolution}")


def cell_vertices(grid: GridSpec, cell: Cell) -> np.ndarray:
    """The 2^d vertex coordinates of a cell, binary corner order, shape (2^d, d)."""
    _check_cell(grid, cell)
    base = np.asarray(cell.base, dtype=np.int64)
    idx = base[None, :] + corner_offsets(grid.dimension)
    t = idx.astype(float) / grid.resolution
    return grid.domain.lo * (1.0 - t) + grid.domain.hi * t


def cell_faces(cell: Cell) -> list:
    """The 2d faces of a cell, ordered by (axis ascending, side -1 then +1)."""
    d = len(cell.base)
    return [Face(cell, axis, side) for axis in range(1, d + 1) for side in (-1, 1)]


def face_vertices(grid: GridSpec, face: Face) -> np.ndarray:
    """The 2^(d-1) vertex coordinates of a face, shape (2^(d-1), d)."""
    _check_cell(grid, face.cell)
    d = grid.dimension
    a = face.axis - 1
    fixed = 0 if face.side == -1 else 1
    rows = []
    for off in corner_offsets(d):
        if off[a] == fixed:
            rows.append(off)
    idx = np.asarray(face.cell.base, dtype=np.int64)[None, :] + np.asarray(rows)
    t = idx.astype(float) / grid.resolution
    return grid.domain.lo * (1.0 - t) + grid.domain.hi * t


def cell_box(grid: GridSpec, cell: Cell):
    """(lo, hi) corner coordinates of a cell's closed box."""
    _check_cell(grid, cell)
    base = np.asarray(cell.base, dtype=np.int64)
    return grid.vertex(base), grid.vertex(base + 1)


def face_box(grid: GridSpec, face: Face):
    """(lo, hi) of a face's closed (degenerate along `axis`) box."""
    lo, hi = cell_box(grid, face.cell)
    a = face.axis - 1
    lo, hi = lo.copy(), hi.copy()
    if face.side == -1:
        hi[a] = lo[a]
    else:
        lo[a] = hi[a]
    return lo, hi


def carrier(z, dom: BoxDomain, tol: float = 0.0) -> tuple:
    """Which domain walls z lies on, as a partial sign vector.

    Entry i is +1 iff z_i >= hi_i - tol, -1 iff z_i <= lo_i + tol, else 0.
    The all-zero result means z is interior and the boundary constraint is
    vacuous.  Raises ValueError when z leaves the domain by more than tol.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != dom.dimension:
        raise ValueError("point dimension does not match domain")
    out = []
    for i in range(dom.dimension):
        if z[i] < dom.lo[i] - tol or z[i] > dom.hi[i] + tol:
            raise ValueError(f"point {z.tolist()} outside domain beyond tol on axis {i + 1}")
        if z[i] >= dom.hi[i] - tol:
            out.append(1)
        elif z[i] <= dom.lo[i] + tol:
            out.append(-1)
        else:
            out.append(0)
    return tuple(out)


def corner_label(v, dom: BoxDomain, tol: float = 0.0) -> OrthantLabel:
    """Inward label of a domain corner: coordinate i gets -sign(v_i - center_i).

    Each corner receives a distinct label and the labeled direction points
    into the box.  Raises ValueError when v is not a corner.
    """
    s = carrier(v, dom, tol)
    if any(si == 0 for si in s):
        raise ValueError(f"point {np.asarray(v).tolist()} is not a corner of the domain")
    return tuple(-si for si in s)
