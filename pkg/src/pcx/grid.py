"""Multi-resolution rasterization of planar sets and component/metric primitives.

Cells at refinement depth n have side 1/base**n.  Cell (i, j) covers the square
[i*s, (i+1)*s] x [j*s, (j+1)*s] in scene units, s = cell size.  Foreground sets
are handled with 8-connectivity, complements with 4-connectivity, the standard
dual pairing that keeps digital Jordan-curve arguments paradox-free.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError, cKDTree

Cells = np.ndarray  # (N, 2) int64 array of (i, j) lattice coordinates

DEFAULT_MAX_LEVEL = 12

_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


class GridError(Exception):
    pass


class DepthExceeded(GridError):
    pass


class WindowError(GridError):
    pass


def max_level() -> int:
    """Deepest refinement level allowed; override with PCX_MAX_LEVEL."""
    raw = os.environ.get("PCX_MAX_LEVEL", "")
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_MAX_LEVEL


@dataclass(frozen=True, order=True)
class Level:
    n: int
    base: int = 2

    def __post_init__(self) -> None:
        if self.base not in (2, 3):
            raise GridError(f"base must be 2 or 3, got {self.base}")
        if self.n < 0:
            raise GridError(f"negative refinement depth {self.n}")
        if self.n > max_level():
            raise DepthExceeded(f"level {self.n} exceeds cap {max_level()}")

    @property
    def cell_size(self) -> float:
        return float(self.base) ** (-self.n)

    def finer(self, k: int = 1) -> "Level":
        return Level(self.n + k, self.base)

    def coarser(self, k: int = 1) -> "Level":
        return Level(self.n - k, self.base)


@dataclass(frozen=True)
class Box:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise GridError(f"degenerate box {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def intersects(self, other: "Box") -> bool:
        return (self.x0 <= other.x1 and other.x0 <= self.x1
                and self.y0 <= other.y1 and other.y0 <= self.y1)

    def contains_box(self, other: "Box") -> bool:
        return (self.x0 <= other.x0 and other.x1 <= self.x1
                and self.y0 <= other.y0 and other.y1 <= self.y1)

    def pad(self, margin: float) -> "Box":
        return Box(self.x0 - margin, self.y0 - margin,
                   self.x1 + margin, self.y1 + margin)


# An oracle maps a closed box to True (meets the set), False (definitely
# disjoint) or None (unknown at tolerance).  It must be conservative: never
# False for a box that meets the true set.
BoxOracle = Callable[[Box], Optional[bool]]
# An exact fill maps a Level to ((i0, j0), bool mask indexed [j - j0, i - i0]).
ExactFill = Callable[[Level], tuple[tuple[int, int], np.ndarray]]


@dataclass(frozen=True)
class SetSpec:
    name: str
    bbox: Box
    oracle: BoxOracle
    fill: ExactFill | None = None
    base: int = 2  # grid base the set is aligned with

    def __post_init__(self) -> None:
        if self.base not in (2, 3):
            raise GridError(f"base must be 2 or 3, got {self.base}")


def cell_box(i: int, j: int, level: Level) -> Box:
    s = level.cell_size
    return Box(i * s, j * s, (i + 1) * s, (j + 1) * s)


def _as_cells(arr: np.ndarray) -> Cells:
    out = np.asarray(arr, dtype=np.int64)
    if out.size == 0:
        return out.reshape(0, 2)
    if out.ndim != 2 or out.shape[1] != 2:
        raise GridError(f"cell array must have shape (N, 2), got {out.shape}")
    return out


def sort_cells(cells: Cells) -> Cells:
    """Row-major order: by j then i, the scan order used for deterministic ids."""
    cells = _as_cells(cells)
    if len(cells) == 0:
        return cells
    order = np.lexsort((cells[:, 0], cells[:, 1]))
    return cells[order]


@dataclass(frozen=True, eq=False)
class GridCompactum:
    """Raster of a planar compactum: an origin-anchored boolean mask.

    mask[j - origin[1], i - origin[0]] is True when cell (i, j) is occupied.
    """
    level: Level
    origin: tuple[int, int]
    mask: np.ndarray
    source: SetSpec | None = None

    @staticmethod
    def from_cells(level: Level, cells: Cells,
                   source: SetSpec | None = None) -> "GridCompactum":
        cells = _as_cells(cells)
        if len(cells) == 0:
            return GridCompactum(level, (0, 0), np.zeros((0, 0), dtype=bool), source)
        i0, j0 = int(cells[:, 0].min()), int(cells[:, 1].min())
        ni = int(cells[:, 0].max()) - i0 + 1
        nj = int(cells[:, 1].max()) - j0 + 1
        mask = np.zeros((nj, ni), dtype=bool)
        mask[cells[:, 1] - j0, cells[:, 0] - i0] = True
        return GridCompactum(level, (i0, j0), mask, source)

    @staticmethod
    def from_mask(level: Level, origin: tuple[int, int], mask: np.ndarray,
                  source: SetSpec | None = None) -> "GridCompactum":
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            return GridCompactum(level, (0, 0), np.zeros((0, 0), dtype=bool), source)
        js, is_ = np.nonzero(mask)
        j0, j1 = int(js.min()), int(js.max())
        i0, i1 = int(is_.min()), int(is_.max())
        trimmed = mask[j0:j1 + 1, i0:i1 + 1]
        return GridCompactum(level, (origin[0] + i0, origin[1] + j0),
                             np.ascontiguousarray(trimmed), source)

    @property
    def is_empty(self) -> bool:
        return self.mask.size == 0 or not self.mask.any()

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    def cells(self) -> Cells:
        if self.is_empty:
            return np.zeros((0, 2), dtype=np.int64)
        js, is_ = np.nonzero(self.mask)
        cells = np.stack([is_ + self.origin[0], js + self.origin[1]], axis=1)
        return sort_cells(cells.astype(np.int64))

    def cell_bbox(self) -> tuple[int, int, int, int]:
        """(i0, j0, i1, j1) inclusive cell-index bounds; raises when empty."""
        if self.is_empty:
            raise GridError("empty raster has no bounding box")
        return (self.origin[0], self.origin[1],
                self.origin[0] + self.mask.shape[1] - 1,
                self.origin[1] + self.mask.shape[0] - 1)

    def scene_bbox(self) -> Box:
        i0, j0, i1, j1 = self.cell_bbox()
        s = self.level.cell_size
        return Box(i0 * s, j0 * s, (i1 + 1) * s, (j1 + 1) * s)

    def contains_cell(self, i: int, j: int) -> bool:
        ii, jj = i - self.origin[0], j - self.origin[1]
        if 0 <= jj < self.mask.shape[0] and 0 <= ii < self.mask.shape[1]:
            return bool(self.mask[jj, ii])
        return False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridCompactum):
            return NotImplemented
        return (self.level == other.level
                and np.array_equal(self.cells(), other.cells()))

    def __repr__(self) -> str:
        return (f"GridCompactum(level=Level({self.level.n}, {self.level.base}), "
                f"cells={self.count})")


def rasterize(spec: SetSpec, level: Level) -> GridCompactum:
    """Outer cover of spec at the given level.

    Exact fills take priority; otherwise the conservative oracle drives a
    subdivision search over the spec bounding box (boxes reported disjoint are
    pruned, unknowns are refined down to single cells and kept).
    """
    if level.n > max_level():
        raise DepthExceeded(f"level {level.n} exceeds cap {max_level()}")
    if spec.fill is not None:
        origin, mask = spec.fill(level)
        return GridCompactum.from_mask(level, origin, mask, source=spec)
    s = level.cell_size
    i0 = int(np.floor(spec.bbox.x0 / s))
    j0 = int(np.floor(spec.bbox.y0 / s))
    i1 = int(np.ceil(spec.bbox.x1 / s)) - 1
    j1 = int(np.ceil(spec.bbox.y1 / s)) - 1
    hits: list[tuple[int, int]] = []
    stack = [(i0, j0, max(i1 - i0 + 1, 1), max(j1 - j0 + 1, 1))]
    while stack:
        bi, bj, wi, wj = stack.pop()
        verdict = spec.oracle(Box(bi * s, bj * s, (bi + wi) * s, (bj + wj) * s))
        if verdict is False:
            continue
        if wi == 1 and wj == 1:
            hits.append((bi, bj))
            continue
        hi, hj = max(wi // 2, 1), max(wj // 2, 1)
        parts = {(bi, bj, hi if wi > 1 else 1, hj if wj > 1 else 1)}
        if wi > 1:
            parts.add((bi + hi, bj, wi - hi, hj if wj > 1 else 1))
        if wj > 1:
            parts.add((bi, bj + hj, hi if wi > 1 else 1, wj - hj))
        if wi > 1 and wj > 1:
            parts.add((bi + hi, bj + hj, wi - hi, wj - hj))
        stack.extend(sorted(parts))
    return GridCompactum.from_cells(level, np.array(sorted(hits), dtype=np.int64).reshape(-1, 2),
                                    source=spec)


def coarsen(K: GridCompactum) -> GridCompactum:
    """One-level outer coarsening: a parent cell is kept iff any child is."""
    if K.level.n < 1:
        raise GridError("already at level 0")
    parent = K.level.coarser()
    if K.is_empty:
        return GridCompactum(parent, (0, 0), np.zeros((0, 0), dtype=bool), K.source)
    cells = K.cells()
    coarse = np.unique(cells // K.level.base, axis=0)  # floor division: exact for negatives
    return GridCompactum.from_cells(parent, coarse, source=K.source)


@dataclass(frozen=True)
class ComponentMeta:
    id: int
    size: int
    cell_bbox: tuple[int, int, int, int]  # (i0, j0, i1, j1) inclusive
    diameter: float
    touches_frame: bool

    @property
    def unbounded(self) -> bool:
        return self.touches_frame


@dataclass(frozen=True)
class ComponentLabeling:
    level: Level
    origin: tuple[int, int]
    labels: np.ndarray  # int32; -1 outside the labeled set
    metas: tuple[ComponentMeta, ...]

    @property
    def count(self) -> int:
        return len(self.metas)

    def component_cells(self, cid: int) -> Cells:
        js, is_ = np.nonzero(self.labels == cid)
        cells = np.stack([is_ + self.origin[0], js + self.origin[1]], axis=1)
        return sort_cells(cells.astype(np.int64))

    def id_at(self, i: int, j: int) -> int:
        ii, jj = i - self.origin[0], j - self.origin[1]
        if 0 <= jj < self.labels.shape[0] and 0 <= ii < self.labels.shape[1]:
            return int(self.labels[jj, ii])
        return -1


def _label_mask(mask: np.ndarray, connectivity: int) -> tuple[np.ndarray, int]:
    if connectivity not in (4, 8):
        raise GridError(f"connectivity must be 4 or 8, got {connectivity}")
    struct = _STRUCT_8 if connectivity == 8 else _STRUCT_4
    raw, n = ndimage.label(mask, structure=struct)
    labels = raw.astype(np.int32) - 1  # background -> -1, ids 0-based
    if n == 0:
        return labels, 0
    # scipy assigns ids in scan order already, but renumber by first-encounter
    # row-major position anyway so determinism never rests on its internals.
    flat = labels.ravel()
    fg = np.nonzero(flat >= 0)[0]
    first = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(first, flat[fg], fg)
    remap = np.empty(n, dtype=np.int32)
    remap[np.argsort(first, kind="stable")] = np.arange(n, dtype=np.int32)
    flat[fg] = remap[flat[fg]]
    return labels, n


def _metas_from_labels(labels: np.ndarray, n: int, origin: tuple[int, int],
                       level: Level) -> tuple[ComponentMeta, ...]:
    metas = []
    nj, ni = labels.shape
    for cid in range(n):
        js, is_ = np.nonzero(labels == cid)
        cells = np.stack([is_ + origin[0], js + origin[1]], axis=1).astype(np.int64)
        bbox = (int(cells[:, 0].min()), int(cells[:, 1].min()),
                int(cells[:, 0].max()), int(cells[:, 1].max()))
        touches = bool(js.min() == 0 or is_.min() == 0
                       or js.max() == nj - 1 or is_.max() == ni - 1)
        metas.append(ComponentMeta(cid, len(cells), bbox,
                                   diameter(cells, level.cell_size), touches))
    return tuple(metas)


def label_components(K: GridCompactum, connectivity: int = 8) -> ComponentLabeling:
    """Deterministic component labeling of an occupied-cell raster."""
    labels, n = _label_mask(K.mask, connectivity)
    return ComponentLabeling(K.level, K.origin, labels,
                             _metas_from_labels(labels, n, K.origin, K.level))


def window_cell_range(window: Box, level: Level) -> tuple[int, int, int, int]:
    """Cells whose boxes cover the window: (i0, j0, i1, j1) inclusive."""
    s = level.cell_size
    i0 = int(np.floor(window.x0 / s + 1e-9))
    j0 = int(np.floor(window.y0 / s + 1e-9))
    i1 = int(np.ceil(window.x1 / s - 1e-9)) - 1
    j1 = int(np.ceil(window.y1 / s - 1e-9)) - 1
    if i1 < i0 or j1 < j0:
        raise WindowError(f"window {window} collapses at level {level.n}")
    return i0, j0, i1, j1


def complement_components(K: GridCompactum, window: Box) -> ComponentLabeling:
    """4-connected components of the window cells not in K.

    Components touching the window frame are flagged unbounded (stand-ins for
    the single unbounded complement component of the true compactum).
    """
    i0, j0, i1, j1 = window_cell_range(window, K.level)
    if not K.is_empty:
        ki0, kj0, ki1, kj1 = K.cell_bbox()
        if ki0 < i0 or kj0 < j0 or ki1 > i1 or kj1 > j1:
            raise WindowError("window smaller than K's bounding box")
    ni, nj = i1 - i0 + 1, j1 - j0 + 1
    occupied = np.zeros((nj, ni), dtype=bool)
    if not K.is_empty:
        cells = K.cells()
        occupied[cells[:, 1] - j0, cells[:, 0] - i0] = True
    labels, n = _label_mask(~occupied, 4)
    return ComponentLabeling(K.level, (i0, j0), labels,
                             _metas_from_labels(labels, n, (i0, j0), K.level))


def hausdorff_distance(a: Cells, b: Cells, cell_size: float) -> float:
    """Symmetric Hausdorff distance between cell-center clouds, scene units."""
    a, b = _as_cells(a), _as_cells(b)
    if len(a) == 0 or len(b) == 0:
        raise GridError("hausdorff_distance of an empty cell set")
    pa = (a.astype(np.float64) + 0.5) * cell_size
    pb = (b.astype(np.float64) + 0.5) * cell_size
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))


def diameter(a: Cells, cell_size: float) -> float:
    """Max pairwise distance over cell-box corner extremes, scene units."""
    a = _as_cells(a)
    if len(a) == 0:
        raise GridError("diameter of an empty cell set")
    if len(a) > 256:
        # only each row's extreme cells can carry hull corners; the corners
        # of interior cells are collinear with them.  Keeps the corner cloud
        # small for huge components.
        order = np.lexsort((a[:, 0], a[:, 1]))
        si, sj = a[order, 0], a[order, 1]
        starts = np.flatnonzero(np.r_[True, sj[1:] != sj[:-1]])
        rows = sj[starts]
        a = np.unique(np.concatenate([
            np.stack([np.minimum.reduceat(si, starts), rows], axis=1),
            np.stack([np.maximum.reduceat(si, starts), rows], axis=1)]), axis=0)
    base = a.astype(np.float64)
    corners = np.concatenate([base + off for off in
                              ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))])
    corners = np.unique(corners, axis=0) * cell_size
    if len(corners) > 4:
        try:
            corners = corners[ConvexHull(corners).vertices]
        except QhullError:
            pass  # collinear clouds: brute force below is still exact
    diff = corners[:, None, :] - corners[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2)).max())


# The 8 grid isometries, as maps on cell indices about the scene origin.
# t = 0..3 rotate by 90*t degrees CCW; t = 4..7 reflect (x -> -x) then rotate.
TRANSFORM_IDS = tuple(range(8))


def transform_cells(cells: Cells, t: int) -> Cells:
    cells = _as_cells(cells)
    i, j = cells[:, 0], cells[:, 1]
    if t == 0:
        out = cells
    elif t == 1:
        out = np.stack([-1 - j, i], axis=1)
    elif t == 2:
        out = np.stack([-1 - i, -1 - j], axis=1)
    elif t == 3:
        out = np.stack([j, -1 - i], axis=1)
    elif t == 4:
        out = np.stack([-1 - i, j], axis=1)
    elif t == 5:
        out = np.stack([j, i], axis=1)
    elif t == 6:
        out = np.stack([i, -1 - j], axis=1)
    elif t == 7:
        out = np.stack([-1 - j, -1 - i], axis=1)
    else:
        raise GridError(f"unknown transform {t}")
    return out.astype(np.int64)


def transform_point(x: float, y: float, t: int) -> tuple[float, float]:
    if t == 0:
        return x, y
    if t == 1:
        return -y, x
    if t == 2:
        return -x, -y
    if t == 3:
        return y, -x
    if t == 4:
        return -x, y
    if t == 5:
        return y, x
    if t == 6:
        return x, -y
    if t == 7:
        return -y, -x
    raise GridError(f"unknown transform {t}")


def inverse_transform(t: int) -> int:
    return {0: 0, 1: 3, 2: 2, 3: 1, 4: 4, 5: 5, 6: 6, 7: 7}[t]


def transform_box(box: Box, t: int) -> Box:
    xa, ya = transform_point(box.x0, box.y0, t)
    xb, yb = transform_point(box.x1, box.y1, t)
    return Box(min(xa, xb), min(ya, yb), max(xa, xb), max(ya, yb))


def transform_grid(K: GridCompactum, t: int) -> GridCompactum:
    """Apply one of the 8 grid isometries; exact on cell indices."""
    return GridCompactum.from_cells(K.level, transform_cells(K.cells(), t))


def transform_spec(spec: SetSpec, t: int) -> SetSpec:
    """Isometry-transformed spec whose rasterization is exactly the
    transformed rasterization of the original at every level."""
    if t == 0:
        return spec
    inv = inverse_transform(t)
    fill = None
    if spec.fill is not None:
        base_fill = spec.fill

        def fill(level: Level, _f: ExactFill = base_fill) -> tuple[tuple[int, int], np.ndarray]:
            origin, mask = _f(level)
            js, is_ = np.nonzero(mask)
            cells = np.stack([is_ + origin[0], js + origin[1]], axis=1).astype(np.int64)
            moved = transform_cells(cells, t)
            if len(moved) == 0:
                return (0, 0), np.zeros((0, 0), dtype=bool)
            i0, j0 = int(moved[:, 0].min()), int(moved[:, 1].min())
            out = np.zeros((int(moved[:, 1].max()) - j0 + 1,
                            int(moved[:, 0].max()) - i0 + 1), dtype=bool)
            out[moved[:, 1] - j0, moved[:, 0] - i0] = True
            return (i0, j0), out

    def oracle(box: Box) -> Optional[bool]:
        return spec.oracle(transform_box(box, inv))

    return SetSpec(name=f"{spec.name}~t{t}", bbox=transform_box(spec.bbox, t),
                   oracle=oracle, fill=fill, base=spec.base)
