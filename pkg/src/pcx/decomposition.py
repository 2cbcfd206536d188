"""Finite-scale core decompositions with Peano-model quotients.

A raster cell is related to another when some bounded region between two
parallel grid lines (or nested rectangles) is crossed by a whole cluster of
distinct components accumulating on a common limit set: the finite surrogate
of "infinitely many crossing components".  Two detection routes feed the
relation:

* same-level clustering: >= n_min crossing components within single-linkage
  Hausdorff distance delta of each other; their mutual limit cells are glued
  (optionally required to persist one level finer);
* deep splitting (multi-level mode): one crossing component at the working
  level that splinters into >= deep_children distinct fragments of the same
  region several levels finer is an accumulation witness; the cells meeting
  two or more fragments within delta (the fracture locus) are glued, one
  connected patch at a time.  Needs the raster's source spec to refine.

The relation is closed into an equivalence by union-find; class ids are
canonical (ascending by smallest row-major cell), so equal partitions are
byte-identical.
"""
from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .grid import (Box, Cells, GridCompactum, GridError, Level, SetSpec,
                   _as_cells, _label_mask, diameter, hausdorff_distance,
                   label_components, max_level, rasterize, sort_cells)
from .schoenflies import RectAnnulus, Region, Strip, _region_core, _slab

_FAMILIES = ("strips-all-offsets", "rect-annuli-sampled", "both")


@dataclass(frozen=True)
class RelationParams:
    """Knobs for the finite accumulation detector.

    delta is in scene units (None: 2 cells at the working level).  n_min is
    the cluster size standing in for "infinitely many".  deep_levels and
    deep_children control multi-level splitting.
    """
    n_min: int = 4
    delta: float | None = None
    annulus_family: str = "both"
    stride: int = 8
    multi_level: bool = True
    deep_levels: int = 3
    deep_children: int = 3

    def __post_init__(self) -> None:
        if self.n_min < 3:
            raise GridError(f"n_min must be >= 3, got {self.n_min}")
        if self.delta is not None and self.delta <= 0:
            raise GridError("delta must be positive")
        if self.annulus_family not in _FAMILIES:
            raise GridError(f"annulus_family must be one of {_FAMILIES}")
        if self.stride < 1:
            raise GridError("stride must be >= 1")
        if self.deep_levels < 1:
            raise GridError("deep_levels must be >= 1")
        if self.deep_children < 2:
            raise GridError("deep_children must be >= 2")


@dataclass(frozen=True, eq=False)
class RelationSeed:
    level: Level
    merge_sets: tuple[Cells, ...]

    def to_dict(self) -> dict:
        return {
            "level": self.level.n,
            "base": self.level.base,
            "merge_sets": [[[int(i), int(j)] for i, j in ms]
                           for ms in self.merge_sets],
        }


@dataclass(frozen=True, eq=False)
class ClassInfo:
    id: int
    representative: tuple[int, int]  # smallest row-major cell
    cells: Cells
    size: int
    diameter: float


@dataclass(frozen=True, eq=False)
class Decomposition:
    level: Level
    origin: tuple[int, int]
    class_map: np.ndarray  # int32 per cell; -1 outside K
    classes: tuple[ClassInfo, ...]

    @property
    def cell_count(self) -> int:
        return sum(c.size for c in self.classes)

    def class_of(self, i: int, j: int) -> int:
        ii, jj = i - self.origin[0], j - self.origin[1]
        if 0 <= jj < self.class_map.shape[0] and 0 <= ii < self.class_map.shape[1]:
            return int(self.class_map[jj, ii])
        return -1

    def cells(self) -> Cells:
        js, is_ = np.nonzero(self.class_map >= 0)
        return np.stack([is_ + self.origin[0], js + self.origin[1]],
                        axis=1).astype(np.int64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Decomposition):
            return NotImplemented
        if self.level != other.level or len(self.classes) != len(other.classes):
            return False
        return all(np.array_equal(a.cells, b.cells)
                   for a, b in zip(self.classes, other.classes))

    def to_dict(self, include_cells: bool = False) -> dict:
        classes = []
        for c in self.classes:
            row = {
                "id": c.id,
                "representative": [int(c.representative[0]), int(c.representative[1])],
                "size": c.size,
                "diameter": c.diameter,
            }
            if include_cells:
                row["cells"] = [[int(i), int(j)] for i, j in c.cells]
            classes.append(row)
        return {
            "level": self.level.n,
            "base": self.level.base,
            "cell_size": self.level.cell_size,
            "class_count": len(self.classes),
            "classes": classes,
        }


@dataclass(frozen=True, eq=False)
class QuotientGraph:
    """Classes as nodes, joined when they contain 8-adjacent cells."""
    level: Level
    nodes: tuple[int, ...]
    sizes: tuple[int, ...]
    diameters: tuple[float, ...]
    representatives: Cells  # one cell per node, aligned with nodes
    edges: tuple[tuple[int, int], ...]
    components: tuple[tuple[int, ...], ...]
    component_diameters: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "level": self.level.n,
            "base": self.level.base,
            "nodes": [{"id": n, "size": s, "diameter": d,
                       "representative": [int(r[0]), int(r[1])]}
                      for n, s, d, r in zip(self.nodes, self.sizes,
                                            self.diameters, self.representatives)],
            "edges": [[a, b] for a, b in self.edges],
            "components": [list(c) for c in self.components],
            "component_diameters": list(self.component_diameters),
        }


# ---------------------------------------------------------------------------
# region families

def _strip_family(K: GridCompactum) -> list[Strip]:
    """All bands two cells wide, both axes, overlapping by one cell so glued
    bands chain transitively along a fiber."""
    i0, j0, i1, j1 = K.cell_bbox()
    s = K.level.cell_size
    fam = [Strip("h", k * s, (k + 2) * s) for k in range(j0 - 1, j1 + 1)]
    fam += [Strip("v", k * s, (k + 2) * s) for k in range(i0 - 1, i1 + 1)]
    return fam


def _annulus_family(K: GridCompactum, stride: int) -> list[RectAnnulus]:
    """Square annuli (17x17 outer, 7x7 inner hole, 5-cell ring) centered on a
    stride-sampled subset of K's cells.  A cell is sampled when both
    coordinates sit at a stride-block edge (i mod stride in {0, stride-1},
    same for j): that set is invariant under the 8 grid isometries, so the
    family commutes with them.  The hole is wide enough to sever a fattened
    curve bundle into one crossing piece per side, and the ring reaches past
    the sample spacing so neighbouring glue patches overlap and chain."""
    s = K.level.cell_size
    edge = {0, stride - 1}
    out = []
    for i, j in K.cells():
        if int(i) % stride in edge and int(j) % stride in edge:
            out.append(RectAnnulus(
                Box((i - 8) * s, (j - 8) * s, (i + 9) * s, (j + 9) * s),
                Box((i - 3) * s, (j - 3) * s, (i + 4) * s, (j + 4) * s)))
    return out


# ---------------------------------------------------------------------------
# relation seeding

def _cells_by_label(labels: np.ndarray, origin: tuple[int, int],
                    ids: Iterable[int]) -> dict[int, Cells]:
    """Absolute cells per label id, row-major within each id."""
    wanted = set(int(x) for x in ids)
    js, is_ = np.nonzero(labels >= 0)
    lab = labels[js, is_]
    cells = np.stack([is_ + origin[0], js + origin[1]], axis=1).astype(np.int64)
    order = np.argsort(lab, kind="stable")  # keeps row-major order inside ids
    lab, cells = lab[order], cells[order]
    bounds = np.searchsorted(lab, np.arange(lab.max() + 2) if len(lab) else [])
    out = {}
    for cid in wanted:
        if len(lab) and cid <= lab[-1]:
            a, b = bounds[cid], bounds[cid + 1]
            if b > a:
                out[cid] = cells[a:b]
    return out


def _islands(cells: Cells) -> list[Cells]:
    """8-connected pieces of a cell set, each row-major sorted."""
    i0, j0 = int(cells[:, 0].min()), int(cells[:, 1].min())
    mask = np.zeros((int(cells[:, 1].max()) - j0 + 1,
                     int(cells[:, 0].max()) - i0 + 1), dtype=bool)
    mask[cells[:, 1] - j0, cells[:, 0] - i0] = True
    labels, n = _label_mask(mask, 8)
    if n <= 1:
        return [sort_cells(cells)]
    js, is_ = np.nonzero(mask)
    lab = labels[js, is_]
    pieces = np.stack([is_ + i0, js + j0], axis=1).astype(np.int64)
    return [sort_cells(pieces[lab == cid]) for cid in range(n)]


def _single_linkage(cells_of: dict[int, Cells], delta: float,
                    s: float) -> list[list[int]]:
    """Groups of ids whose cell sets chain together under symmetric Hausdorff
    distance <= delta.  Box-gap prefilter: the gap between bounding boxes
    lower-bounds the Hausdorff distance, so distant pairs are never measured."""
    ids = sorted(cells_of)
    if not ids:
        return []
    lo = np.array([[cells_of[c][:, 0].min(), cells_of[c][:, 1].min()] for c in ids])
    hi = np.array([[cells_of[c][:, 0].max(), cells_of[c][:, 1].max()] for c in ids])
    parent = {c: c for c in ids}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for ai in range(len(ids)):
        for bi in range(ai + 1, len(ids)):
            a, b = ids[ai], ids[bi]
            gx = max(0, lo[bi, 0] - hi[ai, 0] - 1, lo[ai, 0] - hi[bi, 0] - 1)
            gy = max(0, lo[bi, 1] - hi[ai, 1] - 1, lo[ai, 1] - hi[bi, 1] - 1)
            if math.hypot(gx, gy) * s > delta + 1e-9 or find(a) == find(b):
                continue
            if hausdorff_distance(cells_of[a], cells_of[b], s) <= delta + 1e-9:
                parent[find(b)] = find(a)

    groups: dict[int, list[int]] = {}
    for c in ids:
        groups.setdefault(find(c), []).append(c)
    return [sorted(groups[r]) for r in sorted(groups, key=lambda r: min(groups[r]))]


def _limit_cells(members: list[Cells], candidates: Cells, delta: float,
                 s: float, n_min: int) -> Cells:
    """Cells supported by at least min(len(members), n_min) member sets."""
    if len(candidates) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    need = min(len(members), n_min)
    pts = (candidates.astype(np.float64) + 0.5) * s
    acc = np.zeros(len(candidates), dtype=np.int32)
    for mc in members:
        tree = cKDTree((mc.astype(np.float64) + 0.5) * s)
        d = tree.query(pts, distance_upper_bound=delta + 1e-9)[0]
        acc += np.isfinite(d)
    return sort_cells(candidates[acc >= need])


def schoenflies_relation(K: GridCompactum, params: RelationParams | None = None,
                         jobs: int = 1) -> RelationSeed:
    """Merge sets witnessing accumulation of crossing components.

    Scans every region of the enumerated family in intersection mode.  A
    cluster of >= n_min crossing components emits its limit cells; in
    multi-level mode the cluster must persist (not shrink) one level finer.
    Additionally, any single crossing component that splits into >=
    deep_children distinct fragments of the same region deep_levels finer
    emits its fracture locus: the cells touched by at least two fragments
    within delta, one connected patch per merge set.  Both routes need
    K.source when they refine; without a source the same-level route runs
    unfiltered and deep splitting is off.
    """
    params = params or RelationParams()
    if K.is_empty:
        return RelationSeed(K.level, ())
    s = K.level.cell_size
    delta = params.delta if params.delta is not None else 2.0 * s
    if delta < s - 1e-12:
        raise GridError(f"delta {delta} is below one cell ({s})")
    base = K.level.base

    regions: list[Region] = []
    if params.annulus_family in ("strips-all-offsets", "both"):
        regions.extend(_strip_family(K))
    if params.annulus_family in ("rect-annuli-sampled", "both"):
        regions.extend(_annulus_family(K, params.stride))

    deep: GridCompactum | None = None
    factor = 1
    if params.multi_level and K.source is not None:
        deep_n = min(K.level.n + params.deep_levels, max_level())
        if deep_n > K.level.n:
            deep = rasterize(K.source, Level(deep_n, base))
            factor = base ** (deep_n - K.level.n)

    next_raster: list[GridCompactum | None] = [None]  # lazy, for persistence

    def next_level_raster() -> GridCompactum | None:
        if next_raster[0] is None and K.source is not None \
                and K.level.n + 1 <= max_level():
            next_raster[0] = rasterize(K.source, K.level.finer())
        return next_raster[0]

    kcells = K.cells()

    def persists(region: Region, members: list[Cells], size: int) -> bool:
        K2 = next_level_raster()
        if K2 is None:
            return True  # nothing to refine against: accept as-is
        core2 = _region_core(K2, region, "intersection")
        if not core2.crossing:
            return False
        cells2 = _cells_by_label(core2.labels, core2.origin, core2.crossing)
        union = set(map(tuple, np.concatenate(members)))
        for group in _single_linkage(cells2, delta, K2.level.cell_size):
            if len(group) < size:
                continue
            for cid in group:
                parents = cells2[cid] // base
                if any(tuple(p) in union for p in parents):
                    return True
        return False

    def seeds_for(region: Region) -> list[Cells]:
        out: list[Cells] = []
        core = _region_core(K, region, "intersection")
        if not core.crossing:
            return out
        cells_of = _cells_by_label(core.labels, core.origin, core.crossing)

        # same-level accumulation: big clusters glue their limit cells
        gated = [g for g in _single_linkage(cells_of, delta, s)
                 if len(g) >= params.n_min]
        if gated:
            reach = int(np.ceil(delta / s)) + 1
            nj, ni = core.labels.shape
            o = core.origin
            keep = ((kcells[:, 0] >= o[0] - reach)
                    & (kcells[:, 0] <= o[0] + ni - 1 + reach)
                    & (kcells[:, 1] >= o[1] - reach)
                    & (kcells[:, 1] <= o[1] + nj - 1 + reach))
            candidates = kcells[keep]
            for group in gated:
                members = [cells_of[c] for c in group]
                if params.multi_level and not persists(region, members, len(group)):
                    continue
                limit = _limit_cells(members, candidates, delta, s, params.n_min)
                if len(limit):
                    out.append(limit)

        # multi-level splitting: a member exploding into many deep crossing
        # components is an accumulation witness.  Glue its approximate limit
        # (coarse cells supported by enough deep pieces), not the whole coarse
        # component, which can also hold well-resolved geometry that merely
        # touches the blob at this resolution.
        if deep is not None:
            dcore = _region_core(deep, region, "intersection")
            if dcore.crossing:
                dcells = _cells_by_label(dcore.labels, dcore.origin, dcore.crossing)
                # an annulus ring cuts a curve threading the hole into two
                # crossing pieces (one per side).  That is the right crossing
                # count, but for fragment identity the curve is one object:
                # fuse pieces that connect through the window's full slab, or
                # one arc would vouch for itself twice near its portals.
                if isinstance(region, RectAnnulus):
                    (foi, foj, foi1, foj1), _ = region.snapped_rects(deep.level)
                    full = _label_mask(_slab(deep, foi, foj, foi1, foj1), 8)[0]
                    byfull: dict[int, list[int]] = defaultdict(list)
                    for did in dcore.crossing:
                        fi, fj = dcells[did][0]
                        byfull[int(full[int(fj) - foj, int(fi) - foi])].append(did)
                    groups = list(byfull.values())
                    units = [dcells[g[0]] if len(g) == 1 else
                             np.concatenate([dcells[d] for d in g]) for g in groups]
                    fused = [len(g) > 1 for g in groups]
                else:
                    units = [dcells[did] for did in dcore.crossing]
                    fused = [False] * len(units)
                children: dict[int, list[int]] = defaultdict(list)
                oi, oj = core.origin
                nj, ni = core.labels.shape
                for uid, ucells in enumerate(units):
                    if fused[uid]:
                        # a fused unit can surface in several coarse pieces
                        # (its halves reconnect through the masked-out hole),
                        # so it counts under every piece its parents meet
                        par = ucells // factor
                        ii, jj = par[:, 0] - oi, par[:, 1] - oj
                        ok = (0 <= ii) & (ii < ni) & (0 <= jj) & (jj < nj)
                        cids = np.unique(core.labels[jj[ok], ii[ok]])
                    else:
                        # one fragment: its parents stay 8-connected inside
                        # the region, hence inside one coarse piece
                        pi, pj = ucells[0] // factor
                        ii, jj = int(pi) - oi, int(pj) - oj
                        cids = (core.labels[jj, ii],) \
                            if 0 <= jj < nj and 0 <= ii < ni else ()
                    for cid in cids:
                        if cid >= 0:
                            children[int(cid)].append(uid)
                sd = deep.level.cell_size
                for cid in core.crossing:
                    kids = children.get(cid, ())
                    if len(kids) < params.deep_children:
                        continue
                    pts = (cells_of[cid].astype(np.float64) + 0.5) * s
                    acc = np.zeros(len(pts), dtype=np.int32)
                    for uid in kids:
                        tree = cKDTree((units[uid].astype(np.float64) + 0.5) * sd)
                        d = tree.query(pts, distance_upper_bound=delta + 1e-9)[0]
                        acc += np.isfinite(d)
                    # >= deep_children pieces witness the split globally; a
                    # cell sits on the fracture locus when at least two of
                    # the fragments meet it within delta (a transversal
                    # through a split point only ever shows two local sides).
                    # Each connected patch of that locus stands for its own
                    # limit continuum, so patches are related separately.
                    limit = cells_of[cid][acc >= 2]
                    if len(limit):
                        out.extend(_islands(limit))
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_region = list(pool.map(seeds_for, regions))
    else:
        per_region = [seeds_for(r) for r in regions]

    merge_sets = tuple(ms for group in per_region for ms in group)
    return RelationSeed(K.level, merge_sets)


# ---------------------------------------------------------------------------
# equivalence closure and partitions

class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = np.arange(n, dtype=np.int64)

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return int(x)

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _partition_from_ids(K: GridCompactum, cells: Cells,
                        raw_ids: np.ndarray) -> Decomposition:
    """Canonical Decomposition from per-cell group keys (cells row-major)."""
    s = K.level.cell_size
    _, first, inverse = np.unique(raw_ids, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    class_ids = rank[inverse]

    oi, oj = K.origin
    class_map = np.full(K.mask.shape, -1, dtype=np.int32)
    class_map[cells[:, 1] - oj, cells[:, 0] - oi] = class_ids.astype(np.int32)

    order = np.argsort(class_ids, kind="stable")
    sorted_ids = class_ids[order]
    sorted_cells = cells[order]
    bounds = np.searchsorted(sorted_ids, np.arange(len(first) + 1))
    classes = []
    for cid in range(len(first)):
        group = sorted_cells[bounds[cid]:bounds[cid + 1]]
        classes.append(ClassInfo(cid, (int(group[0, 0]), int(group[0, 1])),
                                 group, len(group), diameter(group, s)))
    return Decomposition(K.level, K.origin, class_map, tuple(classes))


def close_equivalence(K: GridCompactum, seed: RelationSeed) -> Decomposition:
    """Smallest equivalence gluing every merge set; classes canonically
    numbered by their smallest row-major cell."""
    if seed.level != K.level:
        raise GridError("seed level does not match the raster")
    cells = K.cells()
    n = len(cells)
    if n == 0:
        return Decomposition(K.level, K.origin,
                             np.full(K.mask.shape, -1, dtype=np.int32), ())
    oi, oj = K.origin
    index = np.full(K.mask.shape, -1, dtype=np.int64)
    index[cells[:, 1] - oj, cells[:, 0] - oi] = np.arange(n)
    uf = _UnionFind(n)
    for ms in seed.merge_sets:
        ms = _as_cells(ms)
        if len(ms) == 0:
            raise GridError("empty merge set")
        ii, jj = ms[:, 0] - oi, ms[:, 1] - oj
        ok = ((ii >= 0) & (ii < index.shape[1]) & (jj >= 0) & (jj < index.shape[0]))
        if not ok.all():
            raise GridError("merge set cell outside K")
        idxs = index[jj, ii]
        if (idxs < 0).any():
            raise GridError("merge set cell outside K")
        first = int(idxs[0])
        for t in idxs[1:]:
            uf.union(first, int(t))
    roots = np.array([uf.find(t) for t in range(n)], dtype=np.int64)
    return _partition_from_ids(K, cells, roots)


def decompose(spec: SetSpec, level: Level, params: RelationParams | None = None,
              jobs: int = 1) -> Decomposition:
    """rasterize -> schoenflies_relation -> close_equivalence."""
    K = rasterize(spec, level)
    seed = schoenflies_relation(K, params, jobs=jobs)
    return close_equivalence(K, seed)


# ---------------------------------------------------------------------------
# quotient graphs

_ADJ_SHIFTS = ((1, 0), (0, 1), (1, 1), (1, -1))


def quotient_graph(K: GridCompactum, D: Decomposition) -> QuotientGraph:
    if D.level != K.level or D.class_map.shape != K.mask.shape \
            or D.origin != K.origin or D.cell_count != K.count:
        raise GridError("decomposition does not partition this raster")
    cm = D.class_map
    H, W = cm.shape
    pairs = []
    for di, dj in _ADJ_SHIFTS:
        if dj >= 0:
            a, b = cm[:H - dj, :W - di], cm[dj:, di:]
        else:
            a, b = cm[-dj:, :W - di], cm[:H + dj, di:]
        both = (a >= 0) & (b >= 0) & (a != b)
        if both.any():
            pairs.append(np.stack([np.minimum(a[both], b[both]),
                                   np.maximum(a[both], b[both])], axis=1))
    if pairs:
        edges_arr = np.unique(np.concatenate(pairs), axis=0)
        edges = tuple((int(a), int(b)) for a, b in edges_arr)
    else:
        edges = ()

    n = len(D.classes)
    uf = _UnionFind(n)
    for a, b in edges:
        uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(uf.find(v), []).append(v)
    components = tuple(tuple(sorted(groups[r]))
                       for r in sorted(groups, key=lambda r: min(groups[r])))
    s = K.level.cell_size
    comp_diams = tuple(
        diameter(np.concatenate([D.classes[c].cells for c in comp]), s)
        for comp in components)
    reps = np.array([c.representative for c in D.classes],
                    dtype=np.int64).reshape(n, 2)
    return QuotientGraph(K.level, tuple(range(n)),
                         tuple(c.size for c in D.classes),
                         tuple(c.diameter for c in D.classes),
                         reps, edges, components, comp_diams)


def contract_degree_two(nodes: Iterable[int],
                        edges: Iterable[tuple[int, int]]
                        ) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    """Repeatedly remove vertices of degree two, until stable.

    Adjacency triangles are read as filled (clique semantics, matching the
    8-adjacency the graph was built with), so two moves are sound:

    * neighbors already adjacent: dropping the vertex collapses a filled
      triangle across its free face;
    * neighbors not adjacent and sharing no other common neighbor: dropping
      the vertex and joining the neighbors un-subdivides the chain edge.

    A chordless quadrilateral admits neither move, which is what keeps a
    genuine loop from ever contracting into a path."""
    adj: dict[int, set[int]] = {int(v): set() for v in nodes}
    for a, b in edges:
        adj[int(a)].add(int(b))
        adj[int(b)].add(int(a))
    changed = True
    while changed:
        changed = False
        for v in sorted(adj):
            nbrs = adj[v]
            if len(nbrs) != 2:
                continue
            a, b = sorted(nbrs)
            if b not in adj[a] and (adj[a] & adj[b]) - {v}:
                continue  # joining a-b would fill a square that is hollow
            adj[a].discard(v)
            adj[b].discard(v)
            adj[a].add(b)
            adj[b].add(a)
            del adj[v]
            changed = True
    out_nodes = tuple(sorted(adj))
    out_edges = tuple(sorted((a, b) for a in adj for b in adj[a] if a < b))
    return out_nodes, out_edges


def is_simple_path(nodes: Sequence[int],
                   edges: Sequence[tuple[int, int]]) -> bool:
    """True for a path graph: connected, acyclic, max degree 2."""
    if len(nodes) == 0:
        return False
    if len(nodes) == 1:
        return len(edges) == 0
    deg: dict[int, int] = {v: 0 for v in nodes}
    adj: dict[int, list[int]] = {v: [] for v in nodes}
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
        adj[a].append(b)
        adj[b].append(a)
    if len(edges) != len(nodes) - 1 or any(d > 2 for d in deg.values()):
        return False
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


# ---------------------------------------------------------------------------
# diagnostics

@dataclass(frozen=True)
class MonotoneReport:
    all_connected: bool
    disconnected_ids: tuple[int, ...]
    quotient_components: int
    compactum_components: int

    @property
    def ok(self) -> bool:
        return self.all_connected and \
            self.quotient_components == self.compactum_components

    def to_dict(self) -> dict:
        return {
            "all_connected": self.all_connected,
            "disconnected_ids": list(self.disconnected_ids),
            "quotient_components": self.quotient_components,
            "compactum_components": self.compactum_components,
            "ok": self.ok,
        }


def monotone_check(K: GridCompactum, D: Decomposition) -> MonotoneReport:
    """Connectivity audit: every class should be one 8-connected piece and
    the quotient should have exactly as many components as K.  A violation is
    reported, never repaired — it signals bad relation parameters."""
    bad = []
    for c in D.classes:
        if c.size == 1:
            continue
        cells = c.cells
        i0, j0 = int(cells[:, 0].min()), int(cells[:, 1].min())
        m = np.zeros((int(cells[:, 1].max()) - j0 + 1,
                      int(cells[:, 0].max()) - i0 + 1), dtype=bool)
        m[cells[:, 1] - j0, cells[:, 0] - i0] = True
        _, ncomp = _label_mask(m, 8)
        if ncomp != 1:
            bad.append(c.id)
    G = quotient_graph(K, D)
    kcomp = label_components(K, 8).count
    return MonotoneReport(not bad, tuple(bad), len(G.components), kcomp)


@dataclass(frozen=True)
class PeanoReport:
    levels: tuple[int, ...]
    thresholds: tuple[float, ...]
    counts: tuple[tuple[int, ...], ...]  # per threshold, per level
    stable: tuple[bool, ...]             # per threshold
    representative_scan_divergent: bool

    @property
    def ok(self) -> bool:
        return all(self.stable) and not self.representative_scan_divergent

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "thresholds": list(self.thresholds),
            "counts": [list(row) for row in self.counts],
            "stable": list(self.stable),
            "representative_scan_divergent": self.representative_scan_divergent,
            "ok": self.ok,
        }


def peano_check(graphs: Sequence[QuotientGraph],
                C_grid: Sequence[float]) -> PeanoReport:
    """Peano-compactum surrogate over quotient graphs at increasing levels.

    Property (2): for each threshold C, the number of quotient components of
    diameter >= C should stabilize (flagged when the last two levels differ).
    Property (1) surrogate: crossing counts on rasters of class
    representatives must not diverge.
    """
    if not graphs:
        raise GridError("peano_check needs at least one quotient graph")
    graphs = sorted(graphs, key=lambda g: g.level.n)
    levels = tuple(g.level.n for g in graphs)
    counts = tuple(
        tuple(sum(1 for d in g.component_diameters if d >= C - 1e-12)
              for g in graphs)
        for C in C_grid)
    stable = tuple(row[-1] == row[-2] if len(row) >= 2 else True
                   for row in counts)

    divergent = False
    reps = [GridCompactum.from_cells(g.level, g.representatives) for g in graphs]
    coarse = reps[0]
    if not coarse.is_empty:
        i0, j0, i1, j1 = coarse.cell_bbox()
        s0 = coarse.level.cell_size
        strips = [Strip("h", k * s0, (k + 2) * s0) for k in range(j0 - 1, j1 + 1)]
        strips += [Strip("v", k * s0, (k + 2) * s0) for k in range(i0 - 1, i1 + 1)]
        for strip in strips:
            ms = []
            for R in reps:
                try:
                    ms.append(len(_region_core(R, strip, "intersection").crossing))
                except GridError:
                    ms.append(0)
            if len(ms) >= 3 and all(ms[-3:][t] < ms[-3:][t + 1] for t in range(2)):
                divergent = True
                break
    return PeanoReport(levels, tuple(float(c) for c in C_grid), counts,
                       stable, divergent)


# ---------------------------------------------------------------------------
# comparing decompositions

def _same_cells(D1: Decomposition, D2: Decomposition) -> None:
    if D1.level != D2.level:
        raise GridError("decompositions live at different levels")
    if not np.array_equal(D1.cells(), D2.cells()):
        raise GridError("decompositions cover different cell sets")


def refines(D1: Decomposition, D2: Decomposition, tol: float = 0.0) -> bool:
    """True when every class of D1 maps into a single class of D2.

    With tol > 0, containment is relaxed: a D1 class may spill outside its
    D2 class as long as every cell center stays within tol of it.
    """
    _same_cells(D1, D2)
    s = D1.level.cell_size
    for c in D1.classes:
        ids2 = np.unique([D2.class_of(int(i), int(j)) for i, j in c.cells])
        if len(ids2) == 1:
            continue
        if tol <= 0:
            return False
        ok = False
        pts = (c.cells.astype(np.float64) + 0.5) * s
        for cand in ids2:
            host = (D2.classes[int(cand)].cells.astype(np.float64) + 0.5) * s
            d = cKDTree(host).query(pts)[0]
            if (d <= tol + 1e-9).all():
                ok = True
                break
        if not ok:
            return False
    return True


def common_refinement(D1: Decomposition, D2: Decomposition) -> Decomposition:
    """Classes are the nonempty pairwise intersections of D1 and D2 classes."""
    _same_cells(D1, D2)
    cells = D1.cells()
    id1 = np.array([D1.class_of(int(i), int(j)) for i, j in cells], dtype=np.int64)
    id2 = np.array([D2.class_of(int(i), int(j)) for i, j in cells], dtype=np.int64)
    keys = id1 * (len(D2.classes) + 1) + id2
    K = GridCompactum.from_cells(D1.level, cells)
    return _partition_from_ids(K, K.cells(), keys)
