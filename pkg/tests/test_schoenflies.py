from __future__ import annotations

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from pcx import (
    Box,
    GeneratorParams,
    GridCompactum,
    GridError,
    Level,
    RectAnnulus,
    Strip,
    WindowError,
    complement_diameter_scan,
    crossing_components,
    crossing_path,
    cut_wire,
    default_strip_family,
    make_spec,
    rasterize,
    schoenflies_scan,
    separating_curve,
    sort_cells,
    transform_box,
    transform_cells,
    label_components,
)

from conftest import (
    HAND_PATTERNS,
    PATH_TRANSFORMS,
    bfs_components,
    bfs_crossing_exists,
    bfs_reaches,
    cells_from_art,
    grid_from_art,
    pattern_art_size,
    pattern_cells,
    ray_winding,
)

LVL = Level(6, 2)
S = LVL.cell_size


# ---------------------------------------------------------------------------
# region construction

def test_strip_validation():
    with pytest.raises(GridError):
        Strip("q", 0.0, 1.0)
    with pytest.raises(GridError):
        Strip("h", 0.5, 0.5)
    assert Strip("horizontal", 0.0, 1.0).axis == "h"
    with pytest.raises(GridError):
        Strip("h", 0.0, 0.001).snapped_lines(Level(2, 2))  # collapses


def test_annulus_validation():
    with pytest.raises(GridError):
        RectAnnulus(Box(0, 0, 1, 1), Box(0.5, 0.5, 2, 2))
    ann = RectAnnulus(Box(0, 0, 1, 1), Box(0.25, 0.25, 0.75, 0.75))
    outer, inner = ann.snapped_rects(Level(3, 2))
    assert outer == (0, 0, 7, 7)
    assert inner == (2, 2, 5, 5)
    with pytest.raises(GridError):
        # inner flush against outer leaves no ring
        RectAnnulus(Box(0, 0, 1, 1), Box(0.0, 0.25, 0.75, 0.75)).snapped_rects(Level(3, 2))


# ---------------------------------------------------------------------------
# crossing components on hand shapes

def test_single_wire_crosses():
    K = grid_from_art(
        """
        ..#..
        ..#..
        ..#..
        """,
        level=LVL,
    )
    rep = crossing_components(K, Strip("h", 0.0, 3 * S))
    assert rep.m == 1
    assert rep.mode == "intersection"
    assert rep.snapped == (0.0, 3 * S)


def test_difference_mode_counts_gaps():
    # two wires cut the strip complement into three 4-connected crossers
    K = grid_from_art(
        """
        .#..#.
        .#..#.
        """,
        level=LVL,
    )
    rep_i = crossing_components(K, Strip("h", 0.0, 2 * S))
    rep_d = crossing_components(K, Strip("h", 0.0, 2 * S), mode="difference")
    assert rep_i.m == 2
    assert rep_d.m == 3


def test_diagonal_counts_differently_per_mode():
    # a diagonal chain crosses in 8-connected intersection mode, and its
    # complement still crosses in 4-connected difference mode on both sides
    K = grid_from_art(
        """
        ..#
        .#.
        #..
        """,
        level=LVL,
    )
    strip = Strip("h", 0.0, 3 * S)
    assert crossing_components(K, strip).m == 1
    assert crossing_components(K, strip, mode="difference").m == 2


def test_strip_window_must_contain_k():
    K = grid_from_art("#####", level=LVL)
    strip = Strip("h", 0.0, S, window=Box(0.0, 0.0, 3 * S, S))
    with pytest.raises(WindowError):
        crossing_components(K, strip)
    wide = Strip("h", 0.0, S, window=Box(-S, 0.0, 6 * S, S))
    assert crossing_components(K, wide).m == 1


def test_delta_below_cell_size_rejected():
    K = grid_from_art("#", level=LVL)
    with pytest.raises(GridError):
        crossing_components(K, Strip("h", 0.0, S), delta=S / 4)


# ---------------------------------------------------------------------------
# strip duality fuzz: |m_int - m_diff| <= 1

cell_sets = st.lists(
    st.tuples(st.integers(0, 18), st.integers(0, 14)),
    min_size=1, max_size=80, unique=True,
)


@given(cell_sets, st.integers(0, 10), st.integers(2, 6))
def test_strip_duality_bound(cells, row, width):
    K = GridCompactum.from_cells(LVL, np.array(sorted(cells), dtype=np.int64))
    strip = Strip("h", row * S, (row + width) * S)
    m_int = crossing_components(K, strip).m
    m_diff = crossing_components(K, strip, mode="difference").m
    assert abs(m_int - m_diff) <= 1


# ---------------------------------------------------------------------------
# cut_wire: hand suite (8 patterns x 8 isometries) against the BFS oracle

@pytest.mark.parametrize("name", sorted(HAND_PATTERNS))
@pytest.mark.parametrize("t", range(8))
def test_cut_wire_hand_suite(name, t):
    X0, A0, B0 = pattern_cells(HAND_PATTERNS[name])
    X = sort_cells(transform_cells(X0, t))
    A = sort_cells(transform_cells(A0, t))
    B = sort_cells(transform_cells(B0, t))
    res = cut_wire(X, A, B)
    assert res.connected == bfs_reaches(X, A, B, 8)
    x_set = {tuple(c) for c in X.tolist()}
    if res.connected:
        comp = {tuple(c) for c in res.component.tolist()}
        assert comp <= x_set
        assert comp & {tuple(c) for c in A.tolist()}
        assert comp & {tuple(c) for c in B.tolist()}
        assert len(bfs_components(res.component, 8)) == 1
        assert res.side_a is None and res.side_b is None
    else:
        sa = {tuple(c) for c in res.side_a.tolist()}
        sb = {tuple(c) for c in res.side_b.tolist()}
        assert sa | sb == x_set and not (sa & sb)
        assert {tuple(c) for c in A.tolist()} <= sa
        assert {tuple(c) for c in B.tolist()} <= sb
        # unions of whole components never touch across the split
        assert not any(
            (abs(pa[0] - pb[0]) <= 1 and abs(pa[1] - pb[1]) <= 1)
            for pa in sa for pb in sb
        )


def test_cut_wire_input_validation():
    X = cells_from_art("###")
    with pytest.raises(GridError):
        cut_wire(X, np.array([[9, 9]]), X[:1])  # A outside X
    with pytest.raises(GridError):
        cut_wire(X, np.zeros((0, 2), dtype=np.int64), X[:1])
    with pytest.raises(GridError):
        cut_wire(np.zeros((0, 2), dtype=np.int64), X[:1], X[:1])


@given(cell_sets, st.data())
def test_cut_wire_random_matches_bfs(cells, data):
    X = np.array(sorted(cells), dtype=np.int64)
    a_idx = data.draw(st.lists(st.integers(0, len(X) - 1), min_size=1,
                               max_size=4, unique=True))
    b_idx = data.draw(st.lists(st.integers(0, len(X) - 1), min_size=1,
                               max_size=4, unique=True))
    A, B = X[sorted(a_idx)], X[sorted(b_idx)]
    assert cut_wire(X, A, B).connected == bfs_reaches(X, A, B, 8)


# ---------------------------------------------------------------------------
# crossing_path: hand suite and duality with 8-connected blocker spans

def path_is_valid(path, rect_range, blocked):
    i0, j0, i1, j1 = rect_range
    pts = [tuple(c) for c in path.tolist()]
    assert pts[0][1] == j0 and pts[-1][1] == j1
    for p in pts:
        assert i0 <= p[0] <= i1 and j0 <= p[1] <= j1
        assert p not in blocked
    for p, q in zip(pts, pts[1:]):
        assert abs(p[0] - q[0]) + abs(p[1] - q[1]) == 1


def run_path_case(art, t, swap):
    W, H = pattern_art_size(art)
    _, A0, B0 = pattern_cells(art)
    rect = transform_box(Box(0, 0, W * S, H * S), t)
    A = sort_cells(transform_cells(A0, t))
    B = sort_cells(transform_cells(B0, t))
    if swap:
        A, B = B, A
    path = crossing_path(rect, A, B, LVL)
    from pcx import window_cell_range
    i0, j0, i1, j1 = window_cell_range(rect, LVL)
    rect_cells = {(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)}
    blocked = {tuple(c) for c in A.tolist()} | {tuple(c) for c in B.tolist()}
    exists = bfs_crossing_exists(rect_cells, blocked)
    assert (path is not None) == exists
    if path is not None:
        path_is_valid(path, (i0, j0, i1, j1), blocked)


@pytest.mark.parametrize("name", sorted(HAND_PATTERNS))
@pytest.mark.parametrize("t,swap", PATH_TRANSFORMS)
def test_crossing_path_hand_suite(name, t, swap):
    run_path_case(HAND_PATTERNS[name], t, swap)


def test_crossing_path_preconditions():
    rect = Box(0, 0, 4 * S, 4 * S)
    inside = np.array([[1, 1]], dtype=np.int64)
    right_col = np.array([[3, 2]], dtype=np.int64)
    left_col = np.array([[0, 2]], dtype=np.int64)
    with pytest.raises(GridError):
        crossing_path(rect, right_col, inside, LVL)  # A on the right edge
    with pytest.raises(GridError):
        crossing_path(rect, inside, left_col, LVL)  # B on the left edge
    with pytest.raises(GridError):
        crossing_path(rect, inside, inside, LVL)  # overlap
    with pytest.raises(GridError):
        crossing_path(rect, np.array([[9, 9]]), inside, LVL)  # outside rect


@given(st.integers(3, 10), st.integers(3, 10), st.data())
def test_crossing_path_random_matches_bfs(W, H, data):
    rect = Box(0, 0, W * S, H * S)
    a_cells = data.draw(st.lists(
        st.tuples(st.integers(0, W - 2), st.integers(0, H - 1)),
        max_size=12, unique=True))
    b_cells = data.draw(st.lists(
        st.tuples(st.integers(1, W - 1), st.integers(0, H - 1)),
        max_size=12, unique=True))
    a_set, b_set = set(a_cells), set(b_cells)
    assume(not (a_set & b_set))
    A = np.array(sorted(a_set), dtype=np.int64).reshape(-1, 2)
    B = np.array(sorted(b_set), dtype=np.int64).reshape(-1, 2)
    path = crossing_path(rect, A, B, LVL)
    rect_cells = {(i, j) for i in range(W) for j in range(H)}
    exists = bfs_crossing_exists(rect_cells, a_set | b_set)
    assert (path is not None) == exists
    if path is not None:
        path_is_valid(path, (0, 0, W - 1, H - 1), a_set | b_set)
    # duality: the path exists exactly when no 8-connected blocker component
    # spans the rect from its left column to its right column
    spans = any(
        min(i for i, _ in comp) == 0 and max(i for i, _ in comp) == W - 1
        for comp in bfs_components(
            np.array(sorted(a_set | b_set), dtype=np.int64).reshape(-1, 2), 8)
    ) if (a_set | b_set) else False
    assert (path is None) == spans


# ---------------------------------------------------------------------------
# scans

def test_comb_strip_scan_shape():
    spec = make_spec(GeneratorParams("cantor_comb"))
    rep = schoenflies_scan(spec, [Strip("v", 0.25, 0.75)], range(2, 6))
    (sc,) = rep.strips
    assert sc.levels == (2, 3, 4, 5)
    assert len(sc.m_int) == 4 and len(sc.snapped) == 4
    assert rep.verdict in ("not locally connected",
                           "consistent with locally connected")


def test_scan_jobs_agree():
    spec = make_spec(GeneratorParams("cantor_comb"))
    strips = [Strip("h", 0.25, 0.75), Strip("v", 0.25, 0.75)]
    a = schoenflies_scan(spec, strips, range(2, 5), jobs=1)
    b = schoenflies_scan(spec, strips, range(2, 5), jobs=4)
    for sa, sb in zip(a.strips, b.strips):
        assert sa.m_int == sb.m_int and sa.m_diff == sb.m_diff
    assert a.verdict == b.verdict


def test_default_family_covers_bbox():
    spec = make_spec(GeneratorParams("unit_square"))
    fam = default_strip_family(spec, Level(3, 2))
    hs = [f for f in fam if f.axis == "h"]
    vs = [f for f in fam if f.axis == "v"]
    assert len(hs) == len(vs) == 7  # width-2 strips at every interior offset
    assert min(f.c1 for f in hs) == 0.0
    assert max(f.c2 for f in hs) == 1.0


def test_scan_requires_levels():
    spec = make_spec(GeneratorParams("unit_square"))
    with pytest.raises(GridError):
        schoenflies_scan(spec, [Strip("h", 0.25, 0.75)], [])


def test_complement_diameter_scan_smoke():
    spec = make_spec(GeneratorParams("sierpinski_carpet"))
    rep = complement_diameter_scan(spec, range(1, 4), k=1)
    assert [d.level for d in rep.diameters] == [1, 2, 3]
    # the largest hole never shrinks: its diameter is pinned by generation 1
    top = [d.diameters[0] for d in rep.diameters]
    assert top[0] == pytest.approx(top[-1], abs=1e-9)
    assert rep.diameter_flag is True


# ---------------------------------------------------------------------------
# separating curves

def two_blob_raster():
    return grid_from_art(
        """
        ##........##
        ##........##
        """,
        level=LVL,
    )


def loop_is_simple_closed(loop):
    c = loop.corner_cells
    pts = [tuple(p) for p in c.tolist()]
    assert len(set(pts)) == len(pts)  # no revisited corner
    ring = pts + [pts[0]]
    for p, q in zip(ring, ring[1:]):
        assert abs(p[0] - q[0]) + abs(p[1] - q[1]) == 1  # unit lattice steps


def test_separating_curve_two_blobs():
    K = two_blob_raster()
    lab = label_components(K, 8)
    assert lab.count == 2
    loop = separating_curve(K, 0, 1, 4 * S)
    loop_is_simple_closed(loop)
    signs = set()
    for i, j in lab.component_cells(0).tolist():
        w = ray_winding(loop.corner_cells, i + 0.5, j + 0.5)
        assert w in (-1, 1)
        signs.add(w)
    assert len(signs) == 1
    for i, j in lab.component_cells(1).tolist():
        assert ray_winding(loop.corner_cells, i + 0.5, j + 0.5) == 0


def test_separating_curve_ignores_bystanders():
    K = grid_from_art(
        """
        ##....##....##
        """,
        level=LVL,
    )
    loop = separating_curve(K, 1, 2, 2 * S)
    lab = label_components(K, 8)
    for cid in (0, 2):
        for i, j in lab.component_cells(cid).tolist():
            assert ray_winding(loop.corner_cells, i + 0.5, j + 0.5) == 0
    for i, j in lab.component_cells(1).tolist():
        assert ray_winding(loop.corner_cells, i + 0.5, j + 0.5) in (-1, 1)


def test_separating_curve_errors():
    K = two_blob_raster()
    with pytest.raises(GridError):
        separating_curve(K, 0, 0, 4 * S)
    with pytest.raises(GridError):
        separating_curve(K, 0, 7, 4 * S)
    with pytest.raises(GridError):
        separating_curve(K, 0, 1, S / 2)  # radius under two cells
    with pytest.raises(GridError):
        separating_curve(K, 0, 1, 40 * S)  # bricks swallow both sides
