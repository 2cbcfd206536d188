"""Built-in planar compacta with exact rasterizers and conservative box oracles.

Each generator returns a SetSpec whose `fill` is the authoritative raster
(outer cover under positive-overlap semantics; measure-zero features such as
curves and segments use half-open cells with the scene-box top/right edge
folded into the last row/column) and whose `oracle` answers conservative
closed-box membership questions about the true set.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .grid import (Box, Cells, GridCompactum, GridError, Level, SetSpec,
                   window_cell_range)


class ParseError(Exception):
    """Unreadable input file (PBM or JSON payloads)."""


GENERATOR_NAMES = ("cantor_comb", "topologist_sine", "spiral_disk",
                   "sierpinski_carpet", "cantor_dust", "unit_square",
                   "bars", "random_blobs")

# Ternary-digit sets force base 3; everything else lives on the dyadic grid.
GENERATOR_BASES = {"cantor_comb": 3, "sierpinski_carpet": 3, "cantor_dust": 3,
                   "topologist_sine": 2, "spiral_disk": 2, "unit_square": 2,
                   "bars": 2, "random_blobs": 2}


@dataclass(frozen=True)
class RandomParams:
    n_bars: int = 6
    full_height: int = 0
    min_cells: int = 2
    max_cells: int = 8
    gap_cells: int = 3
    lattice: int = 32


@dataclass(frozen=True)
class GeneratorParams:
    name: str
    seed: int = 0
    dust_dim: int = 2
    t_max: float = 40.0
    blobs: RandomParams = field(default_factory=RandomParams)

    def __post_init__(self) -> None:
        if self.name not in GENERATOR_NAMES:
            raise GridError(f"unknown generator {self.name!r}")
        if self.dust_dim not in (1, 2):
            raise GridError("dust_dim must be 1 or 2")
        if self.t_max <= 1.0:
            raise GridError("t_max must exceed 1")


def make_spec(params: GeneratorParams) -> SetSpec:
    if params.name == "cantor_comb":
        return cantor_comb()
    if params.name == "topologist_sine":
        return topologist_sine()
    if params.name == "spiral_disk":
        return spiral_disk(t_max=params.t_max)
    if params.name == "sierpinski_carpet":
        return sierpinski_carpet()
    if params.name == "cantor_dust":
        return cantor_dust(dim=params.dust_dim)
    if params.name == "unit_square":
        return unit_square()
    if params.name == "bars":
        return bars()
    return random_compactum(params.seed, params.blobs)


def generator_base(name: str) -> int:
    try:
        return GENERATOR_BASES[name]
    except KeyError:
        raise GridError(f"unknown generator {name!r}") from None


def _require_base(level: Level, base: int, name: str) -> None:
    if level.base != base:
        raise GridError(f"{name} is defined on base-{base} grids, got base {level.base}")


# ---------------------------------------------------------------------------
# rectangles

def _rect_fill_cells(rects: list[tuple[float, float, float, float]],
                     level: Level) -> tuple[tuple[int, int], np.ndarray]:
    s = level.cell_size
    cols: list[tuple[int, int, int, int]] = []
    for (x0, y0, x1, y1) in rects:
        i0 = int(np.floor(x0 / s + 1e-9))
        j0 = int(np.floor(y0 / s + 1e-9))
        i1 = int(np.ceil(x1 / s - 1e-9)) - 1
        j1 = int(np.ceil(y1 / s - 1e-9)) - 1
        if i1 < i0 or j1 < j0:
            continue
        cols.append((i0, j0, i1, j1))
    if not cols:
        return (0, 0), np.zeros((0, 0), dtype=bool)
    gi0 = min(c[0] for c in cols)
    gj0 = min(c[1] for c in cols)
    gi1 = max(c[2] for c in cols)
    gj1 = max(c[3] for c in cols)
    mask = np.zeros((gj1 - gj0 + 1, gi1 - gi0 + 1), dtype=bool)
    for (i0, j0, i1, j1) in cols:
        mask[j0 - gj0:j1 - gj0 + 1, i0 - gi0:i1 - gi0 + 1] = True
    return (gi0, gj0), mask


def _rects_oracle(rects: list[tuple[float, float, float, float]]):
    def oracle(box: Box) -> bool:
        for (x0, y0, x1, y1) in rects:
            if box.x0 <= x1 and x0 <= box.x1 and box.y0 <= y1 and y0 <= box.y1:
                return True
        return False
    return oracle


def unit_square() -> SetSpec:
    rects = [(0.0, 0.0, 1.0, 1.0)]
    return SetSpec("unit_square", Box(0, 0, 1, 1), _rects_oracle(rects),
                   fill=lambda level: _rect_fill_cells(rects, level))


def bars() -> SetSpec:
    """Three disjoint squares of side 1/4 in a row, gaps 1/8."""
    rects = [(0.0, 0.375, 0.25, 0.625),
             (0.375, 0.375, 0.625, 0.625),
             (0.75, 0.375, 1.0, 0.625)]
    return SetSpec("bars", Box(0, 0.375, 1, 0.625), _rects_oracle(rects),
                   fill=lambda level: _rect_fill_cells(rects, level))


def random_compactum(seed: int, params: RandomParams | None = None) -> SetSpec:
    """Deterministic union of axis-aligned lattice bars with enforced gaps.

    Rectangles sit on a 1/lattice grid with pairwise separation of at least
    gap_cells lattice steps, so components never kiss diagonally and stay
    apart under any rasterization at least as fine as the lattice.
    """
    p = params or RandomParams()
    rng = np.random.default_rng(np.uint64(seed))
    unit = 1.0 / p.lattice
    rects: list[tuple[float, float, float, float]] = []
    boxes: list[tuple[int, int, int, int]] = []

    def try_place(full_height: bool) -> None:
        for _ in range(200):
            w = int(rng.integers(p.min_cells, p.max_cells + 1))
            h = p.lattice if full_height else int(rng.integers(p.min_cells, p.max_cells + 1))
            x = int(rng.integers(0, p.lattice - w + 1))
            y = 0 if full_height else int(rng.integers(0, p.lattice - h + 1))
            ok = True
            for (qx0, qy0, qx1, qy1) in boxes:
                gap_x = max(qx0 - (x + w), x - qx1)
                gap_y = max(qy0 - (y + h), y - qy1)
                if max(gap_x, gap_y) < p.gap_cells:
                    ok = False
                    break
            if ok:
                boxes.append((x, y, x + w, y + h))
                rects.append((x * unit, y * unit, (x + w) * unit, (y + h) * unit))
                return

    for _ in range(p.full_height):
        try_place(True)
    for _ in range(p.n_bars):
        try_place(False)

    name = f"random_blobs[{seed}]"
    if not rects:
        return SetSpec(name, Box(0, 0, 1, 1), lambda box: False,
                       fill=lambda level: ((0, 0), np.zeros((0, 0), dtype=bool)))
    return SetSpec(name, Box(0, 0, 1, 1), _rects_oracle(rects),
                   fill=lambda level: _rect_fill_cells(rects, level))


# ---------------------------------------------------------------------------
# ternary constructions

@lru_cache(maxsize=32)
def _cantor_indices(n: int) -> np.ndarray:
    """Left cell indices of the 2**n surviving ternary intervals at depth n."""
    idx = np.array([0], dtype=np.int64)
    for _ in range(n):
        idx = np.concatenate([3 * idx, 3 * idx + 2])
    idx = np.sort(idx)
    idx.setflags(write=False)
    return idx


def _cantor_meets(a: float, b: float, depth: int = 48) -> bool:
    """Conservative: does [a, b] meet the middle-thirds set in [0, 1]?"""
    if b < 0.0 or a > 1.0:
        return False
    if a <= 0.0 or b >= 1.0:
        return True  # endpoints 0 and 1 survive every stage
    if depth == 0:
        return True
    if a <= 1.0 / 3.0 and _cantor_meets(3 * a, 3 * b, depth - 1):
        return True
    return b >= 2.0 / 3.0 and _cantor_meets(3 * a - 2, 3 * b - 2, depth - 1)


def cantor_comb() -> SetSpec:
    """Vertical teeth over the middle-thirds set plus the joining top bar."""
    def fill(level: Level) -> tuple[tuple[int, int], np.ndarray]:
        _require_base(level, 3, "cantor_comb")
        side = 3 ** level.n
        mask = np.zeros((side, side), dtype=bool)
        mask[:, _cantor_indices(level.n)] = True
        mask[side - 1, :] = True  # segment at y = 1, folded into the top row
        return (0, 0), mask

    def oracle(box: Box) -> bool:
        x_hits = box.x0 <= 1.0 and box.x1 >= 0.0
        if x_hits and box.y0 <= 1.0 <= box.y1:
            return True  # top bar
        if box.y1 < 0.0 or box.y0 > 1.0 or not x_hits:
            return False
        return _cantor_meets(box.x0, box.x1)

    return SetSpec("cantor_comb", Box(0, 0, 1, 1), oracle, fill=fill, base=3)


def cantor_dust(dim: int = 2) -> SetSpec:
    """Middle-thirds dust: C x C (dim=2) or C x {0} (dim=1)."""
    if dim not in (1, 2):
        raise GridError("dust dim must be 1 or 2")

    def fill(level: Level) -> tuple[tuple[int, int], np.ndarray]:
        _require_base(level, 3, "cantor_dust")
        side = 3 ** level.n
        idx = _cantor_indices(level.n)
        if dim == 1:
            mask = np.zeros((1, side), dtype=bool)
            mask[0, idx] = True
        else:
            mask = np.zeros((side, side), dtype=bool)
            mask[np.ix_(idx, idx)] = True
        return (0, 0), mask

    def oracle(box: Box) -> bool:
        if not _cantor_meets(box.x0, box.x1):
            return False
        if dim == 1:
            return box.y0 <= 0.0 <= box.y1
        return _cantor_meets(box.y0, box.y1)

    return SetSpec(f"cantor_dust{dim}d", Box(0, 0, 1, 1), oracle, fill=fill, base=3)


def sierpinski_carpet() -> SetSpec:
    def fill(level: Level) -> tuple[tuple[int, int], np.ndarray]:
        _require_base(level, 3, "sierpinski_carpet")
        n = level.n
        side = 3 ** n
        idx = np.arange(side, dtype=np.int64)
        removed = np.zeros((side, side), dtype=bool)
        for g in range(1, n + 1):
            mid = (idx // (3 ** (n - g))) % 3 == 1
            removed |= np.outer(mid, mid)
        return (0, 0), ~removed

    def meets(x0: float, y0: float, x1: float, y1: float, depth: int) -> bool:
        if x1 < 0 or x0 > 1 or y1 < 0 or y0 > 1:
            return False
        if depth == 0:
            return True
        # survives unless it only meets the open middle square
        if not (x0 > 1 / 3 and x1 < 2 / 3 and y0 > 1 / 3 and y1 < 2 / 3):
            for bi in range(3):
                for bj in range(3):
                    if bi == 1 and bj == 1:
                        continue
                    if meets(3 * x0 - bi, 3 * y0 - bj, 3 * x1 - bi, 3 * y1 - bj,
                             depth - 1):
                        return True
        return False

    def oracle(box: Box) -> bool:
        return meets(box.x0, box.y0, box.x1, box.y1, 24)

    return SetSpec("sierpinski_carpet", Box(0, 0, 1, 1), oracle, fill=fill, base=3)


# ---------------------------------------------------------------------------
# topologist's sine curve

def _sine_range(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact min/max of sin(1/x) over [a, b] elementwise, 0 < a <= b."""
    ulo, uhi = 1.0 / b, 1.0 / a
    lo = np.minimum(np.sin(ulo), np.sin(uhi))
    hi = np.maximum(np.sin(ulo), np.sin(uhi))
    two_pi = 2.0 * np.pi
    k_max = np.floor((uhi - np.pi / 2) / two_pi)
    hi = np.where(np.pi / 2 + two_pi * k_max >= ulo, 1.0, hi)
    k_min = np.floor((uhi + np.pi / 2) / two_pi)
    lo = np.where(-np.pi / 2 + two_pi * k_min >= ulo, -1.0, lo)
    return lo, hi


def topologist_sine() -> SetSpec:
    """Closure of {(x, sin(1/x)) : 0 < x <= 1}: the curve plus {0} x [-1, 1].

    The raster clamps the curve branch at x >= cell_size/4; the limit bar is
    generated explicitly as column 0.
    """
    def fill(level: Level) -> tuple[tuple[int, int], np.ndarray]:
        _require_base(level, 2, "topologist_sine")
        s = level.cell_size
        cols = 2 ** level.n
        rows = 2 * cols
        mask = np.zeros((rows, cols), dtype=bool)
        mask[:, 0] = True  # limit bar at x = 0
        i = np.arange(cols)
        a = np.maximum(i * s, s / 4.0)
        b = np.minimum((i + 1) * s, 1.0)
        lo, hi = _sine_range(a, b)
        jlo = np.clip(np.floor((lo + 1.0) / s).astype(np.int64), 0, rows - 1)
        jhi = np.clip(np.floor((hi + 1.0) / s).astype(np.int64), 0, rows - 1)
        for col in range(cols):
            mask[jlo[col]:jhi[col] + 1, col] = True
        return (0, -rows // 2), mask

    def oracle(box: Box) -> bool:
        if box.x0 <= 0.0 <= box.x1 and box.y0 <= 1.0 and box.y1 >= -1.0:
            return True  # limit bar
        a = max(box.x0, 1e-12)
        b = min(box.x1, 1.0)
        if a > b:
            return False
        lo, hi = _sine_range(np.array([a]), np.array([b]))
        return bool(box.y0 <= hi[0] and box.y1 >= lo[0])

    return SetSpec("topologist_sine", Box(0, -1, 1, 1), oracle, fill=fill)


# ---------------------------------------------------------------------------
# spiral accumulating on the unit circle, glued to the closed unit disk

_SPIRAL_STEP = 2.0 ** -12 / 3.0  # canonical arc step shared by all levels


@lru_cache(maxsize=4)
def _spiral_samples(t_max: float) -> np.ndarray:
    chunks = []
    t = 0.0
    while t < t_max:
        t2 = min(t + 1.0, t_max)
        speed = math.sqrt(math.exp(-2 * t) + 4 * math.pi ** 2 * (1 + math.exp(-t)) ** 2)
        ts = np.arange(t, t2, _SPIRAL_STEP / speed)
        r = 1.0 + np.exp(-ts)
        th = 2.0 * np.pi * ts
        chunks.append(np.stack([r * np.cos(th), r * np.sin(th)], axis=1))
        t = t2
    r_end = 1.0 + math.exp(-t_max)
    th_end = 2.0 * math.pi * t_max
    chunks.append(np.array([[r_end * math.cos(th_end), r_end * math.sin(th_end)]]))
    out = np.concatenate(chunks)
    out.setflags(write=False)
    return out


def spiral_disk(t_max: float = 40.0) -> SetSpec:
    """Closed unit disk union the spiral (1 + e^-t) e^(2 pi i t), t in [0, t_max].

    The truncation tail sits within e^-t_max of the unit circle, far below one
    cell at any permitted level.
    """
    bbox = Box(-17 / 8, -17 / 8, 17 / 8, 17 / 8)

    def fill(level: Level) -> tuple[tuple[int, int], np.ndarray]:
        _require_base(level, 2, "spiral_disk")
        s = level.cell_size
        i0, j0, i1, j1 = window_cell_range(bbox, level)
        mask = np.zeros((j1 - j0 + 1, i1 - i0 + 1), dtype=bool)
        # disk: positive-area overlap <=> nearest point of the cell box < 1
        di = np.arange(int(np.floor(-1.0 / s)) - 1, int(np.ceil(1.0 / s)) + 1)
        xs_lo, xs_hi = di * s, (di + 1) * s
        nearest_x = np.clip(0.0, xs_lo, xs_hi)
        ny = np.clip(0.0, xs_lo, xs_hi)  # same coordinates vertically
        d2 = nearest_x[None, :] ** 2 + ny[:, None] ** 2
        jj, ii = np.nonzero(d2 < 1.0)
        mask[di[jj] - j0, di[ii] - i0] = True
        # spiral: canonical sample cloud shared across levels so coarsening
        # one level equals rasterizing at the parent level
        pts = _spiral_samples(t_max)
        idx = np.floor(pts / s).astype(np.int64)
        idx = np.unique(idx, axis=0)
        mask[idx[:, 1] - j0, idx[:, 0] - i0] = True
        return (i0, j0), mask

    def oracle(box: Box) -> bool:
        nx = min(max(0.0, box.x0), box.x1)
        ny = min(max(0.0, box.y0), box.y1)
        r_near = math.hypot(nx, ny)
        if r_near <= 1.0:
            return True  # meets the closed disk
        corners = [(box.x0, box.y0), (box.x1, box.y0), (box.x0, box.y1),
                   (box.x1, box.y1)]
        r_far = max(math.hypot(x, y) for (x, y) in corners)
        lo_r = max(r_near, 1.0 + math.exp(-t_max))
        hi_r = min(r_far, 2.0)
        if lo_r > hi_r:
            return False
        t_lo = max(0.0, -math.log(hi_r - 1.0))
        t_hi = min(t_max, -math.log(lo_r - 1.0))
        if t_hi < t_lo:
            return False
        if t_hi - t_lo >= 1.0:
            return True  # a full turn sweeps every direction
        cx, cy = (box.x0 + box.x1) / 2, (box.y0 + box.y1) / 2
        ref = math.atan2(cy, cx)
        rel = []
        for (x, y) in corners:
            d = math.atan2(y, x) - ref
            while d <= -math.pi:
                d += 2 * math.pi
            while d > math.pi:
                d -= 2 * math.pi
            rel.append(d)
        th0, th1 = ref + min(rel) - 1e-9, ref + max(rel) + 1e-9
        a0, a1 = 2 * math.pi * t_lo, 2 * math.pi * t_hi
        k0 = math.floor((th0 - a1) / (2 * math.pi))
        k1 = math.ceil((th1 - a0) / (2 * math.pi))
        for k in range(k0, k1 + 1):
            if a0 + 2 * math.pi * k <= th1 and th0 <= a1 + 2 * math.pi * k:
                return True
        return False

    return SetSpec("spiral_disk", bbox, oracle, fill=fill)


# ---------------------------------------------------------------------------
# portable bitmaps

def _pbm_tokens(data: bytes):
    pos = 0
    while pos < len(data):
        if data[pos:pos + 1].isspace():
            pos += 1
            continue
        if data[pos:pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
            continue
        m = re.match(rb"[^\s#]+", data[pos:])
        yield m.group(0), pos + m.end()
        pos += m.end()


def parse_pbm(data: bytes) -> np.ndarray:
    """Decode P1/P4 into a bool array [row, col], row 0 at the image top."""
    toks = _pbm_tokens(data)
    try:
        magic, _ = next(toks)
        width, _ = next(toks)
        height, end = next(toks)
        w, h = int(width), int(height)
    except (StopIteration, ValueError):
        raise ParseError("truncated or malformed PBM header") from None
    if magic not in (b"P1", b"P4") or w <= 0 or h <= 0:
        raise ParseError(f"unsupported PBM: magic={magic!r} {width!r}x{height!r}")
    if magic == b"P1":
        bits = []
        for tok, _ in toks:
            bits.extend(tok)  # digits may be run together
        vals = [b for b in bits if b in (0x30, 0x31)]
        if len(vals) < w * h:
            raise ParseError("P1 body shorter than width*height")
        arr = np.array(vals[:w * h], dtype=np.uint8) == 0x31
        return arr.reshape(h, w)
    row_bytes = (w + 7) // 8
    body = data[end + 1:end + 1 + row_bytes * h]
    if len(body) < row_bytes * h:
        raise ParseError("P4 body shorter than expected")
    rows = np.frombuffer(body, dtype=np.uint8).reshape(h, row_bytes)
    bits = np.unpackbits(rows, axis=1)[:, :w]
    return bits.astype(bool)


def emit_pbm(mask: np.ndarray, fmt: str = "P1") -> bytes:
    """Encode a bool array [row, col] (row 0 = top) as P1 or P4."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    if fmt == "P1":
        body = "\n".join(" ".join("1" if v else "0" for v in row) for row in mask)
        return f"P1\n{w} {h}\n{body}\n".encode()
    if fmt == "P4":
        packed = np.packbits(mask.astype(np.uint8), axis=1)
        return b"P4\n" + f"{w} {h}\n".encode() + packed.tobytes()
    raise GridError(f"unknown PBM format {fmt!r}")


def from_pbm(path: str) -> SetSpec:
    """Spec whose set is the union of the black pixel boxes of a PBM file.

    The native level is the smallest n with 2**n >= max(width, height); the
    scene box spans [0, W*s] x [0, H*s] with pixel row 0 at the top.
    """
    try:
        with open(path, "rb") as fh:
            img = parse_pbm(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    h, w = img.shape
    n_native = max(int(math.ceil(math.log2(max(w, h, 1)))), 0)
    native = np.flipud(img)  # cell row j counts upward from the scene origin
    s_native = 2.0 ** -n_native
    bbox = Box(0.0, 0.0, w * s_native, h * s_native)

    def fill(level: Level) -> tuple[tuple[int, int], np.ndarray]:
        _require_base(level, 2, "pbm spec")
        if level.n >= n_native:
            f = 2 ** (level.n - n_native)
            return (0, 0), np.kron(native, np.ones((f, f), dtype=bool))
        f = 2 ** (n_native - level.n)
        js, is_ = np.nonzero(native)
        cells = np.unique(np.stack([is_ // f, js // f], axis=1), axis=0)
        side_w = (w + f - 1) // f
        side_h = (h + f - 1) // f
        mask = np.zeros((side_h, side_w), dtype=bool)
        if len(cells):
            mask[cells[:, 1], cells[:, 0]] = True
        return (0, 0), mask

    def oracle(box: Box) -> bool:
        i0 = max(int(np.floor(box.x0 / s_native)), 0)
        j0 = max(int(np.floor(box.y0 / s_native)), 0)
        i1 = min(int(np.ceil(box.x1 / s_native)), w)
        j1 = min(int(np.ceil(box.y1 / s_native)), h)
        if i0 >= i1 or j0 >= j1:
            return False
        return bool(native[j0:j1, i0:i1].any())

    name = os.path.splitext(os.path.basename(path))[0]
    return SetSpec(f"pbm:{name}", bbox, oracle, fill=fill)
