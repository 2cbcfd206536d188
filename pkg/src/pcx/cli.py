"""Command-line front end: generation, scans, decompositions, rendering.

Exit codes: 0 success, 2 usage error (bad flags/parameters), 3 input parse
error.  Mathematical verdicts (divergence, connectivity, refinement) are data
in the JSON output, never exit codes.  All JSON is UTF-8 with sorted keys
under a top-level ``"schema": "pcx/1"``; SVG output is SVG 1.1, at most
1024 px on the longer side, and byte-stable for a fixed configuration
regardless of worker count.
"""
from __future__ import annotations

import argparse
import json
import sys
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decomposition import (Decomposition, RelationParams, _partition_from_ids,
                            contract_degree_two, decompose, is_simple_path,
                            monotone_check, quotient_graph)
from .generators import (GENERATOR_NAMES, GeneratorParams, ParseError,
                         emit_pbm, from_pbm, make_spec)
from .grid import (DepthExceeded, GridCompactum, GridError, Level, SetSpec,
                   WindowError, label_components, rasterize)
from .schoenflies import Strip, default_strip_family, schoenflies_scan

SCHEMA = "pcx/1"


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, resolved from argv."""
    command: str
    generator: str | None = None
    input_path: str | None = None
    level: int | None = None
    levels: tuple[int, ...] = ()
    strips: tuple[str, ...] = ()
    nmin: int = 4
    delta: float | None = None
    family: str = "both"
    stride: int = 8
    multi_level: bool = True
    deep_levels: int = 3
    deep_children: int = 3
    jobs: int = 1
    format: str = "json"
    seed: int = 0
    dust_dim: int = 2
    t_max: float = 40.0
    out: str | None = None
    ascii_pbm: bool = False
    contract: bool = False
    tol: float = 0.0
    path_a: str | None = None
    path_b: str | None = None

    def __post_init__(self) -> None:
        if self.jobs < 1:
            raise GridError("jobs must be >= 1")


# ---------------------------------------------------------------------------
# argv plumbing

def _parse_levels(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for tok in text.split(","):
        tok = tok.strip()
        if ".." in tok:
            a, b = tok.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError(f"empty level range {tok!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(tok))
    if not out or any(n < 0 for n in out):
        raise ValueError(f"bad level list {text!r}")
    return tuple(out)


def _parse_strip(text: str) -> Strip:
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("h", "v", "horizontal", "vertical"):
        raise ValueError(f"strip must look like h:<c1>:<c2>, got {text!r}")
    return Strip(parts[0], float(parts[1]), float(parts[2]))


def _spec_for(cfg: RunConfig) -> SetSpec:
    if cfg.input_path is not None:
        return from_pbm(cfg.input_path)
    params = GeneratorParams(name=cfg.generator, seed=cfg.seed,
                             dust_dim=cfg.dust_dim, t_max=cfg.t_max)
    return make_spec(params)


def _raster_for(cfg: RunConfig, n: int) -> GridCompactum:
    spec = _spec_for(cfg)
    return rasterize(spec, Level(n, spec.base))


def _relation_params(cfg: RunConfig) -> RelationParams:
    return RelationParams(n_min=cfg.nmin, delta=cfg.delta,
                          annulus_family=cfg.family, stride=cfg.stride,
                          multi_level=cfg.multi_level,
                          deep_levels=cfg.deep_levels,
                          deep_children=cfg.deep_children)


def _emit_text(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_bytes(data: bytes, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def _dump_json(payload: dict, out: str | None) -> None:
    _emit_text(json.dumps(payload, sort_keys=True, ensure_ascii=False,
                          indent=2) + "\n", out)


# ---------------------------------------------------------------------------
# decomposition JSON round-trip

def decomposition_to_payload(D: Decomposition) -> dict:
    payload = D.to_dict(include_cells=True)
    payload["schema"] = SCHEMA
    payload["command"] = "decompose"
    return payload


def load_decomposition(path: str) -> Decomposition:
    """Rebuild a Decomposition from `pcx decompose` JSON output."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    try:
        level = Level(int(data["level"]), int(data["base"]))
        chunks, keys = [], []
        for idx, cls in enumerate(data["classes"]):
            cells = np.asarray(cls["cells"], dtype=np.int64).reshape(-1, 2)
            chunks.append(cells)
            keys.append(np.full(len(cells), idx, dtype=np.int64))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path} is not a decomposition document: {exc}") from exc
    if not chunks:
        K = GridCompactum.from_cells(level, np.zeros((0, 2), dtype=np.int64))
        return _partition_from_ids(K, K.cells(), np.zeros(0, dtype=np.int64))
    cells = np.concatenate(chunks)
    raw = np.concatenate(keys)
    if len(np.unique(cells, axis=0)) != len(cells):
        raise ParseError(f"{path}: classes overlap — not a partition")
    K = GridCompactum.from_cells(level, cells)
    # realign raw ids with the row-major cell order from_cells produced
    order = np.lexsort((cells[:, 0], cells[:, 1]))
    return _partition_from_ids(K, cells[order], raw[order])


# ---------------------------------------------------------------------------
# SVG rendering

def _class_color(cid: int) -> str:
    hue = zlib.crc32(f"class:{cid}".encode()) % 360
    return f"hsl({hue},62%,52%)"


def render_svg(K: GridCompactum, D: Decomposition | None = None) -> str:
    """One unit rect per cell, y flipped so the scene's up is up.  With a
    decomposition, cells are colored by a stable hash of their class id."""
    if D is not None:
        if D.level != K.level or D.origin != K.origin \
                or D.class_map.shape != K.mask.shape or D.cell_count != K.count:
            raise GridError("decomposition does not partition this raster")
    head = '<svg xmlns="http://www.w3.org/2000/svg" version="1.1"'
    if K.is_empty:
        return (f'{head} width="16" height="16" viewBox="0 0 1 1">\n'
                '  <g id="cells"/>\n</svg>\n')
    i0, j0, i1, j1 = K.cell_bbox()
    w, h = i1 - i0 + 1, j1 - j0 + 1
    scale = 1024.0 / max(w, h)
    pw, ph = f"{w * scale:.3f}", f"{h * scale:.3f}"
    lines = [f'{head} width="{pw}" height="{ph}" viewBox="0 0 {w} {h}" '
             'shape-rendering="crispEdges">',
             '  <g id="cells">']
    if D is None:
        groups: list[tuple[str, np.ndarray]] = [("#1a1a1a", K.cells())]
    else:
        groups = [(_class_color(c.id), c.cells) for c in D.classes]
    for color, cells in groups:
        lines.append(f'    <g fill="{color}">')
        for i, j in cells:
            lines.append(f'      <rect x="{int(i) - i0}" y="{j1 - int(j)}" '
                         'width="1" height="1"/>')
        lines.append('    </g>')
    lines.append('  </g>')
    lines.append('</svg>')
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_gen(cfg: RunConfig) -> int:
    K = _raster_for(cfg, cfg.level)
    mask = K.mask if not K.is_empty else np.zeros((1, 1), dtype=bool)
    data = emit_pbm(np.flipud(mask), "P1" if cfg.ascii_pbm else "P4")
    comment = (f"# pcx origin={K.origin[0]},{K.origin[1]} level={K.level.n} "
               f"base={K.level.base}\n").encode("ascii")
    magic, rest = data.split(b"\n", 1)
    _emit_bytes(magic + b"\n" + comment + rest, cfg.out)
    return 0


def _cmd_components(cfg: RunConfig) -> int:
    K = _raster_for(cfg, cfg.level)
    lab = label_components(K, connectivity=8)
    payload = {
        "schema": SCHEMA,
        "command": "components",
        "level": K.level.n,
        "base": K.level.base,
        "cell_size": K.level.cell_size,
        "count": lab.count,
        "components": [{
            "id": m.id,
            "size": m.size,
            "cell_bbox": list(m.cell_bbox),
            "diameter": m.diameter,
            "touches_frame": m.touches_frame,
        } for m in lab.metas],
    }
    _dump_json(payload, cfg.out)
    return 0


def _resolve_strips(cfg: RunConfig, spec: SetSpec) -> list[Strip]:
    if len(cfg.strips) == 1 and cfg.strips[0] == "auto":
        return default_strip_family(spec, Level(min(cfg.levels), spec.base))
    return [_parse_strip(t) for t in cfg.strips]


def _cmd_scan(cfg: RunConfig) -> int:
    spec = _spec_for(cfg)
    strips = _resolve_strips(cfg, spec)
    report = schoenflies_scan(spec, strips, cfg.levels, jobs=cfg.jobs)
    payload = {"schema": SCHEMA, "command": "scan", **report.to_dict()}
    _dump_json(payload, cfg.out)
    return 0


def _cmd_decompose(cfg: RunConfig) -> int:
    spec = _spec_for(cfg)
    level = Level(cfg.level, spec.base)
    D = decompose(spec, level, _relation_params(cfg), jobs=cfg.jobs)
    if cfg.format == "svg":
        K = rasterize(spec, level)
        _emit_text(render_svg(K, D), cfg.out)
    elif cfg.format == "text":
        lines = [f"{len(D.classes)} classes at level {level.n} "
                 f"(cell_size {level.cell_size:.8g})"]
        for c in D.classes:
            lines.append(f"  class {c.id}: size={c.size} "
                         f"diameter={c.diameter:.8g} "
                         f"rep=({c.representative[0]},{c.representative[1]})")
        _emit_text("\n".join(lines) + "\n", cfg.out)
    else:
        _dump_json(decomposition_to_payload(D), cfg.out)
    return 0


def _cmd_quotient(cfg: RunConfig) -> int:
    spec = _spec_for(cfg)
    level = Level(cfg.level, spec.base)
    K = rasterize(spec, level)
    D = decompose(spec, level, _relation_params(cfg), jobs=cfg.jobs)
    G = quotient_graph(K, D)
    payload = {"schema": SCHEMA, "command": "quotient", **G.to_dict()}
    payload["monotone"] = monotone_check(K, D).to_dict()
    if cfg.contract:
        nodes, edges = contract_degree_two(G.nodes, G.edges)
        payload["contracted"] = {
            "nodes": list(nodes),
            "edges": [list(e) for e in edges],
            "is_simple_path": is_simple_path(nodes, edges),
        }
    _dump_json(payload, cfg.out)
    return 0


def _cmd_compare(cfg: RunConfig) -> int:
    from .decomposition import common_refinement, refines
    A = load_decomposition(cfg.path_a)
    B = load_decomposition(cfg.path_b)
    a_ref_b = refines(A, B, tol=cfg.tol)
    b_ref_a = refines(B, A, tol=cfg.tol)
    payload = {
        "schema": SCHEMA,
        "command": "compare",
        "a_refines_b": a_ref_b,
        "b_refines_a": b_ref_a,
        "equal": a_ref_b and b_ref_a and cfg.tol == 0.0,
        "class_count_a": len(A.classes),
        "class_count_b": len(B.classes),
        "common_refinement_classes": len(common_refinement(A, B).classes),
        "tol": cfg.tol,
    }
    _dump_json(payload, cfg.out)
    return 0


def _cmd_render(cfg: RunConfig) -> int:
    spec = _spec_for(cfg)
    level = Level(cfg.level, spec.base)
    K = rasterize(spec, level)
    D = None
    if cfg.format == "classes":
        D = decompose(spec, level, _relation_params(cfg), jobs=cfg.jobs)
    _emit_text(render_svg(K, D), cfg.out)
    return 0


_HANDLERS = {
    "gen": _cmd_gen,
    "components": _cmd_components,
    "scan": _cmd_scan,
    "decompose": _cmd_decompose,
    "quotient": _cmd_quotient,
    "compare": _cmd_compare,
    "render": _cmd_render,
}


# ---------------------------------------------------------------------------
# parser

def _add_source_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--gen", choices=GENERATOR_NAMES, help="built-in generator")
    g.add_argument("--in", dest="input_path", metavar="FILE.pbm",
                   help="PBM (P1/P4) input")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dust-dim", type=int, choices=(1, 2), default=2)
    p.add_argument("--t-max", type=float, default=40.0)


def _add_relation_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nmin", type=int, default=4)
    p.add_argument("--delta", type=float, default=None,
                   help="cluster distance in scene units (default: 2 cells)")
    p.add_argument("--family", default="both",
                   choices=("strips-all-offsets", "rect-annuli-sampled", "both"))
    p.add_argument("--stride", type=int, default=8)
    p.add_argument("--no-multi-level", dest="multi_level", action="store_false")
    p.add_argument("--deep-levels", type=int, default=3)
    p.add_argument("--deep-children", type=int, default=3)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pcx",
        description="Finite-resolution scans and core decompositions of "
                    "planar compacta on dyadic/ternary grids.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="rasterize a set and emit PBM")
    _add_source_args(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--ascii", dest="ascii_pbm", action="store_true",
                   help="P1 text instead of P4 binary")
    p.add_argument("--out", default=None)

    p = sub.add_parser("components", help="8-connected component report")
    _add_source_args(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("scan", help="crossing-count scan over levels")
    _add_source_args(p)
    p.add_argument("--levels", required=True,
                   help="e.g. 2..6 or 3 or 2,4,6")
    p.add_argument("--strip", action="append", required=True, metavar="SPEC",
                   help="h:<c1>:<c2> / v:<c1>:<c2>, or auto (repeatable)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("decompose", help="finite-scale core decomposition")
    _add_source_args(p)
    _add_relation_args(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", default="json", choices=("json", "svg", "text"))
    p.add_argument("--out", default=None)

    p = sub.add_parser("quotient", help="quotient graph of a decomposition")
    _add_source_args(p)
    _add_relation_args(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--contract", action="store_true",
                   help="also emit the degree-2 contraction")
    p.add_argument("--out", default=None)

    p = sub.add_parser("compare", help="refinement relations of two "
                                       "decomposition JSON files")
    p.add_argument("--a", dest="path_a", required=True)
    p.add_argument("--b", dest="path_b", required=True)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("render", help="SVG of a raster, optionally colored "
                                      "by decomposition classes")
    _add_source_args(p)
    _add_relation_args(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", default="plain", choices=("plain", "classes"))
    p.add_argument("--out", default=None)
    return ap


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {}
    for name in ("command", "input_path", "level", "nmin", "delta", "family",
                 "stride", "multi_level", "deep_levels", "deep_children",
                 "jobs", "format", "seed", "dust_dim", "t_max", "out",
                 "ascii_pbm", "contract", "tol", "path_a", "path_b"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    if getattr(args, "gen", None) is not None:
        fields["generator"] = args.gen
    if hasattr(args, "levels"):
        fields["levels"] = _parse_levels(args.levels)
    if hasattr(args, "strip"):
        fields["strips"] = tuple(args.strip)
    return RunConfig(**fields)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config_from_args(args)
        return _HANDLERS[cfg.command](cfg)
    except ParseError as exc:
        print(f"pcx: input error: {exc}", file=sys.stderr)
        return 3
    except (GridError, DepthExceeded, WindowError, ValueError) as exc:
        print(f"pcx: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pcx: io error: {exc}", file=sys.stderr)
        return 3


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
