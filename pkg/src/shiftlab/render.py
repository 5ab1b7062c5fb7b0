"""Deterministic figure and table emission: SVG, PGM, run-length, CSV.

Supports carrier groups of free rank 1 or 2; rank-1 groups with one
torsion factor render as a strip with the torsion coordinate vertical.
Identical inputs always produce identical bytes.
"""

from __future__ import annotations

from .groups import GSet, PreconditionError
from .patterns import Pattern

_PALETTE = ("#ffffff", "#3366cc", "#dc3912", "#ff9900", "#109618",
            "#990099", "#0099c6", "#dd4477", "#66aa00", "#b82e2e")


def _plane_coords(ctx):
    """Map a group element to integer (x, y) plot coordinates."""
    if ctx.free_rank == 2 and not ctx.moduli:
        return lambda g: (g[0], g[1])
    if ctx.free_rank == 1 and len(ctx.moduli) == 1:
        return lambda g: (g[0], g[1])
    if ctx.free_rank == 1 and not ctx.moduli:
        return lambda g: (g[0], 0)
    raise PreconditionError("rendering supports free rank 1 or 2 with at "
                            "most one torsion factor")


def _bounds(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs), min(ys), max(xs), max(ys)


def _svg_open(width, height):
    return ['<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">']


def svg_pattern(pattern: Pattern, cell=18, labels=True) -> str:
    """SVG of a finite pattern, one square per cell, colored by symbol."""
    if len(pattern.domain) == 0:
        return "".join(_svg_open(cell, cell) + ["</svg>"])
    to_xy = _plane_coords(pattern.domain.ctx)
    pts = {g: to_xy(g) for g in pattern.domain.elems}
    x0, y0, x1, y1 = _bounds(pts.values())
    symbols = sorted({str(s) for s in pattern.data.values()})
    color = {s: _PALETTE[i % len(_PALETTE)] for i, s in enumerate(symbols)}
    out = _svg_open((x1 - x0 + 1) * cell, (y1 - y0 + 1) * cell)
    for g in pattern.domain.elems:
        x, y = pts[g]
        px, py = (x - x0) * cell, (y1 - pts[g][1]) * cell
        s = str(pattern.data[g])
        out.append(f'<rect x="{px}" y="{py}" width="{cell}" height="{cell}" '
                   f'fill="{color[s]}" stroke="#444444"/>')
        if labels:
            out.append(f'<text x="{px + cell / 2}" y="{py + cell * 0.72}" '
                       f'font-size="{cell * 0.6}" text-anchor="middle" '
                       f'fill="#000000">{s}</text>')
    out.append("</svg>")
    return "".join(out)


def svg_indicator(v: GSet, window: GSet, cell=18) -> str:
    """SVG of a marked subset of a window (marked cells in blue)."""
    data = {g: (1 if g in v._set else 0) for g in window.elems}
    return svg_pattern(Pattern(window, data), cell=cell, labels=False)


def svg_tiling(tiling, window: GSet, cell=12) -> str:
    """SVG of a quasitiling: cells colored by shape, centers dotted."""
    to_xy = _plane_coords(window.ctx)
    pts = {g: to_xy(g) for g in window.elems}
    x0, y0, x1, y1 = _bounds(pts.values())
    out = _svg_open((x1 - x0 + 1) * cell, (y1 - y0 + 1) * cell)

    def rect(g, fill):
        x, y = pts[g]
        px, py = (x - x0) * cell, (y1 - y) * cell
        return (f'<rect x="{px}" y="{py}" width="{cell}" height="{cell}" '
                f'fill="{fill}" stroke="#bbbbbb"/>')

    for g in window.elems:
        out.append(rect(g, "#ffffff"))
    for k, (i, c) in enumerate(tiling.tiles):
        fill = _PALETTE[1 + i % (len(_PALETTE) - 1)]
        for g in tiling.tile_cells(k).elems:
            if g in pts:
                out.append(rect(g, fill))
    for _, c in tiling.tiles:
        if c in pts:
            x, y = pts[c]
            cx = (x - x0) * cell + cell / 2
            cy = (y1 - y) * cell + cell / 2
            out.append(f'<circle cx="{cx}" cy="{cy}" r="{cell / 4}" '
                       'fill="#000000"/>')
    out.append("</svg>")
    return "".join(out)


def pgm_indicator(v: GSet, window: GSet) -> bytes:
    """Plain PGM (P2) image of a marked subset of a 2D window."""
    to_xy = _plane_coords(window.ctx)
    pts = {g: to_xy(g) for g in window.elems}
    x0, y0, x1, y1 = _bounds(pts.values())
    w, h = x1 - x0 + 1, y1 - y0 + 1
    grid = [[0] * w for _ in range(h)]
    for g, (x, y) in pts.items():
        grid[y1 - y][x - x0] = 2 if g in v._set else 1
    lines = ["P2", f"{w} {h}", "2"]
    lines += [" ".join(str(p) for p in row) for row in grid]
    return ("\n".join(lines) + "\n").encode("ascii")


def run_length(v: GSet, window: GSet) -> str:
    """Run-length text of a 1D indicator, e.g. '0x3 1x1 0x2'."""
    ctx = window.ctx
    if ctx.free_rank != 1 or ctx.moduli:
        raise PreconditionError("run-length output needs free rank 1")
    bits = [1 if g in v._set else 0 for g in window.elems]
    runs = []
    for b in bits:
        if runs and runs[-1][0] == b:
            runs[-1][1] += 1
        else:
            runs.append([b, 1])
    return " ".join(f"{b}x{n}" for b, n in runs)


def csv_table(header, rows) -> str:
    """Plain CSV with '.' decimals and no quoting (values must be clean)."""
    def fmt(x):
        if isinstance(x, float):
            return repr(x)
        return str(x)

    lines = [",".join(header)]
    lines += [",".join(fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"
