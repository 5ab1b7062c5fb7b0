"""Quasitilings: greedy multi-scale construction and refinement.

A quasitiling is a finite family of tiles, each a translate of one of a
fixed list of shapes.  This module builds almost-covering, almost-disjoint
quasitilings of a window greedily from nested shapes, grades their
disjointness, trims them to honestly disjoint families, re-centers tiles
around a protected core, completes them to a partition of the window core
by capacity-bounded matching, and stacks levels into congruent
hierarchies.
"""

from __future__ import annotations

from fractions import Fraction
from math import ceil

from .groups import (GSet, GroupError, PreconditionError, core, gset,
                     inverse_set, set_product)
from .kshift import is_k_separated


class TilingError(GroupError):
    """A tiling construction could not meet its target."""


def r_epsilon(eps) -> int:
    """Number of greedy rounds needed: least r with (1-eps)^r < eps."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise PreconditionError("eps must lie strictly between 0 and 1")
    residue = Fraction(1)
    r = 0
    while True:
        r += 1
        residue *= 1 - eps
        if residue < eps:
            return r


class Quasitiling:
    """An ordered shape list plus (shape index, center) tiles.

    Tiles are right translates: the tile for (i, c) is shapes[i]·c.
    Centers are pairwise distinct and every shape contains the identity,
    so each tile contains its own center.
    """

    def __init__(self, shapes, tiles, meta=None):
        self.shapes = tuple(shapes)
        if not self.shapes:
            raise PreconditionError("quasitiling needs at least one shape")
        self.ctx = self.shapes[0].ctx
        for s in self.shapes:
            if not s.contains_identity():
                raise PreconditionError("every shape must contain the identity")
        self.tiles = tuple((int(i), tuple(c)) for i, c in tiles)
        for i, _ in self.tiles:
            if not 0 <= i < len(self.shapes):
                raise PreconditionError("shape index out of range")
        centers = [c for _, c in self.tiles]
        if len(set(centers)) != len(centers):
            raise PreconditionError("tile centers must be pairwise distinct")
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)

    def centers(self) -> GSet:
        return gset(self.ctx, (c for _, c in self.tiles))

    def tile_cells(self, index) -> GSet:
        i, c = self.tiles[index]
        return self.shapes[i].translate(c)

    def all_cells(self):
        """List of per-tile frozensets of cells, in tile order."""
        return [self.tile_cells(k)._set for k in range(len(self.tiles))]

    def covered(self) -> GSet:
        cells = set()
        for k in range(len(self.tiles)):
            cells |= self.tile_cells(k)._set
        return gset(self.ctx, cells)

    def is_disjoint(self) -> bool:
        seen = set()
        for cells in self.all_cells():
            if cells & seen:
                return False
            seen |= cells
        return True

    def to_json(self):
        return {"shapes": [sorted(s._set) for s in self.shapes],
                "tiles": [[i, list(c)] for i, c in self.tiles]}

    @classmethod
    def from_json(cls, ctx, data):
        shapes = [gset(ctx, cells) for cells in data["shapes"]]
        tiles = [(i, tuple(c)) for i, c in data["tiles"]]
        return cls(shapes, tiles)


def _tile_order(tiling):
    """Deterministic precedence: larger tiles first, then center order."""
    keyed = [(-len(tiling.shapes[i]), c, k)
             for k, (i, c) in enumerate(tiling.tiles)]
    return [k for *_, k in sorted(keyed)]


def greedy_build(window: GSet, shapes, eps, require_covering=True) -> Quasitiling:
    """Greedy multi-scale quasitiling of a window.

    Shapes must be nested, symmetric, and contain the identity.  Passes
    run from the largest shape down to the smallest; within a pass,
    candidate centers scan in lexicographic order.  A tile is placed when
    its center is still uncovered, it does not meet any tile of the same
    pass, and its overlap with previously placed (larger) tiles is at
    most eps·|shape|.  The same-pass disjointness requirement is what
    makes the output strongly eps-disjoint under the symmetric residual
    test, not merely sequentially eps-disjoint.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise PreconditionError("eps must lie strictly between 0 and 1")
    shapes = [s if isinstance(s, GSet) else gset(window.ctx, s) for s in shapes]
    if not shapes:
        raise PreconditionError("need at least one shape")
    for s in shapes:
        if not s.contains_identity():
            raise PreconditionError("shapes must contain the identity")
        if not s.is_symmetric():
            raise PreconditionError("shapes must be symmetric")
    ordered = sorted(shapes, key=len)
    for small, big in zip(ordered, ordered[1:]):
        if not small.issubset(big):
            raise PreconditionError("shapes must be nested")
    ctx = window.ctx
    covered = set()
    tiles = []
    shape_list = list(reversed(ordered))  # largest first; index = pass
    for idx, shape in enumerate(shape_list):
        allowance = eps * len(shape)
        pass_cells = set()
        cells = sorted(window._set)
        for c in cells:
            if c in covered or c in pass_cells:
                continue
            tile = {ctx.mul(s, c) for s in shape._set}
            if not tile <= window._set:
                continue
            if tile & pass_cells:
                continue
            if len(tile & covered) > allowance:
                continue
            tiles.append((idx, c))
            pass_cells |= tile
        covered |= pass_cells
    result = Quasitiling(shape_list, tiles,
                         meta={"builder": "greedy",
                               "order": "largest shape first, centers "
                                        "lexicographic",
                               "eps": str(eps)})
    if require_covering:
        target_core = core(window, shape_list[0])
        frac = covering_fraction(result, target_core)
        if frac < 1 - eps:
            raise TilingError(
                f"covering target unreachable: {frac} < {1 - eps} "
                "(window too small for the shape list)")
    return result


def covering_fraction(tiling: Quasitiling, region: GSet) -> Fraction:
    """Fraction of the region met by the union of the tiles."""
    if len(region) == 0:
        raise PreconditionError("region is empty")
    return Fraction(len(tiling.covered()._set & region._set), len(region))


def disjointness_grade(tiling: Quasitiling, eps) -> str:
    """Strongest applicable grade of tile overlap.

    'disjoint': tiles pairwise disjoint.  'strongly_eps_disjoint': after
    removing all other tiles of at least equal size, every tile keeps its
    center and at least (1-eps) of its cells.  'eps_disjoint': the same
    retention holds sequentially in the deterministic tile order.
    Otherwise 'none'.
    """
    eps = Fraction(eps)
    cells = tiling.all_cells()
    if tiling.is_disjoint():
        return "disjoint"
    sizes = [len(c) for c in cells]
    order = _tile_order(tiling)

    def strong():
        for k, tile in enumerate(cells):
            eaten = set()
            for j, other in enumerate(cells):
                if j != k and sizes[j] >= sizes[k]:
                    eaten |= other & tile
            residual = tile - eaten
            center = tiling.tiles[k][1]
            if center not in residual:
                return False
            if len(residual) < (1 - eps) * sizes[k]:
                return False
        return True

    if strong():
        return "strongly_eps_disjoint"
    seen = set()
    sequential = True
    for k in order:
        residual = cells[k] - seen
        if len(residual) < (1 - eps) * sizes[k]:
            sequential = False
            break
        seen |= cells[k]
    return "eps_disjoint" if sequential else "none"


def _dedup_shapes(ctx, raw_tiles):
    """Build a shape list from (cells, center) pairs, deduplicating."""
    shapes = []
    index = {}
    tiles = []
    for cells, center in raw_tiles:
        inv_c = ctx.inv(center)
        shape = frozenset(ctx.mul(x, inv_c) for x in cells)
        key = tuple(sorted(shape))
        if key not in index:
            index[key] = len(shapes)
            shapes.append(gset(ctx, shape))
        tiles.append((index[key], center))
    return shapes, tiles


def shrink_to_disjoint(tiling: Quasitiling, eps) -> Quasitiling:
    """Trim each tile by all earlier tiles in the size-then-center order.

    Requires the input to be strongly eps-disjoint, which guarantees that
    every trimmed tile keeps its center and at least (1-eps) of its
    cells.  The output is pairwise disjoint with unchanged centers.
    """
    eps = Fraction(eps)
    grade = disjointness_grade(tiling, eps)
    if grade not in ("disjoint", "strongly_eps_disjoint"):
        raise PreconditionError(
            f"input is not strongly eps-disjoint (grade: {grade})")
    if grade == "disjoint":
        return tiling
    ctx = tiling.ctx
    cells = tiling.all_cells()
    order = _tile_order(tiling)
    seen = set()
    trimmed = {}
    for k in order:
        trimmed[k] = cells[k] - seen
        seen |= cells[k]
    raw = [(trimmed[k], tiling.tiles[k][1]) for k in range(len(cells))]
    for resid, center in raw:
        if center not in resid:
            raise PreconditionError("a tile lost its center while shrinking")
    shapes, tiles = _dedup_shapes(ctx, raw)
    return Quasitiling(shapes, tiles, meta=dict(tiling.meta))


def check_center_separation(tiling: Quasitiling, k: GSet) -> bool:
    """Whether the tile centers form a K-separated set."""
    return is_k_separated(tiling.centers(), k)


def recenter_with_hole(tiling: Quasitiling, k: GSet) -> Quasitiling:
    """Clear K-translates of all centers from every tile, then give each
    tile back its own K-neighborhood.

    Requires K·c to lie inside its own tile and the centers to be
    separated for the symmetrization of K, so the reinserted
    neighborhoods are pairwise disjoint and the output stays disjoint.
    """
    ctx = tiling.ctx
    if not k.contains_identity():
        raise PreconditionError("hole set must contain the identity")
    k_sym = k | inverse_set(k)
    if not check_center_separation(tiling, k_sym):
        raise PreconditionError("centers are not separated for the "
                                "symmetrized hole set")
    if not tiling.is_disjoint():
        raise PreconditionError("input tiles must be pairwise disjoint")
    centers = [c for _, c in tiling.tiles]
    k_all = set()
    for c in centers:
        k_all |= {ctx.mul(x, c) for x in k._set}
    raw = []
    for idx, (i, c) in enumerate(tiling.tiles):
        cells = tiling.tile_cells(idx)._set
        own = {ctx.mul(x, c) for x in k._set}
        if not own <= cells:
            raise PreconditionError(
                "hole neighborhood of a center leaves its tile")
        raw.append(((cells - k_all) | own, c))
    shapes, tiles = _dedup_shapes(ctx, raw)
    return Quasitiling(shapes, tiles, meta=dict(tiling.meta))


def _free_dist2(ctx, a, b):
    return sum((a[i] - b[i]) ** 2 for i in range(ctx.free_rank))


def complete_to_tiling(tiling: Quasitiling, window: GSet, eps,
                       reach: GSet | None = None) -> Quasitiling:
    """Extend a disjoint quasitiling to a partition of the window core.

    Every uncovered core point is assigned to a nearby tile by a
    capacity-bounded matching with augmenting paths: a tile within reach
    of its center may absorb at most ceil(2·eps·|tile|) extra points.
    Points are processed in lexicographic order and prefer closer tiles,
    so the result is deterministic.  Raises TilingError, naming an
    unmatched point, when no capacity-respecting assignment exists.
    """
    eps = Fraction(eps)
    ctx = tiling.ctx
    if not tiling.is_disjoint():
        raise PreconditionError("input tiles must be pairwise disjoint")
    biggest = max(tiling.shapes, key=len) if tiling.shapes else None
    if reach is None:
        reach = set_product(biggest, inverse_set(biggest))
    target = core(window, biggest)
    if covering_fraction(tiling, target) < 1 - eps:
        raise PreconditionError("covering of the window core is below 1-eps")
    cells = tiling.all_cells()
    covered = set().union(*cells) if cells else set()
    missing = sorted(target._set - covered)
    capacity = [ceil(2 * eps * len(c)) for c in cells]
    centers = [c for _, c in tiling.tiles]
    # tiles eligible for a point, closest center first
    def options(point):
        opts = []
        inv_reach = inverse_set(reach)._set
        for k, c in enumerate(centers):
            # point within reach of center: point = r·c for some r in reach
            r = ctx.mul(point, ctx.inv(c))
            if r in reach._set:
                opts.append((_free_dist2(ctx, point, c), c, k))
        opts.sort()
        return [k for *_, k in opts]

    assigned = {}          # point -> tile index
    load = [0] * len(cells)

    def augment(point, banned):
        for k in options(point):
            if k in banned:
                continue
            banned.add(k)
            if load[k] < capacity[k]:
                assigned[point] = k
                load[k] += 1
                return True
            # try to relocate one of the tile's extra points elsewhere
            for q, kk in sorted(assigned.items()):
                if kk != k:
                    continue
                del assigned[q]
                load[k] -= 1
                if augment(q, banned):
                    assigned[point] = k
                    load[k] += 1
                    return True
                assigned[q] = k
                load[k] += 1
        return False

    for point in missing:
        if not augment(point, set()):
            raise TilingError(f"no capacity-respecting home for point {point}")
    raw = []
    for k in range(len(cells)):
        extra = {p for p, kk in assigned.items() if kk == k}
        raw.append((cells[k] | extra, centers[k]))
    shapes, tiles = _dedup_shapes(ctx, raw)
    out = Quasitiling(shapes, tiles, meta=dict(tiling.meta))
    out.meta["completed"] = True
    return out


def congruent_refine(level: Quasitiling | None, shapes_next, eps_next,
                     window: GSet) -> Quasitiling:
    """Build the next coarser level so tiles align with existing ones.

    A fresh greedy quasitiling is built from the next shape list and
    trimmed to disjointness; then each tile snaps to the boundaries of
    the previous level by dropping every cell of a partially-overlapped
    finer tile.  Each output tile is therefore a union of whole finer
    tiles plus previously uncovered points, so congruency holds by
    construction.
    """
    eps_next = Fraction(eps_next)
    fresh = shrink_to_disjoint(
        greedy_build(window, shapes_next, eps_next, require_covering=False),
        eps_next)
    if level is None or len(level) == 0:
        built = fresh
    else:
        ctx = fresh.ctx
        fine = level.all_cells()
        raw = []
        for k in range(len(fresh)):
            cells = set(fresh.tile_cells(k)._set)
            for fc in fine:
                if fc & cells and not fc <= cells:
                    cells -= fc
            center = fresh.tiles[k][1]
            if center not in cells:
                continue
            raw.append((cells, center))
        shapes, tiles = _dedup_shapes(ctx, raw)
        built = Quasitiling(shapes, tiles, meta=dict(fresh.meta))
    biggest = max((s for s in built.shapes), key=len)
    target = core(window, biggest)
    if len(target) and covering_fraction(built, target) < 1 - eps_next:
        raise TilingError("refined level cannot reach its covering target")
    return built


class Hierarchy:
    """A stack of disjoint quasitilings, finest level first.

    Congruency: every tile of one level is either contained in a single
    tile of the next level or disjoint from all of them.  Tolerances are
    nonincreasing across levels.
    """

    def __init__(self, levels, eps_list):
        self.levels = list(levels)
        self.eps_list = [Fraction(e) for e in eps_list]
        if len(self.levels) != len(self.eps_list):
            raise PreconditionError("one tolerance per level is required")
        for a, b in zip(self.eps_list, self.eps_list[1:]):
            if b > a:
                raise PreconditionError("tolerances must be nonincreasing")
        if not self.is_congruent():
            raise PreconditionError("levels are not congruent")

    def is_congruent(self) -> bool:
        for fine, coarse in zip(self.levels, self.levels[1:]):
            coarse_cells = coarse.all_cells()
            for k in range(len(fine)):
                cells = fine.tile_cells(k)._set
                ok = False
                for cc in coarse_cells:
                    inter = cells & cc
                    if not inter:
                        continue
                    if cells <= cc:
                        ok = True
                        break
                    return False
                if not ok:
                    # disjoint from every coarser tile is also fine
                    ok = all(not (cells & cc) for cc in coarse_cells)
                if not ok:
                    return False
        return True


def primary_subtiles(hierarchy: Hierarchy, level: int, tile_index: int):
    """Finer tiles lying in the given tile but in no intermediate tile.

    Returns (level, tile index) pairs for all tiles of levels below
    ``level`` that are contained in the chosen tile and not contained in
    any tile of a strictly intermediate level.  They are pairwise
    disjoint because each level is.
    """
    host = hierarchy.levels[level].tile_cells(tile_index)._set
    found = []
    for k in range(level - 1, -1, -1):
        lv = hierarchy.levels[k]
        for t in range(len(lv)):
            cells = lv.tile_cells(t)._set
            if not cells <= host:
                continue
            shadowed = False
            for mid in range(k + 1, level):
                for mc in hierarchy.levels[mid].all_cells():
                    if cells <= mc:
                        shadowed = True
                        break
                if shadowed:
                    break
            if not shadowed:
                found.append((k, t))
    return sorted(found)
