from fractions import Fraction
from math import ceil

import pytest

from shiftlab.groups import GroupContext, PreconditionError, core, folner_box
from shiftlab.tilings import (Hierarchy, Quasitiling, TilingError,
                              check_center_separation, complete_to_tiling,
                              congruent_refine, covering_fraction,
                              disjointness_grade, greedy_build,
                              primary_subtiles, r_epsilon,
                              recenter_with_hole, shrink_to_disjoint)


def zctx():
    return GroupContext(free_rank=1)


def test_r_epsilon_exact_values():
    assert r_epsilon(Fraction(1, 2)) == 2
    assert r_epsilon(Fraction(1, 4)) == 5
    assert r_epsilon(Fraction(1, 5)) == 8
    assert r_epsilon(Fraction(1, 10)) == 22


def build_pipeline(window_radius=500, radii=(2, 8, 32), eps=Fraction(1, 4)):
    ctx = zctx()
    window = folner_box(ctx, window_radius)
    shapes = [folner_box(ctx, r) for r in radii]
    return ctx, window, greedy_build(window, shapes, eps), eps


def test_greedy_build_strongly_disjoint_and_covering():
    ctx, window, tiling, eps = build_pipeline()
    assert disjointness_grade(tiling, eps) in ("disjoint",
                                               "strongly_eps_disjoint")
    target = core(window, max(tiling.shapes, key=len))
    assert covering_fraction(tiling, target) >= 1 - eps


def test_greedy_build_rejects_bad_shapes():
    ctx = zctx()
    window = folner_box(ctx, 40)
    with pytest.raises(PreconditionError):
        greedy_build(window, [folner_box(ctx, 2),
                              folner_box(ctx, 1).translate((7,))], "1/4")
    with pytest.raises((TilingError, PreconditionError)):
        greedy_build(folner_box(ctx, 2), [folner_box(ctx, 5)], "1/4")


def test_shrink_to_disjoint_outcome():
    ctx, window, tiling, eps = build_pipeline()
    shrunk = shrink_to_disjoint(tiling, eps)
    assert shrunk.is_disjoint()
    assert [c for _, c in shrunk.tiles] == [c for _, c in tiling.tiles]
    for k in range(len(tiling.tiles)):
        before = tiling.tile_cells(k)
        after = shrunk.tile_cells(k)
        assert len(after) >= (1 - eps) * len(before)
        assert tiling.tiles[k][1] in after._set


def test_recenter_with_hole():
    ctx, window, tiling, eps = build_pipeline()
    shrunk = shrink_to_disjoint(tiling, eps)
    k = folner_box(ctx, 1)
    assert check_center_separation(shrunk, k)
    holed = recenter_with_hole(shrunk, k)
    assert holed.is_disjoint()
    for idx, (_, c) in enumerate(holed.tiles):
        cells = holed.tile_cells(idx)._set
        # own hole present, all other centers' holes removed
        assert {(c[0] + d,) for d in (-1, 0, 1)} <= cells
        for _, other in holed.tiles:
            if other != c:
                assert other not in cells


def test_complete_to_tiling_partitions_core():
    ctx, window, tiling, eps = build_pipeline()
    shrunk = shrink_to_disjoint(tiling, eps)
    completed = complete_to_tiling(shrunk, window, eps)
    target = core(window, max(tiling.shapes, key=len))
    cells = completed.all_cells()
    union = set().union(*(c for c in cells))
    assert completed.is_disjoint()
    assert target._set <= union
    for k in range(len(cells)):
        gain = len(cells[k]) - len(shrunk.tile_cells(k))
        assert gain <= ceil(2 * eps * len(shrunk.tile_cells(k)))


def test_quasitiling_json_roundtrip():
    ctx, window, tiling, eps = build_pipeline(window_radius=60, radii=(2, 8))
    back = Quasitiling.from_json(ctx, tiling.to_json())
    assert back.tiles == tiling.tiles
    assert [s._set for s in back.shapes] == [s._set for s in tiling.shapes]


def test_hierarchy_congruent_and_primary_subtiles():
    ctx = zctx()
    window = folner_box(ctx, 600)
    eps_list = [Fraction(1, 3), Fraction(1, 4), Fraction(1, 5)]
    levels = []
    prev = None
    for radii, eps in zip([(1, 2), (8, 16), (64, 128)], eps_list):
        prev = congruent_refine(prev, [folner_box(ctx, r) for r in radii],
                                eps, window)
        levels.append(prev)
    h = Hierarchy(levels, eps_list)
    assert h.is_congruent()
    top = len(levels) - 1
    for t_idx in range(len(levels[top].tiles)):
        host = levels[top].tile_cells(t_idx)._set
        primaries = primary_subtiles(h, top, t_idx)
        covered = set()
        for lev, k in primaries:
            cells = levels[lev].tile_cells(k)._set
            assert cells <= host
            assert not cells & covered          # pairwise disjoint
            covered |= cells
        # primaries cover exactly the points of the host covered below
        below = set()
        for lev in range(top):
            for k in range(len(levels[lev].tiles)):
                cells = levels[lev].tile_cells(k)._set
                if cells <= host:
                    below |= cells
        assert covered == below
