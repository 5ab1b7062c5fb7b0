import pytest

from shiftlab.groups import GroupContext, folner_box, gset, singleton
from shiftlab.oracles import (AtLeast, ForbiddenPatternOracle,
                              FullShiftOracle, Nogood, SymbolTable, evaluate,
                              translate_centers)
from shiftlab.patterns import Pattern, PatternConflict, occurrences, union_all


def ctx1():
    return GroupContext(free_rank=1)


def test_pattern_translate_moves_domain_and_values():
    ctx = ctx1()
    p = Pattern(gset(ctx, [(0,), (1,)]), {(0,): "a", (1,): "b"})
    q = p.translate((5,))
    assert q.domain._set == {(5,), (6,)}
    assert q[(5,)] == "a" and q[(6,)] == "b"


def test_pattern_union_conflict_and_restrict():
    ctx = ctx1()
    p = Pattern(gset(ctx, [(0,)]), {(0,): 1})
    q = Pattern(gset(ctx, [(0,)]), {(0,): 0})
    with pytest.raises(PatternConflict):
        p.union(q)
    big = union_all([p, Pattern(gset(ctx, [(1,)]), {(1,): 0})])
    assert big.restrict(gset(ctx, [(1,)]))[(1,)] == 0


def test_occurrences_and_matches_at():
    ctx = ctx1()
    host_dom = folner_box(ctx, 4)
    host = Pattern.from_rows(host_dom, [0, 1, 0, 0, 1, 0, 0, 0, 1])
    probe = Pattern(gset(ctx, [(0,), (1,)]), {(0,): 1, (1,): 0})
    occ = occurrences(host, probe)
    assert occ == [(-3,), (0,)]
    assert probe.matches_at(host, (0,))
    assert not probe.matches_at(host, (1,))


def test_pattern_json_roundtrip():
    ctx = ctx1()
    p = Pattern.from_rows(folner_box(ctx, 1), [2, 0, 1])
    assert Pattern.from_json(ctx, p.to_json()) == p


def test_symbol_table_ids():
    t = SymbolTable((0, 1), hidden_alphabet=(0, 1))
    assert len(t) == 4
    ones = t.ids_vis([1])
    assert all(t.vis_of[i] == 1 for i in ones)
    assert t.ids_vis_not([1]) == t.ids_vis([0])
    hid1 = t.ids_hid([1])
    assert len(hid1) == 2


def test_translate_centers():
    ctx = ctx1()
    cells = folner_box(ctx, 3)
    probe = gset(ctx, [(0,), (1,)])
    centers = translate_centers(cells, probe)
    assert set(centers) == {(i,) for i in range(-3, 3)}


def test_forbidden_pattern_oracle_constraints():
    ctx = ctx1()
    oracle = ForbiddenPatternOracle(
        ctx, (0, 1), [Pattern(gset(ctx, [(0,), (1,)]), {(0,): 1, (1,): 1})])
    window = folner_box(ctx, 1)
    nogoods, atleasts = oracle.constraints(window)
    assert atleasts == []
    assert len(nogoods) == 2  # one per fully visible placement
    one_id = next(iter(oracle.symbols.ids_vis([1])))
    all_ones = {c: one_id for c in window.elems}
    assert not evaluate(nogoods, atleasts, all_ones)


def test_full_shift_has_no_constraints():
    ctx = ctx1()
    oracle = FullShiftOracle(ctx, (0, 1, 2))
    nogoods, atleasts = oracle.constraints(folner_box(ctx, 4))
    assert nogoods == [] and atleasts == []


def test_evaluate_satisfied():
    table = SymbolTable((0, 1))
    zero = next(iter(table.ids_vis([0])))
    ng = [Nogood(((0,), (1,)), (table.ids_vis([1]),) * 2)]
    al = [AtLeast(((0,), (1,)), table.ids_vis([0]))]
    assert evaluate(ng, al, {(0,): zero, (1,): zero})
