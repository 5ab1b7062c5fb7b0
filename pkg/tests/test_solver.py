import random

import pytest

from shiftlab.fixtures import golden_mean_shift, triangle_kshift
from shiftlab.groups import folner_box, gset, singleton
from shiftlab.oracles import FullShiftOracle
from shiftlab.patterns import Pattern
from shiftlab.solver import (GlueError, check_specification,
                             exact_admissible, glue, lex_least_completion,
                             locally_admissible, random_admissible)


def test_lex_least_completion_is_all_least_symbols():
    oracle, _ = golden_mean_shift()
    window = folner_box(oracle.ctx, 5)
    p, _ = lex_least_completion(oracle, window)
    assert all(s == 0 for s in p.symbols_in_order())


def test_exact_admissible_three_values():
    oracle, _ = golden_mean_shift()
    dom = gset(oracle.ctx, [(0,), (1,)])
    assert exact_admissible(oracle, Pattern.from_rows(dom, [1, 0]))
    assert exact_admissible(oracle, Pattern.from_rows(dom, [1, 1])) is False


def test_locally_admissible():
    oracle, _ = golden_mean_shift()
    dom = gset(oracle.ctx, [(0,), (1,)])
    assert locally_admissible(oracle, Pattern.from_rows(dom, [0, 1]))
    assert not locally_admissible(oracle, Pattern.from_rows(dom, [1, 1]))


def test_glue_full_shift_is_union():
    ctx = golden_mean_shift()[0].ctx
    oracle = FullShiftOracle(ctx, (0, 1))
    a = Pattern(gset(ctx, [(0,)]), {(0,): 1})
    b = Pattern(gset(ctx, [(5,)]), {(5,): 1})
    out = glue(oracle, [a, b], singleton(ctx))
    assert out.data == {(0,): 1, (5,): 1}


def test_glue_agrees_with_parts_and_respects_margin():
    oracle, margin = golden_mean_shift()
    ctx = oracle.ctx
    a = Pattern(gset(ctx, [(0,), (1,)]), {(0,): 1, (1,): 0})
    b = Pattern(gset(ctx, [(4,), (5,)]), {(4,): 0, (5,): 1})
    out = glue(oracle, [a, b], margin)
    for part in (a, b):
        assert all(out.data[c] == part.data[c] for c in part.domain.elems)
    with pytest.raises(Exception):
        glue(oracle, [a, a.translate((1,))], margin)  # not apart


def test_random_admissible_seeded_and_valid():
    oracle, _ = golden_mean_shift()
    window = folner_box(oracle.ctx, 8)
    p1 = random_admissible(oracle, window, random.Random(5))
    p2 = random_admissible(oracle, window, random.Random(5))
    assert p1 == p2
    assert locally_admissible(oracle, p1)


def test_check_specification_passes_golden_mean():
    oracle, margin = golden_mean_shift()
    window = folner_box(oracle.ctx, 8)
    res = check_specification(oracle, margin, window, trials=25, seed=1)
    assert res.passed and res.unknowns == 0


def test_check_specification_refutes_weak_margin():
    spec = triangle_kshift()
    window = folner_box(spec.ctx, 4)
    res = check_specification(spec.oracle(), spec.weak_margin, window,
                              trials=10, seed=0)
    assert not res.passed
    pa, pb, union = res.counterexample
    oracle = spec.oracle()
    assert exact_admissible(oracle, pa, halo=3)
    assert exact_admissible(oracle, pb, halo=3)
    assert exact_admissible(oracle, union, halo=3) is False


def test_glue_error_reports_cell():
    spec = triangle_kshift()
    oracle = spec.oracle()
    res = check_specification(oracle, spec.weak_margin,
                              folner_box(spec.ctx, 4), trials=10, seed=0)
    pa, pb, _ = res.counterexample
    with pytest.raises(GlueError):
        glue(oracle, [pa, pb], spec.weak_margin)
