from fractions import Fraction

import pytest

from shiftlab.groups import (GroupContext, GSet, PreconditionError,
                             check_aux_bound, core, folner_box, gset,
                             invariance_defect, inverse_set, is_apart,
                             is_separated, pairwise_apart, set_product,
                             singleton)


def z():
    return GroupContext(free_rank=1)


def z2():
    return GroupContext(free_rank=2)


def zz6():
    return GroupContext(free_rank=1, moduli=[6])


def test_group_arithmetic_free_and_torsion():
    ctx = zz6()
    assert ctx.mul((2, 5), (3, 4)) == (5, 3)
    assert ctx.inv((2, 5)) == (-2, 1)
    assert ctx.mul((2, 5), ctx.inv((2, 5))) == ctx.identity


def test_folner_box_sizes():
    assert len(folner_box(z(), 3)) == 7
    assert len(folner_box(z2(), 2)) == 25
    assert len(folner_box(zz6(), 1)) == 18


def test_gset_operations_and_symmetry():
    ctx = z()
    a = gset(ctx, [(0,), (1,)])
    assert not a.is_symmetric()
    assert (a | inverse_set(a)).is_symmetric()
    assert set_product(a, a)._set == {(0,), (1,), (2,)}
    assert singleton(ctx).contains_identity()


def test_core_and_invariance_defect():
    ctx = z()
    f = folner_box(ctx, 5)          # [-5, 5], 11 cells
    k = gset(ctx, [(-1,), (0,), (1,)])
    assert core(f, k)._set == folner_box(ctx, 4)._set
    assert invariance_defect(f, k) == Fraction(2, 11)


def test_apartness():
    ctx = z()
    m = folner_box(ctx, 1)
    a = gset(ctx, [(0,)])
    b = gset(ctx, [(3,)])
    cgs = gset(ctx, [(2,)])
    assert is_apart(a, b, m)
    assert not is_apart(a, cgs, m)
    assert pairwise_apart([a, b, gset(ctx, [(8,)])], m)


def test_is_separated():
    ctx = z()
    k = gset(ctx, [(0,), (1,)])
    assert is_separated(gset(ctx, [(0,), (2,), (4,)]), k)
    assert not is_separated(gset(ctx, [(0,), (1,)]), k)


def test_aux_bound_example_and_preconditions():
    ctx = z()
    k = gset(ctx, [(0,), (1,)])
    kprime = folner_box(ctx, 2)
    f = folner_box(ctx, 20)
    v = gset(ctx, [(i,) for i in range(-20, 21, 5)])
    lhs, rhs, holds = check_aux_bound(k, kprime, f, v)
    assert holds and lhs <= rhs
    with pytest.raises(PreconditionError):
        check_aux_bound(gset(ctx, [(1,)]), kprime, f, v)   # e missing
    with pytest.raises(PreconditionError):
        check_aux_bound(k, gset(ctx, [(0,), (1,)]), f, v)  # K' asymmetric
    with pytest.raises(PreconditionError):
        check_aux_bound(k, kprime, f, gset(ctx, [(0,), (1,)]))  # V clash


def test_json_roundtrip():
    ctx = zz6()
    s = gset(ctx, [(0, 0), (2, 5)])
    assert GSet.from_json(GroupContext.from_json(ctx.to_json()),
                          s.to_json())._set == s._set
