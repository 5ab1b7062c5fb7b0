"""Maximal K-separated subsets and the binary shift they induce.

A set V is K-separated when the translates Kv are pairwise disjoint.  The
indicator configurations of *maximal* K-separated sets form a nonempty
shift with the gluing (specification) property at margin K K^{-1} K; the
smaller margin K^{-1} K is not sufficient in general.
"""

from __future__ import annotations

from fractions import Fraction

from .groups import (GSet, PreconditionError, core, folner_box, inverse_set,
                     is_separated, set_product, singleton)
from .oracles import LocalOracle, separation_constraints
from .patterns import Pattern


class KShiftSpec:
    """K plus the derived data used throughout: K^{-1}K and the margin."""

    def __init__(self, k: GSet):
        if len(k) == 0:
            raise PreconditionError("K must be nonempty")
        if not k.contains_identity():
            raise PreconditionError("K must contain the identity")
        self.ctx = k.ctx
        self.k = k
        self.kk = set_product(inverse_set(k), k)       # K^{-1}K, symmetric
        self.margin = set_product(k, self.kk)          # K K^{-1} K
        self.weak_margin = self.kk

    def oracle(self):
        return SeparatedSetOracle(self)

    def to_json(self):
        return {"group": self.ctx.to_json(), "k": self.k.to_json()}

    @classmethod
    def from_json(cls, data):
        from .groups import GroupContext
        ctx = GroupContext.from_json(data["group"])
        return cls(GSet.from_json(ctx, data["k"]))


class SeparatedSetOracle(LocalOracle):
    """Binary local rules for indicators of maximal K-separated sets.

    Two marked cells may not sit at a relative position in K^{-1}K \\ {e};
    every fully visible K^{-1}K-frame must contain a marked cell.
    """

    def __init__(self, spec: KShiftSpec):
        self.spec = spec
        super().__init__(spec.ctx, (0, 1), spec.kk)

    def constraints(self, cells):
        one = self.symbols.ids_vis([1])
        return separation_constraints(self.ctx, self.spec.k, cells, one)

    def describe(self):
        return "SeparatedSetOracle(|K|=%d)" % len(self.spec.k)


def is_k_separated(v: GSet, k: GSet):
    return is_separated(v, k)


def is_maximal_in_window(v: GSet, k: GSet, window: GSet):
    """Three-valued maximality check inside a window.

    False on a separation clash or an empty verified frame; True when all
    frames inside the window's K^{-1}K-core are hit; None when the core is
    empty so nothing could be verified.
    """
    if not is_separated(v, k):
        return False
    kk = set_product(inverse_set(k), k)
    ctx = v.ctx
    mul = ctx.mul
    vset = v._set
    verified = core(window, kk)
    hit_any = False
    for g in verified.elems:
        if not any(mul(d, g) in vset for d in kk.elems):
            return False
        hit_any = True
    return True if hit_any else None


def greedy_maximal(k: GSet, window: GSet, start: GSet = None):
    """Greedy maximal K-separated subset of the window, lexicographic scan.

    start, if given, must already be K-separated and is kept verbatim.
    """
    ctx = window.ctx
    mul = ctx.mul
    kk = set_product(inverse_set(k), k)
    chosen = []
    blocked = set()
    if start is not None:
        if not is_separated(start, k):
            raise PreconditionError("starting set is not K-separated")
        for v in start.elems:
            chosen.append(v)
            for d in kk.elems:
                blocked.add(mul(d, v))
    for g in window.elems:
        if g in blocked:
            continue
        chosen.append(g)
        for d in kk.elems:
            blocked.add(mul(d, g))
    return GSet(ctx, chosen)


def extend_to_maximal(start: GSet, k: GSet, window: GSet, forbidden: GSet = None):
    """Extend a K-separated set to a maximal one inside the window.

    Cells in forbidden are never added (used when fragments pin zeros).
    """
    ctx = window.ctx
    mul = ctx.mul
    kk = set_product(inverse_set(k), k)
    if not is_separated(start, k):
        raise PreconditionError("starting set is not K-separated")
    blocked = set()
    for v in start.elems:
        for d in kk.elems:
            blocked.add(mul(d, v))
    if forbidden is not None:
        blocked |= set(forbidden.elems)
    chosen = list(start.elems)
    for g in window.elems:
        if g in blocked or g in start:
            continue
        chosen.append(g)
        for d in kk.elems:
            blocked.add(mul(d, g))
    return GSet(ctx, chosen)


def indicator_pattern(v: GSet, window: GSet):
    """The 0/1 pattern of V over a window."""
    vset = v._set
    return Pattern(window, {g: (1 if g in vset else 0) for g in window})


def banach_density_window(v: GSet, box_index: int, shifts: GSet):
    """Window estimates of lower/upper densities of V.

    Counts |V intersect Fg| / |F| over the given right shifts g of the
    Folner box F of the given index; returns (lower, upper) as Fractions.
    """
    if len(shifts) == 0:
        raise PreconditionError("density window needs at least one shift")
    ctx = v.ctx
    box = folner_box(ctx, box_index)
    size = len(box)
    lo, hi = None, None
    vset = v._set
    for g in shifts.elems:
        cnt = sum(1 for b in box.elems if ctx.mul(b, g) in vset)
        frac = Fraction(cnt, size)
        lo = frac if lo is None else min(lo, frac)
        hi = frac if hi is None else max(hi, frac)
    return lo, hi
