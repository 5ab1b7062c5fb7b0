"""Exact arithmetic for carrier groups of the form Z^d x T with T finite.

Elements are plain tuples: the d free coordinates, followed by one torsion
index when the torsion part is nontrivial.  Tuple comparison gives the
lexicographic order (free part first, torsion index last) used everywhere
for deterministic scans.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct


class GroupError(ValueError):
    """Invalid group data (bad Cayley table, mismatched contexts, ...)."""


class PreconditionError(ValueError):
    """An operation's stated precondition failed."""


def _mixed_radix_table(moduli):
    """Cayley table for the direct product of cyclic groups Z_m."""
    order = 1
    for m in moduli:
        order *= m
    reps = list(iproduct(*(range(m) for m in moduli)))
    index = {r: i for i, r in enumerate(reps)}
    table = [[0] * order for _ in range(order)]
    for i, a in enumerate(reps):
        for j, b in enumerate(reps):
            table[i][j] = index[tuple((x + y) % m for x, y, m in zip(a, b, moduli))]
    return table


class GroupContext:
    """Carrier group Z^free_rank x T.

    T is given either as a list of cyclic moduli or as an explicit Cayley
    table (list of rows of indices) with a designated identity index.
    """

    def __init__(self, free_rank=0, moduli=None, cayley=None, identity_index=0):
        if free_rank < 0:
            raise GroupError("free_rank must be >= 0")
        if moduli is not None and cayley is not None:
            raise GroupError("give moduli or an explicit Cayley table, not both")
        self.free_rank = free_rank
        self.moduli = list(moduli) if moduli else None
        if moduli:
            for m in moduli:
                if m < 1:
                    raise GroupError("moduli must be positive")
            cayley = _mixed_radix_table(moduli)
            identity_index = 0
        if cayley is None:
            cayley = [[0]]
            identity_index = 0
        self._validate_cayley(cayley, identity_index)
        self.cayley = [tuple(row) for row in cayley]
        self.torsion_order = len(cayley)
        self.torsion_identity = identity_index
        self._tinv = self._invert_table()
        self.has_torsion = self.torsion_order > 1
        self.elem_len = free_rank + (1 if self.has_torsion else 0)
        self.identity = self._make_identity()

    @staticmethod
    def _validate_cayley(cayley, identity_index):
        n = len(cayley)
        if any(len(row) != n for row in cayley):
            raise GroupError("Cayley table must be square")
        if not (0 <= identity_index < n):
            raise GroupError("identity index out of range")
        for row in cayley:
            for v in row:
                if not (0 <= v < n):
                    raise GroupError("Cayley entry out of range")
        e = identity_index
        for i in range(n):
            if cayley[e][i] != i or cayley[i][e] != i:
                raise GroupError("designated identity is not an identity")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if cayley[cayley[i][j]][k] != cayley[i][cayley[j][k]]:
                        raise GroupError("Cayley table is not associative")
        for i in range(n):
            if e not in cayley[i]:
                raise GroupError("element %d has no inverse" % i)

    def _invert_table(self):
        e = self.torsion_identity
        inv = [0] * self.torsion_order
        for i in range(self.torsion_order):
            inv[i] = self.cayley[i].index(e)
        return inv

    def _make_identity(self):
        if self.has_torsion:
            return tuple([0] * self.free_rank + [self.torsion_identity])
        return (0,) * self.free_rank

    def __eq__(self, other):
        return (isinstance(other, GroupContext)
                and self.free_rank == other.free_rank
                and self.cayley == other.cayley
                and self.torsion_identity == other.torsion_identity)

    def __hash__(self):
        return hash((self.free_rank, tuple(self.cayley), self.torsion_identity))

    def __repr__(self):
        if self.moduli:
            return "GroupContext(Z^%d x %s)" % (
                self.free_rank, "x".join("Z%d" % m for m in self.moduli))
        if self.has_torsion:
            return "GroupContext(Z^%d x T%d)" % (self.free_rank, self.torsion_order)
        return "GroupContext(Z^%d)" % self.free_rank

    def is_abelian(self):
        n = self.torsion_order
        return all(self.cayley[i][j] == self.cayley[j][i]
                   for i in range(n) for j in range(n))

    def check_element(self, g):
        if not isinstance(g, tuple) or len(g) != self.elem_len:
            raise GroupError("element %r does not fit context %r" % (g, self))
        if self.has_torsion and not (0 <= g[-1] < self.torsion_order):
            raise GroupError("torsion index out of range in %r" % (g,))

    def mul(self, a, b):
        d = self.free_rank
        if self.has_torsion:
            return tuple(a[i] + b[i] for i in range(d)) + (self.cayley[a[d]][b[d]],)
        return tuple(a[i] + b[i] for i in range(d))

    def inv(self, a):
        d = self.free_rank
        if self.has_torsion:
            return tuple(-a[i] for i in range(d)) + (self._tinv[a[d]],)
        return tuple(-x for x in a)

    def to_json(self):
        if self.moduli:
            return {"free_rank": self.free_rank, "moduli": self.moduli}
        if self.has_torsion:
            return {"free_rank": self.free_rank,
                    "cayley_table": [list(r) for r in self.cayley],
                    "identity_index": self.torsion_identity}
        return {"free_rank": self.free_rank}

    @classmethod
    def from_json(cls, data):
        if "moduli" in data and data["moduli"]:
            return cls(data.get("free_rank", 0), moduli=data["moduli"])
        if "cayley_table" in data:
            return cls(data.get("free_rank", 0), cayley=data["cayley_table"],
                       identity_index=data.get("identity_index", 0))
        return cls(data.get("free_rank", 0))


def _same_ctx(a, b):
    if a.ctx != b.ctx:
        raise GroupError("mixed group contexts: %r vs %r" % (a.ctx, b.ctx))


class GSet:
    """Finite subset of the carrier group: sorted, duplicate-free, immutable."""

    __slots__ = ("ctx", "elems", "_set")

    def __init__(self, ctx, elems):
        cleaned = set()
        for g in elems:
            g = tuple(g)
            ctx.check_element(g)
            cleaned.add(g)
        self.ctx = ctx
        self.elems = tuple(sorted(cleaned))
        self._set = frozenset(self.elems)

    def __len__(self):
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __contains__(self, g):
        return g in self._set

    def __eq__(self, other):
        return isinstance(other, GSet) and self.ctx == other.ctx and self._set == other._set

    def __hash__(self):
        return hash((self.ctx, self.elems))

    def __repr__(self):
        if len(self) <= 8:
            return "GSet(%s)" % (list(self.elems),)
        return "GSet(%d elements)" % len(self)

    def __or__(self, other):
        _same_ctx(self, other)
        return GSet(self.ctx, self._set | other._set)

    def __and__(self, other):
        _same_ctx(self, other)
        return GSet(self.ctx, self._set & other._set)

    def __sub__(self, other):
        _same_ctx(self, other)
        return GSet(self.ctx, self._set - other._set)

    def issubset(self, other):
        _same_ctx(self, other)
        return self._set <= other._set

    def isdisjoint(self, other):
        _same_ctx(self, other)
        return self._set.isdisjoint(other._set)

    def contains_identity(self):
        return self.ctx.identity in self._set

    def is_symmetric(self):
        inv = self.ctx.inv
        return all(inv(g) in self._set for g in self.elems)

    def translate(self, g):
        """Right translate Ag = {ag : a in A}."""
        mul = self.ctx.mul
        return GSet(self.ctx, (mul(a, g) for a in self.elems))

    def left_translate(self, g):
        """Left translate gA = {ga : a in A}."""
        mul = self.ctx.mul
        return GSet(self.ctx, (mul(g, a) for a in self.elems))

    def to_json(self):
        return [list(g) for g in self.elems]

    @classmethod
    def from_json(cls, ctx, data):
        return cls(ctx, (tuple(g) for g in data))


def gset(ctx, elems):
    return GSet(ctx, elems)


def singleton(ctx, g=None):
    return GSet(ctx, [ctx.identity if g is None else g])


def folner_box(ctx, n):
    """The box [-n, n]^d times the full torsion part."""
    if n < 0:
        raise PreconditionError("box index must be >= 0")
    ranges = [range(-n, n + 1)] * ctx.free_rank
    if ctx.has_torsion:
        ranges.append(range(ctx.torsion_order))
    if not ranges:
        return GSet(ctx, [()])
    return GSet(ctx, iproduct(*ranges))


def set_product(a, b):
    """AB = {ab : a in A, b in B}, duplicates collapsed."""
    _same_ctx(a, b)
    mul = a.ctx.mul
    return GSet(a.ctx, (mul(x, y) for x in a.elems for y in b.elems))


def inverse_set(a):
    """A^{-1} = {a^{-1} : a in A}."""
    inv = a.ctx.inv
    return GSet(a.ctx, (inv(x) for x in a.elems))


def core(f, k):
    """F_K = {f in F : Kf is contained in F}.  Requires e in K."""
    _same_ctx(f, k)
    if not k.contains_identity():
        raise PreconditionError("core requires the identity in K")
    mul = f.ctx.mul
    fset = f._set
    return GSet(f.ctx, (g for g in f.elems
                        if all(mul(x, g) in fset for x in k.elems)))


def invariance_defect(f, k):
    """|KF symmetric-difference F| / |F| as an exact Fraction."""
    _same_ctx(f, k)
    if len(f) == 0:
        raise PreconditionError("defect of an empty set is undefined")
    kf = set_product(k, f)
    return Fraction(len(kf._set ^ f._set), len(f))


def is_apart(a, b, m):
    """True when MA and MB are disjoint (M-apartness of domains)."""
    _same_ctx(a, b)
    _same_ctx(a, m)
    if not m.contains_identity():
        raise PreconditionError("apartness margin must contain the identity")
    return set_product(m, a).isdisjoint(set_product(m, b))


def pairwise_apart(sets, m):
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if not is_apart(sets[i], sets[j], m):
                return False
    return True


def is_separated(v, k):
    """True when the right translates Kv, v in V, are pairwise disjoint."""
    _same_ctx(v, k)
    mul = v.ctx.mul
    seen = set()
    for g in v.elems:
        for x in k.elems:
            y = mul(x, g)
            if y in seen:
                return False
            seen.add(y)
    return True


def check_aux_bound(k, kprime, f, v):
    """Density bound for K'-separated sets averaged over a window.

    With e in K, K a subset of K', K' symmetric, V a K'-separated set and
    delta the K'-invariance defect of F:

        |KV  intersect F| / |F|  <=  |K'|^2 * delta + |K| / |K'|

    Returns (lhs, rhs, holds) with exact Fractions.  Precondition failures
    raise PreconditionError with a distinct message per clause.
    """
    _same_ctx(k, kprime)
    _same_ctx(k, f)
    _same_ctx(k, v)
    if not k.contains_identity():
        raise PreconditionError("aux bound: K must contain the identity")
    if not k.issubset(kprime):
        raise PreconditionError("aux bound: K must be a subset of K'")
    if not kprime.is_symmetric():
        raise PreconditionError("aux bound: K' must be symmetric")
    if not is_separated(v, kprime):
        raise PreconditionError("aux bound: V must be K'-separated")
    if len(f) == 0:
        raise PreconditionError("aux bound: window F must be nonempty")
    kv = set_product(k, v)
    lhs = Fraction(len(kv._set & f._set), len(f))
    delta = invariance_defect(f, kprime)
    rhs = Fraction(len(kprime)) ** 2 * delta + Fraction(len(k), len(kprime))
    return lhs, rhs, lhs <= rhs
