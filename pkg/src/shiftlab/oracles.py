"""Local admissibility oracles.

An oracle describes a subshift by local rules.  For bounded search and
exact counting every oracle compiles its rules, over a concrete finite
cell set, into two primitive constraint kinds over "joint" symbols
(visible symbol paired with an optional hidden-layer symbol):

  Nogood   -- a tuple of cells with one value set per cell; an assignment
              placing every cell inside its set is forbidden.
  AtLeast  -- a tuple of cells with one value set; at least one cell must
              take a value from the set.

Hidden layers express existentially quantified structure (for example a
witness set of marked centers): a visible pattern is admissible when some
hidden completion satisfies every constraint.
"""

from __future__ import annotations

from .groups import GSet, PreconditionError, inverse_set, set_product, singleton


class Nogood:
    __slots__ = ("cells", "valuesets")

    def __init__(self, cells, valuesets):
        self.cells = tuple(cells)
        self.valuesets = tuple(frozenset(s) for s in valuesets)


class AtLeast:
    __slots__ = ("cells", "valueset")

    def __init__(self, cells, valueset):
        self.cells = tuple(cells)
        self.valueset = frozenset(valueset)


class SymbolTable:
    """Joint symbols: pairs (visible, hidden) numbered in lexicographic order."""

    def __init__(self, alphabet, hidden_alphabet=None):
        self.alphabet = tuple(alphabet)
        self.hidden_alphabet = tuple(hidden_alphabet) if hidden_alphabet else None
        if len(set(self.alphabet)) != len(self.alphabet):
            raise PreconditionError("alphabet has duplicates")
        hid = self.hidden_alphabet or (None,)
        self.pairs = tuple((v, h) for v in self.alphabet for h in hid)
        self.vis_of = tuple(p[0] for p in self.pairs)
        self.hid_of = tuple(p[1] for p in self.pairs)
        self._by_pair = {p: i for i, p in enumerate(self.pairs)}
        self.all_ids = frozenset(range(len(self.pairs)))

    def __len__(self):
        return len(self.pairs)

    def id_of(self, vis, hid=None):
        return self._by_pair[(vis, hid)]

    def ids_vis(self, values):
        values = set(values)
        return frozenset(i for i, v in enumerate(self.vis_of) if v in values)

    def ids_vis_not(self, values):
        values = set(values)
        return frozenset(i for i, v in enumerate(self.vis_of) if v not in values)

    def ids_hid(self, values):
        values = set(values)
        return frozenset(i for i, h in enumerate(self.hid_of) if h in values)


def translate_centers(cells: GSet, probe: GSet):
    """All g with probe*g inside cells, in lexicographic order."""
    ctx = cells.ctx
    inv = ctx.inv
    out = None
    for d in probe.elems:
        shifted = cells.left_translate(inv(d))._set
        out = shifted if out is None else (out & shifted)
        if not out:
            return []
    return sorted(out)


class LocalOracle:
    """Base class.  Subclasses set alphabet/hidden/locality and compile rules."""

    def __init__(self, ctx, alphabet, locality: GSet, hidden_alphabet=None):
        if not locality.contains_identity():
            raise PreconditionError("locality set must contain the identity")
        self.ctx = ctx
        self.locality = locality
        self.symbols = SymbolTable(alphabet, hidden_alphabet)

    @property
    def alphabet(self):
        return self.symbols.alphabet

    @property
    def hidden_alphabet(self):
        return self.symbols.hidden_alphabet

    def constraints(self, cells: GSet):
        """Compile rules over the given cell set: (nogoods, atleasts)."""
        raise NotImplementedError

    def describe(self):
        return type(self).__name__


class FullShiftOracle(LocalOracle):
    """No rules: every pattern is admissible."""

    def __init__(self, ctx, alphabet):
        super().__init__(ctx, alphabet, singleton(ctx))

    def constraints(self, cells):
        return [], []


class ForbiddenPatternOracle(LocalOracle):
    """Subshift of finite type given by a finite list of forbidden patterns."""

    def __init__(self, ctx, alphabet, forbidden):
        self.forbidden = list(forbidden)
        if not self.forbidden:
            raise PreconditionError("use FullShiftOracle for an empty rule set")
        dom = singleton(ctx)
        for p in self.forbidden:
            for g, s in p.items():
                if s not in alphabet:
                    raise PreconditionError("forbidden pattern uses unknown symbol %r" % (s,))
            dom = dom | p.domain
        super().__init__(ctx, alphabet, dom)

    def constraints(self, cells):
        nogoods = []
        mul = self.ctx.mul
        for p in self.forbidden:
            items = p.items()
            sets = [self.symbols.ids_vis([s]) for _, s in items]
            for g in translate_centers(cells, p.domain):
                nogoods.append(Nogood([mul(a, g) for a, _ in items], sets))
        return nogoods, []


def separation_constraints(ctx, k: GSet, cells: GSet, one_ids):
    """Constraints making the one_ids-marked cells a maximal K-separated set.

    Pair rule: two marked cells at relative position in K^{-1}K \\ {e} clash.
    Frame rule: every fully visible translate of K^{-1}K holds a marked cell
    (maximality asserted only where the frame fits in the cell set).
    """
    kk = set_product(inverse_set(k), k)
    mul = ctx.mul
    e = ctx.identity
    nogoods = []
    cellset = cells._set
    offsets = [d for d in kk.elems if d != e]
    for g in cells.elems:
        for d in offsets:
            h = mul(d, g)
            if h in cellset and g < h:
                nogoods.append(Nogood((g, h), (one_ids, one_ids)))
    atleasts = [AtLeast([mul(d, g) for d in kk.elems], one_ids)
                for g in translate_centers(cells, kk)]
    return nogoods, atleasts


def evaluate(nogoods, atleasts, value_of):
    """Check a total assignment (cell -> joint id) against compiled rules."""
    for ng in nogoods:
        if all(value_of[c] in s for c, s in zip(ng.cells, ng.valuesets)):
            return False
    for al in atleasts:
        if not any(value_of[c] in al.valueset for c in al.cells):
            return False
    return True
