"""Finite patterns: symbol assignments over a finite subset of the group."""

from __future__ import annotations

from .groups import GSet, GroupError, PreconditionError


class PatternConflict(ValueError):
    """Two patterns disagree on a shared cell."""


class Pattern:
    """A total assignment of symbols to the cells of a finite domain."""

    __slots__ = ("ctx", "domain", "data")

    def __init__(self, domain: GSet, data):
        data = dict(data)
        if set(data) != set(domain.elems):
            missing = set(domain.elems) - set(data)
            extra = set(data) - set(domain.elems)
            raise PreconditionError(
                "pattern data does not match domain (missing %d, extra %d)"
                % (len(missing), len(extra)))
        self.ctx = domain.ctx
        self.domain = domain
        self.data = data

    @classmethod
    def constant(cls, domain, symbol):
        return cls(domain, {g: symbol for g in domain})

    @classmethod
    def from_rows(cls, domain, symbols):
        """Build from symbols listed in the domain's sorted cell order."""
        cells = domain.elems
        if len(symbols) != len(cells):
            raise PreconditionError("symbol list length does not match domain")
        return cls(domain, dict(zip(cells, symbols)))

    def __getitem__(self, g):
        return self.data[g]

    def get(self, g, default=None):
        return self.data.get(g, default)

    def __eq__(self, other):
        return (isinstance(other, Pattern) and self.ctx == other.ctx
                and self.data == other.data)

    def __hash__(self):
        return hash((self.domain, tuple(self.data[g] for g in self.domain.elems)))

    def __repr__(self):
        return "Pattern(%d cells)" % len(self.domain)

    def items(self):
        """(cell, symbol) pairs in sorted cell order."""
        return [(g, self.data[g]) for g in self.domain.elems]

    def symbols_in_order(self):
        return [self.data[g] for g in self.domain.elems]

    def translate(self, g):
        """Right translate: result has domain Ag and value old(a) at cell ag."""
        mul = self.ctx.mul
        return Pattern(self.domain.translate(g),
                       {mul(a, g): s for a, s in self.data.items()})

    def restrict(self, sub: GSet):
        if not sub.issubset(self.domain):
            raise PreconditionError("restriction target is not inside the domain")
        return Pattern(sub, {g: self.data[g] for g in sub})

    def union(self, other: "Pattern"):
        if self.ctx != other.ctx:
            raise GroupError("mixed group contexts in pattern union")
        merged = dict(self.data)
        for g, s in other.data.items():
            if g in merged and merged[g] != s:
                raise PatternConflict("patterns disagree at %r" % (g,))
            merged[g] = s
        return Pattern(self.domain | other.domain, merged)

    def matches_at(self, host: "Pattern", g):
        """Does this pattern occur in host at position g (domain * g)?"""
        mul = self.ctx.mul
        hd = host.data
        for a, s in self.data.items():
            cell = mul(a, g)
            if cell not in hd or hd[cell] != s:
                return False
        return True

    def to_json(self):
        return {"domain": self.domain.to_json(),
                "symbols": self.symbols_in_order()}

    @classmethod
    def from_json(cls, ctx, data):
        dom = GSet.from_json(ctx, data["domain"])
        return cls.from_rows(dom, data["symbols"])


def union_all(parts):
    if not parts:
        raise PreconditionError("union of no patterns")
    out = parts[0]
    for p in parts[1:]:
        out = out.union(p)
    return out


def occurrences(host: Pattern, probe: Pattern):
    """All g with probe.domain*g inside host.domain and probe matching there.

    Returned in lexicographic order of g.
    """
    if host.ctx != probe.ctx:
        raise GroupError("mixed group contexts in occurrence scan")
    ctx = host.ctx
    mul, inv = ctx.mul, ctx.inv
    # candidate centers: g = a^{-1} h for the lexicographically least probe
    # cell a and every host cell h, filtered by a full match
    if len(probe.domain) == 0:
        raise PreconditionError("occurrence scan needs a nonempty probe")
    a0 = probe.domain.elems[0]
    a0inv = inv(a0)
    out = []
    for h in host.domain.elems:
        g = mul(a0inv, h)
        if probe.matches_at(host, g):
            out.append(g)
    return sorted(set(out))
