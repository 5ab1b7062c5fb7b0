"""Exact block censuses: count, rank and unrank admissible blocks.

The census walks the cells of a domain in lexicographic order and keeps a
frontier state: the joint values of the already-assigned cells that can
still interact with future constraints.  Hidden layers and halo cells are
existential, so the state is a *set* of possible frontier assignments; a
visible block is counted when at least one member survives to the end.
This is a transfer-matrix computation in Z and a row-profile dynamic
program in Z^2, with the frontier derived from the compiled constraints
rather than hard-coded per dimension.
"""

from __future__ import annotations

import math

from .groups import GSet, PreconditionError, folner_box
from .patterns import Pattern
from .solver import halo_domain, solve, split_solution


class CensusOverflow(RuntimeError):
    """The frontier grew past the configured budget."""


class CensusTable:
    def __init__(self, oracle, domain: GSet, halo=0, max_frontier=26):
        self.oracle = oracle
        self.domain = domain
        self.halo = halo
        self.universe = halo_domain(domain, halo)
        self.cells = list(self.universe.elems)
        self.pos = {c: i for i, c in enumerate(self.cells)}
        self.counted = [c in domain for c in self.cells]
        table = oracle.symbols
        self._ids_by_vis = {v: tuple(i for i in range(len(table))
                                     if table.vis_of[i] == v)
                            for v in table.alphabet}
        self._all_ids = tuple(range(len(table)))
        nogoods, atleasts = oracle.constraints(self.universe)
        self._build_schedule(nogoods, atleasts, max_frontier)
        self._count_memo = {}
        self._step_memo = {}
        self.count = self._count(0, (frozenset([()]),))
        self.provenance = {"halo": halo, "oracle": oracle.describe(),
                           "cells": len(domain), "universe": len(self.cells)}

    # -- schedule -----------------------------------------------------------

    def _build_schedule(self, nogoods, atleasts, max_frontier):
        n = len(self.cells)
        cons = []
        for ng in nogoods:
            idx = tuple(self.pos[c] for c in ng.cells)
            cons.append(("ng", idx, ng.valuesets))
        for al in atleasts:
            idx = tuple(self.pos[c] for c in al.cells)
            cons.append(("al", idx, al.valueset))
        self.by_last = [[] for _ in range(n)]
        future = [set() for _ in range(n + 1)]
        for kind, idx, data in cons:
            last = max(idx)
            self.by_last[last].append((kind, idx, data))
            for j in idx:
                for i in range(j, last):
                    future[i].add(j)
        # frontier[i]: indices <= i that some constraint with last > i uses
        self.frontier = []
        for i in range(n):
            fr = tuple(sorted(j for j in future[i] if j <= i))
            if len(fr) > max_frontier:
                raise CensusOverflow(
                    "frontier needs %d cells at index %d (budget %d); "
                    "raise max_frontier or shrink the domain"
                    % (len(fr), i, max_frontier))
            self.frontier.append(fr)

    # -- dynamic program ----------------------------------------------------

    def _options(self, i, vis):
        if self.counted[i]:
            return self._ids_by_vis[vis]
        return self._all_ids

    def _step(self, i, states, vis):
        """Advance the existential state set through cell i with symbol vis."""
        key = (i, states, vis)
        hit = self._step_memo.get(key)
        if hit is not None:
            return hit
        prev = () if i == 0 else self.frontier[i - 1]
        cur = self.frontier[i]
        checks = self.by_last[i]
        out = set()
        for st in states:
            lookup = dict(zip(prev, st))
            for j in self._options(i, vis):
                lookup[i] = j
                ok = True
                for kind, idx, data in checks:
                    if kind == "ng":
                        if all(lookup[c] in s for c, s in zip(idx, data)):
                            ok = False
                            break
                    else:
                        if not any(lookup[c] in data for c in idx):
                            ok = False
                            break
                if ok:
                    out.add(tuple(lookup[c] for c in cur))
        result = frozenset(out)
        self._step_memo[key] = result
        return result

    def _count(self, i, state):
        (states,) = state
        if i == len(self.cells):
            return 1
        key = (i, states)
        hit = self._count_memo.get(key)
        if hit is not None:
            return hit
        total = 0
        if self.counted[i]:
            for vis in self.oracle.symbols.alphabet:
                nxt = self._step(i, states, vis)
                if nxt:
                    total += self._count(i + 1, (nxt,))
        else:
            nxt = self._step(i, states, None)
            if nxt:
                total = self._count(i + 1, (nxt,))
        self._count_memo[key] = total
        return total

    # -- public api ---------------------------------------------------------

    def rank(self, pattern: Pattern):
        """Index of the block among admissible blocks in lexicographic order."""
        if pattern.domain != self.domain:
            raise PreconditionError("rank: pattern domain differs from census domain")
        states = frozenset([()])
        r = 0
        for i, cell in enumerate(self.cells):
            if self.counted[i]:
                target = pattern[cell]
                if target not in self.oracle.symbols.alphabet:
                    raise PreconditionError("rank: symbol %r not in alphabet" % (target,))
                for vis in self.oracle.symbols.alphabet:
                    nxt = self._step(i, states, vis)
                    if vis == target:
                        if not nxt:
                            raise PreconditionError("rank: block is not in the census")
                        states = nxt
                        break
                    if nxt:
                        r += self._count(i + 1, (nxt,))
            else:
                states = self._step(i, states, None)
                if not states:
                    raise PreconditionError("rank: block is not in the census")
        return r

    def unrank(self, index):
        """The index-th admissible block (lexicographic order of symbol rows)."""
        if not (0 <= index < self.count):
            raise PreconditionError("unrank: index %d out of range [0, %d)"
                                    % (index, self.count))
        states = frozenset([()])
        remaining = index
        chosen = {}
        for i, cell in enumerate(self.cells):
            if self.counted[i]:
                for vis in self.oracle.symbols.alphabet:
                    nxt = self._step(i, states, vis)
                    if not nxt:
                        continue
                    c = self._count(i + 1, (nxt,))
                    if remaining < c:
                        chosen[cell] = vis
                        states = nxt
                        break
                    remaining -= c
                else:
                    raise AssertionError("unrank walk fell through")
            else:
                states = self._step(i, states, None)
        return Pattern(self.domain, chosen)

    def unrank_with_witness(self, index):
        """unrank plus a lexicographically least hidden/halo witness."""
        p = self.unrank(index)
        res = solve(self.oracle, self.universe, fixed_vis=p.data)
        if res is None:
            raise AssertionError("census block lost its witness")
        vis, hid = split_solution(self.oracle, res)
        return p, hid


def count_blocks(oracle, domain: GSet, halo=0, max_frontier=26):
    """Exact number of admissible blocks over the domain.

    halo > 0 additionally requires each block to extend admissibly to the
    halo-enlarged region; the halo used is recorded in the provenance.
    """
    t = CensusTable(oracle, domain, halo=halo, max_frontier=max_frontier)
    return t.count, t.provenance


def entropy_estimate(oracle, n, halo=0, max_frontier=26, mode="window"):
    """Entropy estimate from block counts over Folner boxes (natural log).

    mode="window": log(count at F_n) / |F_n|, the definition's finite stage.
    mode="difference": (log count(F_n) - log count(F_{n-1})) / (|F_n| - |F_{n-1}|),
    which cancels the boundary constant and converges much faster in Z.
    """
    box = folner_box(oracle.ctx, n)
    count, _ = count_blocks(oracle, box, halo=halo, max_frontier=max_frontier)
    if count == 0:
        raise PreconditionError("no admissible blocks over the box; entropy undefined")
    if mode == "window":
        return math.log(count) / len(box)
    if mode == "difference":
        if n < 1:
            raise PreconditionError("difference mode needs n >= 1")
        prev_box = folner_box(oracle.ctx, n - 1)
        prev, _ = count_blocks(oracle, prev_box, halo=halo, max_frontier=max_frontier)
        if prev == 0:
            raise PreconditionError("no admissible blocks over the previous box")
        return (math.log(count) - math.log(prev)) / (len(box) - len(prev_box))
    raise PreconditionError("unknown entropy mode %r" % (mode,))
