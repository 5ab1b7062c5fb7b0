"""Bounded exact search over compiled local constraints.

The search assigns joint symbols to cells in lexicographic cell order and
tries joint values in table order, so the first solution found is the
lexicographically least completion.  A node budget turns exhaustion into a
three-valued answer: True / False / UNKNOWN.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .groups import (GSet, PreconditionError, folner_box, inverse_set,
                     is_apart, set_product)
from .patterns import Pattern


class _Unknown:
    def __repr__(self):
        return "UNKNOWN"

    def __bool__(self):
        raise TypeError("UNKNOWN is not a truth value; compare with is")


UNKNOWN = _Unknown()


class GlueError(ValueError):
    """No admissible completion exists; carries the deepest refuted cell."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


def halo_domain(domain: GSet, halo: int):
    """The domain enlarged by the Folner box of the given index (left product)."""
    if halo < 0:
        raise PreconditionError("halo must be >= 0")
    if halo == 0:
        return domain
    return set_product(folner_box(domain.ctx, halo), domain)


class _NState:
    __slots__ = ("remaining", "dead", "idx")


class _AState:
    __slots__ = ("remaining", "satisfied", "idx")


def _compile(oracle, cells: GSet):
    """Index cells and attach watcher lists for the compiled constraints."""
    order = list(cells.elems)
    pos = {c: i for i, c in enumerate(order)}
    nogoods, atleasts = oracle.constraints(cells)
    watchers = [[] for _ in order]
    for ng in nogoods:
        st = _NState()
        st.remaining = len(ng.cells)
        st.dead = False
        st.idx = tuple(pos[c] for c in ng.cells)
        for c, s in zip(ng.cells, ng.valuesets):
            watchers[pos[c]].append((st, s))
    for al in atleasts:
        st = _AState()
        st.remaining = len(al.cells)
        st.satisfied = False
        st.idx = tuple(pos[c] for c in al.cells)
        for c in al.cells:
            watchers[pos[c]].append((st, al.valueset))
    return order, pos, watchers


def _apply(watchers_i, value, undo):
    """Update constraint states for one assignment.

    Returns None on success, or the failing constraint's cell indices
    (the conflict reason used for backjumping).
    """
    for st, s in watchers_i:
        if isinstance(st, _NState):
            if st.dead:
                continue
            if value in s:
                st.remaining -= 1
                undo.append((st, 0))
                if st.remaining == 0:
                    return st.idx
            else:
                st.dead = True
                undo.append((st, 1))
        else:
            if st.satisfied:
                continue
            if value in s:
                st.satisfied = True
                undo.append((st, 2))
            else:
                st.remaining -= 1
                undo.append((st, 3))
                if st.remaining == 0:
                    return st.idx
    return None


def _undo(undo):
    for st, tag in undo:
        if tag == 0:
            st.remaining += 1
        elif tag == 1:
            st.dead = False
        elif tag == 2:
            st.satisfied = False
        else:
            st.remaining += 1


def solve(oracle, cells: GSet, fixed_vis=None, fixed_hid=None,
          budget=None, value_order=None):
    """Search for an assignment of joint symbols to cells.

    fixed_vis / fixed_hid pin the visible / hidden component of a cell.
    Returns a dict cell -> joint id, or None if refuted, or UNKNOWN when
    the node budget ran out.  value_order(cell, ids) may reorder candidate
    values (used for randomized sampling); by default table order is kept,
    which yields the lexicographically least solution.
    """
    fixed_vis = fixed_vis or {}
    fixed_hid = fixed_hid or {}
    table = oracle.symbols
    order, pos, watchers = _compile(oracle, cells)
    n = len(order)
    allowed = []
    for c in order:
        ids = list(range(len(table)))
        if c in fixed_vis:
            v = fixed_vis[c]
            ids = [i for i in ids if table.vis_of[i] == v]
            if not ids:
                raise PreconditionError("fixed symbol %r not in alphabet" % (v,))
        if c in fixed_hid:
            h = fixed_hid[c]
            ids = [i for i in ids if table.hid_of[i] == h]
        if value_order is not None:
            ids = list(value_order(c, ids))
        allowed.append(ids)
    if n == 0:
        return {}
    assignment = [None] * n
    # conflict-directed backjumping: each frame accumulates the cell indices
    # implicated in its failures, and an exhausted frame jumps straight to
    # the deepest implicated cell instead of chronologically backtracking
    stack = [[iter(allowed[0]), [], set()]]
    nodes = 0
    while stack:
        frame = stack[-1]
        it, undo, conflict = frame
        _undo(undo)
        undo.clear()
        i = len(stack) - 1
        advanced = False
        for value in it:
            nodes += 1
            if budget is not None and nodes > budget:
                return UNKNOWN
            reason = _apply(watchers[i], value, undo)
            if reason is None:
                assignment[i] = value
                if i + 1 == n:
                    return {order[j]: assignment[j] for j in range(n)}
                stack.append([iter(allowed[i + 1]), [], set()])
                advanced = True
                break
            conflict.update(j for j in reason if j < i)
            _undo(undo)
            undo.clear()
        if not advanced:
            stack.pop()
            if not conflict:
                # no prior cell is implicated: the pins alone are contradictory
                return None
            target = max(conflict)
            while len(stack) - 1 > target:
                dead = stack.pop()
                _undo(dead[1])
            if not stack:
                return None
            conflict.discard(target)
            stack[-1][2].update(conflict)
    return None


def split_solution(oracle, solution):
    """Split a joint solution into (visible dict, hidden dict)."""
    table = oracle.symbols
    vis = {c: table.vis_of[j] for c, j in solution.items()}
    hid = None
    if table.hidden_alphabet:
        hid = {c: table.hid_of[j] for c, j in solution.items()}
    return vis, hid


def locally_admissible(oracle, pattern: Pattern):
    """Every fully visible local rule holds (hidden layers: some witness exists)."""
    from .oracles import evaluate
    table = oracle.symbols
    for s in pattern.data.values():
        if s not in table.alphabet:
            raise PreconditionError("pattern symbol %r not in alphabet" % (s,))
    if table.hidden_alphabet is None:
        nogoods, atleasts = oracle.constraints(pattern.domain)
        value_of = {c: table.id_of(s) for c, s in pattern.data.items()}
        return evaluate(nogoods, atleasts, value_of)
    res = solve(oracle, pattern.domain, fixed_vis=pattern.data)
    return res is not None


def exact_admissible(oracle, pattern: Pattern, halo=2, budget=200000):
    """Three-valued extension test on the halo-enlarged domain.

    True: a locally admissible completion of the enlarged domain exists.
    False: exhaustive refutation.  UNKNOWN: budget ran out.
    """
    region = halo_domain(pattern.domain, halo)
    res = solve(oracle, region, fixed_vis=pattern.data, budget=budget)
    if res is UNKNOWN:
        return UNKNOWN
    return res is not None


def lex_least_completion(oracle, cells: GSet, fixed_vis=None, fixed_hid=None,
                         budget=None):
    """Lexicographically least admissible pattern over cells extending the pins.

    Returns (Pattern, hidden dict or None); raises GlueError when refuted.
    """
    res = solve(oracle, cells, fixed_vis=fixed_vis, fixed_hid=fixed_hid,
                budget=budget)
    if res is UNKNOWN:
        raise GlueError("completion search budget exhausted")
    if res is None:
        raise GlueError("no admissible completion", cell=_deepest_cell(cells, fixed_vis))
    vis, hid = split_solution(oracle, res)
    return Pattern(cells, vis), hid


def _deepest_cell(cells, fixed_vis):
    free = [c for c in cells.elems if not (fixed_vis and c in fixed_vis)]
    return free[0] if free else (cells.elems[0] if len(cells) else None)


def glue(oracle, parts, margin: GSet, halo=2, budget=2000000):
    """Join patterns with pairwise margin-apart domains.

    Verifies apartness, searches for a locally admissible completion of
    the union over a halo-enlarged region, and returns the union pattern
    (the completion restricted to the union of the part domains).
    """
    if len(parts) < 2:
        raise PreconditionError("glue needs at least two parts")
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if not is_apart(parts[i].domain, parts[j].domain, margin):
                raise PreconditionError(
                    "glue: part domains %d and %d are not margin-apart" % (i, j))
    union = parts[0]
    for p in parts[1:]:
        union = union.union(p)
    region = halo_domain(union.domain, halo)
    completion, _ = lex_least_completion(oracle, region, fixed_vis=union.data,
                                         budget=budget)
    return completion.restrict(union.domain)


def random_admissible(oracle, domain: GSet, rng, halo=2, budget=200000,
                      lex_bias=0.0):
    """A pseudo-random admissible pattern over the domain (seeded rng).

    Found by running the exact search with shuffled value order on the
    halo-enlarged region, then restricting; returns None on failure.
    lex_bias is the per-cell probability of keeping table order, which
    skews samples toward lexicographically small (symbol-sparse) patterns.
    """
    region = halo_domain(domain, halo)

    def shuffled(cell, ids):
        ids = list(ids)
        if rng.random() >= lex_bias:
            rng.shuffle(ids)
        return ids

    res = solve(oracle, region, budget=budget, value_order=shuffled)
    if res is None or res is UNKNOWN:
        return None
    vis, _ = split_solution(oracle, res)
    return Pattern(domain, {c: vis[c] for c in domain})


@dataclass
class SpecCheckResult:
    passed: bool
    trials: int
    unknowns: int = 0
    counterexample: tuple = None
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def _sample_domain(ctx, pool: GSet, rng, k, locality):
    """One random subdomain: a blob, a uniform draw, or a punctured
    locality translate (the strongest boundary-forcing shape for a local
    oracle, since it can pin all but one cell of a rule window)."""
    cells = list(pool.elems)
    kind = rng.randrange(3)
    if kind == 0:
        return _grow_blob(ctx, pool, rng, k)
    if kind == 1:
        return GSet(ctx, rng.sample(cells, min(k, len(cells))))
    for _ in range(20):
        g = rng.choice(cells)
        translate = [ctx.mul(d, g) for d in locality.elems]
        inside = [c for c in translate if c in pool]
        if len(inside) >= 2:
            drop = rng.randint(1, max(1, len(inside) - 1))
            keep = [c for c in inside if c not in set(rng.sample(inside, drop))]
            if keep:
                return GSet(ctx, keep)
    return _grow_blob(ctx, pool, rng, k)


def _sample_apart_domains(ctx, window: GSet, margin, rng, max_cells, locality):
    """Two margin-apart subdomains of the window, biased toward tight pairs."""
    cells = list(window.elems)
    for _ in range(60):
        k1 = rng.randint(1, max_cells)
        k2 = rng.randint(1, max_cells)
        a = _sample_domain(ctx, window, rng, k1, locality)
        blocked = set_product(set_product(inverse_margin(margin), margin), a)
        free = [c for c in cells if c not in blocked]
        if not free:
            continue
        b = _sample_domain(ctx, GSet(ctx, free), rng, k2, locality)
        if is_apart(a, b, margin):
            return a, b
    return None


def inverse_margin(margin):
    from .groups import inverse_set
    return inverse_set(margin)


def _grow_blob(ctx, pool: GSet, rng, k):
    cells = list(pool.elems)
    seed = rng.choice(cells)
    chosen = {seed}
    box1 = folner_box(ctx, 1)
    while len(chosen) < k:
        frontier = []
        for g in chosen:
            for d in box1.elems:
                h = ctx.mul(d, g)
                if h in pool and h not in chosen:
                    frontier.append(h)
        if not frontier:
            break
        chosen.add(rng.choice(sorted(frontier)))
    return GSet(ctx, chosen)


def _vis_avoiding(table, valueset):
    """Lex-least visible symbol none of whose joint ids meet valueset."""
    for v in table.alphabet:
        if not (table.ids_vis([v]) & valueset):
            return v
    return None


def _vis_inside(table, valueset):
    """Lex-least visible symbol all of whose joint ids lie in valueset."""
    for v in table.alphabet:
        ids = table.ids_vis([v])
        if ids and ids <= valueset:
            return v
    return None


def _pin_options(table, window, z, valueset, targets, binary_by_cell):
    """Ways to keep cell ``z`` out of ``valueset`` by placing one pin.

    Either pin ``z`` itself to a symbol outside the set, or pin the partner
    cell of a binary nogood covering the set, which bars ``z`` indirectly.
    Each option is a (location, visible value) pair.
    """
    opts = []
    if z not in targets:
        v = _vis_avoiding(table, valueset)
        if v is not None:
            opts.append((z, v))
    for ng in binary_by_cell.get(z, ()):
        slot = 0 if ng.cells[0] == z else 1
        if not (valueset <= ng.valuesets[slot]):
            continue
        partner = ng.cells[1 - slot]
        if partner == z or partner in targets or partner not in window._set:
            continue
        v = _vis_inside(table, ng.valuesets[1 - slot])
        if v is not None and (partner, v) not in opts:
            opts.append((partner, v))
    return opts


def _free_dist2(ctx, a, b):
    """Squared Euclidean distance on the free coordinates (search heuristic)."""
    r = ctx.free_rank
    return sum((a[i] - b[i]) ** 2 for i in range(r))


def _joint_gadgets(table, window, margin, c1, t1, c2, t2, binary_by_cell,
                   mm_elems, node_cap=4000, solution_cap=8):
    """Enumerate pin placements forcing ``t1`` and ``t2`` simultaneously.

    Every cell of ``c1`` other than ``t1`` must be barred from the
    constraint's value set (likewise for ``c2``), while the two pin sets
    stay margin-apart.  Backtracks deterministically over the per-cell
    options and yields (pins1, pins2) dictionaries; admissibility is not
    checked here, so callers must verify each candidate.
    """
    ctx = window.ctx
    targets = {t1, t2}

    def too_close(a, b):
        return any(ctx.mul(d, a) == b for d in mm_elems)

    cells1 = [z for z in c1.cells if z != t1]
    cells2 = [z for z in c2.cells if z != t2]
    if set(cells1) & set(cells2):
        return
    variables = [(z, c1.valueset, 0) for z in cells1]
    variables += [(z, c2.valueset, 1) for z in cells2]
    # assign the contested cells (those nearest the other side's target)
    # first, so dead ends surface early
    other_target = (t2, t1)
    variables.sort(key=lambda v: (_free_dist2(ctx, v[0], other_target[v[2]]),
                                  v[2], v[0]))
    option_lists = []
    for z, valueset, side in variables:
        opts = _pin_options(table, window, z, valueset, targets, binary_by_cell)
        if not opts:
            return
        option_lists.append(opts)
    vis_ids = {v: table.ids_vis([v]) for v in table.alphabet}

    def hits_nogood(mine, loc, val):
        # would this pin complete a binary nogood among the side's own pins?
        for ng in binary_by_cell.get(loc, ()):
            slot = 0 if ng.cells[0] == loc else 1
            qv = mine.get(ng.cells[1 - slot])
            if qv is None:
                continue
            if (vis_ids[val] <= ng.valuesets[slot]
                    and vis_ids[qv] <= ng.valuesets[1 - slot]):
                return True
        return False

    pins = ({}, {})
    nodes = 0
    found = 0

    def place(i):
        nonlocal nodes, found
        if found >= solution_cap or nodes >= node_cap:
            return
        if i == len(variables):
            found += 1
            yield dict(pins[0]), dict(pins[1])
            return
        _, _, side = variables[i]
        mine, other = pins[side], pins[1 - side]
        for loc, val in option_lists[i]:
            nodes += 1
            if nodes >= node_cap:
                return
            if loc in other or mine.get(loc, val) != val:
                continue
            fresh = loc not in mine
            if fresh and (any(too_close(loc, q) for q in other)
                          or hits_nogood(mine, loc, val)):
                continue
            mine[loc] = val
            yield from place(i + 1)
            if fresh:
                del mine[loc]
            if found >= solution_cap:
                return

    yield from place(0)


def directed_counterexample(oracle, margin: GSet, window: GSet, halo=3,
                            budget=400000, max_tests=60, max_candidates=2000):
    """Deterministic counterexample search driven by the compiled rules.

    Looks for a binary nogood (t1, t2) whose endpoints can each be forced
    into the nogood by pinning the remainder of an at-least rule around
    them, with the two pin sets margin-apart.  Every candidate is
    verified: both parts must be admissible and the union refuted, so a
    returned triple is always a genuine specification failure.
    """
    ctx = window.ctx
    table = oracle.symbols
    nogoods, atleasts = oracle.constraints(window)
    binaries = [n for n in nogoods if len(n.cells) == 2]
    binary_by_cell = {}
    for n in binaries:
        for c in n.cells:
            binary_by_cell.setdefault(c, []).append(n)
    al_by_cell = {}
    for a in atleasts:
        for c in a.cells:
            al_by_cell.setdefault(c, []).append(a)

    def spread(n):
        return max(max(abs(x) for x in c[:ctx.free_rank]) for c in n.cells)

    mm_elems = tuple(set_product(inverse_set(margin), margin))
    tests = 0
    candidates = 0
    for n0 in sorted(binaries, key=lambda n: (spread(n), n.cells)):
        t1, t2 = n0.cells
        for c1 in al_by_cell.get(t1, ()):
            if not (c1.valueset <= n0.valuesets[0]):
                continue
            for c2 in al_by_cell.get(t2, ()):
                if not (c2.valueset <= n0.valuesets[1]):
                    continue
                for pins1, pins2 in _joint_gadgets(table, window, margin,
                                                   c1, t1, c2, t2,
                                                   binary_by_cell, mm_elems):
                    if not pins1 or not pins2:
                        continue
                    candidates += 1
                    if candidates > max_candidates:
                        return None
                    dom1 = GSet(ctx, pins1)
                    dom2 = GSet(ctx, pins2)
                    if not is_apart(dom1, dom2, margin):
                        continue
                    p1 = Pattern(dom1, pins1)
                    p2 = Pattern(dom2, pins2)
                    if exact_admissible(oracle, p1, halo=halo,
                                        budget=budget) is not True:
                        continue
                    if exact_admissible(oracle, p2, halo=halo,
                                        budget=budget) is not True:
                        continue
                    tests += 1
                    union = p1.union(p2)
                    if exact_admissible(oracle, union, halo=halo,
                                        budget=budget) is False:
                        return p1, p2, union
                    if tests >= max_tests:
                        return None
    return None


def check_specification(oracle, margin: GSet, window: GSet, trials=1000,
                        seed=0, max_cells=4, halo=3, budget=400000):
    """Randomized falsification of the gluing property with the given margin.

    Each trial samples two margin-apart subdomains of the window, draws an
    admissible pattern on each, and tests the union by bounded exact search.
    A refuted union is a counterexample; budget exhaustion counts as unknown.
    """
    import random as _random

    rng = _random.Random(seed)
    ctx = window.ctx
    unknowns = 0
    done = 0
    # deterministic phase first: forcing gadgets built from the compiled
    # rules find the structured failures that random sampling almost never
    # hits; every returned triple has been verified by exact search
    directed = directed_counterexample(oracle, margin, window, halo=halo,
                                       budget=budget)
    if directed is not None:
        return SpecCheckResult(False, 0, 0, directed,
                               notes=["directed gadget search"])
    for _ in range(trials):
        pair = _sample_apart_domains(ctx, window, margin, rng, max_cells,
                                     oracle.locality)
        if pair is None:
            continue
        a_dom, b_dom = pair
        # mix fully random draws with symbol-sparse ones: sparse patterns
        # exert the strongest forcing on their surroundings, so they are the
        # likeliest witnesses when the margin is too small
        bias = rng.choice((0.0, 0.85, 1.0))
        pa = random_admissible(oracle, a_dom, rng, halo=halo, budget=budget,
                               lex_bias=bias)
        pb = random_admissible(oracle, b_dom, rng, halo=halo, budget=budget,
                               lex_bias=bias)
        if pa is None or pb is None:
            continue
        done += 1
        union = pa.union(pb)
        verdict = exact_admissible(oracle, union, halo=halo, budget=budget)
        if verdict is UNKNOWN:
            unknowns += 1
        elif verdict is False:
            return SpecCheckResult(False, done, unknowns, (pa, pb, union))
    return SpecCheckResult(True, done, unknowns)
