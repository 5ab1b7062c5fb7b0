"""Grid subshifts and self-locating marker blocks.

A grid subshift refines a base subshift by demanding a hidden maximal
W-separated set of centers, each carrying a fixed block.  Markers are
blocks that cannot occur in the grid subshift; enhanced and assembled
marker kits make every occurrence self-locating, which the codec uses to
synchronize.  Almost-admissible patterns relax grid admissibility on an
exceptional set and support reinforcement and gluing.
"""

from __future__ import annotations

from math import log

from .groups import (GSet, GroupError, PreconditionError, folner_box, gset,
                     inverse_set, is_apart, set_product, singleton)
from .kshift import extend_to_maximal, is_k_separated
from .oracles import (AtLeast, LocalOracle, Nogood, separation_constraints)
from .patterns import Pattern, occurrences
from .solver import (GlueError, exact_admissible, glue, halo_domain,
                     lex_least_completion)


class MarkerError(GroupError):
    """A marker construction step failed."""


def _remap_ids(src_table, dst_table, ids):
    """Translate a joint-id set between symbol tables via visible symbols."""
    symbols = {src_table.vis_of[i] for i in ids}
    return dst_table.ids_vis(symbols)


class GridSpec:
    """Base subshift, proper subsystem, carried block, and spacing set.

    The block rho over the symmetric set R is admissible for the base
    oracle but refuted by the sub-oracle, so demanding rho at a dense set
    of centers pushes points away from the subsystem.  The spacing set W
    is symmetric and contains margin·R, which keeps distinct block copies
    disjoint.
    """

    def __init__(self, base: LocalOracle, margin: GSet, sub: LocalOracle,
                 rho: Pattern, w: GSet, check=True):
        self.base = base
        self.margin = margin
        self.sub = sub
        self.rho = rho
        self.r = rho.domain
        self.w = w
        self.ctx = base.ctx
        if not self.r.is_symmetric() or not self.r.contains_identity():
            raise PreconditionError("block domain must be symmetric and "
                                    "contain the identity")
        if not w.is_symmetric():
            raise PreconditionError("spacing set must be symmetric")
        if not set_product(margin, self.r).issubset(w):
            raise PreconditionError("spacing set must contain margin·R")
        if check:
            if exact_admissible(base, rho) is not True:
                raise PreconditionError("block is not admissible for the "
                                        "base oracle")
            if exact_admissible(sub, rho) is not False:
                raise PreconditionError("block is not refuted by the "
                                        "sub-oracle")

    def mbar(self) -> GSet:
        """Gluing margin for the grid subshift: W·W·W·R·margin·margin."""
        out = set_product(self.w, self.w)
        out = set_product(out, self.w)
        out = set_product(out, self.r)
        out = set_product(out, self.margin)
        return set_product(out, self.margin)

    def oracle(self) -> "GridOracle":
        return GridOracle(self)


class GridOracle(LocalOracle):
    """Joint oracle for the grid subshift.

    Visible layer: the base alphabet under the base oracle's rules.
    Hidden layer: a {0,1} indicator of a maximal W-separated center set,
    where every center carries the block rho on its R-neighborhood.
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        ctx = spec.base.ctx
        loc = (spec.base.locality
               | set_product(inverse_set(spec.w), spec.w)
               | spec.r | singleton(ctx))
        super().__init__(ctx, spec.base.alphabet, loc, hidden_alphabet=(0, 1))

    def describe(self):
        return f"GridOracle(|R|={len(self.spec.r)}, |W|={len(self.spec.w)})"

    def constraints(self, cells: GSet):
        spec = self.spec
        table = self.symbols
        nogoods, atleasts = [], []
        base_table = spec.base.symbols
        bn, ba = spec.base.constraints(cells)
        for ng in bn:
            nogoods.append(Nogood(ng.cells, tuple(
                _remap_ids(base_table, table, s) for s in ng.valuesets)))
        for al in ba:
            atleasts.append(AtLeast(al.cells,
                                    _remap_ids(base_table, table, al.valueset)))
        one = table.ids_hid([1])
        sn, sa = separation_constraints(self.ctx, spec.w, cells, one)
        nogoods += sn
        atleasts += sa
        mul = self.ctx.mul
        cellset = cells._set
        for r, sym in spec.rho.items():
            bad = table.ids_vis_not([sym])
            for g in cells.elems:
                t = mul(r, g)
                if t == g:
                    ids = one & bad
                    if ids:
                        nogoods.append(Nogood((g,), (ids,)))
                elif t in cellset:
                    nogoods.append(Nogood((g, t), (one, bad)))
        return nogoods, atleasts


def build_grid(spec: GridSpec, centers: GSet) -> Pattern:
    """Pattern placing the block at every center.

    Copies must be pairwise disjoint; with W-separated centers and
    W ⊇ margin·R this always holds, and violations are reported.
    """
    ctx = spec.ctx
    data = {}
    for v in centers.elems:
        for r, sym in spec.rho.items():
            cell = ctx.mul(r, v)
            if cell in data and data[cell] != sym:
                raise PreconditionError("block copies overlap and disagree "
                                        f"at {cell}")
            data[cell] = sym
    return Pattern(gset(ctx, data), data) if data else Pattern(
        gset(ctx, []), {})


def _binary_entropy(p) -> float:
    p = float(p)
    if p <= 0 or p >= 1:
        return 0.0
    return -p * log(p) - (1 - p) * log(1 - p)


def grid_entropy_report(spec: GridSpec, n: int, mode="difference",
                        max_frontier=26):
    """Entropy lower bound for the grid subshift versus a measured value.

    The bound is the base entropy minus the density cost of the imposed
    blocks: h(base) − (|M²R|/|W|)·log|alphabet| − H(|M²R|/|W|), with H
    the binary entropy function.  Returns (bound, measured) where
    measured is the census-based estimate of the grid oracle's entropy
    over the size-n window.
    """
    from fractions import Fraction

    from .census import entropy_estimate
    m2r = set_product(set_product(spec.margin, spec.margin), spec.r)
    ratio = Fraction(len(m2r), len(spec.w))
    base_h = entropy_estimate(spec.base, n, mode=mode,
                              max_frontier=max_frontier)
    bound = base_h - float(ratio) * log(len(spec.base.alphabet)) \
        - _binary_entropy(ratio)
    measured = entropy_estimate(spec.oracle(), n, halo=1, mode=mode,
                                max_frontier=max_frontier)
    return bound, measured


def reference_window(spec: GridSpec, window: GSet, budget=2000000):
    """Lexicographically least grid-admissible pattern on the window.

    Fixing this reference point makes enhancement deterministic.
    Returns (pattern, hidden center indicator dict).
    """
    return lex_least_completion(spec.oracle(), window, budget=budget)


def enhance(spec: GridSpec, alpha: Pattern, host: Pattern, beta: Pattern,
            budget=2000000):
    """Embed a block into the reference window and collect marker echoes.

    The block alpha is written over the host (the reference window
    pattern), the surroundings re-completed lexicographically under the
    base rules (the glued result is generally only almost
    grid-admissible), and the result cropped to B·B·M·M·A.  Returns the
    enhanced pattern and the set of beta-occurrence centers inside it,
    verified to lie in B·M·M·A.
    """
    ctx = spec.ctx
    a_dom = alpha.domain
    b_dom = beta.domain
    m2 = set_product(spec.margin, spec.margin)
    enh_dom = set_product(set_product(set_product(b_dom, b_dom), m2), a_dom)
    work = enh_dom & host.domain
    if not enh_dom.issubset(host.domain):
        raise PreconditionError("host window does not contain the "
                                "enhancement region")
    zone = set_product(set_product(inverse_set(spec.margin), spec.margin),
                       a_dom)
    keep = host.restrict(gset(ctx, host.domain._set - zone._set - a_dom._set))
    pins = dict(keep.data)
    pins.update(alpha.data)
    completion, _ = lex_least_completion(spec.base, host.domain,
                                         fixed_vis=pins, budget=budget)
    enhanced = completion.restrict(work)
    centers = occurrences(enhanced, beta)
    j = gset(ctx, centers)
    allowed = set_product(set_product(b_dom, m2), a_dom)
    if not j.issubset(allowed):
        raise MarkerError("echo centers escape B·M·M·A")
    return enhanced, j


def stabilizer(j: GSet) -> GSet:
    """All group elements h with J·h = J; always a finite subgroup."""
    if len(j) == 0:
        raise PreconditionError("stabilizer of an empty set is undefined")
    ctx = j.ctx
    target = j._set
    hits = [h for h in set_product(inverse_set(j), j).elems
            if {ctx.mul(x, h) for x in target} == target]
    out = gset(ctx, hits)
    for a in hits:
        if ctx.inv(a) not in out._set:
            raise MarkerError("stabilizer not closed under inverse")
        for b in hits:
            if ctx.mul(a, b) not in out._set:
                raise MarkerError("stabilizer not closed under product")
    return out


def is_resistant(block: Pattern, h: GSet) -> bool:
    """Whether every nontrivial shift from h changes the block somewhere.

    For each h ≠ e there must be a cell g with both g and g·h in the
    block's domain and differing symbols.
    """
    ctx = block.domain.ctx
    e = ctx.identity
    dom = block.domain._set
    for shift in h.elems:
        if shift == e:
            continue
        if not any(ctx.mul(g, shift) in dom
                   and block.data[g] != block.data[ctx.mul(g, shift)]
                   for g in dom):
            return False
    return True


def build_resistant(window: Pattern, h: GSet) -> Pattern:
    """Smallest sub-block of the window resistant to the shifts from h.

    For each nontrivial h the lexicographically first witness pair
    (g, g·h) with differing symbols joins the domain, along with the
    identity.  Fails when the window holds no witness for some shift.
    """
    ctx = window.domain.ctx
    e = ctx.identity
    if e not in window.domain._set:
        raise PreconditionError("window must contain the identity")
    dom = window.domain._set
    cells = {e}
    for shift in h.elems:
        if shift == e:
            continue
        witness = None
        for g in window.domain.elems:
            gh = ctx.mul(g, shift)
            if gh in dom and window.data[g] != window.data[gh]:
                witness = (g, gh)
                break
        if witness is None:
            raise MarkerError(f"no witness for shift {shift} in the window")
        cells.update(witness)
    block = window.restrict(gset(ctx, cells))
    if not is_resistant(block, h):
        raise MarkerError("constructed block is not resistant")
    return block


def constant_intersection_subfamily(family, bound: int):
    """Largest subfamily whose pairwise intersections all coincide.

    Every member must have at most ``bound`` elements.  Returns the
    common intersection A and the (lexicographically least among maximum)
    index tuple S with |S| ≥ 2 such that A_m ∩ A_n = A for all m ≠ n in
    S.  Exhaustive over candidate intersections with exact max-clique
    search, so the result is the true maximum.
    """
    if len(family) < 2:
        raise PreconditionError("need at least two sets")
    sets = [s._set if isinstance(s, GSet) else frozenset(s) for s in family]
    for s in sets:
        if len(s) > bound:
            raise PreconditionError("a member exceeds the size bound")
    n = len(sets)
    candidates = sorted({sets[i] & sets[j]
                         for i in range(n) for j in range(i + 1, n)},
                        key=lambda s: (len(s), sorted(s)))
    best = None  # (size, indices tuple)
    for cand in candidates:
        verts = [i for i in range(n) if cand <= sets[i]]
        adj = {i: {j for j in verts if j != i and sets[i] & sets[j] == cand}
               for i in verts}
        clique = _max_clique(verts, adj)
        if len(clique) >= 2:
            key = (-len(clique), clique)
            if best is None or key < best[0]:
                best = (key, cand, clique)
    if best is None:
        raise MarkerError("no pair with a common intersection found")
    _, cand, clique = best
    ctx = family[0].ctx if isinstance(family[0], GSet) else None
    common = gset(ctx, cand) if ctx is not None else frozenset(cand)
    return common, tuple(clique)


def _max_clique(verts, adj):
    """Deterministic branch-and-bound maximum clique, lex-least among ties."""
    best = []

    def grow(current, allowed):
        nonlocal best
        if len(current) + len(allowed) < len(best):
            return
        if len(current) + len(allowed) == len(best) and best:
            # same size reachable at most; keep lex-least by still exploring
            pass
        if not allowed:
            cand = sorted(current)
            if (len(cand) > len(best)
                    or (len(cand) == len(best) and cand < best)):
                best = cand
            return
        rest = sorted(allowed)
        for i, v in enumerate(rest):
            grow(current + [v], [u for u in rest[i + 1:] if u in adj[v]])
        # also consider stopping here
        cand = sorted(current)
        if (len(cand) > len(best)
                or (len(cand) == len(best) and cand < best)):
            best = cand

    grow([], sorted(verts))
    return tuple(best)


def _blocked_offsets(margin: GSet, dom: GSet, other: GSet) -> frozenset:
    """Offsets g for which dom·g fails to be margin-apart from other."""
    zone = set_product(set_product(inverse_set(margin), margin), other)
    return set_product(inverse_set(dom), zone)._set


def _scan_offsets(ctx, predicate, limit=40):
    """First group element satisfying the predicate, scanning growing
    boxes in lexicographic order."""
    seen = set()
    for radius in range(limit + 1):
        box = folner_box(ctx, radius)
        for g in box.elems:
            if g in seen:
                continue
            seen.add(g)
            if predicate(g):
                return g
    raise MarkerError("offset scan exhausted its search limit")


class MarkerKit:
    """Assembled self-locating marker data.

    Case 1 (echo set not permutable): the assembled block is the enhanced
    marker itself.  Case 2: a resistant block padded with extra marker
    copies plus two offset marker copies, making every shift that
    permutes the echo set visibly change the block.  Appendage blocks
    distinguish the tagged variants.
    """

    def __init__(self, spec, beta, beta_enh, j_beta, h_beta, case, zeta,
                 z, j0, kappas=(), g0=None, zeta_tagged=(), z0=None,
                 gamma=None, gamma_enh=None, j_gamma=None, h0=None,
                 g1=None, g2=None, j1=None):
        self.spec = spec
        self.beta = beta
        self.beta_enh = beta_enh
        self.j_beta = j_beta
        self.h_beta = h_beta
        self.case = case
        self.zeta = zeta
        self.z = z
        self.j0 = j0
        self.kappas = list(kappas)
        self.g0 = g0
        self.zeta_tagged = list(zeta_tagged)
        self.z0 = z0
        self.gamma = gamma
        self.gamma_enh = gamma_enh
        self.j_gamma = j_gamma
        self.h0 = h0
        self.g1 = g1
        self.g2 = g2
        self.j1 = j1
        self.mbar = spec.mbar()
        self.verify()

    def verify(self):
        rw2 = set_product(set_product(self.spec.r, self.spec.w), self.spec.w)
        b = self.beta.domain
        if not rw2.issubset(b):
            raise MarkerError("marker domain must contain R·W·W")
        if not b.is_symmetric():
            raise MarkerError("marker domain must be symmetric")
        if self.case == 2:
            if len(self.j_gamma) <= len(self.j_beta):
                raise MarkerError("padded block needs more echoes than the "
                                  "marker")
            parts = [self.gamma_enh.domain,
                     self.beta_enh.domain.translate(self.g1),
                     self.beta_enh.domain.translate(self.g2)]
            for i in range(3):
                for j in range(i + 1, 3):
                    if not is_apart(parts[i], parts[j], self.mbar):
                        raise MarkerError("assembled parts are not "
                                          "margin-apart")
            jg, jb = self.j_gamma, self.j_beta
            bad1 = set_product(set_product(set_product(
                inverse_set(jb), jg), inverse_set(jg)), jg)
            if self.g1 in bad1._set:
                raise MarkerError("first offset violates its exclusion set")
            j1 = self.j1
            bad2 = set_product(set_product(set_product(
                inverse_set(jb), j1), inverse_set(j1)), j1)
            if self.g2 in bad2._set:
                raise MarkerError("second offset violates its exclusion set")
        if self.kappas:
            l_dom = self.kappas[0].domain
            lg0 = l_dom.translate(self.g0)
            if not is_apart(lg0, self.z, self.mbar):
                raise MarkerError("appendage region is not margin-apart "
                                  "from the block")
            for t, zt in enumerate(self.zeta_tagged):
                kt = self.kappas[t].translate(self.g0)
                for cell in kt.domain.elems:
                    if zt.data[cell] != kt.data[cell]:
                        raise MarkerError("tagged block disagrees with its "
                                          "appendage")

    def to_json(self):
        def pat(p):
            return None if p is None else p.to_json()

        def gs(s):
            return None if s is None else sorted(s._set)

        return {"case": self.case,
                "beta": pat(self.beta), "beta_enh": pat(self.beta_enh),
                "j_beta": gs(self.j_beta), "h_beta": gs(self.h_beta),
                "zeta": pat(self.zeta), "z": gs(self.z), "j0": gs(self.j0),
                "gamma": pat(self.gamma), "gamma_enh": pat(self.gamma_enh),
                "j_gamma": gs(self.j_gamma), "h0": gs(self.h0),
                "g1": self.g1, "g2": self.g2, "j1": gs(self.j1),
                "g0": self.g0,
                "kappas": [pat(k) for k in self.kappas],
                "zeta_tagged": [pat(z) for z in self.zeta_tagged],
                "z0": gs(self.z0)}


def assemble_marker(spec: GridSpec, beta: Pattern, window: GSet,
                    kappas=(), free_window: Pattern | None = None,
                    scan_limit=40, budget=4000000) -> MarkerKit:
    """Build a verified marker kit around a basic marker block.

    The marker is enhanced inside the deterministic reference window.  If
    the echo set has a trivial stabilizer (case 1), the enhanced marker is
    already unambiguous.  Otherwise (case 2) a resistant block from the
    supplied free window is padded with extra marker copies and combined
    with two offset marker copies whose offsets pass the exclusion-set
    equations, which destroys every echo-preserving symmetry.  Appendage
    blocks, when given, are attached at a margin-apart offset to tag
    variants.  The result always passes verify_unambiguous.
    """
    ctx = spec.ctx
    mbar = spec.mbar()
    host, _ = reference_window(spec, window, budget=budget)
    beta_enh, j_beta = enhance(spec, beta, host, beta, budget=budget)
    h_beta = stabilizer(j_beta)
    e = ctx.identity
    if len(h_beta) == 1:
        case = 1
        zeta = beta_enh
        z = beta_enh.domain
        j0 = j_beta
        kit_extra = {}
    else:
        case = 2
        if free_window is None:
            raise PreconditionError("case 2 requires a free element window")
        h0 = h_beta if ctx.is_abelian() else _conjugate_core(
            ctx, h_beta, scan_limit)
        gamma0 = build_resistant(free_window, h0)
        padded = _pad_with_copies(spec, gamma0, beta, len(j_beta) + 1,
                                  mbar, scan_limit)
        gamma_enh, j_gamma = enhance(spec, padded, host, beta, budget=budget)
        if len(j_gamma) <= len(j_beta):
            raise MarkerError("padding failed to raise the echo count")
        b_enh_dom = beta_enh.domain
        excl1 = set_product(set_product(set_product(
            inverse_set(j_beta), j_gamma), inverse_set(j_gamma)), j_gamma)._set
        blocked1 = _blocked_offsets(mbar, b_enh_dom, gamma_enh.domain)
        g1 = _scan_offsets(ctx, lambda g: g not in excl1 and g not in blocked1,
                           scan_limit)
        j1 = j_gamma | j_beta.translate(g1)
        excl2 = set_product(set_product(set_product(
            inverse_set(j_beta), j1), inverse_set(j1)), j1)._set
        blocked2 = (blocked1
                    | _blocked_offsets(mbar, b_enh_dom,
                                       b_enh_dom.translate(g1)))
        g2 = _scan_offsets(ctx, lambda g: g not in excl2 and g not in blocked2,
                           scan_limit)
        parts = [gamma_enh, beta_enh.translate(g1), beta_enh.translate(g2)]
        zeta = glue(spec.base, parts, spec.margin, budget=budget)
        z = zeta.domain
        j0 = j_gamma | j_beta.translate(g1) | j_beta.translate(g2)
        kit_extra = dict(gamma=gamma0, gamma_enh=gamma_enh, j_gamma=j_gamma,
                         h0=h0, g1=g1, g2=g2, j1=j1)
    g0 = None
    zeta_tagged = []
    z0 = z
    if kappas:
        l_dom = kappas[0].domain
        for k in kappas:
            if k.domain._set != l_dom._set:
                raise PreconditionError("appendages must share one domain")

        blocked0 = _blocked_offsets(mbar, l_dom, z)
        g0 = _scan_offsets(ctx, lambda g: g not in blocked0, scan_limit)
        z0 = z | l_dom.translate(g0)
        for k in kappas:
            tagged = glue(spec.base, [zeta, k.translate(g0)], spec.margin,
                          budget=budget)
            zeta_tagged.append(tagged)
    kit = MarkerKit(spec, beta, beta_enh, j_beta, h_beta, case, zeta, z,
                    j0, kappas=kappas, g0=g0, zeta_tagged=zeta_tagged,
                    z0=z0, **kit_extra)
    if not verify_unambiguous(kit):
        raise MarkerError("assembled kit failed the unambiguity check")
    return kit


def _conjugate_core(ctx, h: GSet, scan_limit: int) -> GSet:
    """Common stabilizer core over conjugates within a scan ball."""
    family = []
    for g in folner_box(ctx, min(scan_limit, 3)).elems:
        gi = ctx.inv(g)
        family.append(gset(ctx, (ctx.mul(ctx.mul(gi, x), g)
                                 for x in h.elems)))
    common, _ = constant_intersection_subfamily(family, bound=len(h))
    return common if len(common) else h


def _pad_with_copies(spec: GridSpec, gamma: Pattern, beta: Pattern,
                     copies: int, mbar: GSet, scan_limit: int) -> Pattern:
    """Union of the block with margin-apart marker copies."""
    ctx = spec.ctx
    parts = [gamma]
    blocked = set(_blocked_offsets(mbar, beta.domain, gamma.domain))
    for _ in range(copies):
        g = _scan_offsets(ctx, lambda g: g not in blocked, scan_limit)
        blocked |= _blocked_offsets(mbar, beta.domain,
                                    beta.domain.translate(g))
        parts.append(beta.translate(g))
    out = parts[0]
    for p in parts[1:]:
        out = out.union(p)
    return out


def verify_unambiguous(kit: MarkerKit) -> bool:
    """Exhaustive unambiguity test for an assembled kit.

    True when the combined echo set has a trivial stabilizer, or when the
    assembled block is resistant to every stabilizing shift.
    """
    stab = stabilizer(kit.j0)
    if len(stab) == 1:
        return True
    return is_resistant(kit.zeta, stab)


class AlmostPattern:
    """A pattern that is grid-admissible except on an exceptional set.

    The exceptional set E sits deep inside the domain (R·R·E ⊆ A), and a
    witness trace records the centers of an ambient grid near the
    pattern; outside E the pattern carries the block at every traced
    center whose block neighborhood misses E.
    """

    def __init__(self, pattern: Pattern, exceptional: GSet, trace: GSet,
                 spec: GridSpec, check=True):
        self.pattern = pattern
        self.exceptional = exceptional
        self.trace = trace
        self.spec = spec
        if check:
            self.validate()

    def validate(self):
        spec = self.spec
        ctx = spec.ctx
        r2e = set_product(set_product(spec.r, spec.r), self.exceptional)
        if not r2e.issubset(self.pattern.domain):
            raise PreconditionError("exceptional set too close to the "
                                    "domain boundary")
        dom = self.pattern.domain._set
        exc = self.exceptional._set
        for v in self.trace.elems:
            cells = {ctx.mul(r, v): s for r, s in spec.rho.items()}
            if not set(cells) <= dom or set(cells) & exc:
                continue
            for cell, sym in cells.items():
                if self.pattern.data[cell] != sym:
                    raise PreconditionError("pattern disagrees with the "
                                            "grid on the witness trace")


def reinforce(ap: AlmostPattern, spec: GridSpec):
    """Extend the pattern by the grid blocks of nearby traced centers.

    Adds the block at every traced center in R·M·M·A that stays clear of
    R·E, and returns the extended pattern together with the center
    indicator over R·M·M·A.  The restriction to the original domain is
    unchanged.
    """
    ctx = spec.ctx
    a = ap.pattern.domain
    m2 = set_product(spec.margin, spec.margin)
    rm2a = set_product(set_product(spec.r, m2), a)
    re = (set_product(spec.r, ap.exceptional) if len(ap.exceptional)
          else gset(ctx, []))
    eligible = rm2a._set - re._set
    chosen = [v for v in ap.trace.elems if v in eligible]
    data = dict(ap.pattern.data)
    for v in chosen:
        for r, sym in spec.rho.items():
            cell = ctx.mul(r, v)
            if cell in data:
                if cell not in a._set and data[cell] != sym:
                    raise MarkerError("grid blocks of traced centers clash")
                continue
            data[cell] = sym
    reinforced = Pattern(gset(ctx, data), data)
    chi_data = {c: (1 if c in ap.trace._set else 0) for c in rm2a.elems}
    chi = Pattern(rm2a, chi_data)
    return reinforced, chi


def glue_almost(parts, spec: GridSpec, window: GSet, halo=2,
                budget=4000000) -> AlmostPattern:
    """Join almost grid-admissible parts whose domains are far apart.

    The parts' witness traces are first extended to one maximal
    W-separated center set of the window (never adding a center where a
    part vetoes one), then the reinforced parts and the grid blocks of
    the new centers are glued under the base rules.  The output is almost
    grid-admissible with the union of the exceptional sets.
    """
    if not parts:
        raise PreconditionError("nothing to glue")
    if len(parts) == 1:
        return parts[0]
    ctx = spec.ctx
    mbar = spec.mbar()
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if not is_apart(parts[i].pattern.domain, parts[j].pattern.domain,
                            mbar):
                raise GlueError(f"parts {i} and {j} are not margin-apart")
    reinforced = []
    veto = set()
    start = set()
    m2 = set_product(spec.margin, spec.margin)
    for ap in parts:
        r, chi = reinforce(ap, spec)
        reinforced.append(r)
        rm2a = set_product(set_product(spec.r, m2), ap.pattern.domain)
        start.update(v for v in ap.trace.elems if v in rm2a._set)
        veto.update(rm2a._set - ap.trace._set)
    centers = extend_to_maximal(gset(ctx, start), spec.w, window,
                                forbidden=gset(ctx, veto))
    zone = set()
    for r in reinforced:
        zone |= set_product(set_product(inverse_set(spec.margin),
                                        spec.margin), r.domain)._set
    fresh = [v for v in centers.elems
             if v not in start
             and all(ctx.mul(x, v) not in zone for x in
                     set_product(spec.margin, spec.r).elems)]
    glue_parts = list(reinforced)
    if fresh:
        grid = build_grid(spec, gset(ctx, fresh))
        if len(grid.domain):
            glue_parts.append(grid)
    glued = glue(spec.base, glue_parts, spec.margin, halo=halo, budget=budget)
    exceptional = parts[0].exceptional
    for ap in parts[1:]:
        exceptional = exceptional | ap.exceptional
    rm2 = set_product(spec.r, m2)
    trace_zone = set_product(rm2, glued.domain)
    trace = gset(ctx, (v for v in centers.elems if v in trace_zone._set))
    return AlmostPattern(glued, exceptional, trace, spec)


def beta_audit(ap: AlmostPattern, beta: Pattern, b: GSet):
    """Marker occurrences not attributable to the exceptional set.

    Every occurrence center of the marker must lie in B·E; any other
    center is returned as a violation.  An empty list certifies the
    almost-admissible pattern.
    """
    ctx = ap.pattern.domain.ctx
    allowed = (set_product(b, ap.exceptional)._set
               if len(ap.exceptional) else frozenset())
    return [g for g in occurrences(ap.pattern, beta) if g not in allowed]
