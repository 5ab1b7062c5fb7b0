"""Entropy-gap block codec between subshifts.

Encodes windows of a low-entropy source subshift into a higher-entropy
grid subshift: a deterministic quasitiling of the window is built from
the window geometry alone, every interior tile gets a self-locating
tagged marker at its center plus a target block holding the ranked
source content, and the margins are filled with grid material.  The
decoder recomputes the same tiling from the geometry, verifies each
tile's marker, and inverts the per-tile rank map; corrupted tiles are
excluded and reported, never silently mis-decoded.

All entropies and count logarithms use natural log, so the gap factors
appear as exp(delta*|S|) rather than a power of two; the parameter
inequalities are rescaled accordingly.
"""

from __future__ import annotations

from fractions import Fraction
from math import log

from .census import CensusTable
from .groups import (GroupError, GSet, PreconditionError, core, gset,
                     inverse_set, set_product)
from .marker import AlmostPattern, GridSpec, MarkerKit, glue_almost
from .patterns import Pattern, occurrences, union_all
from .solver import lex_least_completion
from .tilings import (Quasitiling, complete_to_tiling, greedy_build,
                      recenter_with_hole, shrink_to_disjoint)


class CodecError(GroupError):
    """A codec construction or verification step failed."""


def choose_parameters(h_source, h_target, n_source_symbols,
                      n_target_symbols, mbar_size):
    """Half-gap rate and the largest admissible inverse-integer slack.

    Returns (delta, eps, diagnostics) with delta = (h_target-h_source)/2
    and eps the largest 1/n satisfying both 5*|Mbar|*eps < 1 and
    eps*log(Theta) < delta, where Theta = |Delta|^2 * |Lambda|^(5|Mbar|).
    """
    if h_source >= h_target:
        raise PreconditionError("source entropy must be below the target")
    if n_source_symbols < 2 or n_target_symbols < 2:
        raise PreconditionError("alphabets need at least two symbols")
    delta = (h_target - h_source) / 2
    log_theta = (2 * log(n_source_symbols)
                 + 5 * mbar_size * log(n_target_symbols))
    n = 5 * mbar_size + 1
    while n * delta <= log_theta:
        n += 1
    eps = Fraction(1, n)
    diagnostics = {"delta": delta,
                   "log_theta": log_theta,
                   "five_mbar_eps": float(5 * mbar_size * eps),
                   "eps_log_theta": float(eps) * log_theta}
    return delta, eps, diagnostics


class CodecConfig:
    """Everything the encoder and decoder share.

    Holds the source oracle, the grid specification with its marker kit,
    the slack eps, the rate gap delta, the tiling shape list, and the
    center hole (default Mbar^3 * Z0).  Census tables for realized tile
    shapes are cached here, so repeated encodes reuse them.  The two
    standing inequalities (5|Mbar|eps < 1 and Theta^eps below the gap
    factor) are reported by invariants() but do not gate construction;
    only the per-shape count gap does.
    """

    def __init__(self, source, spec: GridSpec, kit: MarkerKit, eps, delta,
                 shapes, hole: GSet | None = None, max_frontier=26,
                 budget=4000000):
        if kit.spec is not spec:
            raise PreconditionError("marker kit was built for another "
                                    "grid specification")
        self.source = source
        self.spec = spec
        self.kit = kit
        self.eps = Fraction(eps)
        self.delta = float(delta)
        self.shapes = [s if isinstance(s, GSet) else gset(spec.ctx, s)
                       for s in shapes]
        self.max_frontier = max_frontier
        self.budget = budget
        self.ctx = spec.ctx
        self.mbar = spec.mbar()
        self.grid = spec.oracle()
        if not kit.zeta_tagged or len(kit.zeta_tagged) < len(self.shapes):
            raise PreconditionError("need one tagged marker per shape")
        if hole is None:
            hole = set_product(set_product(self.mbar, self.mbar),
                               set_product(self.mbar, kit.z0))
        self.hole = hole
        self.hole_ring = set_product(set_product(self.mbar, self.mbar),
                                     kit.z0)
        exc = kit.beta.domain
        if kit.case == 2:
            exc = (kit.gamma_enh.domain
                   | kit.beta.domain.translate(kit.g1)
                   | kit.beta.domain.translate(kit.g2))
        if kit.g0 is not None:
            exc = exc | kit.kappas[0].domain.translate(kit.g0)
        m2 = set_product(spec.margin, spec.margin)
        self.exceptional_core = set_product(m2, exc)
        self._src_census = {}
        self._tgt_census = {}
        self._books = {}

    def invariants(self):
        """Report (not gate) the two standing parameter inequalities."""
        n_src = len(self.source.alphabet)
        n_tgt = len(self.spec.base.alphabet)
        log_theta = (2 * log(n_src) + 5 * len(self.mbar) * log(n_tgt))
        five = 5 * len(self.mbar) * self.eps
        return {"five_mbar_eps": float(five),
                "five_mbar_eps_below_one": five < 1,
                "eps_log_theta": float(self.eps) * log_theta,
                "theta_below_gap": float(self.eps) * log_theta < self.delta}

    def source_census(self, domain: GSet) -> CensusTable:
        key = domain._set
        if key not in self._src_census:
            self._src_census[key] = CensusTable(
                self.source, domain, halo=0, max_frontier=self.max_frontier)
        return self._src_census[key]

    def target_census(self, domain: GSet) -> CensusTable:
        key = domain._set
        if key not in self._tgt_census:
            self._tgt_census[key] = CensusTable(
                self.grid, domain, halo=0, max_frontier=self.max_frontier)
        return self._tgt_census[key]

    def codebook(self, s_hat: GSet, s_tilde0: GSet) -> "CodeBook":
        key = (s_hat._set, s_tilde0._set)
        if key not in self._books:
            self._books[key] = CodeBook(self, s_hat, s_tilde0)
        return self._books[key]


def verify_gap(config: CodecConfig, s_hat: GSet, s_tilde0: GSet):
    """Exact count gap for one realized shape pair, with diagnostics.

    The gate is the last link of the chain: strictly fewer source blocks
    on the completed tile than target blocks on the punctured core.  The
    earlier links are evaluated as diagnostics in log space, with the
    completed tile standing in for its parent shape.
    """
    n_y_hat = config.source_census(s_hat).count
    n_x_t0 = config.target_census(s_tilde0).count
    n_x_s = config.target_census(s_hat).count
    size = len(s_hat)
    eps = float(config.eps)
    delta = config.delta
    n_src = len(config.source.alphabet)
    n_tgt = len(config.spec.base.alphabet)
    log_theta = 2 * log(n_src) + 5 * len(config.mbar) * log(n_tgt)
    ln_y = log(n_y_hat) if n_y_hat else float("-inf")
    ln_x_s = log(n_x_s) if n_x_s else float("-inf")
    ln_x_t0 = log(n_x_t0) if n_x_t0 else float("-inf")
    chain = {
        "en1": (ln_x_s, ln_y + delta * size,
                ln_x_s > ln_y + delta * size),
        "en2": (ln_y, ln_y + 2 * eps * size * log(n_src), True),
        "en3": (ln_x_t0 + 5 * len(config.mbar) * eps * size * log(n_tgt),
                ln_x_s,
                ln_x_t0 + 5 * len(config.mbar) * eps * size * log(n_tgt)
                >= ln_x_s),
        "en4": (ln_y, ln_x_t0 + size * (eps * log_theta - delta),
                ln_y < ln_x_t0 + size * (eps * log_theta - delta)),
    }
    counts = {"source_on_completed_tile": n_y_hat,
              "target_on_punctured_core": n_x_t0,
              "target_on_completed_tile": n_x_s,
              "chain": chain}
    return counts, n_y_hat < n_x_t0


class CodeBook:
    """Rank/unrank injection for one realized (tile, core) shape pair.

    Source blocks on the completed tile are ranked lexicographically and
    re-emitted as the equally-ranked target block on the punctured tile
    core.  Construction fails unless the count gap holds, so the map is
    always a well-defined injection.
    """

    def __init__(self, config: CodecConfig, s_hat: GSet, s_tilde0: GSet):
        self.config = config
        self.s_hat = s_hat
        self.s_tilde0 = s_tilde0
        self.src = config.source_census(s_hat)
        self.tgt = config.target_census(s_tilde0)
        if not self.src.count < self.tgt.count:
            raise CodecError(
                "count gap fails for a realized shape pair: "
                f"{self.src.count} source blocks on {len(s_hat)} cells vs "
                f"{self.tgt.count} target blocks on {len(s_tilde0)} cells")

    def encode_block(self, block: Pattern):
        """Target block and grid-center witness for a source block."""
        idx = self.src.rank(block)
        return self.tgt.unrank_with_witness(idx)

    def decode_block(self, block: Pattern) -> Pattern:
        """Source block for a target block (inverse of encode_block)."""
        idx = self.tgt.rank(block)
        if idx >= self.src.count:
            raise CodecError("target block lies outside the code image")
        return self.src.unrank(idx)

    def exhaustive_roundtrip(self) -> int:
        """Check decode(encode(.)) on every source block; returns count."""
        for idx in range(self.src.count):
            block = self.src.unrank(idx)
            image, _ = self.encode_block(block)
            if self.decode_block(image) != block:
                raise CodecError(f"roundtrip failed at rank {idx}")
        return self.src.count


def build_codebook(config: CodecConfig, pairs):
    """Codebooks for a list of (completed tile, punctured core) pairs."""
    return [config.codebook(s_hat, s_tilde0) for s_hat, s_tilde0 in pairs]


def _window_tiling(config: CodecConfig, window: GSet):
    """Stages 1-3: deterministic tiling data from the window geometry.

    Returns (completed tiling, holed tiling, shape tags).  The tag of a
    tile is its pass index in the greedy build (largest shape first) and
    selects the tagged marker variant; all three stages keep the tile
    list order and the centers, which the correspondence relies on.
    """
    raw = greedy_build(window, config.shapes, config.eps)
    tags = [i for i, _ in raw.tiles]
    holed = recenter_with_hole(shrink_to_disjoint(raw, config.eps),
                               config.hole)
    completed = complete_to_tiling(holed, window, config.eps)
    if ([c for _, c in raw.tiles] != [c for _, c in holed.tiles]
            or [c for _, c in raw.tiles] != [c for _, c in completed.tiles]):
        raise CodecError("tile correspondence broke across pipeline stages")
    return completed, holed, tags


def _tile_geometry(config: CodecConfig, completed, holed, k):
    """Cell sets (completed tile, punctured core, normalized shapes)."""
    ctx = config.ctx
    center = completed.tiles[k][1]
    hat_cells = completed.tile_cells(k)
    tilde_core = core(holed.tile_cells(k), config.mbar)
    t0_cells = tilde_core - config.hole_ring.translate(center)
    ci = ctx.inv(center)
    return (center, hat_cells, t0_cells,
            hat_cells.translate(ci), t0_cells.translate(ci))


def _interior(config: CodecConfig, hat_cells: GSet, window: GSet) -> bool:
    return set_product(config.mbar, hat_cells).issubset(window)


def encode(y: Pattern, config: CodecConfig):
    """Encode a source window into the grid subshift.

    Stages: (1) greedy quasitiling from the window geometry alone,
    (2) shrink to disjointness and clear the center holes, (3) complete
    to a partition of the window core, (4) write each interior tile's
    ranked content onto the punctured tile core and the tile's tagged
    marker at its center, (5) join the tiles with grid material and fill
    the rest lexicographically.  Returns (pattern, manifest); the
    manifest is advisory only, decode never needs it.
    """
    window = y.domain
    ctx = config.ctx
    spec = config.spec
    completed, holed, tags = _window_tiling(config, window)
    parts = []
    statuses = []
    for k in range(len(completed.tiles)):
        center, hat_cells, t0_cells, s_hat, s_t0 = _tile_geometry(
            config, completed, holed, k)
        if not _interior(config, hat_cells, window):
            statuses.append("skipped_boundary")
            continue
        book = config.codebook(s_hat, s_t0)
        block = y.restrict(hat_cells).translate(ctx.inv(center))
        image, hidden = book.encode_block(block)
        written = image.translate(center).union(
            config.kit.zeta_tagged[tags[k]].translate(center))
        trace = gset(ctx, (ctx.mul(v, center)
                           for v, h in hidden.items() if h == 1))
        parts.append(AlmostPattern(
            written, config.exceptional_core.translate(center), trace, spec))
        statuses.append("encoded")
    if len(parts) < 2:
        raise CodecError("window holds fewer than two interior tiles; "
                         "nothing to synchronize against")
    glued = glue_almost(parts, spec, window, budget=config.budget)
    x, _ = lex_least_completion(spec.base, window,
                                fixed_vis=glued.pattern.data,
                                budget=config.budget)
    manifest = {"tiling": completed.to_json(),
                "tags": tags,
                "statuses": statuses,
                "exceptional": sorted(glued.exceptional._set)}
    return x, manifest


def decode(x: Pattern, config: CodecConfig, manifest=None):
    """Decode an encoded window without any side information.

    The tiling is recomputed from the window geometry, each interior
    tile's tagged marker is verified cell-for-cell at its predicted
    center, and verified tiles are inverted through the codebook.  Tiles
    whose marker or content fails verification are excluded and
    reported.  The manifest argument is accepted for interface symmetry
    and ignored, so output never depends on it.
    """
    del manifest
    window = x.domain
    ctx = config.ctx
    kit = config.kit
    completed, holed, tags = _window_tiling(config, window)
    decoded = []
    tiles_report = []
    verified_centers = set()
    for k in range(len(completed.tiles)):
        center, hat_cells, t0_cells, s_hat, s_t0 = _tile_geometry(
            config, completed, holed, k)
        if not _interior(config, hat_cells, window):
            tiles_report.append({"center": center,
                                 "status": "skipped_boundary"})
            continue
        tagged = kit.zeta_tagged[tags[k]]
        if not tagged.matches_at(x, center):
            tiles_report.append({"center": center,
                                 "status": "excluded_marker_mismatch"})
            continue
        verified_centers.add(center)
        book = config.codebook(s_hat, s_t0)
        block = x.restrict(t0_cells).translate(ctx.inv(center))
        try:
            y_block = book.decode_block(block)
        except (CodecError, PreconditionError) as err:
            tiles_report.append({"center": center,
                                 "status": "excluded_unreadable",
                                 "detail": str(err)})
            continue
        decoded.append(y_block.translate(center))
        tiles_report.append({"center": center, "status": "decoded"})
    occ = set(occurrences(x, kit.zeta))
    zinv_z = set_product(inverse_set(kit.z), kit.z)
    separated = all(ctx.mul(a, ctx.inv(b)) not in zinv_z._set
                    for a in occ for b in occ if a != b)
    strays = sorted(g for g in occ if g not in verified_centers)
    covered = len(set().union(*(p.domain._set for p in decoded))
                  ) if decoded else 0
    report = {"tiles": tiles_report,
              "marker_occurrences": sorted(occ),
              "stray_markers": strays,
              "separation_ok": separated,
              "coverage": Fraction(covered, len(window))}
    y_partial = union_all(decoded) if decoded else Pattern(
        gset(ctx, []), {})
    return y_partial, report


def roundtrip_check(config: CodecConfig, window: GSet, trials, seed,
                    sampler=None):
    """Encode/decode random source windows and tally exact agreement.

    Each decoded tile must match the original source window cell for
    cell; any mismatch, excluded tile, or stray marker counts as a
    failure.  Returns a report with the failure count and the coverage
    fractions.
    """
    import random as _random

    from .solver import random_admissible

    rng = _random.Random(seed)
    failures = []
    coverages = []
    for t in range(trials):
        if sampler is not None:
            y = sampler(rng)
        else:
            y = random_admissible(config.source, window, rng,
                                  budget=config.budget)
        if y is None:
            raise CodecError("source sampler failed to produce a window")
        x, _ = encode(y, config)
        y_back, report = decode(x, config)
        coverages.append(report["coverage"])
        bad = [r for r in report["tiles"]
               if r["status"].startswith("excluded")]
        mismatch = any(y.data[g] != s for g, s in y_back.data.items())
        if bad or mismatch or report["stray_markers"]:
            failures.append({"trial": t, "excluded": bad,
                             "mismatch": mismatch,
                             "strays": report["stray_markers"]})
    return {"trials": trials,
            "failures": failures,
            "coverage_min": min(coverages) if coverages else Fraction(0),
            "coverage_mean": (sum(coverages) / len(coverages)
                              if coverages else Fraction(0))}
