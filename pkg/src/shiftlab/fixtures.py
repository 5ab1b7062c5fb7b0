"""Shared example systems used by both the test suite and the repro CLI.

Everything here is small enough to verify exhaustively or near-
exhaustively; the constructions are deterministic, so repeated calls
return equal objects.
"""

from __future__ import annotations

from .groups import GroupContext, folner_box, gset, singleton
from .kshift import KShiftSpec
from .marker import GridSpec, MarkerKit, assemble_marker
from .oracles import ForbiddenPatternOracle, FullShiftOracle, LocalOracle
from .patterns import Pattern


def zz6_kshift() -> KShiftSpec:
    """K-shift on Z x Z6 whose columns carry exactly three maximal sets.

    K is a fundamental half-column, so a maximal K-separated set picks
    an antipodal pair {i, i+3} per column independently: 3^n blocks on n
    columns and entropy (log 3)/6.
    """
    ctx = GroupContext(free_rank=1, moduli=[6])
    return KShiftSpec(gset(ctx, [(0, 0), (0, 1), (0, 2)]))


def triangle_kshift() -> KShiftSpec:
    """Triangle K-shift on Z^2 separating the two margin candidates.

    With the triangle K, gluing succeeds at margin K K^-1 K but admits a
    genuine counterexample at the smaller margin K^-1 K.
    """
    ctx = GroupContext(free_rank=2)
    return KShiftSpec(gset(ctx, [(0, 0), (1, 0), (0, 1)]))


def _interval_oracle_z():
    return GroupContext(free_rank=1)


def full_2_shift():
    """Full binary shift on Z; specification margin {e}."""
    ctx = _interval_oracle_z()
    return FullShiftOracle(ctx, (0, 1)), singleton(ctx)


def golden_mean_shift():
    """Binary shift on Z forbidding adjacent ones; margin {0,1}."""
    ctx = _interval_oracle_z()
    dom = gset(ctx, [(0,), (1,)])
    oracle = ForbiddenPatternOracle(ctx, (0, 1),
                                    [Pattern.from_rows(dom, [1, 1])])
    return oracle, gset(ctx, [(0,), (1,)])


def no_three_ones_shift():
    """Binary shift on Z forbidding three consecutive ones; margin {0,1,2}."""
    ctx = _interval_oracle_z()
    dom = gset(ctx, [(0,), (1,), (2,)])
    oracle = ForbiddenPatternOracle(ctx, (0, 1),
                                    [Pattern.from_rows(dom, [1, 1, 1])])
    return oracle, gset(ctx, [(0,), (1,), (2,)])


def interval_kshift(radius: int) -> KShiftSpec:
    """K-shift on Z with K = {0, ..., radius}."""
    ctx = _interval_oracle_z()
    return KShiftSpec(gset(ctx, [(i,) for i in range(radius + 1)]))


def entropy_bound_fixtures():
    """(name, oracle, margin) triples with verified specification.

    Each oracle glues at the given margin, so its entropy must clear the
    lower bound log 2 / |M^-1 M|.
    """
    k2 = interval_kshift(1)
    k3 = interval_kshift(2)
    out = [("full-2-shift",) + full_2_shift(),
           ("golden-mean",) + golden_mean_shift(),
           ("no-111",) + no_three_ones_shift(),
           ("ksep-2", k2.oracle(), k2.margin),
           ("ksep-3", k3.oracle(), k3.margin)]
    return out


def grid_spec_1d() -> GridSpec:
    """Grid specification on Z: ternary base, symbol 2 banned in the
    subsystem, single-cell carried block, spacing set [-1, 1]."""
    ctx = _interval_oracle_z()
    base = FullShiftOracle(ctx, (0, 1, 2))
    sub = ForbiddenPatternOracle(ctx, (0, 1, 2),
                                 [Pattern(singleton(ctx), {(0,): 2})])
    rho = Pattern(singleton(ctx), {(0,): 2})
    return GridSpec(base, singleton(ctx), sub, rho, folner_box(ctx, 1))


def marker_beta_1d(spec: GridSpec) -> Pattern:
    """Five zeros: admissible in the base, impossible in the grid."""
    return Pattern(folner_box(spec.ctx, 2), {(i,): 0 for i in range(-2, 3)})


def marker_kit_1d(spec: GridSpec | None = None) -> MarkerKit:
    """Assembled two-tag marker kit for the 1D grid specification."""
    if spec is None:
        spec = grid_spec_1d()
    ctx = spec.ctx
    tag_dom = singleton(ctx)
    kappas = [Pattern(tag_dom, {(0,): 0}), Pattern(tag_dom, {(0,): 1})]
    return assemble_marker(spec, marker_beta_1d(spec), folner_box(ctx, 30),
                           kappas=kappas)


def grid_spec_zz4() -> tuple[GridSpec, Pattern, Pattern]:
    """Grid specification on Z x Z4 whose marker echo set is symmetric.

    Returns (spec, beta, free_window).  The vertical-stripe marker has a
    two-element echo stabilizer, so kit assembly exercises the padded
    second construction.
    """
    ctx = GroupContext(free_rank=1, moduli=[4])
    base = FullShiftOracle(ctx, (0, 1, 2))
    sub = ForbiddenPatternOracle(ctx, (0, 1, 2),
                                 [Pattern(singleton(ctx), {(0, 0): 2})])
    rho = Pattern(singleton(ctx), {(0, 0): 2})
    spec = GridSpec(base, singleton(ctx), sub, rho, folner_box(ctx, 1))
    b = folner_box(ctx, 2)
    beta = Pattern(b, {(i, j): j % 2 for i in range(-2, 3)
                       for j in range(4)})
    free_window = Pattern(folner_box(ctx, 1),
                          {(i, j): (1 if (i, j) == (0, 2) else 0)
                           for i in (-1, 0, 1) for j in range(4)})
    return spec, beta, free_window


def source_oracle_1d() -> LocalOracle:
    """Golden-mean source for the codec: entropy below the 1D grid."""
    oracle, _ = golden_mean_shift()
    return oracle


def codec_config_1d(eps="1/5", delta=0.15):
    """Codec between the golden-mean source and the 1D grid subshift.

    Window radius 300 with shape radii 60 and 75 yields four tiles, one
    of which touches the boundary and is skipped.
    """
    from .codec import CodecConfig

    spec = grid_spec_1d()
    kit = marker_kit_1d(spec)
    shapes = [folner_box(spec.ctx, 60), folner_box(spec.ctx, 75)]
    config = CodecConfig(source_oracle_1d(), spec, kit, eps=eps, delta=delta,
                         shapes=shapes)
    return config, folner_box(spec.ctx, 300)


def codebook_pair_small():
    """A standalone shape pair small enough for exhaustive roundtrips.

    Ten source cells against nine punctured-core cells, with the full
    binary shift as source: 2^10 source blocks, strictly fewer than the
    grid blocks on the core.
    """
    from .codec import CodecConfig

    spec = grid_spec_1d()
    kit = marker_kit_1d(spec)
    ctx = spec.ctx
    source = FullShiftOracle(ctx, (0, 1))
    config = CodecConfig(source, spec, kit, eps="1/5", delta=0.15,
                         shapes=[folner_box(ctx, 60)])
    s_hat = gset(ctx, [(i,) for i in range(-4, 6)])
    s_tilde0 = folner_box(ctx, 4)
    return config, s_hat, s_tilde0
