"""Command-line surface: named example systems, checks, and figure emission.

Exit codes: 0 success, 1 configuration error, 2 computation failure
(budget exhausted or infeasible geometry), 3 property violation detected
by a verification command.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import log

from .census import CensusOverflow, count_blocks, entropy_estimate
from .codec import CodecError, decode, encode, roundtrip_check
from .fixtures import (codec_config_1d, entropy_bound_fixtures,
                       interval_kshift, marker_kit_1d, triangle_kshift,
                       zz6_kshift)
from .groups import (GroupError, PreconditionError, folner_box, gset,
                     inverse_set, set_product)
from .kshift import KShiftSpec, greedy_maximal
from .marker import MarkerError
from .patterns import Pattern
from .render import (csv_table, pgm_indicator, run_length, svg_indicator,
                     svg_pattern, svg_tiling)
from .solver import GlueError, check_specification
from .tilings import (TilingError, complete_to_tiling, disjointness_grade,
                      greedy_build, shrink_to_disjoint)

EXIT_CONFIG = 1
EXIT_COMPUTE = 2
EXIT_VIOLATION = 3

_ORACLES = {name: (oracle, margin)
            for name, oracle, margin in entropy_bound_fixtures()}


def _write(path, payload):
    mode = "wb" if isinstance(payload, bytes) else "w"
    if path in (None, "-"):
        out = payload.decode() if isinstance(payload, bytes) else payload
        sys.stdout.write(out)
        return
    with open(path, mode) as fh:
        fh.write(payload)


def _cmd_entropy(args):
    if args.oracle not in _ORACLES:
        print(f"unknown oracle {args.oracle!r}; choose from "
              f"{sorted(_ORACLES)}", file=sys.stderr)
        return EXIT_CONFIG
    oracle, margin = _ORACLES[args.oracle]
    est = entropy_estimate(oracle, args.n, mode=args.mode)
    mm = set_product(inverse_set(margin), margin)
    bound = log(2) / len(mm)
    print(json.dumps({"oracle": args.oracle, "n": args.n, "mode": args.mode,
                      "estimate": est, "margin_bound": bound}))
    if est < bound - 0.02:
        print("entropy fell below the specification bound", file=sys.stderr)
        return EXIT_VIOLATION
    return 0


def _named_kshift(name):
    if name == "zz6":
        return zz6_kshift()
    if name == "triangle":
        return triangle_kshift()
    if name.startswith("interval-"):
        return interval_kshift(int(name.split("-")[1]))
    return None


def _cmd_kshift(args):
    if args.spec_json:
        with open(args.spec_json) as fh:
            spec = KShiftSpec.from_json(json.load(fh))
    else:
        spec = _named_kshift(args.name)
        if spec is None:
            print(f"unknown K-shift {args.name!r}", file=sys.stderr)
            return EXIT_CONFIG
    window = folner_box(spec.ctx, args.window)
    v = greedy_maximal(spec.k, window)
    if spec.ctx.free_rank == 1 and not spec.ctx.moduli:
        _write(args.out, run_length(v, window) + "\n")
    elif args.format == "svg":
        _write(args.out, svg_indicator(v, window))
    else:
        _write(args.out, pgm_indicator(v, window))
    return 0


def _cmd_spec_check(args):
    spec = _named_kshift(args.name)
    if spec is None:
        print(f"unknown K-shift {args.name!r}", file=sys.stderr)
        return EXIT_CONFIG
    margin = spec.margin if args.margin == "strong" else spec.weak_margin
    window = folner_box(spec.ctx, args.window)
    result = check_specification(spec.oracle(), margin, window,
                                 trials=args.trials, seed=args.seed)
    print(json.dumps({"margin": args.margin, "passed": result.passed,
                      "trials": result.trials, "unknowns": result.unknowns,
                      "notes": result.notes}))
    if not result.passed:
        return EXIT_VIOLATION
    return 0


def _cmd_quasitile(args):
    from .groups import GroupContext
    ctx = GroupContext(free_rank=args.rank)
    window = folner_box(ctx, args.window)
    shapes = [folner_box(ctx, r) for r in args.radii]
    try:
        tiling = greedy_build(window, shapes, args.eps)
        if args.complete:
            tiling = complete_to_tiling(
                shrink_to_disjoint(tiling, args.eps), window, args.eps)
    except (TilingError, GroupError, PreconditionError) as err:
        print(f"tiling failed: {err}", file=sys.stderr)
        return EXIT_COMPUTE
    payload = {"tiles": len(tiling), "grade":
               disjointness_grade(tiling, args.eps),
               "tiling": tiling.to_json()}
    _write(args.out, json.dumps(payload) + "\n")
    if args.svg:
        if ctx.free_rank != 2:
            print("SVG tiling output needs rank 2", file=sys.stderr)
            return EXIT_CONFIG
        _write(args.svg, svg_tiling(tiling, window))
    return 0


def _cmd_marker(args):
    try:
        kit = marker_kit_1d()
    except (MarkerError, GlueError) as err:
        print(f"marker assembly failed: {err}", file=sys.stderr)
        return EXIT_COMPUTE
    _write(args.out, json.dumps(kit.to_json()) + "\n")
    if args.svg:
        _write(args.svg, svg_pattern(kit.zeta_tagged[0]))
    return 0


def _codec_setup():
    config, window = codec_config_1d()
    return config, window


def _read_pattern(path, ctx):
    with open(path) as fh:
        return Pattern.from_json(ctx, json.load(fh))


def _cmd_codec(args):
    try:
        config, window = _codec_setup()
    except (MarkerError, GlueError) as err:
        print(f"codec setup failed: {err}", file=sys.stderr)
        return EXIT_COMPUTE
    try:
        if args.action == "encode":
            y = _read_pattern(args.infile, config.ctx)
            x, manifest = encode(y, config)
            _write(args.out, json.dumps(x.to_json()) + "\n")
            if args.manifest:
                _write(args.manifest, json.dumps(manifest) + "\n")
        elif args.action == "decode":
            x = _read_pattern(args.infile, config.ctx)
            y, report = decode(x, config)
            _write(args.out, json.dumps(y.to_json()) + "\n")
            bad = [r for r in report["tiles"]
                   if r["status"].startswith("excluded")]
            if bad or report["stray_markers"]:
                print(json.dumps({"excluded": bad,
                                  "strays": report["stray_markers"]}),
                      file=sys.stderr)
                return EXIT_VIOLATION
        else:
            report = roundtrip_check(config, window, args.trials, args.seed)
            print(json.dumps({"trials": report["trials"],
                              "failures": len(report["failures"]),
                              "coverage_mean":
                              float(report["coverage_mean"])}))
            if report["failures"]:
                return EXIT_VIOLATION
    except (CodecError, GlueError, TilingError, CensusOverflow) as err:
        print(f"codec run failed: {err}", file=sys.stderr)
        return EXIT_COMPUTE
    return 0


def _repro_zz6(args):
    spec = zz6_kshift()
    oracle = spec.oracle()
    rows = []
    for n in range(1, args.n + 1):
        cols = gset(spec.ctx, [(i, j) for i in range(n) for j in range(6)])
        count, _ = count_blocks(oracle, cols)
        rows.append((n, count, log(count) / (6 * n)))
    _write(args.out, csv_table(("n", "count", "estimate"), rows))
    if any(abs(r[2] - log(3) / 6) > 1e-12 for r in rows):
        return EXIT_VIOLATION
    return 0


def _repro_margin(args):
    spec = triangle_kshift()
    window = folner_box(spec.ctx, 4)
    result = check_specification(spec.oracle(), spec.weak_margin, window,
                                 trials=50, seed=0)
    if result.passed or result.counterexample is None:
        print("expected a weak-margin counterexample", file=sys.stderr)
        return EXIT_VIOLATION
    pa, pb, union = result.counterexample
    print("weak margin K^-1 K refuted: the following admissible fragments "
          "admit no joint completion")
    print("fragment A:", sorted(pa.items()))
    print("fragment B:", sorted(pb.items()))
    if args.out:
        _write(args.out, svg_pattern(union))
    return 0


def _cmd_repro(args):
    if args.case == "zz6-entropy":
        return _repro_zz6(args)
    if args.case == "margin-counterexample":
        return _repro_margin(args)
    print(f"unknown repro case {args.case!r}", file=sys.stderr)
    return EXIT_CONFIG


def build_parser():
    p = argparse.ArgumentParser(
        prog="shiftlab",
        description="Subshift workbench: separated-set shifts, entropy "
                    "counts, quasitilings, markers and the block codec.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("entropy", help="pattern-counting entropy estimate")
    e.add_argument("--oracle", required=True)
    e.add_argument("--n", type=int, default=20)
    e.add_argument("--mode", choices=("window", "difference"),
                   default="difference")
    e.set_defaults(func=_cmd_entropy)

    k = sub.add_parser("kshift", help="greedy maximal separated set")
    k.add_argument("--name", default="zz6")
    k.add_argument("--spec-json")
    k.add_argument("--window", type=int, default=8)
    k.add_argument("--format", choices=("pgm", "svg"), default="pgm")
    k.add_argument("--out", default="-")
    k.set_defaults(func=_cmd_kshift)

    s = sub.add_parser("spec-check", help="randomized gluing check")
    s.add_argument("--name", default="triangle")
    s.add_argument("--margin", choices=("strong", "weak"), default="strong")
    s.add_argument("--window", type=int, default=4)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_cmd_spec_check)

    q = sub.add_parser("quasitile", help="greedy multi-scale quasitiling")
    q.add_argument("--rank", type=int, default=1)
    q.add_argument("--window", type=int, required=True)
    q.add_argument("--radii", type=int, nargs="+", required=True)
    q.add_argument("--eps", default="1/5")
    q.add_argument("--complete", action="store_true")
    q.add_argument("--out", default="-")
    q.add_argument("--svg")
    q.set_defaults(func=_cmd_quasitile)

    m = sub.add_parser("marker", help="assemble and dump the 1D marker kit")
    m.add_argument("--out", default="-")
    m.add_argument("--svg")
    m.set_defaults(func=_cmd_marker)

    c = sub.add_parser("codec", help="encode/decode/roundtrip (1D system)")
    c.add_argument("action", choices=("encode", "decode", "roundtrip"))
    c.add_argument("--in", dest="infile")
    c.add_argument("--out", default="-")
    c.add_argument("--manifest")
    c.add_argument("--trials", type=int, default=5)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=_cmd_codec)

    r = sub.add_parser("repro", help="reproduce a documented example")
    r.add_argument("case")
    r.add_argument("--n", type=int, default=6)
    r.add_argument("--out", default="-")
    r.set_defaults(func=_cmd_repro)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except FileNotFoundError as err:
        print(f"missing input file: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (GlueError, TilingError, CensusOverflow, CodecError) as err:
        print(f"computation failed: {err}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
