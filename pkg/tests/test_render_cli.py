import json

from shiftlab.cli import main
from shiftlab.fixtures import triangle_kshift, zz6_kshift
from shiftlab.groups import GroupContext, folner_box, gset
from shiftlab.patterns import Pattern
from shiftlab.render import (csv_table, pgm_indicator, run_length,
                             svg_indicator, svg_pattern, svg_tiling)
from shiftlab.tilings import greedy_build


def test_svg_pattern_deterministic():
    ctx = GroupContext(free_rank=2)
    dom = folner_box(ctx, 1)
    pat = Pattern(dom, {c: (c[0] + c[1]) % 3 for c in dom.elems})
    out1 = svg_pattern(pat)
    out2 = svg_pattern(pat)
    assert out1 == out2
    assert out1.startswith("<svg") and out1.rstrip().endswith("</svg>")
    assert out1.count("<rect") == len(dom)


def test_svg_indicator_and_tiling():
    ctx = GroupContext(free_rank=2)
    window = folner_box(ctx, 10)
    v = gset(ctx, [(0, 0), (3, 3)])
    svg = svg_indicator(v, window)
    assert svg.count("<rect") == len(window)
    tiling = greedy_build(window, [folner_box(ctx, 2)], "1/4")
    tsvg = svg_tiling(tiling, window)
    assert "<svg" in tsvg and "circle" in tsvg


def test_pgm_indicator_format():
    ctx = GroupContext(free_rank=2)
    window = folner_box(ctx, 2)
    v = gset(ctx, [(0, 0)])
    raw = pgm_indicator(v, window)
    lines = raw.decode("ascii").split("\n")
    assert lines[0] == "P2"
    assert lines[1].split() == ["5", "5"]
    assert lines[2] == "2"
    tokens = [t for row in lines[3:8] for t in row.split()]
    assert len(tokens) == 25
    assert tokens.count("2") == 1 and set(tokens) == {"1", "2"}


def test_run_length_1d():
    ctx = GroupContext(free_rank=1)
    window = folner_box(ctx, 4)
    v = gset(ctx, [(-4,), (-3,), (2,)])
    assert run_length(v, window) == "1x2 0x4 1x1 0x2"


def test_csv_table():
    out = csv_table(["n", "value"], [[1, 0.5], [2, 0.25]])
    lines = out.strip().split("\n")
    assert lines[0] == "n,value"
    assert lines[1].startswith("1,")
    assert len(lines) == 3


def test_cli_entropy_ok_and_unknown(capsys):
    assert main(["entropy", "--oracle", "full-2-shift", "--n", "10"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["estimate"] > 0.6
    assert main(["entropy", "--oracle", "nope"]) == 1


def test_cli_spec_check_exit_codes():
    ok = main(["spec-check", "--name", "zz6", "--margin", "strong",
               "--window", "4", "--trials", "30", "--seed", "1"])
    assert ok == 0
    bad = main(["spec-check", "--name", "triangle", "--margin", "weak",
                "--window", "3", "--trials", "200", "--seed", "1"])
    assert bad == 3


def test_cli_quasitile(tmp_path, capsys):
    out = tmp_path / "t.json"
    code = main(["quasitile", "--rank", "1", "--window", "100",
                 "--radii", "4", "8", "--eps", "1/4", "--complete",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["tiles"] > 0
    # an impossible shape set fails with the computation exit code
    code = main(["quasitile", "--rank", "1", "--window", "2",
                 "--radii", "50", "--eps", "1/4"])
    assert code == 2


def test_cli_kshift_runs(tmp_path):
    out = tmp_path / "k.pgm"
    assert main(["kshift", "--name", "zz6", "--window", "6",
                 "--out", str(out)]) == 0
    assert out.read_bytes()


def test_cli_repro_zz6(tmp_path, capsys):
    out = tmp_path / "zz6.csv"
    assert main(["repro", "zz6-entropy", "--n", "4",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) >= 4


def test_cli_missing_file_exit_code():
    assert main(["codec", "decode", "--in", "/nonexistent/file.json"]) == 1
