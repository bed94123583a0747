import json
import subprocess
import sys

import numpy as np
import pytest

from fembem.cli import build_parser, main, parse_levels, read_config_file, resolve_config
from fembem.errors import EocRow, ErrorReport
from fembem.mesh import build_lshape, load_mesh
from fembem.report import emit_report, format_csv, parse_json


def run(argv, capsys, environ=None):
    rc = main(argv, environ or {})
    return rc, capsys.readouterr()


def test_csv_levels_0_to_4(capsys):
    rc, out = run(["--levels", "0..4"], capsys)
    assert rc == 0
    report, table = out.out.split("\n\n")
    lines = report.splitlines()
    assert lines[0] == "level,h,ndof_fem,ndof_bem,err_h1,err_l2,err_strip,err_flux"
    assert len(lines) == 6
    eoc_lines = table.strip().splitlines()
    assert eoc_lines[0] == "from_level,to_level,eoc_h1,eoc_l2,eoc_strip,eoc_flux"
    assert len(eoc_lines) == 5
    first = lines[1].split(",")
    assert first[:4] == ["0", "0.20000000000000001", "11", "8"]


def test_single_level_has_no_eoc_block(capsys):
    rc, out = run(["--levels", "2"], capsys)
    assert rc == 0
    assert "\n\n" not in out.out and len(out.out.splitlines()) == 2


def test_empty_table_is_header_only():
    assert format_csv([], []) == "level,h,ndof_fem,ndof_bem,err_h1,err_l2,err_strip,err_flux\n"


def test_json_roundtrip(tmp_path):
    path = tmp_path / "out.json"
    assert main(["--levels", "0..2", "--format", "json", "--out", str(path)], {}) == 0
    reports, table = parse_json(path.read_text())
    assert [r.level for r in reports] == [0, 1, 2] and len(table) == 2
    assert reports[1].ndof_fem == build_lshape(1).n_vertices
    assert emit_report(reports, table, "json", str(tmp_path / "again.json")) == path.read_text()
    doc = json.loads(path.read_text())
    assert set(doc) == {"reports", "eoc"}


def test_json_null_for_undefined():
    reports = [ErrorReport(0, 0.2, 1, 1, 1, 1, 0, 1), ErrorReport(1, 0.1, 1, 1, 1, 1, 0, 1)]
    table = [EocRow(0, 1, {"err_h1": 0.0, "err_l2": 0.0, "err_strip": None, "err_flux": 0.0})]
    text = emit_report(reports, table, "json", path=None)
    assert json.loads(text)["eoc"][0]["eoc_strip"] is None
    csv = format_csv(reports, table)
    assert csv.splitlines()[-1] == "0,1,0,0,,0"


def test_output_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["--degree", "2", "--levels", "0..2", "--out", str(p)], {}) == 0
    assert a.read_bytes() == b.read_bytes()


def test_precedence(tmp_path):
    cfg = tmp_path / "study.cfg"
    cfg.write_text("# study settings\ndegree = 2\nlevels = 0..1\nquad_volume = 12\nformat = json\n")
    args = build_parser().parse_args(["--config", str(cfg)])
    c = resolve_config(args, {})
    assert (c.degree, c.levels, c.quad_order_volume, c.format, c.alpha) == (2, (0, 1), 12, "json", 2.5)
    c = resolve_config(args, {"FEMBEM_LEVELS": "1..3", "FEMBEM_QUAD_VOLUME": "14"})
    assert c.levels == (1, 3) and c.quad_order_volume == 14 and c.degree == 2
    args = build_parser().parse_args(["--config", str(cfg), "--levels", "2..2", "--alpha", "1.75"])
    c = resolve_config(args, {"FEMBEM_LEVELS": "1..3"})
    assert c.levels == (2, 2) and c.alpha == 1.75


def test_defaults():
    c = resolve_config(build_parser().parse_args([]), {})
    assert (c.degree, c.alpha, c.levels, c.data_mode, c.format) == (1, 1.5, (0, 6), "project-u0", "csv")
    c = resolve_config(build_parser().parse_args(["--degree", "2"]), {})
    assert c.levels == (0, 5) and c.alpha == 2.5


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(ValueError):
        read_config_file(bad)
    assert main(["--config", str(bad)], {}) == 2
    assert main(["--config", str(tmp_path / "missing.cfg")], {}) == 2


@pytest.mark.parametrize("env", [{"FEMBEM_LEVELS": "5..2"}, {"FEMBEM_DEGREE": "3"}, {"FEMBEM_ALPHA": "-1"},
                                 {"FEMBEM_DATA_MODE": "exact"}, {"FEMBEM_QUAD_VOLUME": "x"}])
def test_invalid_settings_exit_2(env, capsys):
    rc, out = run([], capsys, env)
    assert rc == 2 and "invalid configuration" in out.err


def test_invalid_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["--degree", "3"], {})
    assert exc.value.code == 2


def test_parse_levels():
    assert parse_levels("0..6") == (0, 6) and parse_levels(" 3 ") == (3, 3)
    with pytest.raises(ValueError):
        parse_levels("a..b")


def test_unwritable_output(tmp_path, capsys):
    rc, out = run(["--levels", "0", "--out", str(tmp_path / "no" / "such" / "dir.csv")], capsys)
    assert rc == 1 and "cannot write" in out.err


def test_dumps(tmp_path):
    prefix = tmp_path / "dump"
    assert main(["--levels", "0..1", "--out", str(tmp_path / "r.csv"), "--dump-mesh", str(prefix),
                 "--dump-matrix", str(prefix) + "K"], {}) == 0
    mesh = load_mesh(f"{prefix}.level1.txt")
    assert mesh.n_triangles == 48
    K = np.loadtxt(f"{prefix}K.level0.txt")
    assert K.shape[1] == 3 and K[:, :2].max() == 11 + 8 - 1


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.csv"
    res = subprocess.run([sys.executable, "-m", "fembem.cli", "--levels", "0..1", "--out", str(out)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert out.read_text().startswith("level,h")
