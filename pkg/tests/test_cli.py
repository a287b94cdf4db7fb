import json

import numpy as np
import pytest

from gshalf import cli
from gshalf.representation import whole_space_fields

BUNCH = """
[scenario]
initial_field_mode = "electrostatic"
horizon = 1.0

[[component]]
center = [0.0, 0.0, 1.5]
velocity = [0.5, 0.0, -0.75]
width = 0.25
"""

FAR = """
[scenario]
initial_field_mode = "electrostatic"
horizon = 0.5

[[component]]
center = [0.0, 0.0, 3.0]
velocity = [0.3, 0.2, -0.4]
width = 0.25
"""

EMPTY = """
[scenario]
horizon = 1.0
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    report = json.loads(out) if out.strip() else None
    return code, report, err


def metric(report, name):
    return next(m for m in report["metrics"] if m["name"] == name)


# -- loading -------------------------------------------------------------------


def test_minimal_static_scenario(tmp_path):
    p = write(tmp_path, "s.toml", "[[component]]\ncenter = [0, 0, 2]\nwidth = 0.3\n")
    scen, metrics = cli.load_scenario(p)
    assert scen.dist.vmax == 0.0
    assert scen.initial_field_mode == "zero"
    assert any(m.name == "load.gauss_law" and "warning" in m.note for m in metrics)


def test_bad_width_is_named(tmp_path):
    p = write(tmp_path, "s.toml", "[[component]]\ncenter = [0, 0, 2]\nwidth = 0.0\n")
    with pytest.raises(cli.ScenarioError, match="width"):
        cli.load_scenario(p)
    p = write(tmp_path, "s2.toml", "[[component]]\ncenter = [0, 0, 2]\nwidth = -1\n")
    with pytest.raises(cli.ScenarioError, match=r"component\[0\]\.width"):
        cli.load_scenario(p)


def test_parse_error_has_line_context(tmp_path):
    p = write(tmp_path, "s.toml", "[scenario]\nhorizon = = 1\n")
    with pytest.raises(cli.ScenarioError, match="line 2"):
        cli.load_scenario(p)


def test_other_invariants_are_named(tmp_path):
    cases = {
        "[scenario]\nhorizon = -1\n": "horizon",
        '[scenario]\ninitial_field_mode = "static"\n': "initial_field_mode",
        "[bogus]\n": "bogus",
        "[quadrature]\nn_phi = 1\n": "n_phi",
        "[[component]]\ncenter = [0, 0]\nwidth = 0.1\n": "center",
        '[scenario]\ninitial_field_mode = "electrostatic"\n[[component]]\ncenter = [0, 0, 0.5]\nwidth = 0.1\n': "center",
        "[scenario]\ng = 0.5\n[[component]]\ncenter = [0, 0, 2]\nwidth = 0.1\nreflect_at_wall = true\n": "reflect_at_wall",
    }
    for k, (text, field) in enumerate(cases.items()):
        with pytest.raises(cli.ScenarioError, match=field):
            cli.load_scenario(write(tmp_path, f"c{k}.toml", text))


def test_no_contact_margin_warning(tmp_path):
    text = "[scenario]\nhorizon = 2.0\nsupport_margin = 1.0\n[[component]]\ncenter = [0, 0, 4]\nvelocity = [0, 0, -1]\nwidth = 0.2\n"
    _, metrics = cli.load_scenario(write(tmp_path, "s.toml", text))
    m = next(m for m in metrics if m.name == "load.no_contact_margin")
    assert m.passed and "warning" in m.note
    assert m.value == pytest.approx(1.0 - (1 + 1.0) * 2.0)
    text_ok = text.replace("horizon = 2.0", "horizon = 0.2")
    _, metrics = cli.load_scenario(write(tmp_path, "t.toml", text_ok))
    assert next(m for m in metrics if m.name == "load.no_contact_margin").note == ""


def test_quadrature_section_and_scale(tmp_path):
    p = write(tmp_path, "s.toml", EMPTY + "[quadrature]\nn_phi = 20\n")
    scen, _ = cli.load_scenario(p, quadrature_scale=2.0)
    assert scen.spec.n_phi == 40 and scen.spec.n_r == 48


# -- check-kernels -------------------------------------------------------------


def test_check_kernels_default(capsys):
    code, report, _ = run(["check-kernels"], capsys)
    assert code == 0 and report["passed"]
    assert len(report["metrics"]) == 6
    assert report["runtime_seconds"] < 1.0


def test_check_kernels_vacuous(capsys):
    code, report, _ = run(["check-kernels", "--samples", "0"], capsys)
    assert code == 0
    assert all(m["note"] == "vacuous" and m["passed"] for m in report["metrics"])


def test_check_kernels_mutation_fails():
    rep = cli.cmd_check_kernels(42, 200, perturb=1e-3)
    assert not rep.passed
    assert not next(m for m in rep.metrics if m.name == "max_rel_error.aE").passed


# -- eval ------------------------------------------------------------------------


def test_eval_empty_scenario(tmp_path, capsys):
    cfg = write(tmp_path, "e.toml", EMPTY)
    pts = write(tmp_path, "p.csv", "t,x1,x2,x3\n0.5,0,0,0\n1.0,0.3,0.2,1.0\n")
    out = tmp_path / "o.csv"
    code, report, _ = run(["eval", "--config", cfg, "--points", pts, "--out", out], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == cli.FIELD_HEADER
    assert all(float(v) == 0 for line in lines[1:] for v in line.split(",")[4:])


def test_eval_is_deterministic_and_rejects_negative_x3(tmp_path, capsys):
    cfg = write(tmp_path, "b.toml", BUNCH)
    pts = write(tmp_path, "p.csv", "0.5 0.1 0.0 0.3\n1.0 0.0 0.2 0.0\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["eval", "--config", cfg, "--points", pts, "--out", a], capsys)
    run(["eval", "--config", cfg, "--points", pts, "--out", b, "--workers", "2"], capsys)
    assert a.read_bytes() == b.read_bytes()
    first = a.read_text().splitlines()[1].split(",")
    assert all(v == format(float(v), ".17g") for v in first)
    bad = write(tmp_path, "bad.csv", "0.5 0 0 0.3\n0.5 0 0 -0.1\n")
    code, report, err = run(["eval", "--config", cfg, "--points", bad, "--out", tmp_path / "c.csv"], capsys)
    assert code == 2 and report is None
    assert "row 1" in err


def test_eval_far_support_matches_whole_space(tmp_path, capsys):
    cfg = write(tmp_path, "f.toml", FAR)
    pts = write(tmp_path, "p.csv", "0.5,0.1,0.0,0.3\n0.5,0.3,0.2,1.5\n")
    out = tmp_path / "o.csv"
    run(["eval", "--config", cfg, "--points", pts, "--out", out], capsys)
    table = np.loadtxt(out, delimiter=",", skiprows=1)
    scen, _ = cli.load_scenario(cfg)
    for row in table:
        np.testing.assert_allclose(row[4:], whole_space_fields(row[0], row[1:4], scen), rtol=0, atol=1e-12)


# -- audit-boundary --------------------------------------------------------------


def test_audit_empty_scenario(tmp_path, capsys):
    cfg = write(tmp_path, "e.toml", EMPTY)
    code, report, _ = run(["audit-boundary", "--config", cfg, "--probes", "4"], capsys)
    assert code == 0 and report["passed"]
    for m in report["metrics"]:
        if m["name"].startswith("wall_"):
            assert m["value"] == 0.0


def test_audit_records_node_counts(tmp_path, capsys):
    cfg = write(tmp_path, "b.toml", BUNCH)
    code, report, _ = run(
        ["audit-boundary", "--config", cfg, "--probes", "3", "--quadrature-scale", "0.5", "--time", "0.8"], capsys
    )
    assert report["metadata"]["quadrature"]["n_phi"] == 16
    assert report["metadata"]["refined_quadrature"]["n_phi"] == 32
    assert code in (0, 1)


def test_audit_time_must_lie_in_horizon(tmp_path, capsys):
    cfg = write(tmp_path, "b.toml", BUNCH)
    code, _, err = run(["audit-boundary", "--config", cfg, "--time", "2.0"], capsys)
    assert code == 2 and "horizon" in err


# -- compare and neumann-demo ----------------------------------------------------


def test_compare_wholespace(tmp_path, capsys):
    cfg = write(tmp_path, "f.toml", FAR)
    out = tmp_path / "cmp.csv"
    code, report, _ = run(["compare", "--config", cfg, "--oracle", "wholespace", "--probes", "10", "--out", out], capsys)
    assert code == 0
    assert metric(report, "rel_L2")["value"] <= 1e-10
    assert len(out.read_text().splitlines()) == 11


def test_compare_rejects_incompatible_pairs(tmp_path, capsys):
    cfg = write(tmp_path, "b.toml", BUNCH)
    code, _, err = run(["compare", "--config", cfg, "--oracle", "wholespace"], capsys)
    assert code == 2 and "2 * horizon < support margin" in err
    grav = write(tmp_path, "g.toml", BUNCH.replace("horizon = 1.0", "horizon = 1.0\ng = 0.3"))
    code, _, err = run(["compare", "--config", grav, "--oracle", "maxwell"], capsys)
    assert code == 2 and "force-free" in err


def test_compare_wave_falls_back_to_wall_pulse(tmp_path, capsys):
    cfg = write(tmp_path, "f.toml", FAR)
    code, report, _ = run(["compare", "--config", cfg, "--oracle", "wave", "--probes", "20"], capsys)
    assert code == 0
    assert "gaussian wall pulse" in report["metadata"]["wall_source"]
    assert metric(report, "rel_L2")["value"] <= 0.05


def test_neumann_demo(capsys, tmp_path):
    rep_path = tmp_path / "r.json"
    code, report, _ = run(["neumann-demo", "--probes", "20", "--report", rep_path], capsys)
    assert code == 0
    assert metric(report, "step_charge_rel_error")["value"] <= 1e-8
    assert json.loads(rep_path.read_text())["command"] == "neumann-demo"


def test_report_exit_status_follows_metrics():
    rep = cli.RunReport("x", "d")
    rep.add("a", 0.5, 1.0)
    assert rep.passed
    rep.add("b", 2.0, 1.0)
    assert not rep.passed
    assert json.loads(rep.to_json())["passed"] is False
