import subprocess
import sys

import numpy as np
import pytest

from femtonet.cli import (
    FIGURES,
    OutputTable,
    cmd_calibrate,
    cmd_figure,
    figure_spec,
    main,
    parse_config,
    read_table,
    write_table,
)
from femtonet.handover import EPS_CLAMP
from femtonet.harness import ConfigError, ScenarioConfig

# keeps figure sweeps quick; trend checks live in the acceptance suite
FAST = ["n_users=20", "ticks=20", "runs=2", "epsilon_samples=200", "prior_samples=5000"]


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("# nothing here\n\n")
    c = parse_config(p)
    assert c == ScenarioConfig()
    assert (c.m_femto, c.bandwidth, c.macro_power_dbm, c.femto_power_dbm, c.macro_shadow_db, c.n_max) == (
        9, 10e6, 43.0, 31.5, 6.0, 10)


def test_override_applies_last(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("n_max = 6\nhandover_scheme = heuristic  # trailing comment\n")
    c = parse_config(p, ["n_max=4"])
    assert c == ScenarioConfig(n_max=4, handover_scheme="heuristic")


def test_invalid_value_names_key_and_line(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("n_users = 20\nbandwidth = -1\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(p)
    assert exc.value.field == "bandwidth"
    assert f"{p}:2" in str(exc.value)


@pytest.mark.parametrize("line, key", [("foo = 1", "foo"), ("n_users = many", "n_users"), ("audit = maybe", "audit")])
def test_unknown_or_mistyped_keys(tmp_path, line, key):
    p = tmp_path / "bad.cfg"
    p.write_text(line + "\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(p)
    assert exc.value.field == key


def test_tuple_fields_parse():
    c = parse_config(None, ["m_femto=2", "femto_layout=explicit", "femto_positions=10:0,0:10",
                            "epsilon=0.1,0.2,0.3", "priors=0.2,0.4,0.4"])
    assert c.femto_positions == ((10.0, 0.0), (0.0, 10.0))
    assert c.epsilon == (0.1, 0.2, 0.3)


def test_csv_round_trip(tmp_path):
    t = OutputTable(("a", "b", "c"), [(1, "x", 0.1 + 0.2), (2, "y, z", 1e-300)])
    out = tmp_path / "t.csv"
    write_table(t, out)
    assert read_table(out) == t
    assert b"\r" not in out.read_bytes()
    assert [float(r[2]) for r in read_table(out).rows] == [0.1 + 0.2, 1e-300]


def test_figure_row_counts(tmp_path):
    cfg = parse_config(None, FAST)
    t2 = cmd_figure("fig2", cfg, tmp_path / "f2.csv")
    assert len(t2.rows) == 15 and {r[2] for r in t2.rows} == {"total_capacity"}
    t5 = cmd_figure("fig5", cfg, tmp_path / "f5.csv")
    assert len(t5.rows) == 10 and {r[2] for r in t5.rows} == {"handovers_per_user"}
    assert [r[0] for r in t5.rows] == [2, 2, 4, 4, 6, 6, 8, 8, 10, 10]
    assert read_table(tmp_path / "f5.csv") == t5


def test_figure_definitions():
    cfg = ScenarioConfig()
    for fid in FIGURES:
        spec, _ = figure_spec(fid, cfg)
        assert len(spec.cells()) == len(spec.values) * len(spec.schemes)
    spec, metric = figure_spec("fig4", cfg.with_(handovers_per_user=False))
    assert metric == "handover_count"
    assert spec.base.association_scheme.value == "proposed"


def test_figure_byte_identical(tmp_path):
    args = ["figure", "fig3", "--seed", "42", *sum((["--set", s] for s in FAST), [])]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_run_command(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["run", "--runs", "2", *sum((["--set", s] for s in FAST), []), "--out", str(out)]) == 0
    t = read_table(out)
    assert len(t.rows) == 2 and t.header[0] == "run"


def test_errors_exit_nonzero_without_output(tmp_path, capsys):
    out = tmp_path / "x.csv"
    assert main(["run", "--set", "bandwidth=-1", "--out", str(out)]) == 2
    err = capsys.readouterr().err.strip()
    assert "bandwidth" in err and len(err.splitlines()) == 1
    assert not out.exists()
    assert main(["calibrate", "--samples", "0", "--out", str(out)]) == 2
    assert not out.exists()
    assert main(["run", "--set", "runs=1", "--out", str(tmp_path / "missing" / "x.csv")]) == 2
    assert list(tmp_path.iterdir()) == []


def test_calibrate_zero_samples_is_an_error(tmp_path):
    with pytest.raises(ConfigError):
        cmd_calibrate(ScenarioConfig(), 0, tmp_path / "e.csv")


def test_calibrate_default_layout(tmp_path):
    a = cmd_calibrate(ScenarioConfig(seed=1), 10_000, tmp_path / "a.csv")
    b = cmd_calibrate(ScenarioConfig(seed=2), 10_000, tmp_path / "b.csv")
    assert len(a.rows) == 10
    ea = np.array([r[1] for r in a.rows])
    eb = np.array([r[1] for r in b.rows])
    assert np.all((ea >= EPS_CLAMP) & (ea <= 1 - EPS_CLAMP))
    assert np.max(np.abs(ea - eb)) < 0.05
    assert read_table(tmp_path / "a.csv").header == ("index", "epsilon", "samples")


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "femtonet", "calibrate", "--samples", "100", "--set", "m_femto=1",
         "--set", "femto_layout=explicit", "--set", "femto_positions=200:0", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(read_table(out).rows) == 2
