import csv
import json
import os

import pytest

from pinlab.cli import main
from pinlab.config import ConfigError, load_config, parse_config_text

GAMMA = 0.158138893148468785
KAPPA = 0.0104664264885428969


def run(tmp_path, *args, sub="out"):
    return main(list(args) + ["--out", str(tmp_path / sub)])


def rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_plan_thm2(tmp_path):
    assert run(tmp_path, "plan-thm2", "--beta", "3.5", "--epsilon", "0.5") == 0
    body = json.loads((tmp_path / "out" / "plan-thm2.json").read_text())
    plan = body["header"]["plan"]
    assert plan["feasible"] is True and plan["m"] == 383
    assert plan["gamma"] == pytest.approx(GAMMA, rel=1e-9)
    assert plan["kappa"] == pytest.approx(KAPPA, rel=1e-9)
    assert body["footer"]["all_slacks_positive"] is True


def test_plan_thm2_infeasible_reported(tmp_path):
    assert run(tmp_path, "plan-thm2", "--beta", "2") == 0
    body = json.loads((tmp_path / "out" / "plan-thm2.json").read_text())
    assert body["footer"]["feasible"] is False


def test_determinism(tmp_path):
    args = ["tightness", "--n-values", "60,120", "--N-values", "5,20", "--replicas", "4",
            "--seed", "99"]
    assert run(tmp_path, *args, sub="a") == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "2"]) == 0
    for name in ("tightness.json", "tightness.csv", "tightness_replicas.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert len(rows(tmp_path / "a" / "tightness.csv")) == 4
    assert len(rows(tmp_path / "a" / "tightness_replicas.csv")) == 4 * 4


def test_validation_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "kernel-check", "--alpha", "-1") == 2
    assert "alpha" in capsys.readouterr().err
    assert run(tmp_path, "partition", "--beta", "nope") == 2
    assert "beta" in capsys.readouterr().err
    assert run(tmp_path, "partition", "--n", "99999") == 2
    assert run(tmp_path, "series", "--mode", "sideways") == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_budget_exit_code(tmp_path, capsys):
    assert run(tmp_path, "partition", "--n", "400", "--budget", "1000") == 3
    assert "budget" in capsys.readouterr().err
    assert run(tmp_path, "decay-check", "--n-values", "4000", "--count-budget", "100") == 3


@pytest.mark.skipif(os.geteuid() == 0, reason="root can write anywhere")
def test_unwritable_output(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    assert main(["plan-thm2", "--out", str(locked / "x")]) == 2


def test_output_path_is_a_file(tmp_path, capsys):
    f = tmp_path / "file"
    f.write_text("")
    assert main(["plan-thm2", "--out", str(f)]) == 2
    assert "out" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# kernel\nalpha = 0.5\nbeta = 0.5\nn = 30  # small\nseed = 7\n")
    assert main(["partition", "--config", str(cfg), "--n", "20",
                 "--out", str(tmp_path / "o")]) == 0
    body = json.loads((tmp_path / "o" / "partition.json").read_text())
    assert body["header"]["config"]["n"] == 20 and body["header"]["config"]["seed"] == 7
    assert len(body["rows"]) == 21
    bad = tmp_path / "bad.cfg"
    bad.write_text("alpha 0.5\n")
    assert main(["partition", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["partition", "--config", str(tmp_path / "missing.cfg"),
                 "--out", str(tmp_path / "o")]) == 2


def test_config_parser():
    v = parse_config_text("n_values = 1, 2,3\nplanted = yes\nseed = 0x10\n")
    assert v == {"n_values": [1, 2, 3], "planted": True, "seed": 16}
    with pytest.raises(ConfigError) as exc:
        parse_config_text("colour = red\n")
    assert exc.value.field == "colour"
    with pytest.raises(ConfigError) as exc:
        load_config("partition", overrides={"epsilon": "1.5"})
    assert exc.value.field == "epsilon"


@pytest.mark.parametrize("args,expected_rows", [
    (["kernel-check", "--n-values", "1,2,10"], 3),
    (["partition", "--n", "25"], 26),
    (["sample-paths", "--n", "25", "--samples", "30", "--boundary", "constrained"], 30),
    (["tightness-constrained", "--n-values", "40", "--N-values", "3,10", "--M-values", "3,10",
      "--replicas", "3"], 4),
    (["log-returns", "--n-values", "60,120", "--replicas", "3", "--u", "0.5", "--gamma", "0.6",
      "--beta", "1.0", "--h", "-0.3", "--nu-values", "0.5,1"], 4),
    (["decay-check", "--n-values", "100,200", "--b", "0.1", "--C1", "3"], 2),
    (["free-energy", "--n-values", "100,200", "--replicas", "3"], 2),
    (["series", "--n-max", "80", "--N-values", "0,2,5"], 3),
    (["series", "--mode", "plateau", "--n-max", "100", "--n-small", "50", "--replicas", "3"], 1),
    (["series", "--mode", "symmetry", "--depth", "50", "--replicas", "20"], 1),
])
def test_every_command_runs(tmp_path, args, expected_rows):
    assert run(tmp_path, *args) == 0
    stem = args[0]
    out = tmp_path / "out"
    assert len(rows(out / f"{stem}.csv")) == expected_rows
    body = json.loads((out / f"{stem}.json").read_text())
    assert set(body) == {"header", "rows", "footer"}
    assert body["header"]["config"]
    reps = out / f"{stem}_replicas.csv"
    if reps.exists():
        n_rep = int(body["header"]["config"].get("replicas", 1))
        assert len(rows(reps)) == expected_rows * n_rep or stem == "series"


def test_kernel_check_passes(tmp_path):
    assert run(tmp_path, "kernel-check") == 0
    body = json.loads((tmp_path / "out" / "kernel-check.json").read_text())
    assert body["footer"]["pass"] is True


def test_sample_paths_constrained_contain_n(tmp_path):
    assert run(tmp_path, "sample-paths", "--n", "30", "--boundary", "constrained") == 0
    assert all(int(r["last"]) == 30 for r in rows(tmp_path / "out" / "sample-paths.csv"))


def test_svg_plots(tmp_path):
    assert run(tmp_path, "tightness", "--n-values", "40,80", "--N-values", "2,8",
               "--replicas", "2", "--plot", "true") == 0
    svg = (tmp_path / "out" / "tightness_vs_N.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg
    assert (tmp_path / "out" / "tightness_vs_n.svg").exists()
