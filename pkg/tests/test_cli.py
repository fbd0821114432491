import csv
import json
import shutil

import pytest

from inls_lab.cli import main, load_config, ConfigError, run_dir_name

MODEL = "[model]\ndim = 3\na = 0.5\nb = 0.5\nalpha = {alpha}\nlam = {lam}\n"


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def model(alpha=2, lam=1):
    return MODEL.format(alpha=alpha, lam=lam)


def test_ground_ok(tmp_path):
    cfg = write(tmp_path, model())
    assert main(["ground", "--config", cfg, "--output", str(tmp_path / "o")]) == 0
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert {"mass", "kinetic", "potential", "energy", "C_a", "thresholds", "residuals",
            "solver_meta"} <= set(s)
    assert s["thresholds"]["regime"] == "intercritical"
    assert (tmp_path / "o" / "profile.txt").exists()


def test_ground_above_energy_critical(tmp_path, capsys):
    cfg = write(tmp_path, model(alpha=4))
    assert main(["ground", "--config", cfg, "--output", str(tmp_path / "o")]) == 1
    assert "HypothesisViolation" in capsys.readouterr().err


def test_ground_iteration_cap(tmp_path):
    cfg = write(tmp_path, model() + "[solver]\nmax_bisect = 1\n")
    assert main(["ground", "--config", cfg, "--output", str(tmp_path / "o")]) == 2


def test_unknown_key_names_line(tmp_path):
    cfg = write(tmp_path, model() + "[solver]\nmax_bisekt = 3\n")
    with pytest.raises(ConfigError, match=r":8: solver.max_bisekt: unknown key"):
        load_config(cfg)
    assert main(["ground", "--config", cfg]) == 1


@pytest.mark.parametrize("text", ["[model]\ndim = 3\n", "no section here\n",
                                  MODEL.format(alpha=2, lam=1) + "[grid]\nM = lots\n",
                                  MODEL.format(alpha=2, lam=1) + "[weird]\nx = 1\n"])
def test_malformed_configs(tmp_path, text):
    cfg = write(tmp_path, text)
    with pytest.raises(ConfigError):
        load_config(cfg)
    assert main(["pairs", "--config", cfg, "--output", str(tmp_path / "o")]) == 1


EVOLVE = "[grid]\nM = 1024\nr_max = 20\n[evolution]\ndt = 2e-3\nt_end = {t_end}\n"


def test_evolve_defocusing(tmp_path):
    cfg = write(tmp_path, model(lam=-1) + EVOLVE.format(t_end=0.1))
    out = tmp_path / "o"
    assert main(["evolve", "--config", cfg, "--output", str(out)]) == 0
    rows = list(csv.reader(open(out / "trajectory.csv")))
    assert rows[0] == ["t", "mass", "energy", "h1a", "kinetic", "linf", "V", "Vp", "Vpp", "status"]
    assert rows[-1][-1] == "ReachedTEnd"
    # 17 significant digits round-trip
    x = rows[1][1]
    assert float(format(float(x), ".17g")) == float(x)
    assert len(x.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 17
    assert json.loads((out / "summary.json").read_text())["status"] == "ReachedTEnd"


def test_evolve_determinism(tmp_path):
    cfg = write(tmp_path, model(lam=-1) + EVOLVE.format(t_end=0.05))
    main(["evolve", "--config", cfg, "--output", str(tmp_path / "a")])
    main(["evolve", "--config", cfg, "--output", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == \
        (tmp_path / "b" / "trajectory.csv").read_bytes()


NEG = ("[grid]\nM = 4096\nr_max = 20\n[evolution]\ndt = 1e-3\nt_end = 2\n"
       "weight = critical\nweight_R = 2\nblowup_linf_factor = 10\n"
       "[initial_data]\nkind = gaussian\namplitude = 8\n")


def test_evolve_negative_energy_blowup(tmp_path):
    cfg = write(tmp_path, model(alpha=1) + NEG)
    assert main(["evolve", "--config", cfg, "--output", str(tmp_path / "o")]) == 3
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert s["status"] == "BlowupDetected" and s["t_star"] > 0
    assert s["virial"]["holds_15E"]


def test_evolve_max_steps(tmp_path):
    cfg = write(tmp_path, model(lam=-1) + EVOLVE.format(t_end=1) + "max_steps = 1\n")
    assert main(["evolve", "--config", cfg, "--output", str(tmp_path / "o")]) == 4


def test_classify_negative_energy_agrees(tmp_path, capsys):
    cfg = write(tmp_path, model(alpha=1) + NEG + "[classify]\nevolve = true\n")
    assert main(["classify", "--config", cfg, "--output", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "BLOWUP_MASS_CRITICAL" in out and "BlowupDetected" in out and "agree: True" in out


def test_classify_half_q_agrees(tmp_path, capsys):
    text = (model(alpha=1) + "[grid]\nM = 2048\nr_max = 30\n[evolution]\ndt = 2e-3\nt_end = 1\n"
            "[initial_data]\nkind = ground_state\nc = 0.5\n[classify]\nevolve = true\n")
    cfg = write(tmp_path, text)
    assert main(["classify", "--config", cfg, "--output", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "GLOBAL_MASS_CRITICAL" in out and "ReachedTEnd" in out and "agree: True" in out


def test_classify_q_itself(tmp_path, capsys):
    text = model() + "[grid]\nM = 8192\nr_max = 30\n[initial_data]\nkind = ground_state\nc = 1\n"
    cfg = write(tmp_path, text)
    assert main(["classify", "--config", cfg, "--output", str(tmp_path / "o")]) == 0
    assert "NO_PREDICTION" in capsys.readouterr().out


def test_pairs(tmp_path, capsys):
    assert main(["pairs", "--config", write(tmp_path, model()), "--output", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "pairs.json").read_text())
    assert rep["all_pass"]
    code = main(["pairs", "--config", write(tmp_path, model(alpha=3), "b.ini"),
                 "--output", str(tmp_path / "p")])
    assert code != 0
    assert "(4-2b)/(N-2)" in capsys.readouterr().err


SWEEP = ("[grid]\nM = 512\nr_max = 15\n[evolution]\ndt = 5e-3\nt_end = 0.05\n"
         "[sweep]\na = 0.5, 1\namplitude = 0.5, 1\n")


def test_sweep_and_resume(tmp_path):
    cfg = write(tmp_path, model(lam=-1) + SWEEP)
    out = tmp_path / "sw"
    assert main(["sweep", "--config", cfg, "--output", str(out), "--workers", "2"]) == 0
    dirs = sorted(p.name for p in out.iterdir() if p.is_dir())
    assert len(dirs) == 4
    assert run_dir_name({"a": 0.5, "amplitude": 1}) in dirs
    first = (out / "phase.csv").read_bytes()
    rows = list(csv.reader(open(out / "phase.csv")))
    assert rows[0] == ["a", "b", "alpha", "amplitude", "prediction", "observed", "t_star_or_blank"]
    assert len(rows) == 5
    shutil.rmtree(out / dirs[1])
    assert main(["sweep", "--config", cfg, "--output", str(out), "--resume"]) == 0
    assert json.loads((out / "sweep.json").read_text())["executed"] == 1
    assert (out / "phase.csv").read_bytes() == first


def test_sweep_cap(tmp_path):
    cfg = write(tmp_path, model(lam=-1) + SWEEP + "cap = 3\n")
    assert main(["sweep", "--config", cfg, "--output", str(tmp_path / "sw")]) == 1


def test_log_level_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("INLS_LAB_LOG", "error")
    cfg = write(tmp_path, model(lam=-1) + EVOLVE.format(t_end=0.01))
    assert main(["evolve", "--config", cfg, "--output", str(tmp_path / "o")]) == 0
    assert "evolution finished" not in capsys.readouterr().err
