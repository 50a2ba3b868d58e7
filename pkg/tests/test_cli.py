import json
import shutil
import subprocess
import sys

import pytest

from dpsgame import __version__
from dpsgame.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from dpsgame.config import MODES
from dpsgame.csvout import read

TWO = {"arrival_rates": [1, 1], "cost_rates": [2, 1], "service_rate": 4}

SMALL = {
    "compare": {"seed": 3, "sampling": {"num_classes": 3, "sample_count": 3}, "sweep": {"load": [0.8, 0.9]}},
    "metrics": {"instance": TWO, "sampling": {"num_classes": 3, "sample_count": 2}},
    "simulate": {"seed": 4, "instance": dict(TWO, priorities=[2, 1]), "tagged": [1.0],
                 "sim": {"replications": 4, "events": 20000}},
    "hte": {"instance": TWO},
    "exact-ne": {"instance": TWO},
    "class-ne": {"instance": TWO},
    "class-hte": {"instance": TWO},
    "limiting": {"limiting": {"cost": {"type": "uniform", "lo": 1, "hi": 3},
                              "arrival": {"type": "uniform", "lo": 0.5, "hi": 1.0},
                              "service_rate": 1.0, "class_counts": [5, 20], "cost_grid": [1, 2]}},
    "network": {"network": {"service_rates": [4, 5], "arrival_rates": [1, 1, 1], "cost_rates": [3, 2, 1],
                            "routes": [[0], [0, 1], [1]]}},
    "divergence-probe": {"divergence": {"ratios": [1, 10], "load": 0.9}},
}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_cli(tmp_path, mode, doc, *extra):
    out = tmp_path / f"{mode}.csv"
    code = main([mode, "--config", write(tmp_path, doc), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


@pytest.mark.parametrize("mode", MODES)
def test_every_mode_runs(tmp_path, mode):
    code, text = run_cli(tmp_path, mode, SMALL[mode])
    assert code == EXIT_OK
    meta, rows = read(text)
    assert meta["tool"] == "dpsgame" and meta["mode"] == mode and meta["version"] == __version__
    assert len(meta["config_sha256"]) == 64 and "PCG64" in meta["rng"]
    assert rows
    assert "\r" not in text


def test_hte_values(tmp_path):
    _, text = run_cli(tmp_path, "hte", SMALL["hte"])
    rows = read(text)[1]
    assert [float(r["priority"]) for r in rows] == pytest.approx([2 ** 1.5 - 2, 2 - 2 ** 0.5], rel=1e-15)
    assert all(r["converged"] == "true" for r in rows)


def test_metrics_worked_row(tmp_path):
    _, text = run_cli(tmp_path, "metrics", SMALL["metrics"])
    row = read(text)[1][0]
    assert float(row["system_cost"]) == pytest.approx(2 ** 0.5, rel=1e-15)
    assert float(row["optimal_cost"]) == pytest.approx(4 / 3, rel=1e-15)


def test_empty_metrics_is_header_only(tmp_path):
    code, text = run_cli(tmp_path, "metrics", {"sampling": {"sample_count": 0}})
    assert code == EXIT_OK
    lines = [ln for ln in text.splitlines() if not ln.startswith("# ")]
    assert len(lines) == 1 and lines[0].startswith("instance,")


def test_seed_override_changes_sampled_output(tmp_path):
    doc = SMALL["compare"]
    _, a = run_cli(tmp_path, "compare", doc)
    _, b = run_cli(tmp_path, "compare", doc, "--seed", "99")
    assert read(b)[0]["seed"] == "99" and read(a)[0]["seed"] == "3"
    assert read(a)[0]["config_sha256"] != read(b)[0]["config_sha256"]
    assert read(a)[1] != read(b)[1]


def test_repeat_runs_identical_and_threads_do_not_matter(tmp_path):
    doc = SMALL["compare"]
    _, a = run_cli(tmp_path, "compare", doc)
    _, b = run_cli(tmp_path, "compare", doc)
    _, c = run_cli(tmp_path, "compare", doc, "--threads", "2")
    assert a == b == c


def test_divergence_flag(tmp_path):
    _, text = run_cli(tmp_path, "divergence-probe", SMALL["divergence-probe"])
    rows = read(text)[1]
    assert [r["increasing_so_far"] for r in rows] == ["true", "true"]


@pytest.mark.parametrize("doc", [
    {"instance": {"arrival_rates": [1, 1], "cost_rates": [2, 1], "service_rate": 1.5}},   # unstable
    {"instance": {"arrival_rates": [1, 1], "cost_rates": [2, 1]}},                         # no mu or load
    {"instance": TWO, "bogus": 1},
    {"instance": TWO, "mode": "metrics"},
    {"instance": TWO, "seed": -1},
    {"instance": TWO, "solver": {"bracket": [2, 1]}},
    {"instance": dict(TWO, priorities=[1])},
])
def test_config_errors_exit_2(tmp_path, doc, capsys):
    code, _ = run_cli(tmp_path, "exact-ne", doc)
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_unreadable_files_exit_2(tmp_path):
    assert main(["hte", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["hte", "--config", str(bad)]) == EXIT_CONFIG


def test_bad_flags_exit_2(tmp_path):
    cfg = write(tmp_path, SMALL["hte"])
    for argv in (["hte"], ["nosuchmode", "--config", cfg], ["hte", "--config", cfg, "--seed", "-3"],
                 ["hte", "--config", cfg, "--threads", "0"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == EXIT_CONFIG


def test_solver_failure_exits_3(tmp_path, capsys):
    doc = {"instance": {"arrival_rates": [1, 2, 0.5], "cost_rates": [5, 2, 1], "load": 0.9},
           "solver": {"max_iterations": 1}}
    code, _ = run_cli(tmp_path, "exact-ne", doc)
    assert code == EXIT_SOLVER
    assert "solver failure" in capsys.readouterr().err


def test_stdout_when_no_out(tmp_path, capsys):
    assert main(["hte", "--config", write(tmp_path, SMALL["hte"])]) == EXIT_OK
    assert capsys.readouterr().out.startswith("# tool=dpsgame\n")


@pytest.mark.skipif(shutil.which("dpsgame") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = write(tmp_path, SMALL["hte"])
    out = subprocess.run(["dpsgame", "hte", "--config", cfg], capture_output=True, text=True)
    assert out.returncode == 0 and "job-HTE" in out.stdout


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, SMALL["hte"])
    out = subprocess.run([sys.executable, "-m", "dpsgame", "hte", "--config", cfg], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
