import json
import subprocess
import sys

import pytest

from trotterqpe.cli import main, parse_int_list

SMALL_RUNS = {
    "generate": ["--n", "4", "--seed", "3"],
    "diag": ["--n", "3", "--seed", "1"],
    "overlap": ["--n", "3", "--state-seed", "2"],
    "overlap-avg": ["--n", "3..4", "--instances", "3"],
    "digitization": ["--n", "3,4", "--m", "1..6"],
    "trotter-error": ["--k", "1,2", "--r", "1,2"],
    "qpe-run": ["--m", "3", "--r", "2", "--shots", "500", "--state", "random_u3"],
    "sweep-r": ["--m", "3", "--r", "1,2", "--shots", "300"],
    "sweep-t": ["--m", "4", "--r", "1", "--points", "3", "--shots", "300"],
    "gate-count": ["--k", "1,2", "--r", "1"],
}


def data_files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())
            if not p.name.endswith(".meta.json")}


def run_twice(tmp_path, sub, extra):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main([sub, "--out", str(out), "--jobs", "1", *extra]) == 0
        outs.append(data_files(out))
    return outs


@pytest.mark.parametrize("sub", sorted(SMALL_RUNS))
def test_subcommand_is_deterministic(tmp_path, sub, capsys):
    a, b = run_twice(tmp_path, sub, SMALL_RUNS[sub])
    assert a and a == b
    summary = capsys.readouterr().out.strip().splitlines()
    assert len(summary) == 2 and summary[0] == summary[1]


def test_meta_sidecar_written(tmp_path):
    assert main(["diag", "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "spectrum_n3_seed0.json.meta.json").read_text())
    assert "written_at" in meta
    payload = json.loads((tmp_path / "spectrum_n3_seed0.json").read_text())
    assert payload["E0"] == pytest.approx(-5.0)
    assert payload["ground_degeneracy"] == 2


def test_csv_carries_config_header(tmp_path):
    assert main(["gate-count", "--out", str(tmp_path), "--k", "2", "--r", "1"]) == 0
    lines = (tmp_path / "gate_count_n3_seed0_m3.csv").read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert json.loads(lines[0][len("# config: "):])["k"] == [2]
    assert lines[1] == "k,r,m_prec,gates_1q,gates_2q,total"


def test_generated_instance_reloads(tmp_path):
    assert main(["generate", "--out", str(tmp_path), "--n", "3", "--seed", "5"]) == 0
    path = tmp_path / "hamiltonian_n3_seed5.json"
    assert main(["diag", "--out", str(tmp_path / "d"), "--hamiltonian", str(path)]) == 0
    assert (tmp_path / "d" / "spectrum_n3_seed5.json").exists()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"subcommand": "gate-count", "k": [1], "r": [1, 2], "m": 3}))
    out = tmp_path / "o"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    rows = (out / "gate_count_n3_seed0_m3.csv").read_text().splitlines()[2:]
    assert len(rows) == 2
    assert main(["gate-count", "--config", str(cfg), "--out", str(out), "--r", "4"]) == 0
    rows = (out / "gate_count_n3_seed0_m3.csv").read_text().splitlines()[2:]
    assert [r.split(",")[1] for r in rows] == ["4"]


def test_env_output_directory(tmp_path):
    env_out = tmp_path / "env_out"
    proc = subprocess.run([sys.executable, "-m", "trotterqpe", "diag"], cwd=tmp_path,
                          env={"TROTTERQPE_OUT": str(env_out), "PATH": ""},
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (env_out / "spectrum_n3_seed0.json").exists()
    assert "E0=-5" in proc.stdout


def test_error_exit_codes(tmp_path, capsys):
    assert main(["diag", "--out", str(tmp_path), "--n", "1"]) == 2
    assert main(["diag", "--out", str(tmp_path), "--n", "11"]) == 3
    assert main(["qpe-run", "--out", str(tmp_path), "--n", "10", "--m", "5"]) == 3
    assert main(["sweep-t", "--out", str(tmp_path), "--m", "3"]) == 2
    assert main(["no-such-command"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["diag", "--out", str(blocker / "sub")]) == 4
    err = capsys.readouterr().err
    assert "size guard" in err and "output" in err


def test_parse_int_list():
    assert parse_int_list("3..6") == [3, 4, 5, 6]
    assert parse_int_list("1,4..5") == [1, 4, 5]
