import csv
import io
import json
import shutil
import subprocess

import numpy as np
import pytest

from opcap.cli import DEFAULT_SEED, main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_check_comparison_example():
    code, text = run("check", "comparison", "--family", "group-random-unitary", "--group", "S3",
                     "--trials", "50", "--p", "2", "--seed", "7")
    assert code == 0
    line = text.strip().splitlines()[0]
    assert line.startswith("PASS")
    assert float(line.split("worst=")[1]) >= -1e-9


def test_bounds_pauli_numerics_example():
    code, text = run("bounds", "--family", "pauli", "--dim", "3", "--f", "random:11", "--numerics",
                     "--restarts", "4", "--json")
    assert code == 0
    d = json.loads(text)
    assert d["numerics"]["mutual"] == pytest.approx(d["tau_flnf"], abs=1e-5)
    assert d["ordering_violations"] == [] and d["bracket_violations"] == []
    assert d["units"] == "nats"


def test_bounds_text_table():
    code, text = run("bounds", "--family", "group-random-unitary", "--group", "D8", "--f", "random:3")
    assert code == 0
    rows = {line[:28].strip(): line[28:] for line in text.splitlines()}
    assert float(rows["q_upper"]) - float(rows["tau_flnf"]) == pytest.approx(np.log(2), abs=1e-10)


def test_bits_divides_by_ln2():
    _, nats = run("bounds", "--family", "pauli", "--dim", "2", "--f", "random:2", "--json")
    _, bits = run("bounds", "--family", "pauli", "--dim", "2", "--f", "random:2", "--json", "--bits")
    n, b = json.loads(nats), json.loads(bits)
    assert b["units"] == "bits"
    assert b["tau_flnf"] == pytest.approx(n["tau_flnf"] / np.log(2), rel=1e-10)
    assert b["mu"] == n["mu"]


def test_sweep_figure2_example(tmp_path):
    path = tmp_path / "fig2.csv"
    code, text = run("sweep", "figure2", "--d", "5", "--steps", "101", "-o", str(path))
    assert code == 0 and "101 rows" in text
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["q", "convexity_line", "hashing", "upper"]
    assert len(rows) == 102
    assert float(rows[1][0]) == pytest.approx(1 / 6)
    assert abs(float(rows[1][3])) < 1e-12
    assert all(float(r[3]) >= float(r[2]) - 1e-9 for r in rows[1:])


def test_sweep_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "family", "--family", "pauli", "--dim", "2", "--f", "random:5", "--steps", "5"]
    assert run(*argv, "-o", str(a))[0] == 0
    assert run(*argv, "-o", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(*argv)[1] == a.read_text()


def test_check_output_is_reproducible():
    argv = ("check", "cqe", "--family", "group-random-unitary", "--group", "Z3", "--ensembles", "5")
    assert run(*argv) == run(*argv)


def test_sweep_other_kinds():
    code, text = run("sweep", "dephasing", "--steps", "3")
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0 and rows[0][0] == "q" and len(rows) == 4
    code, text = run("sweep", "figure1", "--m", "16", "--steps", "5")
    assert code == 0 and text.splitlines()[0] == "t,I_ln_dM,II_ln_dM_plus_t,III_t,IV_half_ln_m_plus_t"


def test_irreps():
    code, text = run("irreps", "--group", "S4")
    assert code == 0 and "dims 1 1 2 3 3" in text and "burnside True" in text
    code, text = run("irreps", "--group", "Q8", "--json")
    assert json.loads(text)["dims"] == [1, 1, 1, 1, 2]


def test_optimize_table():
    code, text = run("optimize", "--family", "dephasing", "--q", "0.3", "--kind", "coherent", "--restarts", "3")
    assert code == 0
    best = float(text.split("best ")[1].split()[0])
    from opcap.bounds import dephasing_formula

    assert best == pytest.approx(dephasing_formula(0.3), abs=1e-3)
    assert text.count("random") == 3


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"family": "pauli", "dim": 3, "f": "random:4"}))
    _, from_file = run("bounds", "--config", str(cfg), "--json")
    assert json.loads(from_file)["m"] == 3
    _, overridden = run("bounds", "--config", str(cfg), "--dim", "2", "--json")
    assert json.loads(overridden)["m"] == 2


def test_seed_precedence(tmp_path, monkeypatch):
    from opcap.cli import build_parser, resolve

    def seed_of(*argv):
        return resolve(build_parser().parse_args(["irreps", *argv]))["seed"]

    monkeypatch.delenv("OPCAP_SEED", raising=False)
    assert seed_of() == DEFAULT_SEED
    monkeypatch.setenv("OPCAP_SEED", "0x10")
    assert seed_of() == 16
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5}))
    assert seed_of("--config", str(cfg)) == 5
    assert seed_of("--config", str(cfg), "--seed", "9") == 9


@pytest.mark.parametrize("argv", [
    ("bounds",),
    ("bounds", "--family", "pauli", "--dim", "0"),
    ("bounds", "--family", "group-schur", "--group", "X9"),
    ("bounds", "--family", "pauli", "--f", "[1, 2]"),
    ("check", "cqe"),
    ("check", "comparison", "--family", "pauli", "--p", "abc"),
    ("sweep", "figure2", "--d", "1"),
    ("bounds", "--family", "nope"),
    ("frobnicate",),
])
def test_config_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_bad_config_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("bounds", "--config", str(bad))[0] == 2
    bad.write_text(json.dumps({"familly": "pauli"}))
    assert run("bounds", "--config", str(bad))[0] == 2
    assert run("bounds", "--config", str(tmp_path / "missing.json"))[0] == 2


@pytest.mark.skipif(shutil.which("opcap") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["opcap", "irreps", "--group", "D8"], capture_output=True, text=True)
    assert proc.returncode == 0 and "d_max 2" in proc.stdout
    proc = subprocess.run(["opcap", "bounds"], capture_output=True, text=True)
    assert proc.returncode == 2 and "family" in proc.stderr


def test_check_all_default_suite():
    code, text = run("check", "all", "--restarts", "3")
    lines = text.strip().splitlines()
    assert code == 0, text
    assert len(lines) == 7 * 7 and all(line.startswith("PASS") for line in lines)
