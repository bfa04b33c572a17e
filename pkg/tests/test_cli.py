import json

import pytest

from qlgca.cli import main
from qlgca.collisions import build_fhp_b234_circuit
from qlgca.textio import format_circuit


def run(tmp_path, *argv):
    return main([str(a) for a in argv])


def test_simulate_d1q3_example_row(tmp_path, capsys):
    out = tmp_path / "d1q3.txt"
    assert run(tmp_path, "simulate", "--model", "d1q3", "--steps", 1, "--out", out) == 0
    frames = out.read_text().split("# step ")
    assert frames[2].splitlines()[2] == "1 6 0 5 7 0"
    assert "conserved totals: True" in capsys.readouterr().out


def test_simulate_fhp_is_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert run(tmp_path, "simulate", "--model", "fhp", "--steps", 5, "--seed", 4,
                   "--out", p) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a_quantities.csv").read_bytes() == \
        (tmp_path / "b_quantities.csv").read_bytes()


def test_simulate_json_quantities(tmp_path):
    out = tmp_path / "t.txt"
    assert run(tmp_path, "simulate", "--model", "d1q2", "--steps", 3, "--format", "json",
               "--out", out) == 0
    series = json.loads((tmp_path / "t_quantities.json").read_text())
    assert [s["step"] for s in series] == [0, 1, 2, 3]


def test_simulate_lattice_file(tmp_path):
    lat = tmp_path / "lat.txt"
    lat.write_text("d1q3 6\n0 5 2 1 6 2\n")
    assert run(tmp_path, "simulate", "--lattice", lat, "--out", tmp_path / "o.txt") == 0


@pytest.mark.parametrize("text", ["d1q3 3\n0 9 1\n", "d1q3 4\n0 1 1\n", "bogus\n"])
def test_bad_lattice_is_input_error(tmp_path, capsys, text):
    lat = tmp_path / "lat.txt"
    lat.write_text(text)
    assert run(tmp_path, "simulate", "--lattice", lat, "--out", tmp_path / "o.txt") == 2
    assert "line" in capsys.readouterr().err


def test_wrong_model_lattice(tmp_path):
    lat = tmp_path / "lat.txt"
    lat.write_text("d1q2 2\n1 2\n")
    assert run(tmp_path, "simulate", "--model", "d1q3", "--lattice", lat,
               "--out", tmp_path / "o.txt") == 2


def test_missing_file_is_input_error(tmp_path):
    assert run(tmp_path, "simulate", "--lattice", tmp_path / "none.txt") == 2


@pytest.mark.parametrize("name", ["fhp-b234", "d1q3-qpe"])
def test_verify_builtin_circuits(tmp_path, capsys, name):
    out = tmp_path / "m.csv"
    assert run(tmp_path, "verify", "--circuit", name, "--out", out) == 0
    assert capsys.readouterr().out.startswith("PASS")
    assert out.exists()


def test_verify_corrupted_circuit_file(tmp_path, capsys):
    lines = format_circuit(build_fhp_b234_circuit()).splitlines()
    # drop the controlled Hadamard that creates the coin
    lines = [ln for ln in lines if not ln.startswith("H 7")]
    path = tmp_path / "bad.txt"
    path.write_text("\n".join(lines) + "\n")
    rc = run(tmp_path, "verify", "--circuit", "fhp-b234", "--circuit-file", path,
             "--out", tmp_path / "m.csv")
    assert rc == 1
    assert "first failing row 9" in capsys.readouterr().out


def test_verify_malformed_circuit_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("qubits 8\nregister cell 0 1 2 3 4 5\nFOO 1\n")
    assert run(tmp_path, "verify", "--circuit-file", path) == 2


def test_invariants_d1q3(tmp_path):
    out = tmp_path / "inv.json"
    assert run(tmp_path, "invariants", "--model", "d1q3", "--out", out) == 0
    data = json.loads(out.read_text())
    assert (data["rank"], data["invariant_count"]) == (14, 50)


def test_invariants_identity(tmp_path):
    out = tmp_path / "inv.json"
    assert run(tmp_path, "invariants", "--model", "fhp", "--collisions", "identity",
               "--out", out) == 0
    assert json.loads(out.read_text())["invariant_count"] == 4096


def test_invariants_bad_selection(tmp_path):
    assert run(tmp_path, "invariants", "--model", "fhp", "--collisions", "B5",
               "--out", tmp_path / "x.json") == 2


def test_qpe_dyadic(tmp_path, capsys):
    out = tmp_path / "q.csv"
    assert run(tmp_path, "qpe", "--model", "d1q3", "--convention", "dyadic", "--out", out) == 0
    assert "distinct modal outcomes 5" in capsys.readouterr().out
    assert (tmp_path / "q_histogram.csv").exists()


def test_qpe_json_and_states(tmp_path):
    out = tmp_path / "q.json"
    assert run(tmp_path, "qpe", "--model", "fhp", "--states", "1,2,4,8,16,32",
               "--format", "json", "--out", out) == 0
    assert sorted(json.loads(out.read_text())["rows"], key=int) == \
        ["1", "2", "4", "8", "16", "32"]


def test_qpe_bad_ancillas(tmp_path):
    assert run(tmp_path, "qpe", "--ancillas", 0) == 2
    assert run(tmp_path, "qpe", "--states", "x", "--out", tmp_path / "q.csv") == 2


def test_nogo(tmp_path):
    out = tmp_path / "n.json"
    assert run(tmp_path, "nogo", "--restarts", 20, "--out", out) == 0
    data = json.loads(out.read_text())
    assert data["infeasible"] and data["min_residual"] >= 0.1
    assert run(tmp_path, "nogo", "--restarts", 5, "--relaxed", "--out", out) == 0
    assert json.loads(out.read_text())["infeasible"] is False


def test_d1q2_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(tmp_path, "d1q2", "--n-space", 4, "--steps", 6, "--shots", 100,
                   "--init", "random", "--seed", 2, "--out", p) == 0
    assert a.read_bytes() == b.read_bytes()


def test_d1q2_bad_space(tmp_path):
    assert run(tmp_path, "d1q2", "--n-space", 0) == 2


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--model", "d2q9"])
    assert e.value.code == 2
