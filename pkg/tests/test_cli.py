import csv
import io
import json

import pytest

from qisd.cli import main
from qisd.gf2core import SdpInstance


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "i.txt"
    assert main(["gen", "4", "2", "1", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_gen_roundtrip_and_deterministic(tmp_path, inst_file):
    other = tmp_path / "j.txt"
    main(["gen", "4", "2", "1", "--seed", "3", "--out", str(other)])
    assert inst_file.read_bytes() == other.read_bytes()
    inst = SdpInstance.read(inst_file)
    assert inst.to_text() == inst_file.read_text()
    assert inst.is_solution(inst.planted)


def test_gen_infeasible(tmp_path):
    assert main(["gen", "4", "5", "1", "--out", str(tmp_path / "x")]) == 1


def test_solve_prange(tmp_path, inst_file):
    out = tmp_path / "r.json"
    assert main(["solve", str(inst_file), "--algo", "prange", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["verified"] and rep["solution"]
    assert rep["config"]["algo"] == "prange"


def test_solve_quantum_sim_width(tmp_path, inst_file):
    out = tmp_path / "r.json"
    assert main(["solve", str(inst_file), "--algo", "quantum-sim", "--variant", "full",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["verified"]
    assert rep["stats"]["width"] == 15
    assert rep["resources"]["width"] == 15


def test_solve_width_limit(tmp_path, inst_file, capsys):
    code = main(["solve", str(inst_file), "--algo", "quantum-sim", "--variant", "full",
                 "--max-width", "10"])
    assert code == 2
    assert '"required_width": 15' in capsys.readouterr().err


def test_solve_unsolved_exit_code(tmp_path):
    path = tmp_path / "big.txt"
    main(["gen", "40", "20", "8", "--seed", "1", "--out", str(path)])
    assert main(["solve", str(path), "--algo", "prange", "--max-iters", "1",
                 "--out", str(tmp_path / "o.json")]) == 3


def test_solve_punctured_oracle(tmp_path):
    path = tmp_path / "p.txt"
    main(["gen", "20", "10", "2", "--seed", "5", "--out", str(path)])
    out = tmp_path / "r.json"
    assert main(["solve", str(path), "--algo", "punctured", "--delta", "0.5", "--p", "1",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    for key in ("algorithm", "n", "k", "omega", "delta", "alpha", "beta", "p",
                "outer_iterations", "inner_calls", "solved"):
        assert key in rep["stats"]
    assert rep["verified"]


def test_solve_trials_parallel_deterministic(tmp_path):
    path = tmp_path / "p.txt"
    main(["gen", "12", "6", "2", "--seed", "5", "--out", str(path)])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["solve", str(path), "--trials", "4", "--jobs", "2", "--out", str(a)])
    main(["solve", str(path), "--trials", "4", "--jobs", "1", "--out", str(b)])
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    strip = lambda r: [{k: v for k, v in t.items() if k != "elapsed_s"} for t in r["trials"]]
    assert strip(ra) == strip(rb)


def test_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("4 2 1\n11x1\n")
    assert main(["solve", str(bad)]) == 1
    assert "line" in capsys.readouterr().err


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 1


def test_simulate(tmp_path, inst_file):
    out = tmp_path / "s.json"
    assert main(["simulate", str(inst_file), "--shots", "200", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert sum(rep["histogram"].values()) == 200
    assert 0.0 <= rep["measured_success"] <= 1.0


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_estimate_mceliece_combined(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["estimate", "mceliece", "--algo", "combined", "--delta", "0.01,0.2",
                 "--out", str(out)]) == 0
    ts = [float(r["t"]) for r in _rows(out)]
    assert ts[0] == pytest.approx(0.92, abs=0.01)
    assert ts[1] == pytest.approx(0.69, abs=0.01)


def test_estimate_fulldistance_all_monotone_and_plot(tmp_path):
    out, png = tmp_path / "f.csv", tmp_path / "f.png"
    assert main(["estimate", "fulldistance", "--grid", "21", "--out", str(out),
                 "--plot", str(png)]) == 0
    rows = _rows(out)
    for algo in ("hybrid_prange", "punctured", "combined"):
        ts = [float(r["t"]) for r in rows if r["algorithm"] == algo]
        assert len(ts) == 21
        assert all(b <= a + 1e-9 for a, b in zip(ts, ts[1:]))
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_estimate_bike_punctured(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["estimate", "bike", "--algo", "punctured", "--delta", "0.01",
                 "--out", str(out)]) == 0
    assert float(_rows(out)[0]["t"]) == pytest.approx(0.87, abs=0.01)


def test_estimate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["estimate", "halfdistance", "--grid", "11", "--out", str(a)])
    main(["estimate", "halfdistance", "--grid", "11", "--out", str(b), "--jobs", "2"])
    assert a.read_bytes() == b.read_bytes()


def test_estimate_unknown_setting():
    assert main(["estimate", "rsa"]) == 1


@pytest.mark.parametrize("n, k, variant, width", [
    (5, 2, "width-optimized", 18),
    (4, 2, "depth-optimized", 15),
])
def test_resources(tmp_path, n, k, variant, width):
    out = tmp_path / "r.json"
    assert main(["resources", str(n), str(k), "--variant", variant, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["closed_form"]["width"] == width
    assert rep["built"]["width"] == width
    assert rep["widths_agree"] is True


def test_resources_unknown_variant():
    assert main(["resources", "4", "2", "--variant", "tiny"]) == 1


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "qisd", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "qisd" in res.stdout
