import json
import subprocess
import sys
from pathlib import Path

from etalecorr.cli import main

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def run(*args, tmp_path=None):
    argv = [a if a.startswith("-") or "." not in a or "/" in a else str(INSTANCES / a) for a in args]
    report = None
    if tmp_path is not None:
        report = tmp_path / "report.json"
        argv += ["--report", str(report)]
    code = main(argv)
    return code, (json.loads(report.read_text()) if report else None)


def test_kmap_of_identity_is_identity(tmp_path, capsys):
    code, rep = run("kmap", "identity_z2.correspondence", tmp_path=tmp_path)
    assert code == 0
    assert rep["k0_map"] == [[1, 0], [0, 1]]
    assert "PASS" in capsys.readouterr().out


def test_validate_pair_groupoid():
    assert run("validate", "pair2.groupoid")[0] == 0


def test_validate_bad_composition_fails_with_axiom(tmp_path):
    code, rep = run("validate", "bad_comp.groupoid", tmp_path=tmp_path)
    assert code == 1
    assert any(not c["passed"] for c in rep["checks"])
    assert "rng(gh)" in rep["checks"][0]["property"]


def test_missing_file_is_input_error(tmp_path):
    code, rep = run("validate", str(tmp_path / "none.groupoid"), tmp_path=tmp_path)
    assert code == 2
    assert "cannot read" in rep["error"]["message"]


def test_wrong_kind_is_input_error():
    assert run("kmap", "pair2.groupoid")[0] == 2


def test_morita_on_non_transitive_action(tmp_path, capsys):
    code, rep = run("morita", "z2_fixed.correspondence", tmp_path=tmp_path)
    assert code == 1
    assert rep["morita"] is False
    assert "rho-bar" in rep["checks"][0]["witness"]
    assert "not Morita" in capsys.readouterr().out


def test_k0_of_s3(tmp_path):
    code, rep = run("k0", "s3.groupoid", tmp_path=tmp_path)
    assert code == 0
    assert sorted(rep["k0"]["block_dimensions"]) == [1, 1, 2]


def test_cutoff_reports_fractions(tmp_path):
    code, rep = run("cutoff", "z2_flip.correspondence", tmp_path=tmp_path)
    assert code == 0
    assert rep["cutoffs"]["canonical"] == ["1/2"] * 4
    assert "homomorphism" not in rep["cutoffs"]
    code, rep = run("cutoff", "pair2_to_point.correspondence", tmp_path=tmp_path)
    assert rep["cutoffs"]["homomorphism"] == ["1", "1"]


def test_compose_writes_composite(tmp_path):
    out = tmp_path / "c.correspondence"
    code, _ = run("compose", "identity_z2.correspondence", "z2_to_point.correspondence", "-o", str(out))
    assert code == 0
    assert run("kmap", str(out))[0] == 0


def test_induce_and_crossprod(tmp_path):
    code, rep = run("induce", "pair2_to_point.correspondence", "point_scalars.bundle", tmp_path=tmp_path)
    assert code == 0 and rep["induced_fibre_dimensions"] == {"0": 1, "3": 1}
    code, rep = run("crossprod", "identity_z2.correspondence", "z2_column.equivariant", tmp_path=tmp_path)
    assert code == 0 and rep["k0_map"] == [[1, 0], [0, 1]]


def test_mismatched_groupoids_are_input_errors():
    assert run("induce", "z2_to_point.correspondence", "z2_flip.bundle")[0] == 2


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "cutoff", "--seed", "7", "--report", str(a)]) == 0
    assert main(["verify", "cutoff", "--seed", "7", "--report", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "time" not in a.read_text()


def test_verify_suite_file(tmp_path):
    code, rep = run("verify", str(INSTANCES / "functoriality.suite"), tmp_path=tmp_path)
    assert code == 0
    assert rep["settings"]["seed"] == 7
    assert rep["suites"][0]["instances"] >= 50


def test_unknown_suite_is_input_error():
    assert main(["verify", "nonsense"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "etalecorr", "kmap", str(INSTANCES / "pair2_to_point.correspondence")],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "[1]" in res.stdout
