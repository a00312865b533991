import json

import pytest
from loguru import logger

from coinv.main import run
from coinv.services.bv_service import load_diagram
from coinv.services.generator_service import octagonal_pair


@pytest.fixture(autouse=True)
def reset_logger():
    yield
    logger.remove()


def invoke(capsys, *argv):
    status = run(list(argv))
    return status, capsys.readouterr().out


def test_predict(capsys):
    status, out = invoke(capsys, "predict", "--group", "2,4,6")
    assert status == 0
    assert out.strip() == "torsion: [2,2,2]"


def test_predict_json(capsys):
    status, out = invoke(capsys, "predict", "--group", "6,4", "--json")
    report = json.loads(out)
    assert status == 0
    assert report["command"] == "predict"
    assert report["payload"] == {"group": "6,4", "torsion": [2]}
    assert len(report["inputs_digest"]) == 64


def test_predict_bad_group(capsys):
    status, out = invoke(capsys, "predict", "--group", "2,x")
    assert status == 1
    assert out.startswith("error:")


def test_snf(capsys, data_dir):
    status, out = invoke(capsys, "snf", str(data_dir / "diag_2_3.mat"))
    assert status == 0
    assert out.strip().splitlines() == ["S: 1 6", "coker: free 0, torsion [6]"]


def test_snf_missing_file(capsys, tmp_path):
    status, out = invoke(capsys, "snf", str(tmp_path / "none.mat"))
    assert status == 1
    assert "Cannot read" in out


def test_torsion_standard(capsys):
    status, out = invoke(capsys, "torsion", "--group", "2,2")
    lines = out.strip().splitlines()
    assert status == 0
    assert "computed: [2]" in lines
    assert "predicted: [2]" in lines
    assert lines[-1] == "MATCH"


def test_torsion_fixture(capsys, data_dir):
    status, out = invoke(capsys, "torsion", "--data", str(data_dir / "z2z4_random.fixture"))
    assert status == 0
    assert "labels: |A|=3 |B|=2" in out
    assert "torsion iso to standard: yes" in out


def test_torsion_random_is_deterministic(capsys):
    argv = ("torsion", "--group", "2,4", "--random", "2", "--seed", "7", "--json")
    first = invoke(capsys, *argv)
    second = invoke(capsys, *argv)
    assert first == second
    report = json.loads(first[1])
    assert len(report["payload"]["random"]) == 2
    assert report["payload"]["verdict"] == "MATCH"


def test_torsion_needs_input(capsys, data_dir):
    status, out = invoke(capsys, "torsion")
    assert status == 1
    assert "--group or --data" in out
    status, out = invoke(capsys, "torsion", "--group", "2,2", "--data", str(data_dir / "z2z4_random.fixture"))
    assert status == 1


def test_skew(capsys, data_dir):
    status, out = invoke(
        capsys, "skew", "--x", str(data_dir / "octagonal_x.bv"), "--y", str(data_dir / "octagonal_y.bv"),
        "--levels", "3",
    )
    assert status == 0
    assert out.strip().splitlines()[-1] == "MATCH"
    assert "z-system ranks: x 2 2 2 2 | y 2 2 2 2" in out


def test_skew_too_many_levels(capsys, data_dir):
    x = str(data_dir / "octagonal_x.bv")
    status, out = invoke(capsys, "skew", "--x", x, "--y", x, "--levels", "9")
    assert status == 1
    assert out.startswith("error:")


def test_example_octagonal_writes_files(capsys, tmp_path):
    status, out = invoke(capsys, "example", "octagonal", "--levels", "3", "--out-dir", str(tmp_path))
    assert status == 0
    assert "long tower heights: 1 2 5" in out
    dX, dY = octagonal_pair(3)
    assert load_diagram(tmp_path / "x.bv") == dX
    assert load_diagram(tmp_path / "y.bv") == dY


def test_example_rotation(capsys):
    status, out = invoke(capsys, "example", "rotation", "--digits", "1,3,2", "--levels", "4", "--group", "3", "--json")
    report = json.loads(out)
    assert status == 0
    assert report["payload"]["heights"] == [1, 1, 4, 9]
    assert report["payload"]["predicted"] == []
    assert report["payload"]["verdict"] == "MATCH"


def test_example_rotation_bad_group(capsys):
    status, out = invoke(capsys, "example", "rotation", "--group", "2,2,2")
    assert status == 1
    assert out.startswith("error:")


def test_classify_witness(capsys, data_dir):
    status, out = invoke(capsys, "classify", str(data_dir / "z2z2_witness.elem"), "--group", "2,2")
    assert status == 0
    assert out.strip().splitlines() == ["group: 2,2", "order: 2", "residue (1,2): 1", "not in A + B"]


def test_classify_relation(capsys, tmp_path):
    element = tmp_path / "rel.elem"
    element.write_text("p1 p1 : e - (1,0)\np1 p2 : e - (0,1)\n")
    status, out = invoke(capsys, "classify", str(element), "--group", "2,2", "--json")
    report = json.loads(out)
    assert status == 0
    assert report["payload"]["residues"] == {"1,2": 0}
    assert report["payload"]["zero"] is True


def test_classify_non_torsion(capsys, tmp_path):
    element = tmp_path / "unit.elem"
    element.write_text("p1 p2 : e\n")
    status, out = invoke(capsys, "classify", str(element), "--group", "2,2")
    assert status == 1
    assert "not torsion" in out


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0
    assert "coinv" in capsys.readouterr().out


@pytest.mark.parametrize(
    "text, expected",
    [
        ("0 0\n0 0\n", ["S: 0 0", "coker: free 2, torsion []"]),
        ("2 4\n6 8\n", ["S: 2 4", "coker: free 0, torsion [2,4]"]),
    ],
)
def test_snf_small_matrices(capsys, tmp_path, text, expected):
    matrix = tmp_path / "m.mat"
    matrix.write_text(text)
    status, out = invoke(capsys, "snf", str(matrix))
    assert status == 0
    assert out.strip().splitlines() == expected


@pytest.mark.parametrize("group, expected", [("12", "torsion: []"), ("2,2", "torsion: [2]")])
def test_predict_values(capsys, group, expected):
    assert invoke(capsys, "predict", "--group", group) == (0, expected + "\n")


def test_torsion_cyclic(capsys):
    status, out = invoke(capsys, "torsion", "--group", "5")
    assert status == 0
    assert "computed: []" in out


def test_torsion_non_generating_fixture(capsys, tmp_path):
    fixture = tmp_path / "bad.fixture"
    fixture.write_text("group: 2,2\nA: a1=(1,0) a2=(1,0)\nB: b1=(1,0) b2=(0,1)\n")
    status, out = invoke(capsys, "torsion", "--data", str(fixture))
    assert status == 1
    assert "does not generate" in out
