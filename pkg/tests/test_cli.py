import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hllab import XExp, witness
from hllab.cli import expand_range, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def test_classify():
    assert call_json("classify", "--p", "4", "--q", "4", "--a", "2", "--b", "2") == {
        "admissible": True,
        "on_boundary": True,
        "failed_constraints": [],
    }
    d = call_json("classify", "--p", "inf", "--q", "inf", "--a", "4/3", "--b", "4/3")
    assert d["admissible"] and d["on_boundary"]
    d = call_json("classify", "--p", "4", "--q", "4", "--a", "2", "--b", "199/100")
    assert "B_LOWER" in d["failed_constraints"]


def test_classify_reversed():
    a = call_json("classify", "--reversed", "--p", "8", "--q", "4", "--a", "4/3", "--b", "3")
    b = call_json("classify", "--p", "4", "--q", "8", "--a", "4/3", "--b", "3")
    assert a == b


@pytest.mark.parametrize(
    "argv",
    [
        ("classify", "--p", "4", "--q", "4", "--a", "2", "--b", "1.9999"),
        ("classify", "--p", "1", "--q", "4", "--a", "2", "--b", "2"),
        ("classify", "--p", "4", "--q", "4", "--a", "2"),
        ("blowup", "--p", "4", "--q", "4", "--r1", "2", "--r2", "2"),
        ("nonsense",),
        ("sweep", "--p", "4", "--q", "4", "--r1", "1", "--r2", "8", "--n-range", "9..3"),
        ("norm", "--input", "/nonexistent/file.json"),
    ],
)
def test_invalid_input_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == "" and err


def test_region_and_blowup():
    assert call_json("region", "--p", "4", "--q", "4", "--r1", "3/2", "--r2", "2") == {"region": "R1"}
    assert call_json("blowup", "--p", "4", "--q", "4", "--r1", "1", "--r2", "8") == {"region": "R3", "exponent": "1/4"}
    d = call_json("blowup", "--p", "2", "--q", "2", "--r1", "1", "--r2", "2")
    assert d == {"region": "PQ_DEGENERATE", "n1_exponent": "1/2", "n2_exponent": "1/2"}


def test_formula_commands():
    assert call_json("rp", "--k", "2", "--p1", "1", "--p2", "4/3") == {"exponent": "2"}
    assert call_json("inclusion", "--m", "2", "--r", "2", "--s", "1", "--u", "5/4") == {"exponent": "10"}
    d = call_json("tuple", "--m", "3", "--p", "4")
    assert d == {"tuple": ["4", "2", "2"], "reciprocal_sum": "5/4", "target": "5/4"}


def test_boundary_json_rows_reparse():
    d = call_json("boundary", "--p", "4", "--q", "4", "--samples", "5")
    rows = d["rows"]
    assert rows[0]["a_exact"] == "4/3" and rows[0]["b_min_exact"] == "4/1"
    assert any(r["a_exact"] == "2/1" and r["b_min_exact"] == "2/1" for r in rows)
    assert rows[-1]["a"] == "inf" and rows[-1]["a_exact"] == "inf"
    for r in rows:
        assert XExp(r["b_min_exact"]) >= 2


def test_boundary_single_and_csv():
    assert call_json("boundary", "--p", "4", "--q", "4", "--a", "3/2") == {"a": "3/2", "b_min": "3"}
    code, out, _ = call("boundary", "--p", "4", "--q", "4", "--csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["a", "b_min", "a_exact", "b_min_exact"]
    assert ["2.0", "2.0", "2/1", "2/1"] in rows


def test_norm_from_file(tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"order": 2, "dims": [2, 2], "data": [1, 1, 1, -1], "domain_exps": ["inf", "inf"]}))
    d = call_json("norm", "--input", str(path))
    assert d["value"] == 2.0 and d["method"] == "ENUMERATION"
    d = call_json("norm", "--input", str(path), "--method", "ascent")
    assert d["value"] == pytest.approx(2.0) and d["method"] == "ASCENT"
    plain = tmp_path / "t.json"
    plain.write_text(json.dumps({"order": 2, "dims": [2, 2], "data": [1, 0, 0, 1]}))
    d = call_json("norm", "--input", str(plain), "--p", "2")
    assert d["value"] == pytest.approx(1.0)


def test_norm_rejects_bad_count(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"order": 2, "dims": [2, 2], "data": [1, 2, 3], "domain_exps": ["2", "2"]}))
    assert call("norm", "--input", str(path))[0] == 2


def test_norm_roundtrip_with_library(tmp_path):
    f = witness("GAUSSIAN", 2, 5, seed=4, domain_exps=("3", "5/2"))
    path = tmp_path / "g.json"
    path.write_text(f.dumps())
    d = call_json("norm", "--input", str(path), "--multistarts", "4")
    from hllab import AscentConfig, estimate_norm

    assert d["value"] == estimate_norm(f, AscentConfig(multistarts=4)).value


def test_sweep_json_and_csv_deterministic():
    args = ("sweep", "--kind", "U", "--p", "4", "--q", "4", "--r1", "1", "--r2", "8", "--n-range", "8..512", "--geometric")
    d = call_json(*args)
    assert d["slope"] == pytest.approx(0.25, abs=1e-10) and d["predicted"] == "1/4" and d["region"] == "R3"
    c1, c2 = call(*args, "--csv")[1], call(*args, "--csv")[1]
    assert c1 == c2 and c1.splitlines()[0] == "n,value,trials,lo,hi" and len(c1.splitlines()) == 8


def test_ksz_command():
    d = call_json("ksz", "--m", "2", "--p", "inf", "--n-range", "4..6", "--trials", "2")
    assert d["predicted"] == "3/2" and len(d["points"]) == 3


def test_verify_exit_codes():
    code, out, _ = call("verify", "--m", "2", "--p", "5", "--n-range", "4..5", "--trials", "4", "--kind", "GAUSSIAN")
    d = json.loads(out)
    assert code == (3 if d["inconclusive"] else 0)
    assert d["total"] == 4
    assert call("verify", "--m", "2", "--p", "4", "--n-range", "4..5")[0] == 2


def test_verify_row_sup():
    d = call_json("verify", "--target", "row-sup", "--q", "4", "--n-range", "8..32", "--geometric", "--kind", "V")
    assert d["slope"] == pytest.approx(-0.25, abs=1e-12)


def test_output_is_strict_json():
    _, out, _ = call("boundary", "--p", "4", "--q", "4")
    json.loads(out, parse_constant=lambda c: pytest.fail(f"non-standard token {c}"))


def test_expand_range():
    assert expand_range((4, 8), False) == [4, 5, 6, 7, 8]
    assert expand_range((8, 100), True) == [8, 16, 32, 64]


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "hllab", "tuple", "--m", "4", "--p", "6"], capture_output=True, text=True, check=True
    )
    assert json.loads(out.stdout)["tuple"] == ["3", "2", "2", "2"]
