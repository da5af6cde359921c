import csv
import io
import json
import subprocess
import sys

import pytest

from perfectoid_tc import cli
from perfectoid_tc.cli import EXIT_FAIL, EXIT_OK, EXIT_PRECISION, EXIT_USAGE, ReportEnvelope, main, render


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_witt_passes(capsys):
    code, out = run(capsys, "witt", "--p", "2", "--length", "3")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["passed"] and rep["schema"] == 1
    assert all(a["precision"] for a in rep["assertions"])


def test_witt_rejects_non_prime(capsys):
    assert main(["witt", "--p", "1", "--length", "3"]) == EXIT_USAGE


def test_seeded_reports_are_identical(capsys):
    _, a = run(capsys, "witt", "--p", "3", "--length", "3", "--seed", "7")
    _, b = run(capsys, "witt", "--p", "3", "--length", "3", "--seed", "7")
    assert a == b


def test_ainf_examples(capsys):
    code, out = run(capsys, "ainf", "--model", "oc", "--p", "3", "--k", "3", "--N", "3")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert {a["name"]: a["passed"] for a in rep["assertions"]}["theta_xi_zero"]
    code, out = run(capsys, "ainf", "--model", "fp", "--p", "2")
    assert code == EXIT_OK
    assert main(["ainf", "--model", "oc", "--p", "2", "--k", "4", "--N", "3"]) == EXIT_USAGE


def test_tc_negative_degree_range(capsys):
    code, out = run(capsys, "tc", "--model", "fp", "--p", "3", "--k", "4", "--degrees", "-2..6")
    rep = json.loads(out)
    assert code == EXIT_OK
    orders = {g["degree"]: g["order"] for g in rep["results"]["groups"]}
    assert orders == {d: (81 if d in (0, -1) else 1) for d in range(-2, 7)}


def test_precision_exhaustion_exit_code(capsys):
    code = main(["tc", "--model", "oc", "--p", "2", "--h", "1", "--degrees", "0..8", "--samples", "2"])
    assert code == EXIT_PRECISION


def test_failed_assertion_exit_code(capsys, monkeypatch):
    def failing(cfg):
        rep = ReportEnvelope(cfg.command, cfg.to_json(), None, {})
        rep.check("deliberately_false", False, "exact")
        return rep

    monkeypatch.setitem(cli.COMMANDS, "witt", failing)
    code, out = run(capsys, "witt", "--p", "2")
    assert code == EXIT_FAIL
    assert json.loads(out)["passed"] is False


def test_bad_degree_range(capsys):
    assert main(["tc", "--degrees", "5..1"]) == EXIT_USAGE
    assert main(["tc", "--degrees", "oops"]) == EXIT_USAGE


def test_groupring_csv_and_table(capsys, tmp_path):
    table = tmp_path / "q8.json"
    q8 = {"order": 8, "table": _quaternion_table()}
    table.write_text(json.dumps(q8))
    out_file = tmp_path / "report.csv"
    code = main(["groupring", "--p", "3", "--q", "9", "--M", "4", "--format", "csv", "--table", str(table),
                 "--out", str(out_file)])
    assert code == EXIT_OK
    rows = dict(csv.reader(io.StringIO(out_file.read_text())))
    assert rows["command"] == "groupring"
    assert rows["results.table_group.order"] == "8"
    assert len([k for k in rows if k.startswith("results.table_group.classes[")]) == 5 * 3


def _quaternion_table():
    # elements: sign * unit with units 1, i, j, k indexed 0..3 and sign in {+1, -1}
    mult = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    elems = [(s, u) for s in (1, -1) for u in range(4)]
    index = {e: n for n, e in enumerate(elems)}
    out = []
    for s1, u1 in elems:
        row = []
        for s2, u2 in elems:
            s, u = mult[(u1, u2)]
            row.append(index[(s * s1 * s2, u)])
        out.append(row)
    return out


def test_render_json_is_sorted():
    rep = ReportEnvelope("x", {"b": 1, "a": 2}, None, {"z": [1, 2]})
    rep.check("ok", True, "exact")
    text = render(rep, "json")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text)["passed"] is True


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "perfectoid_tc", "groupring", "--p", "5", "--M", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "groupring"


@pytest.mark.parametrize("argv", [["bokstedt", "--p", "4"], ["groupring", "--p", "3", "--q", "8"]])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE
