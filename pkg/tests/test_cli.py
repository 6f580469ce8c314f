import csv
import io
import json
import subprocess
import sys

import pytest

from crtnc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_demo_text(capsys):
    code, out, _ = run(capsys, "demo")
    assert code == 0
    assert "c -> d   [46 | 7,11]" in out
    assert "solves x = 200 (mod 231)" in out
    assert out.count("Full(value=200)") == 2


def test_demo_json(capsys):
    _, out, _ = run(capsys, "demo-butterfly", "--format", "json", "--message", "0")
    data = json.loads(out)
    edges = {(e["from"], e["to"]): e for e in data["edges"]}
    assert edges[("s", "a")]["packet"] == "[0 | 3,11]"
    assert len(data["receivers"]) == 2


def test_table1_csv(capsys):
    _, out, _ = run(capsys, "table1")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["r", "R*"]
    assert [r[1] for r in rows[1:]] == ["0.40", "0.60", "0.75", "0.84", "0.90", "0.94", "0.96"]


def test_overhead(capsys):
    _, out, _ = run(capsys, "overhead", "--format", "json")
    data = json.loads(out)
    assert data["vector_head_bytes"] == 50 and data["crt_head_bytes"] == 4


def test_overhead_bad_field(capsys):
    code, _, err = run(capsys, "overhead", "--receivers", "20", "--q", "16")
    assert code == 1 and "error" in err


def test_table2_small(capsys):
    _, out, err = run(capsys, "table2", "--M", "12", "--L", "1", "--seeds", "2", "--policy", "per-edge")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:3] == ["M", "L", "seed"] and rows[0][-1] == "R'"
    assert len(rows[0]) == 14
    assert [r[2] for r in rows[1:]] == ["0", "1", "mean"]
    assert err == ""  # no reference value for this size


def test_table2_json_reports_tolerance(capsys):
    _, out, _ = run(capsys, "table2", "--M", "200", "--L", "5", "--seeds", "1", "--policy", "per-edge",
                    "--path", "fast", "--format", "json")
    data = json.loads(out)
    (cmp,) = data["comparison"]
    assert cmp["reference"] == 0.787 and cmp["within_tolerance"]


def test_simulate_csv(capsys):
    code, out, _ = run(capsys, "simulate", "--M0", "3", "--M", "4", "--L", "1", "--Mlast", "2", "--m", "10", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["receiver", "in_degree", "t", "R*"] and len(rows) == 3


def test_simulate_explicit_messages(capsys):
    code, out, _ = run(capsys, "simulate", "--M0", "1", "--M", "3", "--L", "1", "--Mlast", "2",
                       "--m", "8", "--messages", "999", "--format", "json")
    data = json.loads(out)
    assert data["summary"]["recover_rate"] == 1.0


def test_simulate_wrong_message_count(capsys):
    code, _, err = run(capsys, "simulate", "--M0", "2", "--M", "3", "--L", "1", "--Mlast", "2",
                       "--messages", "1")
    assert code == 1 and "expected 2" in err


def test_gen_topology_and_simulate_file(tmp_path, capsys):
    path = tmp_path / "net.txt"
    assert main(["gen-topology", "--M0", "2", "--M", "3", "--L", "2", "--Mlast", "2", "-o", str(path)]) == 0
    assert path.read_text().startswith("levels: 2 3 3 2")
    code, out, _ = run(capsys, "simulate", "--topology", str(path), "--m", "9", "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 3


def test_replay_is_byte_identical(tmp_path):
    first = tmp_path / "a.csv"
    assert main(["table2", "--M", "15", "--L", "2", "--seeds", "2", "--policy", "per-edge", "-o", str(first)]) == 0
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "table2" and manifest["seed"] == 0
    second = tmp_path / "b.csv"
    assert main(["replay", str(tmp_path / "a.csv.manifest.json"), "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_bad_flag_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["table2", "--policy", "sometimes"])
    assert exc.value.code != 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "crtnc", "table1", "--format", "json"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)[0]["r"] == 1
