import csv
import io
import json
import subprocess
import sys

import pytest

from movoid.certificates import load_certificate
from movoid.cli import main, parse_range, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_table_csv(capsys):
    code, out, _ = run(capsys, "table", "--q", "2..5", "--r", "2..3", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 8
    assert list(rows[0]) == ["q", "r", "case", "residues", "lb_new", "lb_old", "admissible"]
    row = next(r for r in rows if (r["q"], r["r"]) == ("3", "3"))
    assert row["admissible"].split() == ["0", "4", "5", "8", "9", "13"]


def test_table_json(capsys):
    code, out, _ = run(capsys, "table", "--q", "3", "--r", "2", "--format", "json")
    assert code == 0
    (row,) = json.loads(out)
    assert row["lower_bound_new"] == 2 and row["nontrivial"] == [2]


def test_table_text_and_skips(capsys):
    code, out, _ = run(capsys, "table", "--q", "5..7", "--r", "2")
    assert code == 0
    assert len(out.strip().splitlines()) == 2      # 6 is skipped inside a range


def test_table_not_prime_power(capsys):
    code, _, err = run(capsys, "table", "--q", "6", "--r", "2")
    assert code == 2 and "NotAPrimePower" in err


def test_usage_errors(capsys):
    assert run(capsys, "table", "--q", "x..y", "--r", "2")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "search", "--q", "3", "--r", "2", "--m", "2", "--threads", "0")[0] == 2


def test_parse_range():
    assert parse_range("2..4") == [2, 3, 4]
    assert parse_range("2,7") == [2, 7]
    with pytest.raises(UsageError):
        parse_range("5..2")


def test_build(capsys, tmp_path):
    code, out, _ = run(capsys, "build", "--q", "3", "--r", "3", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["points"] == 1066 and d["lines_through_point"] == 112
    path = tmp_path / "all.cert"
    code, out, _ = run(capsys, "build", "--q", "3", "--r", "2", "--generators",
                       "--emit", str(path), "--format", "json")
    assert json.loads(out)["generators"] == 280
    assert load_certificate(path).m == 4


def test_build_cap(capsys):
    code, _, err = run(capsys, "build", "--q", "3", "--r", "3", "--max-points", "100")
    assert code == 3


def test_verify(capsys, fixtures_dir, tmp_path):
    code, out, _ = run(capsys, "verify", str(fixtures_dir / "q7_2_3ovoid.cert"), "--format", "json")
    assert code == 0 and json.loads(out)["size"] == 51
    lines = (fixtures_dir / "q7_2_3ovoid.cert").read_text().splitlines()
    bad = tmp_path / "bad.cert"
    bad.write_text("\n".join(lines[:-1]) + "\n")
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == 1 and "size law" in out
    bad.write_text("hello\nworld\n")
    assert run(capsys, "verify", str(bad))[0] == 2
    assert run(capsys, "verify", str(tmp_path / "missing.cert"))[0] == 2


def test_verify_one_system(capsys, fixtures_dir):
    code, out, _ = run(capsys, "verify", str(fixtures_dir / "q7_3_one_system.cert"),
                       "--format", "json")
    assert code == 0 and json.loads(out)["lines"] == 82


@pytest.mark.parametrize("q,m,size", [(2, 3, 51), (3, 4, 328)])
def test_reduce(capsys, tmp_path, q, m, size):
    out_path, spread = tmp_path / "o.cert", tmp_path / "s.cert"
    code, out, _ = run(capsys, "reduce", "--q", str(q), "--e", "2", "--r", "1",
                       "--out", str(out_path), "--spread", str(spread), "--format", "json")
    d = json.loads(out)
    assert code == 0 and (d["m"], d["size"]) == (m, size)
    assert d["one_system_lines"] == q ** 4 + 1
    assert load_certificate(out_path).m == m
    assert len(load_certificate(spread).lines) == q ** 4 + 1


def test_reduce_stdout(capsys):
    code, out, _ = run(capsys, "reduce", "--q", "2", "--e", "2", "--r", "1")
    assert code == 0 and out.splitlines()[1] == "claim=m-ovoid;m=3"


def test_reduce_from_source(capsys, tmp_path):
    src = tmp_path / "src.cert"
    run(capsys, "build", "--q", "4", "--r", "1", "--emit", str(src))
    code, out, _ = run(capsys, "reduce", "--q", "2", "--e", "2", "--r", "1", "--source", str(src),
                       "--format", "json")
    assert code == 0 and json.loads(out)["m"] == 3
    assert run(capsys, "reduce", "--q", "3", "--e", "2", "--r", "1", "--source", str(src))[0] == 2


def test_reduce_limits(capsys):
    # Q^-(11,2) has 2015 points but 1,640,925 generators, past the default cap
    assert run(capsys, "reduce", "--q", "2", "--e", "3", "--r", "1")[0] == 3
    assert run(capsys, "reduce", "--q", "2", "--e", "3", "--r", "1", "--max-points", "1000")[0] == 3
    assert run(capsys, "reduce", "--q", "2", "--e", "1", "--r", "1")[0] == 2


def test_search_json(capsys, tmp_path):
    emit = tmp_path / "h.cert"
    code, out, _ = run(capsys, "search", "--q", "3", "--r", "2", "--m", "2", "--threads", "1",
                       "--emit", str(emit), "--format", "json", "--expect", "found")
    d = json.loads(out)
    assert code == 0 and d["status"] == "found" and len(d["witness"]) == 56
    assert "elapsed" not in d
    assert load_certificate(emit).m == 2


def test_search_exit_codes(capsys):
    assert run(capsys, "search", "--q", "3", "--r", "2", "--m", "1")[0] == 2
    assert run(capsys, "search", "--q", "3", "--r", "2")[0] == 2
    code, out, _ = run(capsys, "search", "--q", "3", "--r", "2", "--m", "1", "--force",
                       "--expect", "found", "--format", "json")
    assert code == 1 and json.loads(out)["status"] == "exhausted-none"
    assert run(capsys, "search", "--q", "3", "--r", "2", "--m", "1", "--force",
               "--expect", "none")[0] == 0
    assert run(capsys, "search", "--q", "3", "--r", "2", "--m", "2", "--node-limit", "1")[0] == 3
    assert run(capsys, "search", "--q", "3", "--r", "2", "--m", "2", "--expect", "none",
               "--threads", "1")[0] == 1


def test_search_prune_flags(capsys):
    code, out, _ = run(capsys, "search", "--q", "2", "--r", "2", "--m", "1", "--force",
                       "--no-tangent", "--no-capacity", "--format", "json", "--threads", "1")
    d = json.loads(out)
    assert code == 0 and d["status"] == "exhausted-none"
    assert not d["tangent_pruning"] and not d["capacity_pruning"]


def test_search_seeded(capsys, fixtures_dir):
    code, out, _ = run(capsys, "search", "--q", "3", "--r", "2", "--m", "2",
                       "--seed-from", str(fixtures_dir / "q5_3_hemisystem.cert"),
                       "--format", "json", "--threads", "1")
    d = json.loads(out)
    assert code == 0 and d["status"] == "found" and d["seed_size"] == 20
    assert run(capsys, "search", "--q", "2", "--r", "3", "--m", "3",
               "--seed-from", str(fixtures_dir / "q5_3_hemisystem.cert"))[0] == 2


def test_search_one_system_seeded(capsys, fixtures_dir):
    code, out, _ = run(capsys, "search", "--q", "2", "--r", "3", "--mode", "one-system",
                       "--seed-from", str(fixtures_dir / "q7_2_one_system.cert"),
                       "--seed-count", "16", "--format", "json", "--threads", "1")
    d = json.loads(out)
    assert code == 0 and d["status"] == "found" and len(d["witness"]) == 17


def test_stats_summary(capsys, fixtures_dir):
    code, out, _ = run(capsys, "stats", str(fixtures_dir / "q7_3_4ovoid.cert"), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["points"] == 328
    assert d["sum_t"] == [84] and d["sum_t_t_minus_1"] == [6]
    code, out, _ = run(capsys, "stats", str(fixtures_dir / "q7_2_3ovoid.cert"), "--format", "json")
    assert json.loads(out)["sum_t_t_minus_1"] == [2]


def test_stats_point(capsys, fixtures_dir):
    cert = fixtures_dir / "q7_2_3ovoid.cert"
    coords = cert.read_text().splitlines()[2]
    code, out, _ = run(capsys, "stats", str(cert), "--point", coords, "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["coords"] == [int(x) for x in coords.split(",")]
    assert d["histogram"] == {"1": 10, "2": 16, "3": 1}
    outside = load_certificate(cert).points.complement().ids()[0]
    assert run(capsys, "stats", str(cert), "--point", str(outside))[0] == 2


def test_stats_one_system(capsys, fixtures_dir):
    code, out, _ = run(capsys, "stats", str(fixtures_dir / "q7_2_one_system.cert"), "--format", "json")
    assert code == 0 and json.loads(out)["m"] == 3


def test_stats_empty_set(capsys, tmp_path):
    path = tmp_path / "empty.cert"
    path.write_text("q=2;poly=0,1;r=3;g=1,1,1\nclaim=m-ovoid;m=0\n")
    code, _, err = run(capsys, "stats", str(path))
    assert code == 2 and "BasePointNotInSet" in err


def test_console_script_runs(fixtures_dir):
    proc = subprocess.run([sys.executable, "-m", "movoid.cli", "verify",
                           str(fixtures_dir / "q5_3_hemisystem.cert"), "--format", "json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["m"] == 2


def test_run_config_validation(capsys):
    from movoid.cli import RunConfig
    cfg = RunConfig("table", {"q": "2"})
    assert cfg.threads == 1 and cfg.output_format == "text"
    with pytest.raises(UsageError):
        RunConfig("explode")
    with pytest.raises(UsageError):
        RunConfig("table", max_points=0)
    assert run(capsys, "build", "--q", "2", "--r", "2", "--max-generators", "0")[0] == 2
