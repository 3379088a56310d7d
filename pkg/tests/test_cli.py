import json

import pytest

from synprog.cli import main, parse_count
from synprog.report import SCHEMA


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def odds(tmp_path, capsys):
    path = tmp_path / "odds.synset"
    assert run(capsys, "gen", "ap(1,2)", "--n", "10^4", "--out", str(path))[0] == 0
    return path


@pytest.mark.parametrize("text, value", [("100000", 10**5), ("10^5", 10**5), ("10**5", 10**5), ("1e5", 10**5), ("2.5e3", 2500)])
def test_parse_count(text, value):
    assert parse_count(text) == value


def test_gen(tmp_path, capsys):
    path = tmp_path / "a.synset"
    assert run(capsys, "gen", "ap(1,2)", "--n", "1000", "--out", str(path))[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "# synset v1 N=1000 l=2" and len(lines) == 501
    assert run(capsys, "gen", "squares", "--n", "100", "--out", str(tmp_path / "s"))[0] == 3
    assert run(capsys, "gen", "ap(1,", "--n", "100", "--out", str(tmp_path / "s"))[0] == 2
    a, b = tmp_path / "r1", tmp_path / "r2"
    run(capsys, "gen", "random-syndetic(l=2,seed=7)", "--n", "10^5", "--out", str(a))
    run(capsys, "gen", "random-syndetic(l=2)", "--seed", "7", "--n", "1e5", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_find_square_and_verify(odds, tmp_path, capsys):
    rep = tmp_path / "rep.json"
    code, _, _ = run(capsys, "find", str(odds), "--mode", "square", "--out", str(rep))
    assert code == 0
    report = json.loads(rep.read_text())
    assert report["schema"] == SCHEMA
    assert set(report) == {"schema", "command", "window", "witnesses", "certificates", "diagnostics", "elapsed_ms"}
    assert any(w["x"] == "9" and w["ratio"] == "9" and w["branch"] == "odd-square-multiple" for w in report["witnesses"])
    assert all(w["verified"] for w in report["witnesses"])
    assert run(capsys, "verify", str(rep), str(odds))[0] == 0


def test_verify_catches_tampering(odds, tmp_path, capsys):
    rep = tmp_path / "rep.json"
    run(capsys, "find", str(odds), "--out", str(rep))
    report = json.loads(rep.read_text())
    report["witnesses"][0]["r"] = str(int(report["witnesses"][0]["r"]) + 1)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(report))
    code, out, _ = run(capsys, "verify", str(bad), str(odds))
    assert code == 4 and "witness #0" in out
    evens = tmp_path / "evens.synset"
    run(capsys, "gen", "evens", "--n", "10^4", "--out", str(evens))
    code, out, _ = run(capsys, "verify", str(rep), str(evens))
    assert code == 4 and "not a member" in out


def test_find_tiny_is_inconclusive(tmp_path, capsys):
    tiny = tmp_path / "tiny.synset"
    run(capsys, "gen", "full", "--n", "10", "--out", str(tiny))
    code, out, _ = run(capsys, "find", str(tiny), "--mode", "square")
    assert code == 1
    assert any(d.get("inconclusive") == "WindowTooSmall" for d in json.loads(out)["diagnostics"])


def test_find_nkr(tmp_path, capsys):
    m3 = tmp_path / "m3.synset"
    run(capsys, "gen", "ap(0,3)", "--n", "100", "--out", str(m3))
    code, out, _ = run(capsys, "find", str(m3), "--mode", "nkr", "--k", "2", "--h", "2")
    assert code == 0
    w = json.loads(out)["witnesses"][0]
    assert (w["x"], w["n"], w["k"], w["r"]) == ("3", "2", "2", "1")


def test_find_rejects_wide_gap_and_bad_files(tmp_path, capsys):
    wide = tmp_path / "w.synset"
    run(capsys, "gen", "ap(1,3)", "--n", "1000", "--out", str(wide))
    assert run(capsys, "find", str(wide))[0] == 3
    junk = tmp_path / "junk.synset"
    junk.write_text("hello\n")
    assert run(capsys, "find", str(junk))[0] == 2
    assert run(capsys, "find", str(tmp_path / "missing.synset"))[0] == 2


def test_threads_give_identical_reports(tmp_path, capsys):
    path = tmp_path / "r.synset"
    run(capsys, "gen", "random-syndetic(l=2,seed=3,density=0.1)", "--n", "10^5", "--out", str(path))
    reports = []
    for threads in ("1", "8"):
        out = tmp_path / f"rep{threads}.json"
        assert run(capsys, "find", str(path), "--threads", threads, "--out", str(out))[0] == 0
        rep = json.loads(out.read_text())
        rep.pop("elapsed_ms")
        reports.append(json.dumps(rep, indent=2))
    assert reports[0] == reports[1]


def test_construct_family_embed_guard(capsys):
    code, out, _ = run(capsys, "construct", "family", "--l", "1", "--h", "2")
    cert = json.loads(out)["certificates"][0]
    assert code == 0 and cert["members"] == ["1", "2", "3", "7", "8", "9"] and cert["bound"] == "9"
    assert cert["recheck"] == "pass"
    code, out, _ = run(capsys, "construct", "embed", "--l", "1", "--h", "1", "--n", "1")
    cert = json.loads(out)["certificates"][0]
    assert cert["members"] == ["37", "38", "39"] and cert["capacity"] == "39"
    assert run(capsys, "construct", "family", "--l", "2", "--h", "9")[0] == 3


def test_construct_shift_align_round_trip(tmp_path, capsys):
    for argv in (("shift", "--moduli", "2,3", "--offsets", "0,1"), ("align", "--triples", "5:3:2,4:7:1")):
        out = tmp_path / "c.json"
        assert run(capsys, "construct", *argv, "--out", str(out))[0] == 0
        assert run(capsys, "verify", str(out))[0] == 0
        report = json.loads(out.read_text())
        cert = report["certificates"][0]
        key = "u0" if cert["kind"] == "shift" else "z"
        cert[key] = str(int(cert[key]) + 1)
        out.write_text(json.dumps(report))
        assert run(capsys, "verify", str(out))[0] == 4
    assert run(capsys, "construct", "shift", "--moduli", "4,6", "--offsets", "0,1")[0] == 2


def test_construct_triveni(tmp_path, capsys):
    evens = tmp_path / "e.synset"
    run(capsys, "gen", "evens", "--n", "10^4", "--out", str(evens))
    out = tmp_path / "t.json"
    assert run(capsys, "construct", "triveni", "--set", str(evens), "--h", "3", "--out", str(out))[0] == 0
    cert = json.loads(out.read_text())["certificates"][0]
    assert cert["F"] == ["2"] and len(cert["witnesses"]["2"]) == 3
    assert run(capsys, "verify", str(out), str(evens))[0] == 0
