import csv
import re
import io
import json
from fractions import Fraction

import pytest

from matchfix import __version__
from matchfix.cli import EXIT_INPUT, EXIT_LIMIT, EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_VERIFY, run
from matchfix.manipulation import parse_gain_report
from matchfix.tournament import format_tournament, generate_witness, parse_tournament

from test_coupling import NAIVE_T


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def tfile(tmp_path):
    def write(t, name="t.txt"):
        path = tmp_path / name
        path.write_text(format_tournament(t) if not isinstance(t, str) else t)
        return str(path)
    return write


def test_winprob_superman_kryptonite():
    code, out, _ = call("winprob", "--family", "superman-kryptonite", "--n", "4", "--rule", "itercondorcet")
    assert code == EXIT_OK
    assert "player 1: 5/12" in out.splitlines()[1]


def test_winprob_condorcet_winner(tfile):
    path = tfile("3\n-00\n1-1\n10-\n")
    code, out, _ = call("winprob", "--in", path)
    assert code == EXIT_OK
    assert out.count("player 2: 1/1") == 6


def test_winprob_rseb_three_cycle():
    code, out, _ = call("winprob", "--family", "three-cycle-padded", "--n", "3", "--rule", "rseb")
    assert out.splitlines()[1:] == ["  player 1: 1/3", "  player 2: 1/3", "  player 3: 1/3", "  dummy 4: 0/1"]


def test_gain_and_coalition():
    code, out, _ = call("gain", "--family", "three-cycle-padded", "--n", "3", "--i", "2", "--j", "1", "--rule", "rseb")
    assert code == EXIT_OK and "gain 1/3" in out
    code, out, _ = call("coalition", "--family", "cyclic-odd", "--n", "5", "--k", "3", "--members", "3,2,1",
                        "--rule", "topcycle")
    assert code == EXIT_OK and "gain 2/5" in out


def test_scan_values(tmp_path):
    out_file = tmp_path / "witness.txt"
    code, out, _ = call("scan", "--rule", "rseb", "--n", "5", "--out", str(out_file))
    assert code == EXIT_OK and "alpha 1/3 " in out
    rep = parse_gain_report(out_file.read_text())
    assert rep.total_gain == Fraction(1, 3)
    _, out, _ = call("scan", "--rule", "rseb", "--n", "5", "--k", "3", "--format", "json")
    assert Fraction(json.loads(out)["results"][0]["alpha"]) >= Fraction(2, 5)


def test_scan_topcycle_six():
    _, out, _ = call("scan", "--rule", "topcycle", "--n", "6", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert Fraction(row["alpha"]) >= Fraction(2, 3)


def test_output_independent_of_jobs():
    a = call("scan", "--rule", "caterpillar", "--rule", "copeland-lex", "--n", "4", "--jobs", "1", "--format", "json")
    b = call("scan", "--rule", "caterpillar", "--rule", "copeland-lex", "--n", "4", "--jobs", "2", "--format", "json")
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "config"}
    assert strip(a[1]) == strip(b[1])
    a = call("coupling-verify", "--n", "3", "--jobs", "1")
    b = call("coupling-verify", "--n", "3", "--jobs", "2")
    assert a[1] == b[1]
    assert call("scan", "--rule", "rseb", "--n", "4")[1] == call("scan", "--rule", "rseb", "--n", "4", "--jobs", "2")[1]


def test_json_document():
    code, out, _ = call("winprob", "--family", "superman-kryptonite", "--n", "5", "--format", "json")
    doc = json.loads(out)
    assert doc["version"] == __version__ and doc["config"]["n"] == 5
    for entry in doc["results"]:
        assert sum(Fraction(x) for x in entry["probabilities"]) == 1


def test_coupling_exhaustive_n4():
    code, out, _ = call("coupling-verify", "--n", "4")
    assert code == EXIT_OK
    assert out.strip().endswith("384 passed, 0 failed")


def test_coupling_negative_control(tfile):
    path = tfile(NAIVE_T)
    code, out, _ = call("coupling-verify", "--in", path, "--sigma-j-variant", "naive")
    assert code == EXIT_VERIFY
    # both colliding brackets are printed
    assert re.search(r"injective_j: sigma_j sends (\d ){7}\d and (\d ){7}\d to (\d ){7}\d", out)


def test_coupling_sampled_needs_seed():
    assert call("coupling-verify", "--n", "8", "--samples", "1")[0] == EXIT_INPUT


def test_coupling_enumeration_limit():
    assert call("coupling-verify", "--n", "5")[0] == EXIT_LIMIT


def test_witness(tmp_path):
    path = tmp_path / "sk.txt"
    code, _, _ = call("witness", "--family", "superman-kryptonite", "--n", "5", "--out", str(path))
    assert code == EXIT_OK
    assert parse_tournament(path.read_text()) == generate_witness("superman_kryptonite", 5)
    code, out, _ = call("witness", "--family", "cyclic-odd", "--k", "2", "--n", "3")
    assert parse_tournament(out) == parse_tournament("3\n-10\n0-1\n10-\n")
    code, _, err = call("witness", "--family", "cyclic-odd", "--k", "5", "--n", "4")
    assert code == EXIT_INPUT and "n >= 9" in err
    assert call("witness", "--family", "cyclic-odd", "--k", "2", "--n", "3", "--format", "csv")[0] == EXIT_INPUT


def test_random_model(tmp_path, tfile):
    sk = generate_witness("superman_kryptonite", 4)
    tc = generate_witness("three_cycle_padded", 4)
    point = tmp_path / "point.txt"
    point.write_text("1/1\n" + format_tournament(sk))
    _, out, _ = call("random-model", "--in", str(point), "--i", "1", "--j", "4", "--rule", "itercondorcet")
    _, det, _ = call("gain", "--in", tfile(sk), "--i", "1", "--j", "4", "--rule", "itercondorcet")
    assert out.split("expected gain ")[1].split()[0] == det.split("gain ")[1].split()[0]

    mix = tmp_path / "mix.txt"
    mix.write_text("1/2\n" + format_tournament(sk) + "1/2\n" + format_tournament(tc))
    _, out, _ = call("random-model", "--in", str(mix), "--i", "2", "--j", "1", "--rule", "rseb", "--format", "csv")
    got = Fraction(next(csv.DictReader(io.StringIO(out)))["expected_gain"])
    parts = []
    for t in (sk, tc):
        _, o, _ = call("gain", "--in", tfile(t), "--i", "2", "--j", "1", "--rule", "rseb", "--format", "csv")
        parts.append(Fraction(next(csv.DictReader(io.StringIO(o)))["gain"]))
    assert got == sum(parts) / 2

    half = tmp_path / "half.txt"
    half.write_text("4\n- 1/2 1/2 1/2\n1/2 - 1/2 1/2\n1/2 1/2 - 1/2\n1/2 1/2 1/2 -\n")
    for i, j in ((1, 2), (3, 1), (4, 2)):
        _, out, _ = call("random-model", "--p-matrix", str(half), "--i", str(i), "--j", str(j), "--rule", "rseb")
        assert "(exact)" in out
        assert Fraction(out.split("expected gain ")[1].split()[0]) <= Fraction(1, 3)


def test_random_model_bad_support(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1/2\n" + format_tournament(generate_witness("three_cycle_padded", 3)))
    assert call("random-model", "--in", str(bad), "--i", "1", "--j", "2")[0] == EXIT_INPUT


def test_exit_codes(tfile):
    assert call("winprob", "--in", tfile("2\n-1\n1-\n"))[0] == EXIT_PARSE
    assert call("scan", "--rule", "rseb", "--n", "7")[0] == EXIT_LIMIT
    assert call("scan", "--rule", "rseb", "--n", "7", "--limit-override", "7")[0] == EXIT_USAGE
    assert call("scan", "--rule", "borda", "--n", "3")[0] == EXIT_USAGE
    assert call("winprob", "--in", "/nonexistent/file")[0] == EXIT_INPUT
    assert call("gain", "--family", "superman-kryptonite", "--n", "4", "--i", "0", "--j", "1")[0] == EXIT_INPUT


def test_wall_time_on_stderr_only():
    code, out, err = call("scan", "--rule", "rseb", "--n", "3")
    assert "wall time" in err and "wall time" not in out
