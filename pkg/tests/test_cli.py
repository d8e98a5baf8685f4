import csv
import io
import subprocess
import sys
from fractions import Fraction

import pytest

from unimodal_complexity import MapSpec
from unimodal_complexity.cli import RunConfig, main, parse_alphas, parse_config_text
from unimodal_complexity.errors import ConfigError
from unimodal_complexity.kneading import cutting_times


def run(*argv):
    return subprocess.run([sys.executable, "-m", "unimodal_complexity", *argv], capture_output=True, text=True, timeout=600)


# -- configuration ------------------------------------------------------------------


def test_config_round_trip():
    cfg = RunConfig(command="complexity", preset="wild", n_max=80, orbit=5000, integer_only=True)
    back = RunConfig.from_text(cfg.to_text())
    assert back == cfg


def test_config_parsing_errors():
    with pytest.raises(ConfigError):
        parse_config_text("orbit 5000")
    with pytest.raises(ConfigError):
        parse_config_text("orbit = many")
    with pytest.raises(ConfigError):
        parse_config_text("colour = blue")
    assert parse_config_text("# comment\nn-max = 7  # trailing\n") == {"n_max": 7}


def test_parse_alphas():
    assert [b.alpha for b in parse_alphas("2,3; 2,2,2,2")] == [(2, 3), (2, 2, 2, 2)]
    with pytest.raises(ConfigError):
        parse_alphas("2,x")
    with pytest.raises(ConfigError):
        parse_alphas(" ; ")


@pytest.mark.parametrize(
    "argv",
    [
        ["kneading", "--param", "3/2"],
        ["kneading", "--param", "0.9", "--preset", "wild"],
        ["kneading", "--param", "0.9", "--ell", "1"],
        ["kneading", "--param", "abc"],
        ["complexity", "--preset", "wild", "--orbit", "0"],
        ["odometer", "--alpha", "2,1"],
        ["odometer"],
        ["complexity", "--param", "0.4", "--orbit", "300"],
    ],
)
def test_config_errors_exit_5(argv, capsys):
    assert main(argv) == 5
    assert "error:" in capsys.readouterr().err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = fibonacci\nK = 5\n")
    assert main(["kneading", "--config", str(cfg), "--K", "7"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "S: 1 2 3 5 8 13 21 34"


def test_missing_config_file(tmp_path):
    assert main(["kneading", "--config", str(tmp_path / "nope.cfg")]) == 5


# -- commands --------------------------------------------------------------------------


def test_kneading_param(capsys):
    assert main(["kneading", "--param", "0.97", "--K", "6"]) == 0
    out = capsys.readouterr().out
    S = cutting_times(MapSpec(Fraction(97, 100)), 6).S
    assert out.splitlines()[0] == "S: " + " ".join(map(str, S))


def test_kneading_precision_exhausted():
    r = run("kneading", "--param", "0.9", "--K", "40", "--precision-max", "64")
    assert r.returncode == 2 and "PrecisionExhausted" in r.stderr


def test_complexity_horizon_exceeded():
    r = run("complexity", "--preset", "fibonacci", "--orbit", "300", "--n-max", "290", "--sample", "100")
    assert r.returncode == 3


def test_complexity_outputs(tmp_path):
    out = str(tmp_path / "fib")
    assert main(["complexity", "--preset", "fibonacci", "--orbit", "6000", "--n-max", "60", "--out", out]) == 0
    rows = list(csv.DictReader(open(out + ".csv")))
    assert len(rows) == 61 and rows[0]["q"] == "4"
    report = open(out + ".report.txt").read()
    assert "sandwich violations: 0" in report
    assert '"n_orbit": 6000' in open(out + ".json").read()
    for n in (0, 17, 60):
        single = str(tmp_path / f"s{n}")
        assert main(["complexity", "--preset", "fibonacci", "--orbit", "6000", "--n-max", "60", "--single-n", str(n), "--out", single]) == 0
        got = list(csv.DictReader(open(single + ".single.csv")))[0]
        assert got["q"] == rows[n]["q"]
        if n < 60:
            assert got["p_next"] == rows[n + 1]["p"]


def test_complexity_deterministic(tmp_path):
    args = ["complexity", "--preset", "wild", "--orbit", "6000", "--n-max", "60"]
    a, b = run(*args, "--out", str(tmp_path / "a")), run(*args, "--out", str(tmp_path / "b"))
    assert a.returncode == b.returncode == 0
    for suffix in (".csv", ".json", ".report.txt"):
        assert (tmp_path / ("a" + suffix)).read_bytes() == (tmp_path / ("b" + suffix)).read_bytes()


def test_complexity_stdout_is_csv():
    r = run("complexity", "--preset", "feigenbaum", "--orbit", "3000", "--n-max", "30")
    assert r.returncode == 0
    rows = list(csv.reader(io.StringIO(r.stdout)))
    assert rows[0] == ["n", "q", "p", "M", "nu_sum", "notes"]
    assert {row[2] for row in rows[2:]} == {"2"}
    assert "sandwich violations" in r.stderr


def test_cover_level(tmp_path):
    out = str(tmp_path / "feig2")
    assert main(["complexity", "--preset", "feigenbaum", "--orbit", "3000", "--n-max", "30", "--cover-level", "2", "--out", out]) == 0
    rows = list(csv.DictReader(open(out + ".csv")))
    assert {r["p"] for r in rows[1:]} == {"4"}


def test_wild_verify_integer_only(capsys):
    assert main(["wild-verify", "--integer-only"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(ln.startswith("PASS") for ln in lines)


def test_wild_verify_tampered_recursion(capsys):
    assert main(["wild-verify", "--integer-only", "--wild-t0", "3"]) == 4
    assert any(ln.startswith("FAIL") for ln in capsys.readouterr().out.splitlines())


def test_wild_verify_preset(capsys):
    assert main(["wild-verify", "--preset", "wild", "--orbit", "20000"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "alpha: 15 3" in out


def test_wild_verify_wrong_parameter(capsys):
    assert main(["wild-verify", "--preset", "fibonacci", "--orbit", "5000"]) == 4


def test_odometer_commands(capsys):
    assert main(["odometer", "--alpha", "2,3;2,2,2,2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [
        "PASS alpha: 2 3 states=6 period=6 bijective=True",
        "PASS alpha: 2 2 2 2 states=16 period=16 bijective=True",
    ]
    assert main(["odometer", "--alpha-bound", "100"]) == 0
    assert capsys.readouterr().out.startswith("PASS every alpha with product <= 100:")
