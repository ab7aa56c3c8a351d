import csv
import io
import json
import subprocess
import sys

import pytest

from exactrvg import cli
from exactrvg.dist_spec import quantile, support_codes
from exactrvg.distlib import DistParams, build
from exactrvg.entropy import PrngSource
from exactrvg.formats import parse_format
from exactrvg.generators import sample


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_matches_library(capsys):
    code, out, _ = run(capsys, "generate", "--dist", "exponential", "--param", "s=1", "--spec", "cdf",
                       "--format", "f32", "--count", "3", "--seed", "7")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 3
    spec = build(DistParams("exponential", {"s": 1}), "cdf", fmt="f32")
    batch = sample(spec, PrngSource(7), 3)
    fmt = parse_format("f32")
    assert lines == [f"{cli.format_value(fmt, int(c))} {cli.format_code(fmt, int(c))}" for c in batch.codes]
    assert run(capsys, "generate", "--dist", "exponential", "--format", "f32", "--count", "3", "--seed", "7")[1] == out


def test_generate_ddf_reaches_right_tail(capsys):
    code, out, _ = run(capsys, "generate", "--dist", "exponential", "--spec", "ddf", "--count", "2000",
                       "--seed", "1", "--json")
    data = json.loads(out)
    assert code == 0 and len(data["variates"]) == 2000
    assert data["total_flips"] == sum(v["flips"] for v in data["variates"])
    vals = [float(v["value"]) for v in data["variates"]]
    assert min(vals) > 0 and max(vals) <= 103.9721


def test_generate_flat_inside_interval(capsys):
    _, out, _ = run(capsys, "generate", "--dist", "flat", "--param", "a=0.1,b=3.14", "--count", "500")
    vals = [float(line.split()[0]) for line in out.splitlines()]
    assert all(0.1 <= v <= 3.14 for v in vals)


def test_bench_csv(capsys, tmp_path):
    argv = ["bench", "--dist", "geometric:p=0.4", "--dist", "exponential", "--count", "2000",
            "--repeats", "1", "--seed", "10"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == cli.BENCH_COLUMNS
    assert [r[:3] for r in rows[1:]] == [["geometric(0.4)", "cdf", "opt"], ["geometric(0.4)", "cdf", "cbs"],
                                         ["exponential(1)", "cdf", "opt"], ["exponential(1)", "cdf", "cbs"]]
    assert [r[6] for r in rows[1:]] == ["10", "11", "12", "13"]
    spec = build(DistParams("geometric", {"p": 0.4}), "cdf")
    total = sample(spec, PrngSource(10), 2000, "opt").total_flips
    assert rows[1][4] == repr(total / 2000)
    # determinism, ignoring the timing column
    _, again, _ = run(capsys, *argv)
    strip = lambda text: [r[:5] + r[6:] for r in csv.reader(io.StringIO(text))]
    assert strip(out) == strip(again)


def test_range_matches_library(capsys):
    code, out, _ = run(capsys, "range", "--dist", "exponential", "--json")
    rows = json.loads(out)
    assert code == 0 and [r["spec"] for r in rows] == ["cdf", "sf", "ddf"]
    assert [f"{float(r['min']):.6e}" for r in rows] == ["7.006492e-46", "2.980232e-08", "7.006492e-46"]
    assert [f"{float(r['max']):.6e}" for r in rows] == ["1.732868e+01", "1.039721e+02", "1.039721e+02"]
    lo, hi = support_codes(build(DistParams("exponential", {}), "cdf"))
    assert rows[0]["min_code"] == cli.format_code(parse_format("f64"), lo)
    assert all(r["seconds"] < 0.05 for r in rows)
    _, text, _ = run(capsys, "range", "--dist", "flat", "--spec", "cdf")
    assert "[1.000000e-01, 3.140000e+00]" in text


def test_coverage_analytic(capsys):
    code, out, _ = run(capsys, "coverage", "--E", "11", "--m", "52", "--l", "53")
    assert code == 0 and out.strip().endswith("= 0.20%")
    assert run(capsys, "coverage", "--E", "5", "--m", "2", "--l", "99")[0] == 1
    assert run(capsys, "coverage", "--E", "5")[0] == 1


def test_coverage_empirical_small(capsys):
    code, out, _ = run(capsys, "coverage", "--empirical", "--count", "200000", "--json", "--seed", "3")
    data = json.loads(out)
    assert code == 0 and len(data["rows"]) == 60
    assert sum(r["exact"] for r in data["rows"]) == 200000
    assert sum(1 for r in data["rows"] if r["division"]) == 28
    row = next(r for r in data["rows"] if r["value"] == "0.875")
    assert row["p"] == "1/8"


def test_quantile(capsys):
    code, out, _ = run(capsys, "quantile", "--dist", "exponential", "--q", "1")
    assert code == 0
    code_hex, value, cum = out.split()
    assert f"{float(value):.6e}" == "1.732868e+01" and float(cum) == 1.0
    F = build(DistParams("exponential", {}), "cdf")
    assert code_hex == cli.format_code(F.fmt, quantile(F, 1.0))
    _, out, _ = run(capsys, "quantile", "--dist", "uniform", "--q", "1/2")
    assert out.split()[1] == "0.5"
    _, out, _ = run(capsys, "quantile", "--dist", "exponential", "--spec", "ddf", "--tail", "0")
    assert f"{float(out.split()[1]):.6e}" == "1.039721e+02"
    assert run(capsys, "quantile", "--dist", "exponential", "--tail", "0")[0] == 1


def test_validate_exit_codes(capsys):
    code, out, _ = run(capsys, "validate", "--dist", "parity")
    assert code == 2 and "non-monotone: code 0x1" in out
    code, out, _ = run(capsys, "validate", "--dist", "logistic", "--spec", "ddf", "--samples", "10000")
    assert code == 0 and "PASS" in out


def test_usage_errors(capsys):
    assert run(capsys, "generate", "--dist", "nosuch")[0] == 1
    assert run(capsys, "generate", "--dist", "exponential", "--param", "s")[0] == 1
    assert run(capsys, "generate", "--dist", "exponential", "--format", "blob")[0] == 1
    assert run(capsys, "generate", "--dist", "exponential", "--prob", "f16")[0] == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["generate"])
    assert exc.value.code == 1


def test_generate_validation_failure(capsys):
    assert run(capsys, "generate", "--dist", "parity")[0] == 2


def test_output_file(capsys, tmp_path):
    path = tmp_path / "out.txt"
    code, out, _ = run(capsys, "generate", "--dist", "gaussian", "--count", "4", "--output", str(path))
    assert code == 0 and out == "" and len(path.read_text().splitlines()) == 4


def test_format_helpers():
    f32, u16 = parse_format("f32"), parse_format("uint:16")
    assert cli.format_value(f32, 0x3dcccccd) == "0.1"
    assert cli.format_code(f32, 1) == "0x00000001"
    assert cli.format_value(u16, 42) == "42"
    assert cli.format_value(f32, 0x7fc00000) == "nan"
    assert cli.parse_dist("pareto:a=1", "b=4") == ("pareto", {"a": "1", "b": "4"})


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "exactrvg.cli", "quantile", "--dist", "exponential"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("0x4031")
