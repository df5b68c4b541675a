import json
import math
import subprocess
import sys

import numpy as np
import pytest

from smooth_renyi import arimoto_conditional_renyi
from smooth_renyi.cli import run
from _oracles import DIST_A, DIST_B


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def dist_a(tmp_path):
    return _write(tmp_path, "dist-a.json", {"x_size": 2, "y_size": 1, "pxy": DIST_A.tolist()})


@pytest.fixture
def dist_b(tmp_path):
    return _write(tmp_path, "dist-b.json", {"x_size": 4, "y_size": 2, "pxy": DIST_B.tolist()})


@pytest.fixture
def mixture(tmp_path):
    return _write(tmp_path, "mix.json", {
        "weights": [0.5, 0.5],
        "components": [{"pxy": np.full((2, 2), 0.25).tolist()}, {"pxy": [[0.5, 0.0], [0.0, 0.5]]}],
    })


def _json(capsys, argv, status=0):
    assert run(argv) == status
    return json.loads(capsys.readouterr().out)


def test_entropy_eps_zero_is_arimoto(capsys, dist_b):
    out = _json(capsys, ["entropy", "--dist", dist_b, "--alpha", "0.5", "--epsilon", "0"])
    assert out["value"] == pytest.approx(arimoto_conditional_renyi(DIST_B, 0.5), rel=1e-12)
    assert out["unit"] == "nats"


def test_guess_dist_a_half(capsys, dist_a):
    out = _json(capsys, ["guess", "--rho", "1", "--epsilon", "0.5", "--dist", dist_a])
    assert out["cost"] == pytest.approx(0.5)
    assert out["error_prob"] <= 0.5 + 1e-12
    assert out["cost_lower"] <= out["cost"] <= out["cost_upper"] + 1e-12


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["entropy", "--dist", str(bad), "--alpha", "0.5"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValidationError"


@pytest.mark.parametrize("argv", [
    ["entropy", "--alpha", "1.5", "--dist", "{d}"],
    ["guess", "--rho", "-1", "--dist", "{d}"],
    ["guess", "--rho", "1", "--simulate", "10", "--dist", "{d}"],
    ["entropy", "--alpha", "0.5"],
    ["nonsense"],
])
def test_validation_errors_exit_one(capsys, dist_a, argv):
    assert run([a.replace("{d}", dist_a) for a in argv]) == 1
    assert "error" in json.loads(capsys.readouterr().err)


def test_budget_errors_exit_two(capsys, tmp_path, mixture, dist_b):
    assert run(["entropy", "--mixture", mixture, "--n", "12", "--alpha", "0.5"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "BlockTooLarge"
    assert run(["oracle", "--dist", dist_b, "--alpha", "0.5", "--epsilon", "0.1", "--step", "1e-6"]) == 1
    capsys.readouterr()
    wide = _write(tmp_path, "wide.json", {"pxy": np.full((2, 4), 0.125).tolist()})
    assert run(["oracle", "--dist", wide, "--alpha", "0.5", "--epsilon", "0.1"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "InstanceTooLarge"


def test_csv_twelve_digits(capsys, dist_b):
    assert run(["entropy", "--dist", dist_b, "--alpha", "0.5", "--epsilon", "0.1", "--format", "csv"]) == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header == "variant,alpha,epsilon,value"
    assert row.split(",")[-1] == format(0.8768644755578511, ".12g")


def test_out_alias_and_bits(capsys, dist_a):
    assert run(["entropy", "--dist", dist_a, "--alpha", "0.5", "--out", "csv", "--bits"]) == 0
    value = float(capsys.readouterr().out.splitlines()[1].split(",")[-1])
    assert value == pytest.approx(1.0, rel=1e-11)


def test_asymptotics_columns(capsys, mixture):
    assert run(["asymptotics", "--mixture", mixture, "--alpha", "0.5", "--epsilon", "0.25",
                "--n-max", "3", "--out", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,rate,target,gap,lower_bound,sensitivity_rate"
    assert len(lines) == 4


def test_repeated_runs_byte_identical(tmp_path, dist_b):
    outs = []
    for i in range(2):
        path = tmp_path / f"sim{i}.json"
        assert run(["guess", "--dist", dist_b, "--rho", "1", "--epsilon", "0.2",
                    "--simulate", "2000", "--seed", "5", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_codebook_and_file_round_trip(tmp_path, dist_b):
    book = [tmp_path / "b1.json", tmp_path / "b2.json"]
    for b in book:
        assert run(["code", "--dist", dist_b, "--rho", "1", "--epsilon", "0.1", "--emit-codebook", str(b),
                    "--out", str(tmp_path / "summary.json")]) == 0
    assert book[0].read_bytes() == book[1].read_bytes()
    table = json.loads(book[0].read_text())
    assert table["escape"] == "1"
    assert all(e["codeword"].startswith("0") for col in table["codebook"] for e in col)

    rng = np.random.default_rng(3)
    pairs = [(int(rng.integers(4)), int(rng.integers(2))) for _ in range(300)]
    src = tmp_path / "pairs.txt"
    src.write_text("".join(f"{x},{y}\n" for x, y in pairs))
    enc, dec = tmp_path / "enc.txt", tmp_path / "dec.txt"
    common = ["code", "--dist", dist_b, "--rho", "1", "--epsilon", "0.1"]
    assert run(common + ["--encode-file", str(src), "--seed", "11", "--out", str(enc)]) == 0
    assert run(common + ["--decode-file", str(enc), "--out", str(dec)]) == 0
    decoded = dec.read_text().splitlines()
    assert len(decoded) == len(pairs)
    escapes = 0
    for (x, y), line in zip(pairs, decoded):
        got, side = line.split(",")
        assert int(side) == y
        if got == "escape":
            escapes += 1
        else:
            assert int(got) == x
    assert 0 < escapes < len(pairs)


def test_code_summary(capsys, dist_a):
    out = _json(capsys, ["code", "--dist", dist_a, "--rho", "1"])
    assert out["moment"] == pytest.approx(4.0)
    assert out["kraft_ok"] is True
    assert out["moment_lower"] <= out["moment"] <= out["moment_upper"]


def test_contrast_and_exponents(capsys, tmp_path, mixture):
    bern = _write(tmp_path, "bern.json", {"pxy": [[0.11], [0.89]]})
    out = _json(capsys, ["asymptotics", "--dist", bern, "--contrast", "--rho", "1", "--epsilon", "0.1",
                         "--n-max", "3"])
    arikan = 2 * math.log(math.sqrt(0.11) + math.sqrt(0.89))
    assert out["rows"][0]["arikan_exponent"] == pytest.approx(arikan)
    g = _json(capsys, ["guess", "--mixture", mixture, "--rho", "1", "--epsilon", "0.25", "--exponent",
                       "--n-max", "2"])
    c = _json(capsys, ["code", "--mixture", mixture, "--rho", "1", "--epsilon", "0.25", "--exponent",
                       "--n-max", "2"])
    assert [r["target"] for r in g["rows"]] == [r["target"] for r in c["rows"]]


def test_oracle_subcommand(capsys, dist_b):
    out = _json(capsys, ["oracle", "--dist", dist_b, "--alpha", "0.5", "--epsilon", "0.1", "--step", "1e-3"])
    assert out["relative_objective_gap"] <= 1e-6


def test_module_entry_point(dist_a):
    proc = subprocess.run([sys.executable, "-m", "smooth_renyi", "entropy", "--dist", dist_a, "--alpha", "0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == pytest.approx(math.log(2))
