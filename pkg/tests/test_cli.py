import dataclasses
import json
import math

import numpy as np
import pytest

from plapspec import cli, output, specfun, verify
from plapspec.config import RunConfig, load_config, parse_config_text
from plapspec.exceptions import DomainError


def test_config_defaults():
    c = RunConfig()
    assert (c.p, c.mu_lo, c.mu_hi, c.mu_count) == (3.0, 0.01, 1.0, 100)
    assert (c.max_denominator, c.n_max, c.output_format) == (50, 3, "csv")


def test_config_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sample\np = 5\nmu-count = 7  # trailing comment\nformat = json\n\n")
    c = load_config(path, {"p": 1.5, "mu_count": None})
    assert c.p == 1.5
    assert c.mu_count == 7
    assert c.output_format == "json"


@pytest.mark.parametrize("text", ["p 3", "colour = red", "p = 1", "format = xml", "mu_lo = 0.9\nmu_hi = 0.5"])
def test_config_rejects(text):
    with pytest.raises(DomainError):
        dataclasses.replace(RunConfig(), **parse_config_text(text))


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((20, 3)) * 10.0 ** rng.integers(-300, 300, size=(20, 3))
    vals[0] = [math.pi, -0.0, 1e-310]
    path = output.write_csv(tmp_path / "t.csv", ["a", "b", "c"], vals.tolist())
    header, rows = output.read_csv(path)
    assert header == ["a", "b", "c"]
    back = np.array(rows, dtype=float)
    assert np.array_equal(back.view(np.uint64), vals.view(np.uint64))
    assert b"\r" not in path.read_bytes()


def test_json_handles_nan():
    text = output.json_text({"b": float("nan"), "a": np.float64(1.5)})
    assert json.loads(text) == {"a": 1.5, "b": None}


def test_svg_is_deterministic_and_self_contained():
    series = [{"x": np.linspace(0, 1, 50), "y": np.sin(np.linspace(0, 3, 50)), "label": "s"}]
    a = output.svg_plot(series, title="t <&>", xlabel="x")
    b = output.svg_plot(series, title="t <&>", xlabel="x")
    assert a == b
    assert a.startswith("<?xml") or a.startswith("<svg")
    assert "href" not in a and "<script" not in a
    assert "t &lt;&amp;&gt;" in a


def test_periods_command(tmp_path, capsys):
    code = cli.main(["periods", "--p", "3", "--mu-count", "5", "--out", str(tmp_path)])
    assert code == 0
    header, rows = output.read_csv(tmp_path / "periods_p3.csv")
    assert header == ["mu", "T", "S", "U", "method"]
    assert len(rows) == 5
    assert rows[-1][1:4] == [math.sqrt(2) / 3, math.sqrt(2) / 3, 1.0]
    assert (tmp_path / "periods_p3_TS.svg").exists()
    assert (tmp_path / "periods_p3_U.svg").exists()


def test_periods_json(tmp_path):
    cli.main(["periods", "--p", "5", "--mu-count", "3", "--format", "json", "--out", str(tmp_path)])
    data = json.loads((tmp_path / "periods_p5.json").read_text())
    assert data["p"] == 5.0 and len(data["rows"]) == 3


def test_spectrum_command(tmp_path, capsys):
    code = cli.main(["spectrum", "--p", "5", "--max-denominator", "9", "--out", str(tmp_path)])
    assert code == 0
    header, rows = output.read_csv(tmp_path / "spectrum_p5.csv")
    labels = [r[0] for r in rows]
    assert labels[:2] == ["pi_p", "pi"]
    assert "3/7" in labels and "4/9" in labels
    assert "lambda_original_3" in header
    _, ratios = output.read_csv(tmp_path / "spectrum_p5_ratios.csv")
    assert len(ratios) == len(rows) * (len(rows) - 1)
    out = capsys.readouterr().out
    assert "near-integer ratios" in out


def test_spectrum_p2_note(tmp_path, capsys):
    cli.main(["spectrum", "--p", "2", "--max-denominator", "10", "--format", "json", "--out", str(tmp_path)])
    data = json.loads((tmp_path / "spectrum_p2.json").read_text())
    assert [r["label"] for r in data["records"]] == ["pi"]
    assert any("degenerate" in n for n in data["notes"])


def test_eigenfunction_command(tmp_path, capsys):
    code = cli.main(["eigenfunction", "--p", "5", "--ell", "3", "--m", "7", "--samples", "256", "--out", str(tmp_path)])
    assert code == 0
    header, rows = output.read_csv(tmp_path / "eigen_p5_3_7_n1.csv")
    assert header == ["t", "x1", "x2", "y1", "y2", "P", "K"]
    arr = np.array(rows)
    assert arr.shape == (257, 7)
    assert np.allclose(arr[:, 5] + arr[:, 6], 1.0)
    assert np.max(np.abs(arr[-1, 1:5] - arr[0, 1:5])) <= 1e-6
    for suffix in ("orbit", "trajectory", "energy"):
        assert (tmp_path / f"eigen_p5_3_7_n1_{suffix}.svg").exists()


def test_eigenfunction_base(tmp_path, capsys):
    assert cli.main(["eigenfunction", "--p", "3", "--base", "zero", "--n", "2", "--samples", "128", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "eigen_p3_pi_p_n2.csv").exists()


def test_eigenfunction_unresolved(tmp_path, capsys):
    code = cli.main(["eigenfunction", "--p", "3", "--ell", "1", "--m", "3", "--out", str(tmp_path)])
    assert code == 2
    assert "admissible range" in capsys.readouterr().err


def test_phase_portrait_command(tmp_path):
    assert cli.main(["phase-portrait", "--p", "3", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "phase_p3.svg").read_text()
    assert text.count("<polyline") >= 9


def test_bad_exponent_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["periods", "--p", "0.5", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_verify_passes_at_p3(tmp_path, capsys):
    code = cli.main(["verify", "--p", "3", "--out", str(tmp_path)])
    summary = json.loads(capsys.readouterr().out)
    assert code == 0, [c for c in summary["checks"] if not c["passed"]]
    assert summary["passed"]
    names = {c["name"] for c in summary["checks"]}
    assert {"asymptotics", "conservation", "reference_values", "eigenfunction_closure"} <= names


def test_verify_passes_at_p2(capsys):
    summary = cli.cmd_verify(RunConfig(p=2.0))
    assert summary["passed"], [c for c in summary["checks"] if not c["passed"]]


def test_verify_catches_sign_flipped_constant():
    e = specfun.make_exponent(3.0)
    assert verify.check_asymptotics(e)["passed"]
    bad = dataclasses.replace(e, c2=-e.c2)
    assert not verify.check_asymptotics(bad)["passed"]
