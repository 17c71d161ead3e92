import csv
import json

import numpy as np
import pytest

from rankci.cli import (
    EXACT_DEFAULT_LIMIT,
    RunConfig,
    _choose_method,
    ingest,
    main,
    run,
    write_sample_csv,
)
from rankci.partition import ci_level_by_level

CSV_TEXT = """name,estimate,stddev
alpha,2.5,1.0
beta,-0.75,0.5
gamma,0.0,2.0
delta,1.25,1.5
eps,3.5,0.25
"""


def write_input(tmp_path, text=CSV_TEXT, name="centers.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_ingest_sorts_and_keeps_input_mapping(tmp_path):
    s = ingest(write_input(tmp_path))
    assert s.labels == ("beta", "gamma", "delta", "alpha", "eps")
    assert np.allclose(s.y, [-0.75, 0.0, 1.25, 2.5, 3.5])
    assert np.allclose(s.sigma, [0.5, 2.0, 1.5, 1.0, 0.25])


def test_write_sample_csv_inverts_ingest(tmp_path):
    src = write_input(tmp_path)
    s = ingest(src)
    out = tmp_path / "again.csv"
    write_sample_csv(s, out)
    assert out.read_text(encoding="utf-8") == CSV_TEXT


def test_ingest_diagnostics(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ValueError, match="empty file"):
        ingest(empty)

    with pytest.raises(ValueError, match=r"missing column\(s\) estimate"):
        ingest(write_input(tmp_path, "name,stddev\na,1.0\n", "cols.csv"))

    with pytest.raises(ValueError, match="row 3: empty name"):
        ingest(write_input(tmp_path, "name,estimate,stddev\na,1.0,1.0\n,2.0,1.0\n",
                           "noname.csv"))

    with pytest.raises(ValueError, match="row 2: estimate and stddev must be numeric"):
        ingest(write_input(tmp_path, "name,estimate,stddev\na,hello,1.0\n", "text.csv"))

    with pytest.raises(ValueError, match="row 2: non-finite"):
        ingest(write_input(tmp_path, "name,estimate,stddev\na,inf,1.0\n", "inf.csv"))

    with pytest.raises(ValueError, match="row 2: stddev must be > 0, got 0"):
        ingest(write_input(tmp_path, "name,estimate,stddev\na,1.0,0.0\n", "zero.csv"))

    with pytest.raises(ValueError, match="no data rows"):
        ingest(write_input(tmp_path, "name,estimate,stddev\n", "hdr.csv"))


def test_run_config_validation(tmp_path):
    RunConfig("x.csv")
    with pytest.raises(ValueError):
        RunConfig("x.csv", alpha=0.0)
    with pytest.raises(ValueError):
        RunConfig("x.csv", alpha=1.0)
    with pytest.raises(ValueError):
        RunConfig("x.csv", method="magic")
    with pytest.raises(ValueError):
        RunConfig("x.csv", output_format="xml")


def test_choose_method_size_switch():
    auto = RunConfig("x.csv")
    assert _choose_method(auto, EXACT_DEFAULT_LIMIT) == "lr-hybrid"
    assert _choose_method(auto, EXACT_DEFAULT_LIMIT + 1) == "lr-bracket"
    pinned = RunConfig("x.csv", method="tukey")
    assert _choose_method(pinned, 1000) == "tukey"


def test_run_csv_end_to_end(tmp_path, capsys):
    src = write_input(tmp_path)
    assert run(RunConfig(str(src))) == 0
    out = capsys.readouterr().out
    assert out.startswith("lr-hybrid: n=5, alpha=0.05 -> ")

    with open(tmp_path / "centers.ranks.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["name"] for r in rows] == ["alpha", "beta", "gamma", "delta", "eps"]
    assert [int(r["empirical_rank"]) for r in rows] == [4, 1, 2, 3, 5]
    assert list(rows[0]) == ["name", "estimate", "stddev", "empirical_rank",
                             "rank_lo", "rank_hi"]

    exact = ci_level_by_level(ingest(src)).intervals
    # row "alpha" is the 4th-smallest estimate
    assert (int(rows[0]["rank_lo"]), int(rows[0]["rank_hi"])) == exact[3]
    assert (int(rows[1]["rank_lo"]), int(rows[1]["rank_hi"])) == exact[0]

    with open(tmp_path / "centers.plotdata.csv", newline="") as fh:
        plot = list(csv.DictReader(fh))
    assert [r["name"] for r in plot] == ["beta", "gamma", "delta", "alpha", "eps"]
    assert [int(r["position"]) for r in plot] == [1, 2, 3, 4, 5]
    est = [float(r["estimate"]) for r in plot]
    assert est == sorted(est)


def test_run_json_with_bracket_columns(tmp_path):
    src = write_input(tmp_path)
    cfg = RunConfig(str(src), method="lr-bracket", output_format="json", seed=3)
    assert run(cfg) == 0
    with open(tmp_path / "centers.ranks.json") as fh:
        payload = json.load(fh)
    meta = payload["metadata"]
    assert meta["method"] == "lr-bracket"
    assert meta["alpha"] == 0.05
    assert meta["seed"] == 3
    assert meta["mcSamples"] == 200_000
    assert meta["input"] == str(src)
    assert meta["wallTimeSeconds"] >= 0.0
    centers = payload["centers"]
    assert len(centers) == 5
    for row in centers:
        assert {"rank_lo_inner", "rank_hi_inner", "settled"} <= set(row)
        assert row["rank_lo"] <= row["rank_lo_inner"] <= row["rank_hi_inner"] <= row["rank_hi"]
    # plot file carries the inner endpoints as well
    with open(tmp_path / "centers.plotdata.csv", newline="") as fh:
        plot = list(csv.DictReader(fh))
    assert {"rank_lo_inner", "rank_hi_inner"} <= set(plot[0])


def test_run_honors_output_dir(tmp_path):
    src = write_input(tmp_path)
    dest = tmp_path / "out" / "deep"
    assert run(RunConfig(str(src), output_dir=str(dest))) == 0
    assert (dest / "centers.ranks.csv").exists()
    assert (dest / "centers.plotdata.csv").exists()


def test_run_is_deterministic(tmp_path):
    src = write_input(tmp_path)
    cfg = RunConfig(str(src), method="tukey", seed=12, mc_samples=5000)
    run(cfg)
    first = (tmp_path / "centers.ranks.csv").read_bytes()
    run(cfg)
    assert (tmp_path / "centers.ranks.csv").read_bytes() == first


def test_main_success_and_method_flag(tmp_path, capsys):
    src = write_input(tmp_path)
    assert main(["--input", str(src), "--method", "lr-level"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("lr-level:")


def test_main_tangent_points_parsing(tmp_path):
    src = write_input(tmp_path)
    assert main(["-i", str(src), "--method", "lr-bracket",
                 "--tangent-points", "2, 3"]) == 0


def test_main_error_paths(tmp_path, capsys):
    assert main([]) == 1
    assert "error: --input is required" in capsys.readouterr().err

    assert main(["--input", str(tmp_path / "missing.csv")]) == 1
    assert "error:" in capsys.readouterr().err

    src = write_input(tmp_path)
    assert main(["--input", str(src), "--simulate", "n=4"]) == 1
    assert "mutually exclusive" in capsys.readouterr().err

    assert main(["--input", str(src), "--alpha", "2.0"]) == 1
    assert "alpha" in capsys.readouterr().err

    with pytest.raises(SystemExit):
        main(["--input", str(src), "--method", "sorcery"])


def test_main_simulation_run(tmp_path, capsys):
    spec = "kind=equal-sigma-uniform,n=4,reps=100,seed=3,range=4,methods=lr-bracket+tukey"
    code = main(["--simulate", spec, "--mc-samples", "2000",
                 "--output-dir", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "equal-sigma-uniform(n=4, spread=4, reps=100, seed=3)" in out
    assert "report ->" in out

    csv_path = tmp_path / "sim-equal-sigma-uniform-n4.report.csv"
    json_path = tmp_path / "sim-equal-sigma-uniform-n4.report.json"
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["method"] for r in rows] == ["lr-bracket", "tukey"]
    with open(json_path) as fh:
        payload = json.load(fh)
    assert payload["scenario"]["n"] == 4
    assert len(payload["results"]) == 2

    # rerunning the same --simulate string reproduces the report exactly
    first = csv_path.read_bytes()
    assert main(["--simulate", spec, "--mc-samples", "2000",
                 "--output-dir", str(tmp_path)]) == 0
    capsys.readouterr()
    assert csv_path.read_bytes() == first


def test_main_simulation_spec_errors(tmp_path, capsys):
    assert main(["--simulate", "n=4,flavor=mint", "--output-dir", str(tmp_path)]) == 1
    assert "unknown scenario key" in capsys.readouterr().err
    assert main(["--simulate", "methods=wizardry", "--output-dir", str(tmp_path)]) == 1
    assert "unknown method" in capsys.readouterr().err
    assert main(["--simulate", "n", "--output-dir", str(tmp_path)]) == 1
    assert "not key=value" in capsys.readouterr().err
