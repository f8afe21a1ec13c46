import os
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from mabmc.experiments import (
    ConfigError,
    OracleMismatchError,
    emit_plot_svg,
    emit_summary_csv,
    load_config,
    run_experiment,
    run_oracle_check,
)
from mabmc.experiments.cli import main
from mabmc.experiments.config import OUTPUT_DIR_ENV, default_config
from mabmc.experiments.runner import REFERENCE_TRANSITIONS, SummaryRow, SweepSummary
from dataclasses import replace

SVG_NS = "http://www.w3.org/2000/svg"


# --- configuration ------------------------------------------------------------

def test_default_configs():
    cfg = default_config("gaussian-sweep")
    assert cfg.samplers == ("MPMC", "SVE", "MABMC")
    assert cfg.grid == tuple(round(0.1 * k, 10) for k in range(1, 11))
    assert cfg.iterations == 20000
    cfg = default_config("toy1")
    assert "MH" in cfg.samplers and cfg.grid == (0.0,)


def test_env_var_sets_output_dir(monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, "/tmp/somewhere-else")
    assert default_config("toy1").output_dir == "/tmp/somewhere-else"


def test_config_file_and_overrides(tmp_path):
    ini = tmp_path / "exp.ini"
    ini.write_text(
        "[gaussian-sweep]\n"
        "samplers = SVE, MABMC\n"
        "iterations = 500\n"
        "seeds = 7, 8\n"
        "grid = 0.25, 0.75\n"
        "write-traces = false\n"
    )
    cfg = load_config(ini, "gaussian-sweep", {"iterations": 250})
    assert cfg.samplers == ("SVE", "MABMC")
    assert cfg.iterations == 250
    assert cfg.seeds == (7, 8)
    assert cfg.grid == (0.25, 0.75)
    assert cfg.write_traces is False


def test_config_error_names_field(tmp_path):
    with pytest.raises(ConfigError, match="samplers: must not be empty"):
        load_config(None, "toy1", {"samplers": ()})
    with pytest.raises(ConfigError, match="iterations"):
        load_config(None, "toy1", {"iterations": 0})
    with pytest.raises(ConfigError, match="seeds"):
        load_config(None, "toy1", {"seeds": ()})
    with pytest.raises(ConfigError, match="grid"):
        load_config(None, "gaussian-sweep", {"grid": ()})
    with pytest.raises(ConfigError, match="grid: only sweep"):
        load_config(None, "toy1", {"grid": (1.0,)})
    with pytest.raises(ConfigError, match="unknown sampler"):
        load_config(None, "toy1", {"samplers": ("BOGUS",)})
    with pytest.raises(ConfigError, match="MH"):
        load_config(None, "ising-sweep", {"samplers": ("MH", "SVE")})
    ini = tmp_path / "bad.ini"
    ini.write_text("[toy1]\nnot-a-knob = 3\n")
    with pytest.raises(ConfigError, match="unknown configuration key"):
        load_config(ini, "toy1", None)
    ini.write_text("[toy1]\niterations = soon\n")
    with pytest.raises(ConfigError, match="iterations"):
        load_config(ini, "toy1", None)


# --- summary CSV ---------------------------------------------------------------

def _summary_fixture():
    rows = [
        SummaryRow(0.1, "MPMC", 0.2026, 0.001, 0.1013, None, None, 5),
        SummaryRow(0.1, "SVE", 3 / 7, 0.002, 3 / 7, None, None, 5),
        SummaryRow(0.1, "MABMC", 0.2690, 0.001, 0.0384, 0.4, 0.6, 5),
        SummaryRow(0.2, "MPMC", 0.3311, 0.001, 0.1656, None, None, 5),
        SummaryRow(0.2, "SVE", 0.3701, 0.002, 0.3701, None, None, 5),
        SummaryRow(0.2, "MABMC", 0.3799, 0.001, 0.0543, 0.45, 0.55, 5),
    ]
    return SweepSummary("gaussian-sweep", "sigma2", rows, [])


def test_summary_csv_schema(tmp_path):
    path = tmp_path / "summary.csv"
    summary = SweepSummary("toy1", "", [SummaryRow(0.0, "SVE", 3 / 7, 0.0, 3 / 7, None, None, 1)], [])
    emit_summary_csv(summary, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    content = [ln for ln in lines if not ln.startswith("#")]
    assert content[0] == (
        "grid_value,sampler,avg_accept,se,accept_per_draw,"
        "decision_mpmc_frac,decision_sve_frac,seed_count"
    )
    assert len(content) == 2  # header + single row
    assert content[1].split(",")[2] == "0.4285714286"
    # non-MABMC rows carry empty decision fields
    assert content[1].split(",")[5] == "" and content[1].split(",")[6] == ""


def test_summary_csv_mabmc_fields(tmp_path):
    path = tmp_path / "summary.csv"
    emit_summary_csv(_summary_fixture(), path)
    rows = [ln.split(",") for ln in path.read_text().splitlines() if not ln.startswith("#")][1:]
    mabmc = [r for r in rows if r[1] == "MABMC"]
    for r in mabmc:
        assert r[5] != "" and r[6] != ""
        assert float(r[5]) + float(r[6]) == pytest.approx(1.0)


# --- SVG plot -------------------------------------------------------------------

def test_svg_multi_point(tmp_path):
    path = tmp_path / "plot.svg"
    emit_plot_svg(_summary_fixture(), path)
    text = path.read_text(encoding="utf-8")
    root = ET.fromstring(text)
    assert root.tag == f"{{{SVG_NS}}}svg"
    assert "http://" not in text.replace(SVG_NS, "")  # no external resources
    polylines = root.findall(f".//{{{SVG_NS}}}polyline")
    assert len(polylines) == 3  # one per sampler
    # marker titles carry the plotted values at CSV precision
    titles = [t.text for t in root.findall(f".//{{{SVG_NS}}}title")]
    assert any("SVE sigma2=0.1 avg_accept=0.4285714286" == t for t in titles)
    # y axis is inverted: larger acceptance = smaller y coordinate
    by_sampler = {}
    for c in root.findall(f".//{{{SVG_NS}}}circle"):
        label = c.find(f"{{{SVG_NS}}}title").text.split()
        by_sampler[(label[0], label[1])] = float(c.get("cy"))
    assert by_sampler[("SVE", "sigma2=0.1")] < by_sampler[("MPMC", "sigma2=0.1")]


def test_svg_dominant_curve_lies_on_top(tmp_path):
    # when one sampler's values dominate, its polyline sits at lower y
    # coordinates (the y axis is inverted) at every grid point
    rows = []
    for x, base in ((0.1, 0.3), (0.2, 0.4), (0.3, 0.5)):
        rows.append(SummaryRow(x, "MPMC", base - 0.05, 0.0, None, None, None, 1))
        rows.append(SummaryRow(x, "SVE", base - 0.02, 0.0, None, None, None, 1))
        rows.append(SummaryRow(x, "MABMC", base, 0.0, None, 0.5, 0.5, 1))
    path = tmp_path / "dom.svg"
    emit_plot_svg(SweepSummary("gaussian-sweep", "sigma2", rows, []), path)
    root = ET.fromstring(path.read_text())
    curves = {}
    for poly in root.findall(f".//{{{SVG_NS}}}polyline"):
        ys = [float(pt.split(",")[1]) for pt in poly.get("points").split()]
        curves[poly.get("stroke")] = ys
    from mabmc.experiments.report import _SAMPLER_COLORS

    mabmc_ys = curves[_SAMPLER_COLORS["MABMC"]]
    for color, ys in curves.items():
        if color != _SAMPLER_COLORS["MABMC"]:
            assert all(m <= o + 1e-9 for m, o in zip(mabmc_ys, ys))


def test_svg_single_point_markers_only(tmp_path):
    rows = [SummaryRow(0.5, "SVE", 0.4, 0.0, 0.4, None, None, 1)]
    path = tmp_path / "single.svg"
    emit_plot_svg(SweepSummary("gaussian-sweep", "sigma2", rows, []), path)
    root = ET.fromstring(path.read_text())
    assert root.findall(f".//{{{SVG_NS}}}polyline") == []
    assert len(root.findall(f".//{{{SVG_NS}}}circle")) == 1


# --- runner + CLI ----------------------------------------------------------------

def test_run_experiment_toy_smoke(tmp_path):
    cfg = replace(
        default_config("toy1"),
        samplers=("MH", "PMC", "MPMC", "SVE", "MABMC"),
        iterations=300,
        seeds=(1, 2),
        output_dir=str(tmp_path / "out"),
        workers=1,
    )
    summary = run_experiment(cfg)
    assert len(summary.rows) == 5
    for row in summary.rows:
        assert 0.0 <= row.avg_accept <= 1.0
        assert row.seed_count == 2
        if row.sampler == "MABMC":
            assert row.decision_mpmc_frac is not None
    out = tmp_path / "out"
    assert (out / "summary.csv").exists()
    assert (out / "acceptance.svg").exists()
    assert (out / "acceptance.png").exists()
    traces = list((out / "traces").glob("*.csv"))
    assert len(traces) == 10


def test_summary_matches_traces(tmp_path):
    cfg = replace(
        default_config("toy1"),
        samplers=("SVE",),
        iterations=200,
        seeds=(3,),
        output_dir=str(tmp_path / "out"),
        workers=1,
    )
    summary = run_experiment(cfg)
    trace_file = next((tmp_path / "out" / "traces").glob("*.csv"))
    rows = trace_file.read_text().splitlines()[1:]
    probs = [float(r.split(",")[5]) for r in rows]
    assert abs(summary.rows[0].avg_accept - sum(probs) / len(probs)) < 1e-12


def test_reproducibility_byte_identical(tmp_path):
    outputs = []
    for tag in ("one", "two"):
        cfg = replace(
            default_config("gaussian-sweep"),
            samplers=("SVE", "MABMC"),
            iterations=300,
            seeds=(4, 5),
            grid=(0.5,),
            output_dir=str(tmp_path / tag),
            workers=2,
        )
        run_experiment(cfg)
        outputs.append(tmp_path / tag)
    a, b = outputs
    for rel in ["summary.csv", "acceptance.svg"] + [
        f"traces/{p.name}" for p in sorted((a / "traces").glob("*.csv"))
    ]:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_oracle_check_passes_and_writes_reports(tmp_path):
    lines = run_oracle_check(tmp_path, quiet=True)
    assert any("MATCH" in ln for ln in lines)
    assert not any("MISMATCH" in ln for ln in lines)
    assert (tmp_path / "oracle_toy1_SVE_transitions.csv").exists()
    assert (tmp_path / "oracle_toy1_SVE_balance.txt").exists()
    assert (tmp_path / "oracle_toy2_MPMC_balance.txt").exists()


def test_oracle_check_detects_mismatch(tmp_path, monkeypatch):
    from fractions import Fraction

    broken = dict(REFERENCE_TRANSITIONS)
    broken[("toy1", "SVE", "a", "b")] = Fraction(1, 3)
    monkeypatch.setattr("mabmc.experiments.runner.REFERENCE_TRANSITIONS", broken)
    with pytest.raises(OracleMismatchError):
        run_oracle_check(tmp_path, quiet=True)


def test_cli_toy_run_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "cli-out"
    code = main([
        "toy1", "--iterations", "200", "--seed", "1", "--samplers", "SVE,MABMC",
        "--out", str(out), "--workers", "1", "--oracle-check",
    ])
    assert code == 0
    assert (out / "summary.csv").exists()


def test_cli_config_error_exit_1(tmp_path, capsys):
    code = main(["toy1", "--samplers", "", "--out", str(tmp_path)])
    assert code == 1
    assert "samplers" in capsys.readouterr().err


def test_cli_unwritable_output_exit_2(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main([
        "toy1", "--iterations", "50", "--seed", "1", "--samplers", "SVE",
        "--out", str(blocker / "nested"), "--workers", "1",
    ])
    assert code == 2


def test_cli_oracle_mismatch_exit_3(tmp_path, monkeypatch, capsys):
    from fractions import Fraction

    broken = dict(REFERENCE_TRANSITIONS)
    broken[("toy2", "MPMC", "a", "b")] = Fraction(1, 5)
    monkeypatch.setattr("mabmc.experiments.runner.REFERENCE_TRANSITIONS", broken)
    code = main(["oracle-check", "--out", str(tmp_path / "oc")])
    assert code == 3
    assert "mismatch" in capsys.readouterr().err.lower()


def test_cli_rejects_unknown_experiment():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_ising_cli_smoke(tmp_path):
    out = tmp_path / "ising-out"
    code = main([
        "ising-sweep", "--iterations", "30", "--seed", "1", "--grid", "0.3",
        "--samplers", "SVE", "--out", str(out), "--workers", "1",
    ])
    assert code == 0
    # dataset serialized next to the results
    datasets = list(out.glob("dataset_*.txt"))
    assert len(datasets) == 1
    assert datasets[0].read_text().startswith("ising 10 0.1 10")
