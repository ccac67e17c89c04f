import csv
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest
import tomli

from oracles import zero_field_lifetime
from radpair import cli
from radpair.config import dump_config, load_config, parse_config
from radpair.exceptions import ValidationError

CONFIGS = Path(__file__).parent / "data" / "configs"
SVG_NS = "{http://www.w3.org/2000/svg}"


def run(tmp_path, name, *argv):
    return cli.main(["--config", str(CONFIGS / name), "--out", str(tmp_path), "--jobs", "1",
                     *argv])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_config_round_trip(path, capsys):
    cfg = load_config(path)
    assert parse_config(tomli.loads(dump_config(cfg))) == cfg
    assert cli.main(["--config", str(path), "--print-config"]) == 0
    echoed = capsys.readouterr().out
    assert parse_config(tomli.loads(echoed)) == cfg


@pytest.mark.parametrize("data", [
    {"model": {"nuclei": 1, "spin": 1}},
    {"extra": {}},
    {"model": {"nuclei": 2, "hyperfine_mhz": [20.0]}},
    {"model": {"gamma": -1.0}},
    {"model": {"k_S": "fast"}},
    {"model": {"nuclei": True}},
    {"sweep": {"B_step": 0.0}},
    {"sweep": {"B_min": 2.0, "B_max": 1.0}},
    {"lifetime": {"mode": "last"}},
    {"metrology": {"snr": 0.0}},
    {"output": {"formats": "png"}},
])
def test_config_rejects(data):
    with pytest.raises(ValidationError):
        parse_config(data)


def test_config_conversion():
    cfg = load_config(CONFIGS / "default.toml")
    m = cfg.model_template()
    assert m.hyperfine[0].A == pytest.approx(2 * math.pi * 0.02)
    assert m.hyperfine[0].electron == 0 and m.hyperfine[0].nucleus == 2
    assert cfg.field_grid().size == 501


def test_invalid_config_exit_code(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[model]\nnuclei = 1\nwhatever = 3\n")
    assert cli.main(["--config", str(bad), "--out", str(tmp_path), "sweep"]) == 2
    bad.write_text("[model\n")
    assert cli.main(["--config", str(bad), "sweep"]) == 2
    assert cli.main(["--config", str(tmp_path / "missing.toml"), "sweep"]) == 2
    assert cli.main(["sweep"]) == 2


def test_unwritable_output_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = cli.main(["--config", str(CONFIGS / "small.toml"), "--out", str(blocker / "sub"),
                     "sweep"])
    assert code == 3


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from radpair import magnetometry
    from radpair.exceptions import NumericalError

    def broken(model, settings):
        raise NumericalError("diverged")

    monkeypatch.setattr(magnetometry, "model_lifetime", broken)
    assert run(tmp_path, "small.toml", "sweep") == 4


def test_global_flags_after_subcommand(tmp_path):
    code = cli.main(["sweep", "--config", str(CONFIGS / "no_hyperfine.toml"),
                     "--out", str(tmp_path), "--jobs", "1"])
    assert code == 0 and (tmp_path / "sweep.csv").exists()


def test_simulate_without_hyperfine(tmp_path):
    assert run(tmp_path, "no_hyperfine.toml", "simulate", "--field", "0.5") == 0
    rows = read_rows(tmp_path / "trajectory_B0.5.csv")
    assert rows[0] == ["t_ns", "trace", "singlet_prob", "concurrence"]
    assert all(r[3] == "1" for r in rows[1:])
    assert len(rows) == 1 + 801


def test_simulate_unitary_trace_and_first_zero(tmp_path):
    assert run(tmp_path, "default.toml", "simulate", "--field", "0") == 0
    rows = read_rows(tmp_path / "trajectory_B0.csv")[1:]
    assert all(abs(float(r[1]) - 1) <= 1e-9 for r in rows)
    t = [float(r[0]) for r in rows]
    c = [float(r[3]) for r in rows]
    k = next(i for i, v in enumerate(c) if v <= 1e-6)
    assert t[k - 1] < zero_field_lifetime() <= t[k]


def test_simulate_with_recombination(tmp_path):
    assert run(tmp_path, "recombination.toml", "simulate", "--field", "1") == 0
    rows = read_rows(tmp_path / "trajectory_B1.csv")[1:]
    traces = [float(r[1]) for r in rows]
    assert all(a >= b for a, b in zip(traces, traces[1:]))
    assert traces[-1] < 0.05
    assert all(0 <= float(r[2]) <= 1 for r in rows)


def test_simulate_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "small.toml", "simulate", "--field", "1.25") == 0
    assert run(b, "small.toml", "simulate", "--field", "1.25") == 0
    name = "trajectory_B1.25.csv"
    assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sweep_no_hyperfine_all_censored(tmp_path):
    assert run(tmp_path, "no_hyperfine.toml", "sweep") == 0
    rows = read_rows(tmp_path / "sweep.csv")
    assert rows[0] == ["B_mT", "TE_ns", "censored"]
    assert rows[1:] == [["0", "", "1"], ["0.25", "", "1"], ["0.5", "", "1"],
                        ["0.75", "", "1"], ["1", "", "1"]]


def test_sweep_row_count_and_format(tmp_path):
    assert run(tmp_path, "small.toml", "sweep") == 0
    raw = (tmp_path / "sweep.csv").read_bytes()
    assert b"\r" not in raw
    rows = read_rows(tmp_path / "sweep.csv")
    assert len(rows) - 1 == math.floor(2.0 / 0.1) + 1
    for r in rows[1:]:
        assert len(r[1].replace(".", "").lstrip("0")) <= 9
    assert (tmp_path / "sweep_zoom.csv").exists()
    ET.parse(tmp_path / "sweep.svg")


def test_sweep_two_nuclei(tmp_path):
    assert run(tmp_path, "two_nuclei.toml", "sweep") == 0
    rows = read_rows(tmp_path / "sweep.csv")[1:]
    assert len(rows) == 3
    assert all(r[2] in ("0", "1") for r in rows)


def _write_curve(path, rows):
    path.write_text("B_mT,TE_ns,censored\n" + "".join(f"{b},{t},{c}\n" for b, t, c in rows))


def test_scan_injected_linear_curve(tmp_path):
    curve = tmp_path / "lin.csv"
    _write_curve(curve, [(round(2.9 + 0.01 * i, 2), 100 + 10 * (i - 10), 0)
                         for i in range(1, 21)])
    code = run(tmp_path, "small.toml", "scan", "--curve-csv", str(curve))
    assert code == 0
    rows = read_rows(tmp_path / "scan.csv")
    assert rows[0] == ["B_mT", "TE_ns", "slope_ns_per_mT", "r", "deltaB_fund_mT", "deltaB_TE_mT"]
    for r in rows[1:]:
        assert float(r[2]) == pytest.approx(1000.0, rel=1e-9)
        T = float(r[1])
        assert float(r[3]) == pytest.approx(0.176 * T * T / 1000, rel=1e-8)
    at3 = next(r for r in rows[1:] if r[0] == "3")
    assert float(at3[3]) == pytest.approx(1.76, rel=1e-8)


def test_scan_injected_flat_curve(tmp_path, capsys):
    curve = tmp_path / "flat.csv"
    _write_curve(curve, [(0.5 * i, 25.0, 0) for i in range(8)] + [(4.0, "", 1)])
    assert run(tmp_path, "small.toml", "scan", "--curve-csv", str(curve)) == 0
    out = capsys.readouterr().out
    assert "no violation" in out and "VIOLATION" not in out
    rows = read_rows(tmp_path / "scan.csv")[1:]
    assert all(r[3] == "inf" for r in rows[:-1])
    assert rows[-1][1] == "" and rows[-1][3] == ""
    assert "no violation" in (tmp_path / "scan_summary.txt").read_text()


def test_scan_injected_steep_curve_flags_violation(tmp_path, capsys):
    curve = tmp_path / "steep.csv"
    _write_curve(curve, [(round(2.95 + 0.01 * i, 2), 10 + 10 * i, 0) for i in range(11)])
    assert run(tmp_path, "small.toml", "scan", "--curve-csv", str(curve)) == 0
    assert "VIOLATION" in capsys.readouterr().out


def test_scan_bad_curve_file(tmp_path):
    curve = tmp_path / "bad.csv"
    curve.write_text("B,T\n1,2\n")
    assert run(tmp_path, "small.toml", "scan", "--curve-csv", str(curve)) == 2
    assert run(tmp_path, "small.toml", "scan", "--curve-csv", str(tmp_path / "nope.csv")) == 3


def test_scan_simulated(tmp_path, capsys):
    assert run(tmp_path, "small.toml", "scan") == 0
    out = capsys.readouterr().out
    assert "[coarse]" in out and "[zoom]" in out and "min_r" in out
    for name in ("scan.csv", "scan_zoom.csv", "scan.svg", "scan_zoom.svg", "scan_summary.txt"):
        assert (tmp_path / name).exists()
    ET.parse(tmp_path / "scan.svg")


def test_figure1b_matches_sweep_and_svg(tmp_path):
    a, b = tmp_path / "fig", tmp_path / "sw"
    assert run(a, "small.toml", "figure1b") == 0
    assert run(b, "small.toml", "sweep") == 0
    assert (a / "figure1b.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    root = ET.parse(a / "figure1b.svg").getroot()
    assert root.tag == SVG_NS + "svg"
    assert len(root.findall(f".//{SVG_NS}polyline")) == 2
    assert any("zoom" in (t.text or "") for t in root.iter(SVG_NS + "text"))


def test_figure1b_needs_one_nucleus(tmp_path):
    assert run(tmp_path, "two_nuclei.toml", "figure1b") == 2


def test_sweep_jobs_do_not_change_bytes(tmp_path):
    a, b = tmp_path / "j1", tmp_path / "j3"
    assert cli.main(["--config", str(CONFIGS / "small.toml"), "--out", str(a), "--jobs", "1",
                     "sweep"]) == 0
    assert cli.main(["--config", str(CONFIGS / "small.toml"), "--out", str(b), "--jobs", "3",
                     "sweep"]) == 0
    for name in ("sweep.csv", "sweep_zoom.csv", "sweep.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sweep_zoom_skipped_without_slope(tmp_path):
    cfg = tmp_path / "flat.toml"
    cfg.write_text('[model]\nhyperfine_mhz = [0.0]\n[sweep]\nB_max = 1.0\nB_step = 0.5\n'
                   '[lifetime]\nhorizon = 50.0\n')
    assert cli.main(["--config", str(cfg), "--out", str(tmp_path), "sweep"]) == 0
    assert not (tmp_path / "sweep_zoom.csv").exists()


def test_figure1b_zoom_window_tracks_oracle(tmp_path, oracle):
    assert run(tmp_path, "default.toml", "figure1b") == 0
    B = [float(r[0]) for r in read_rows(tmp_path / "figure1b_zoom.csv")[1:]]
    centre = 0.5 * (B[0] + B[-1])
    assert abs(centre - oracle["zoom"]["center"]) <= 0.25


def test_scan_default_model_reports_violation(tmp_path, capsys):
    assert run(tmp_path, "default.toml", "scan") == 0
    assert "VIOLATION" in capsys.readouterr().out
