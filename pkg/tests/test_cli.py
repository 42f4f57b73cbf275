import json
import re

import numpy as np
import pytest

from surfsim.cli import main, parse_p_list, read_config, UsageError
from surfsim.experiment import read_csv
from surfsim.fit import fit_threshold, synthetic_points
from surfsim.plot import render_svg


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_p_range_syntax():
    assert parse_p_list("0.001:0.003:3") == [0.001, 0.002, 0.003]
    assert parse_p_list("0.1,0.2") == [0.1, 0.2]
    with pytest.raises(UsageError):
        parse_p_list("0.1:0.2")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("model=capacity\nd_list=3,5\np_list=0.05\nshots=200\nmin_failures=0\n")
    code, out, _ = run(["run", "--config", str(cfg), "--seed", "4"], capsys)
    assert code == 0
    meta, pts = read_csv(out)
    assert meta["seed"] == "4" and [pt.d for pt in pts] == [3, 5]
    cfg.write_text("model=capacity\nbogus=1\n")
    code, _, err = run(["run", "--config", str(cfg)], capsys)
    assert code == 1 and "bogus" in err
    assert read_config("# model=pheno\n# tool=surfsim\n") == {"model": "pheno"}


@pytest.mark.slow
def test_sweep_rows_and_rerun(tmp_path, capsys):
    args = ["run", "--model", "capacity", "--d", "5,7,9", "--p", "0.095:0.110:7", "--shots", "100000",
            "--seed", "1"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "2"]) == 0
    text = a.read_text()
    assert text == b.read_text()
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = rows[0].split(",")
    assert header[:12] == ["model", "variant", "weighting", "component", "d", "p", "rounds",
                           "shots", "failures", "p_l", "stderr", "accounting"]
    assert len(rows) - 1 == 21


def test_embedded_config_reproduces_file(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--model", "pheno", "--d", "3,5", "--p", "0.02:0.04:3", "--shots", "2000",
                 "--seed", "5", "--chunk", "700", "--out", str(a)]) == 0
    assert main(["run", "--config", str(a), "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


@pytest.mark.parametrize("variant,component", [("depth6", "X"), ("depth8", "Z")])
def test_auto_component(variant, component, capsys):
    code, out, _ = run(["run", "--model", "perfect1q", "--variant", variant, "--d", "3",
                        "--p", "0.01", "--shots", "100",
                        "--min-failures", "0"], capsys)
    assert code == 0
    body = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert body[1].split(",")[3] == component


def test_dump_events(capsys):
    code, _, err = run(["run", "--model", "pheno", "--d", "3", "--p", "0.05", "--shots", "10",
                        "--min-failures", "0", "--dump-events", "2"], capsys)
    assert code == 0 and err.count("# trial") == 2


def test_unconverged_warning(capsys):
    code, _, err = run(["run", "--model", "capacity", "--d", "3", "--p", "0.001", "--shots", "100",
                        "--min-failures", "5", "--max-shots", "200", "--chunk", "100"], capsys)
    assert code == 0 and "warning" in err


@pytest.fixture
def synthetic_csv(tmp_path):
    from surfsim.experiment import RunConfig, points_to_csv

    pts = synthetic_points((0.28, 5.0, 40.0, 0.029, 1.0), [5, 7, 9], np.linspace(0.026, 0.032, 7))
    path = tmp_path / "syn.csv"
    path.write_text(points_to_csv(pts, RunConfig(model="pheno", d_list=[5, 7, 9])))
    return path


def test_fit_and_plot(synthetic_csv, tmp_path, capsys):
    fit_json = tmp_path / "fit.json"
    assert main(["fit", str(synthetic_csv), "--out", str(fit_json)]) == 0
    raw = json.loads(fit_json.read_text())
    assert abs(raw["p_th"] - 0.029) < 1e-6 and raw["publication_grade"]
    code, out, _ = run(["fit", str(synthetic_csv), "--d-min", "0,5"], capsys)
    assert code == 0 and len(json.loads(out)) == 2

    svg = tmp_path / "plot.svg"
    assert main(["plot", str(synthetic_csv), "--fit", str(fit_json), "--out", str(svg)]) == 0
    text = svg.read_text()
    assert len(re.findall(r'class="curve"', text)) == 3
    assert len(re.findall(r'class="errbar"', text)) == 21
    assert len(re.findall(r'class="fit"', text)) == 3
    assert text.count('class="pth"') == 1


def test_empty_csv(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("# model=pheno\n" + ",".join(["model", "variant", "weighting", "component", "d", "p",
                                                    "rounds", "shots", "failures", "p_l", "stderr",
                                                    "accounting"]) + "\n")
    svg = tmp_path / "out.svg"
    code, _, err = run(["plot", str(empty), "--out", str(svg)], capsys)
    assert code != 0 and err and not svg.exists()
    code, _, _ = run(["fit", str(empty)], capsys)
    assert code == 1
    with pytest.raises(ValueError):
        render_svg([])


def test_exit_codes(synthetic_csv, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--model", "nope"])
    assert exc.value.code == 1
    assert run(["run", "--d", "1"], capsys)[0] == 1
    assert run(["fit", str(tmp_path / "missing.csv")], capsys)[0] == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("garbage\n1,2\n")
    assert run(["fit", str(bad)], capsys)[0] == 2


def test_nonconvergence_exit(monkeypatch, synthetic_csv, capsys):
    import surfsim.cli as cli

    monkeypatch.setattr(cli, "fit_threshold", lambda pts, d_min: fit_threshold(pts, d_min, x0=[0, 0, 0, 0.5, 1], max_nfev=3))
    assert run(["fit", str(synthetic_csv)], capsys)[0] == 3


def test_dump_commands(tmp_path, capsys):
    code, out, _ = run(["dump-layout", "--d", "3"], capsys)
    assert code == 0 and out
    code, out, _ = run(["dump-schedule", "--d", "3", "--variant", "depth5"], capsys)
    assert code == 0 and out
    code, out, _ = run(["weights", "--d", "3", "--model", "standard", "--p", "0.001"], capsys)
    assert code == 0 and out.splitlines()[0].startswith("graph,type,t")
    code, out, _ = run(["weights", "--d", "3", "--model", "capacity", "--weighting", "rectilinear"], capsys)
    assert code == 0 and len(out.splitlines()) > 1
