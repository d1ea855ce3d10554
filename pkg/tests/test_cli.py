import json

import numpy as np
import pytest

from qutritlink.cli import main, read_density_csv, write_density_csv
from qutritlink.linkmodel import crosstalk_channel, synthetic_scan, write_delay_scan
from qutritlink.qstate import mes_state
from qutritlink.slm import read_pgm
from qutritlink.tomography import default_inputs


def report(path):
    return json.loads(path.read_text())


def test_tomography_bundled(tmp_path):
    assert main(["tomography", "--seed", "42", "--output-dir", str(tmp_path), "--cglmp-starts", "2"]) == 0
    doc = report(tmp_path / "tomography_report.json")
    assert doc["seed"] == 42
    assert doc["version"]
    assert doc["config"]["subcommand"] == "tomography"
    w = doc["results"]["witness"]
    assert w["fidelity"] == pytest.approx(0.71, abs=0.05)
    assert w["certified_dimension"] == 3
    rho = read_density_csv(tmp_path / "density_matrix.csv")
    assert rho.matrix.shape == (9, 9)


def test_tomography_bootstrap(tmp_path):
    args = ["tomography", "--output-dir", str(tmp_path), "--no-cglmp", "--bootstrap", "3", "--restarts", "2"]
    assert main(args) == 0
    boot = report(tmp_path / "tomography_report.json")["results"]["bootstrap"]
    assert set(boot) >= {"purity", "fidelity", "n_resamples", "failures"}


def test_witness_and_cglmp_from_csv(tmp_path):
    rho_path = tmp_path / "rho.csv"
    write_density_csv(mes_state(0, 0).projector(), rho_path)
    assert main(["witness", "--rho", str(rho_path), "--output-dir", str(tmp_path), "--no-cglmp"]) == 0
    assert report(tmp_path / "witness_report.json")["results"]["witness"]["fidelity"] == pytest.approx(1)
    assert main(["cglmp", "--rho", str(rho_path), "--output-dir", str(tmp_path), "--family", "fourier",
                 "--cglmp-starts", "2"]) == 0
    assert report(tmp_path / "cglmp_report.json")["results"]["i3"] == pytest.approx(2.8729, abs=1e-3)


def test_process(tmp_path):
    ch = crosstalk_channel(0.128)
    doc = {"outputs": [{"re": ch.apply(r).real.tolist(), "im": ch.apply(r).imag.tolist()} for r in default_inputs()]}
    path = tmp_path / "proc.json"
    path.write_text(json.dumps(doc))
    assert main(["process", "--input", str(path), "--output-dir", str(tmp_path)]) == 0
    res = report(tmp_path / "process_report.json")["results"]
    assert 0 < res["fidelity_to_identity"] < 1
    assert res["fit_residual"] < 1e-10


def test_simulate_identity_link(tmp_path):
    assert main(["simulate", "--tau-disp", "0", "--crosstalk", "0", "--cglmp-starts", "2",
                 "--output-dir", str(tmp_path)]) == 0
    point = report(tmp_path / "simulate_report.json")["results"]["points"][0]["report"]
    assert point["fidelity"] == pytest.approx(1, abs=1e-12)
    assert point["i3"] == pytest.approx(2.8729, abs=1e-3)
    assert (tmp_path / "sweep.csv").read_text().count("\n") == 2


def test_simulate_grid(tmp_path):
    args = ["simulate", "--tau-disp", "2.4e-9", "--tau-comp", "0", "2.4e-9", "--crosstalk", "0", "0.128",
            "--no-cglmp", "--output-dir", str(tmp_path)]
    assert main(args) == 0
    assert len(report(tmp_path / "simulate_report.json")["results"]["points"]) == 4


def test_dispersion_fit(tmp_path):
    write_delay_scan(synthetic_scan(2.4e-9), tmp_path / "scan.csv")
    assert main(["dispersion-fit", "--input", str(tmp_path / "scan.csv"), "--output-dir", str(tmp_path)]) == 0
    assert report(tmp_path / "dispersion_report.json")["results"]["delta_t_s"] == pytest.approx(2.4e-9, rel=1e-6)


def test_hologram_central_pixel(tmp_path):
    assert main(["hologram", "--l", "1", "--lambda-px", "8", "--nx", "64", "--ny", "64",
                 "--output-dir", str(tmp_path)]) == 0
    levels = read_pgm(tmp_path / "hologram.pgm")
    assert levels[32, 32] == 0
    assert report(tmp_path / "hologram_report.json")["results"]["center_pixel_level"] == 0
    phase = np.loadtxt(tmp_path / "hologram.csv", delimiter=",")
    assert phase.shape == (64, 64)


def test_missing_input_exits_nonzero(tmp_path, capsys):
    assert main(["dispersion-fit", "--input", str(tmp_path / "none.csv")]) == 2
    assert "not found" in capsys.readouterr().err


def test_malformed_table_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join([",".join(["1"] * 9)] * 3 + ["1,2,3"] + [",".join(["1"] * 9)] * 5))
    assert main(["tomography", "--input", str(bad), "--no-cglmp", "--output-dir", str(tmp_path)]) == 2
    assert "line 4" in capsys.readouterr().err


def test_convergence_failure_exits_nonzero(tmp_path, capsys):
    assert main(["tomography", "--max-iter", "2", "--restarts", "1", "--no-cglmp",
                 "--output-dir", str(tmp_path)]) == 1
    assert "diagnostics" in capsys.readouterr().err


def test_invalid_config(tmp_path):
    assert main(["tomography", "--bootstrap", "1", "--output-dir", str(tmp_path)]) == 2
    assert main(["tomography", "--seed", "-1", "--output-dir", str(tmp_path)]) == 2


def test_hologram_byte_identical(tmp_path):
    args = ["hologram", "--l", "-1", "1", "--nx", "48", "--ny", "40", "--output-dir", str(tmp_path)]
    main(args)
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    main(args)
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}
