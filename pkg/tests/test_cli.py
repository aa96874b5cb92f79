import json
import os

import numpy as np
import pytest

from krylovflow.cli import (EXIT_INVARIANT, EXIT_NUMERICAL, EXIT_OK,
                            EXIT_USAGE, main)


def write_config(path, **overrides):
    cfg = {
        "model": {"N": 2, "g": -1.05, "h": 0.5,
                  "alpha": 0.01, "gamma": 0.01},
        "t_max": 3.0,
        "n_samples": 61,
        "continuum": {"case": "constant_a", "alpha": 3.0, "beta": 2.0},
        "saturation": {"alpha0": 1.0, "gamma0": 1.0, "K": 60,
                       "t_max": 2.0, "n_samples": 201},
    }
    cfg.update(overrides)
    with open(path, "w") as fh:
        json.dump(cfg, fh)
    return cfg


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def test_full_pipeline_artifacts(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path)
    out = tmp_path / "out"
    code = main(["full", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"])
    assert code == EXIT_OK
    expected = ["coefficients.csv", "structure.json", "moments.csv",
                "bound.csv", "bound_summary.json", "oracle.csv",
                "continuum.csv", "saturation.csv",
                "saturation_summary.json", "filtered_b_abs.csv",
                "filtered_a_im.csv", "full_summary.json"]
    for name in expected:
        path = out / name
        assert path.exists(), name
        sidecar = json.loads((out / (name + ".json")).read_text())
        assert sidecar["artifact"] == name
        assert "version" in sidecar
        assert sidecar["config"]["model"]["N"] == 2


def test_full_runs_are_byte_identical(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["full", "--config", str(cfg_path), "--out", str(out1),
                 "--quiet"]) == EXIT_OK
    assert main(["full", "--config", str(cfg_path), "--out", str(out2),
                 "--quiet"]) == EXIT_OK
    for name in sorted(os.listdir(out1)):
        if name.endswith(".csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_lanczos_closed_structure(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path,
                 model={"N": 2, "g": -1.05, "h": 0.5,
                        "alpha": 0.0, "gamma": 0.0})
    out = tmp_path / "out"
    assert main(["lanczos", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"]) == EXIT_OK
    report = json.loads((out / "structure.json").read_text())
    assert report["label"] == "closed structure"
    assert report["max_im_a"] < 1e-10


def test_continuum_constant_a_columns(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path)
    out = tmp_path / "out"
    assert main(["continuum", "--config", str(cfg_path), "--out",
                 str(out), "--quiet"]) == EXIT_OK
    table = read_csv(out / "continuum.csv")
    assert table["relC"].max() < 1e-10
    assert table["relP"].max() < 1e-10


def test_filter_external_csv(tmp_path):
    src = tmp_path / "series.csv"
    lines = ["n,raw"] + [f"{i},{v}" for i, v in
                         enumerate([1, 1, 1, 1, 50, 1, 1, 1, 1, 1])]
    src.write_text("\n".join(lines) + "\n")
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path, coefficients_csv=str(src))
    out = tmp_path / "out"
    assert main(["filter", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"]) == EXIT_OK
    table = read_csv(out / "filtered.csv")
    assert table["raw"][4] == 50
    assert table["cleaned"][4] == 1


def test_unknown_subcommand_is_usage_error(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path)
    assert main(["explode", "--config", str(cfg_path)]) == EXIT_USAGE
    capsys.readouterr()


def test_malformed_config_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert main(["lanczos", "--config", str(bad),
                 "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_missing_config_is_usage_error(tmp_path):
    assert main(["lanczos", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_oracle_size_cap(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path,
                 model={"N": 5, "g": -1.05, "h": 0.5,
                        "alpha": 0.01, "gamma": 0.01},
                 n_samples=5, t_max=0.1)
    out = tmp_path / "out"
    code = main(["oracle", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"])
    assert code == EXIT_USAGE
    error = json.loads((out / "error.json").read_text())
    assert error["error"] == "usage"
    # partial artifacts from earlier stages were rolled back
    assert not (out / "coefficients.csv").exists()


def test_numerical_failure_exit_code(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path, t_max=500.0,
                 continuum={"case": "constant_a", "alpha": 3.0,
                            "beta": 2.0})
    out = tmp_path / "out"
    code = main(["continuum", "--config", str(cfg_path), "--out",
                 str(out), "--quiet"])
    assert code == EXIT_NUMERICAL
    error = json.loads((out / "error.json").read_text())
    assert error["error"] == "numerical"
    assert not (out / "continuum.csv").exists()


def test_continuum_without_block_is_usage_error(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg = write_config(cfg_path)
    del cfg["continuum"]
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    assert main(["continuum", "--config", str(cfg_path), "--out",
                 str(tmp_path / "o"), "--quiet"]) == EXIT_USAGE


def test_full_skips_oracle_above_cap(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path,
                 model={"N": 5, "g": -1.05, "h": 0.5,
                        "alpha": 0.01, "gamma": 0.01},
                 bilanczos={"max_iter": 40},
                 t_max=1.0, n_samples=21)
    out = tmp_path / "out"
    assert main(["full", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"]) == EXIT_OK
    summary = json.loads((out / "full_summary.json").read_text())
    assert any("oracle" in item for item in summary["skipped"])
    assert not (out / "oracle.csv").exists()


def test_csv_format_is_plain_lf(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    write_config(cfg_path)
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"]) == EXIT_OK
    raw = (out / "moments.csv").read_bytes()
    assert b"\r" not in raw
    assert raw.decode("ascii").splitlines()[0] == "t,C,P,M2,Ctilde"
