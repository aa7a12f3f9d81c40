import json

import numpy as np
import pytest
from click.testing import CliRunner

from pdmpkit.cli import main
from pdmpkit.config import ConfigError, build_sampler, config_hash, validate_config


BPS_CONFIG = {
    "sampler": {"kind": "bps", "lambda_ref": 1.0, "horizon": 50.0},
    "target": {"kind": "gaussian", "d": 2, "diagonal": [1.0, 4.0]},
    "velocity": {"kind": "gaussian", "m2": 1.0},
    "rate": {"kind": "canonical"},
    "bound": {"source": "theorem1"},
    "seed": 7,
    "replicas": 2,
}


def _write(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def test_validate_accepts_reference_config():
    validate_config(json.loads(json.dumps(BPS_CONFIG)))


def test_unknown_keys_rejected_with_paths():
    bad = dict(BPS_CONFIG, extra=1)
    with pytest.raises(ConfigError, match="unknown keys"):
        validate_config(bad)
    bad2 = json.loads(json.dumps(BPS_CONFIG))
    bad2["sampler"]["typo_field"] = 3
    with pytest.raises(ConfigError, match=r"sampler.*typo_field"):
        validate_config(bad2)


def test_field_type_and_range_errors_name_fields():
    cfg = json.loads(json.dumps(BPS_CONFIG))
    cfg["sampler"]["horizon"] = -1.0
    with pytest.raises(ConfigError, match="sampler.horizon"):
        validate_config(cfg)
    cfg2 = json.loads(json.dumps(BPS_CONFIG))
    cfg2["target"]["d"] = "two"
    with pytest.raises(ConfigError, match="target.d"):
        validate_config(cfg2)
    cfg3 = json.loads(json.dumps(BPS_CONFIG))
    cfg3["sampler"]["kind"] = "metropolis"
    with pytest.raises(ConfigError, match="sampler.kind"):
        validate_config(cfg3)


def test_theorem17_requires_c3():
    cfg = {
        "sampler": {"kind": "zigzag", "lambda_ref": 1.0, "horizon": 10.0},
        "target": {"kind": "radial_beta", "d": 2, "beta": 2.0},
        "velocity": {"kind": "rademacher"},
        "bound": {"source": "theorem17"},
    }
    with pytest.raises(ConfigError, match=r"bound.source.*c3"):
        validate_config(cfg)


def test_bound_needs_positive_refresh_floor():
    cfg = json.loads(json.dumps(BPS_CONFIG))
    cfg["sampler"]["lambda_ref"] = 0.0
    with pytest.raises(ConfigError, match="positive refreshment floor"):
        validate_config(cfg)


def test_build_sampler_roundtrip():
    sc = build_sampler(json.loads(json.dumps(BPS_CONFIG)))
    assert sc.sampler == "bps" and sc.target.d == 2
    assert sc.rate.name == "canonical"


def test_config_hash_stable_and_sensitive():
    a = config_hash(BPS_CONFIG)
    assert a == config_hash(json.loads(json.dumps(BPS_CONFIG)))
    changed = json.loads(json.dumps(BPS_CONFIG))
    changed["seed"] = 8
    assert config_hash(changed) != a


def test_cli_bound(tmp_path):
    runner = CliRunner()
    path = _write(tmp_path, BPS_CONFIG)
    result = runner.invoke(main, ["bound", "--config", path, "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "bound_report.json").read_text())
    assert report["source"] == "theorem1"
    assert report["alpha"] > 0
    assert report["lemma6_lower"] <= report["alpha"] <= report["lemma6_upper"]
    assert report["config_hash"] == config_hash(BPS_CONFIG)
    assert "version" in report


def test_cli_bound_validation_exit_code(tmp_path):
    runner = CliRunner()
    bad = json.loads(json.dumps(BPS_CONFIG))
    bad["sampler"]["lambda_ref"] = 0.0
    result = runner.invoke(main, ["bound", "--config", _write(tmp_path, bad)])
    assert result.exit_code == 1
    assert "refreshment floor" in result.output


def test_cli_sample_outputs_and_determinism(tmp_path):
    runner = CliRunner()
    cfg = {
        "sampler": {"kind": "zigzag", "lambda_ref": 1.0, "horizon": 60.0},
        "target": {"kind": "gaussian", "d": 1},
        "velocity": {"kind": "rademacher"},
        "seed": 3,
        "replicas": 2,
    }
    path = _write(tmp_path, cfg)
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    for out in (out1, out2):
        result = runner.invoke(main, ["sample", "--config", path, "--out", str(out)])
        assert result.exit_code == 0, result.output
    for name in ("skeleton_r0.csv", "skeleton_r1.csv", "summary.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    summary = json.loads((out1 / "summary.json").read_text())
    assert summary["replicas"] == 2
    assert len(summary["per_replica"]) == 2
    assert summary["config_hash"] == config_hash(cfg)


def test_cli_sample_jobs_parallel_matches_serial(tmp_path):
    runner = CliRunner()
    cfg = {
        "sampler": {"kind": "bps", "lambda_ref": 1.0, "horizon": 30.0},
        "target": {"kind": "gaussian", "d": 2},
        "velocity": {"kind": "gaussian"},
        "seed": 11,
        "replicas": 2,
    }
    path = _write(tmp_path, cfg)
    serial = tmp_path / "serial"
    par = tmp_path / "par"
    assert runner.invoke(main, ["sample", "--config", path, "--out", str(serial)]).exit_code == 0
    assert runner.invoke(
        main, ["sample", "--config", path, "--out", str(par), "--jobs", "2"]
    ).exit_code == 0
    for name in ("skeleton_r0.csv", "skeleton_r1.csv", "summary.json"):
        assert (serial / name).read_bytes() == (par / name).read_bytes()


def test_cli_sample_invalid_name(tmp_path):
    runner = CliRunner()
    cfg = {"sampler": {"kind": "nuts", "horizon": 10.0},
           "target": {"kind": "gaussian", "d": 1},
           "velocity": {"kind": "gaussian"}}
    result = runner.invoke(main, ["sample", "--config", _write(tmp_path, cfg)])
    assert result.exit_code == 1
    assert "sampler.kind" in result.output


def test_cli_sweep(tmp_path):
    runner = CliRunner()
    cfg = {
        "sweep": {
            "dims": [4, 8, 16],
            "lambda_mode": "fixed",
            "lambda_fixed": 1.0,
            "family": {"sampler": "bps"},
        }
    }
    path = _write(tmp_path, cfg)
    result = runner.invoke(main, ["sweep", "--config", path, "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert lines[1] == "d,lambda_opt,alpha,alpha_inv,slope"
    assert len(lines) == 5
    summary = json.loads((tmp_path / "sweep_summary.json").read_text())
    assert "fitted_slope" in summary and summary["config_hash"] == config_hash(cfg)


def test_cli_sweep_empty_dims(tmp_path):
    runner = CliRunner()
    cfg = {"sweep": {"dims": [], "family": {"sampler": "bps"}}}
    result = runner.invoke(main, ["sweep", "--config", _write(tmp_path, cfg)])
    assert result.exit_code == 1
    assert "sweep.dims" in result.output


def test_cli_verify_unknown_suite():
    runner = CliRunner()
    result = runner.invoke(main, ["verify", "everything"])
    assert result.exit_code == 1
    for name in ("moments", "rates", "brackets", "thinning"):
        assert name in result.output


def test_cli_verify_rates_suite_passes():
    runner = CliRunner()
    result = runner.invoke(main, ["verify", "rates"])
    assert result.exit_code == 0, result.output
    assert "[PASS]" in result.output and "[FAIL]" not in result.output.replace(
        "[PASS] rate[broken certificate detected]", ""
    )
