import json
from pathlib import Path

import pytest

from levicav.audit import write_reports
from levicav.cli import main
from levicav.experiments import (
    ScenarioSpec,
    SweepAxis,
    run_open_dynamics,
    run_temperature_sweep,
)


def small_spec(config, out_dir, **overrides):
    defaults = dict(t_final=2e-6, dt=1e-8, measure_set="full")
    defaults.update(overrides)
    return ScenarioSpec(config=config, out_dir=Path(out_dir), **defaults)


def read_artifacts(result):
    return {Path(p).name: Path(p).read_bytes() for p in result.artifacts}


def test_sweep_axis_validation():
    with pytest.raises(ValueError):
        SweepAxis(name="occupation", values=())
    with pytest.raises(ValueError):
        SweepAxis(name="occupation", values=(0.1, float("nan")))


def test_scenario_spec_validation(design_config, tmp_path):
    with pytest.raises(ValueError):
        ScenarioSpec(config=design_config, out_dir=tmp_path, dt=0.0)
    with pytest.raises(ValueError):
        ScenarioSpec(config=design_config, out_dir=tmp_path, t_final=1e-9, dt=1e-8)
    with pytest.raises(ValueError):
        ScenarioSpec(config=design_config, out_dir=tmp_path, workers=0)
    with pytest.raises(ValueError):
        ScenarioSpec(config=design_config, out_dir=tmp_path, occupations=(0.1,))


def test_open_dynamics_reruns_byte_identical(design_config, tmp_path):
    a = run_open_dynamics(small_spec(design_config, tmp_path / "a"))
    b = run_open_dynamics(small_spec(design_config, tmp_path / "b"))
    arts_a, arts_b = read_artifacts(a), read_artifacts(b)
    assert arts_a.keys() == arts_b.keys()
    assert len(arts_a) >= 1
    for name in arts_a:
        assert arts_a[name] == arts_b[name], name


def test_temperature_sweep_parallel_matches_serial(design_config, tmp_path):
    kwargs = dict(diagonal=[0.0, 0.2], grid_axis=[0.1])
    serial = run_temperature_sweep(
        small_spec(design_config, tmp_path / "serial", workers=1), **kwargs
    )
    parallel = run_temperature_sweep(
        small_spec(design_config, tmp_path / "parallel", workers=2), **kwargs
    )
    arts_s, arts_p = read_artifacts(serial), read_artifacts(parallel)
    assert arts_s.keys() == arts_p.keys()
    for name in arts_s:
        assert arts_s[name] == arts_p[name], name


def test_scenario_result_shape(design_config, tmp_path):
    result = run_open_dynamics(small_spec(design_config, tmp_path))
    assert result.scenario
    assert all(hasattr(c, "passed") and hasattr(c, "detail") for c in result.checks)
    # summary is JSON-serializable and every artifact exists on disk
    json.dumps(result.summary)
    for p in result.artifacts:
        assert Path(p).is_file()


def test_trajectory_csv_layout(design_config, tmp_path):
    result = run_open_dynamics(small_spec(design_config, tmp_path))
    csvs = [Path(p) for p in result.artifacts if str(p).endswith(".csv")]
    assert csvs
    lines = csvs[0].read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "t"
    assert "ln_1_2" in header
    # fixed-width scientific notation keeps reruns byte-stable
    assert "e" in lines[1].split(",")[0]


def test_audit_reports(design_config, tmp_path):
    derived_path, discrepancy_path = write_reports(design_config, tmp_path)
    doc = json.loads(derived_path.read_text())
    assert {"derived", "comparisons", "config"} <= set(doc)
    assert "coupling" in doc["derived"]
    text = discrepancy_path.read_text().lower()
    assert "pascal" in text and "millibar" in text


def test_cli_derive_exit_zero(tmp_path):
    out = tmp_path / "derive"
    assert main(["derive", "--config", "design", "--out", str(out)]) == 0
    assert (out / "derived.json").is_file()
    assert (out / "discrepancies.md").is_file()


def test_cli_unknown_config_exit_one(tmp_path):
    assert main(["derive", "--config", "nonsense", "--out", str(tmp_path)]) == 1


def test_cli_bad_config_file_exit_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"particles": {}}')
    assert main(["derive", "--config", str(bad), "--out", str(tmp_path)]) == 1


def test_cli_failed_check_exit_two(tmp_path):
    # horizon far too short for the entanglement interval to close
    code = main(
        [
            "evolve",
            "--config",
            "design",
            "--t-final",
            "2e-7",
            "--dt",
            "1e-8",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 2
