"""Experiment harness: config parsing, the multi-split protocol, reports."""

import hashlib
import json
import math
import os

import numpy as np
import pytest

from votegate.aggregate import WeightSpec
from votegate.errors import ConfigError
from votegate.harness import (
    ExperimentConfig,
    ablation_sweep,
    load_config,
    run_experiment,
    validate_guarantee,
    write_guarantee_report,
    write_report,
)
from votegate.harness.report import write_manifest
from votegate.records import write_dataset
from votegate.synth import GeneratorSpec, generate_dataset, preset

SEPARABLE = preset("separable", m=8, answers=3)
UNIFORM = WeightSpec(kind="uniform")


def small_config(**overrides):
    base = dict(
        generator=SEPARABLE,
        weight=UNIFORM,
        alphas=(0.1,),
        n_cal=60,
        n_test=80,
        n_splits=8,
        seed=5,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ----------------------------------------------------------------- config


def test_config_requires_exactly_one_input():
    with pytest.raises(ConfigError):
        ExperimentConfig()
    with pytest.raises(ConfigError):
        ExperimentConfig(input_path="x.jsonl", generator=SEPARABLE)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(alphas=())
    with pytest.raises(ConfigError):
        small_config(alphas=(0.0,))
    with pytest.raises(ConfigError):
        small_config(alphas=(1.2,))
    with pytest.raises(ConfigError):
        small_config(n_cal=0)
    with pytest.raises(ConfigError):
        small_config(n_splits=0)
    with pytest.raises(ConfigError):
        small_config(seed=-1)
    with pytest.raises(ConfigError):
        small_config(delta0=-0.5)
    with pytest.raises(ConfigError):
        small_config(delta=0.0)
    with pytest.raises(ConfigError):
        small_config(n_test=None)  # generator mode needs a test size
    with pytest.raises(ConfigError):
        ExperimentConfig(input_path="x.jsonl", test_generator=SEPARABLE, n_cal=5)


def test_load_config_toml(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(
        """
[experiment]
alphas = [0.05, 0.10]
n_cal = 50
n_test = 70
n_splits = 4
seed = 9
delta0 = 0.1
output_dir = "results"

[weight]
kind = "exponential"
beta = 2.0

[input.generator]
preset = "separable"
m = 6
answers = 3
"""
    )
    config = load_config(path)
    assert config.alphas == (0.05, 0.10)
    assert config.n_cal == 50
    assert config.n_test == 70
    assert config.seed == 9
    assert config.delta0 == 0.1
    assert config.output_dir == "results"
    assert config.weight == WeightSpec(kind="exponential", beta=2.0)
    assert config.generator == preset("separable", m=6, answers=3)
    assert config.input_path is None


def test_load_config_explicit_generator(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(
        """
[experiment]
n_cal = 10
n_test = 10

[input.generator]
m = 4
answers = 2
pi_law = "diffuse"
score_laws = "equal-normal"
"""
    )
    config = load_config(path)
    assert config.generator.m == 4
    assert config.generator.pi_law == "diffuse"


def test_load_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text("[experiment]\nn_cal = 10\nn_tset = 20\n")
    with pytest.raises(ConfigError, match="n_tset"):
        load_config(path)
    path.write_text("[experiment]\nn_cal = 10\n\n[wieght]\nkind = 'uniform'\n")
    with pytest.raises(ConfigError, match="wieght"):
        load_config(path)


def test_load_config_rejects_bad_toml_and_missing_file(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("[experiment\nn_cal = 10\n")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.toml")


def test_output_dir_env_override(tmp_path, monkeypatch):
    path = tmp_path / "exp.toml"
    path.write_text(
        """
[experiment]
n_cal = 10
n_test = 10
output_dir = "from-file"

[input.generator]
preset = "separable"
"""
    )
    assert load_config(path).output_dir == "from-file"
    monkeypatch.setenv("VOTEGATE_OUT", "from-env")
    assert load_config(path).output_dir == "from-env"


# ------------------------------------------------------------- experiment


def test_run_experiment_is_deterministic():
    config = small_config()
    a = run_experiment(config)
    b = run_experiment(config)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c = run_experiment(small_config(seed=6))
    assert json.dumps(a, sort_keys=True) != json.dumps(c, sort_keys=True)


def test_run_experiment_report_shape():
    config = small_config(alphas=(0.05, 0.2))
    report = run_experiment(config)
    assert report["mode"] == "generator"
    assert len(report["rows"]) == config.n_splits * 2
    for row in report["rows"]:
        assert 0.0 <= row["risk"] <= 1.0
        assert 0.0 <= row["yield"] <= 1.0
        assert row["n_answered"] <= config.n_test
        if row["a_c"] is not None:
            assert 0.0 <= row["a_c"] <= 1.0
    assert {a["alpha"] for a in report["aggregates"]} == {0.05, 0.2}
    assert len(report["predictor_rows"]) == config.n_splits
    assert report["profile"]["rows"], "profile section should not be empty"
    assert report["frontier"]["rows"]


def test_run_experiment_aggregates_recompute():
    report = run_experiment(small_config(alphas=(0.1, 0.3), n_splits=6))
    for agg in report["aggregates"]:
        rows = [r for r in report["rows"] if r["alpha"] == agg["alpha"]]
        risks = [r["risk"] for r in rows]
        assert agg["mean_risk"] == pytest.approx(np.mean(risks), abs=1e-12)
        assert agg["std_risk"] == pytest.approx(np.std(risks, ddof=1), abs=1e-12)
        assert agg["se_risk"] == pytest.approx(
            np.std(risks, ddof=1) / math.sqrt(len(rows)), abs=1e-12
        )
        assert agg["n_always_abstain"] == sum(r["always_abstain"] for r in rows)


def test_always_abstain_end_to_end():
    # n_cal=5 at alpha=0.10 makes the slack negative on every split
    report = run_experiment(small_config(n_cal=5, alphas=(0.10,), n_splits=10))
    for row in report["rows"]:
        assert row["always_abstain"] is True
        assert row["lambda_hat"] == 1.0
        assert row["risk"] == 0.0
        assert row["yield"] == 0.0
        assert row["a_c"] is None
    agg = report["aggregates"][0]
    assert agg["mean_risk"] == 0.0
    assert agg["n_always_abstain"] == 10
    assert agg["n_a_c_defined"] == 0


def test_run_experiment_on_fixed_dataset(tmp_path):
    ds = generate_dataset(preset("separable", m=6, answers=3), 150, seed=21)
    path = tmp_path / "data.jsonl"
    write_dataset(ds, path)
    config = ExperimentConfig(
        input_path=str(path),
        weight=UNIFORM,
        alphas=(0.2,),
        n_cal=60,
        n_splits=5,
        seed=3,
    )
    report = run_experiment(config)
    assert report["mode"] == "dataset"
    # test side defaults to the remainder of the file
    assert all(row["n_answered"] <= 90 for row in report["rows"])
    again = run_experiment(config)
    assert json.dumps(report, sort_keys=True) == json.dumps(again, sort_keys=True)


def test_predictor_section_mostly_within_bound():
    report = run_experiment(small_config(n_cal=400, n_splits=10, delta0=0.1))
    agg = report["predictor_aggregate"]
    assert agg["n_degenerate"] <= 2
    assert agg["frac_within_bound"] == 1.0
    assert agg["max_gap"] < 0.5


# -------------------------------------------------------------- guarantee


def test_validate_guarantee_passes_on_exchangeable_draws():
    result = validate_guarantee(small_config(n_splits=60, alphas=(0.1, 0.2)))
    assert result["mode"] == "fresh-draws"
    assert result["passed"] is True
    assert result["shifted_test"] is False
    for row in result["alphas"]:
        assert row["n_trials"] == 60
        assert row["mean_risk"] <= row["threshold"]
        assert row["threshold"] == pytest.approx(
            row["alpha"] + 3.0 * row["se_risk"], abs=1e-15
        )


def test_validate_guarantee_needs_fresh_draws(tmp_path):
    ds = generate_dataset(preset("separable", m=6, answers=3), 120, seed=2)
    path = tmp_path / "data.jsonl"
    write_dataset(ds, path)
    config = ExperimentConfig(
        input_path=str(path), alphas=(0.2,), n_cal=60, n_splits=10, seed=1
    )
    with pytest.raises(ConfigError, match="split-resampling"):
        validate_guarantee(config)
    allowed = ExperimentConfig(
        input_path=str(path),
        alphas=(0.2,),
        n_cal=60,
        n_splits=10,
        seed=1,
        allow_split_resampling=True,
    )
    result = validate_guarantee(allowed)
    assert result["mode"] == "split-resampling"


def test_validate_guarantee_needs_at_least_two_trials():
    with pytest.raises(ConfigError, match="n_splits"):
        validate_guarantee(small_config(n_splits=1))


def test_validate_guarantee_flags_distribution_shift():
    config = small_config(
        n_cal=150,
        n_test=300,
        n_splits=40,
        test_generator=preset("adversarial", m=8, answers=3),
    )
    result = validate_guarantee(config)
    assert result["shifted_test"] is True
    assert result["passed"] is False
    row = result["alphas"][0]
    assert row["mean_risk"] > row["alpha"]


# ---------------------------------------------------------------- ablation


def test_ablation_sweep_axis_validation():
    with pytest.raises(ConfigError):
        ablation_sweep(small_config(), "temperature", [1, 2])
    with pytest.raises(ConfigError):
        ablation_sweep(small_config(), "m", [])
    dataset_config = ExperimentConfig(
        input_path="x.jsonl", alphas=(0.1,), n_cal=5, n_splits=2
    )
    with pytest.raises(ConfigError, match="generator"):
        ablation_sweep(dataset_config, "m", [4, 8])


def test_ablation_sweep_m_axis():
    result = ablation_sweep(small_config(n_splits=4), "m", [4, 8, 16])
    assert result["axis"] == "m"
    assert [run["value"] for run in result["runs"]] == [4, 8, 16]
    for run in result["runs"]:
        assert run["aggregates"][0]["mean_risk"] <= 1.0


def test_ablation_sweep_weight_axis():
    result = ablation_sweep(
        small_config(n_splits=3),
        "weight",
        [UNIFORM, WeightSpec(kind="exponential", beta=1.0)],
    )
    kinds = [run["value"]["kind"] for run in result["runs"]]
    assert kinds == ["uniform", "exponential"]


# ----------------------------------------------------------------- reports


def sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def test_write_report_artifacts_and_manifest(tmp_path):
    report = run_experiment(small_config(n_splits=4))
    out = tmp_path / "out"
    write_report(report, str(out))
    expected = {
        "report.json",
        "rows.csv",
        "predictor_gap.csv",
        "profile.csv",
        "frontier.csv",
        "frontier.json",
        "summary.txt",
        "manifest.json",
    }
    names = set(os.listdir(out))
    assert expected <= names
    figures = os.listdir(out / "figures")
    assert figures and all(f.endswith(".png") for f in figures)

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["algorithm"] == "sha256"
    assert "manifest.json" not in manifest["files"]
    for rel, entry in manifest["files"].items():
        full = out / rel
        assert full.exists()
        assert entry["sha256"] == sha256(full)
        assert entry["bytes"] == os.path.getsize(full)
    # every emitted artifact is accounted for
    on_disk = {
        os.path.relpath(os.path.join(root, f), out)
        for root, _, files in os.walk(out)
        for f in files
    }
    assert on_disk - {"manifest.json"} == set(manifest["files"])

    parsed = json.loads((out / "report.json").read_text())
    assert parsed["schema"] == report["schema"]
    assert parsed["rows"] == report["rows"]


def test_manifest_accumulates_across_stages(tmp_path):
    # pipeline stages sharing one output dir: the manifest keeps prior
    # entries, refreshes rewritten files, and drops vanished ones
    out = tmp_path / "out"
    out.mkdir()
    (out / "a.txt").write_text("one")
    write_manifest(str(out), ["a.txt"])
    (out / "b.txt").write_text("two")
    (out / "a.txt").write_text("one prime")
    write_manifest(str(out), ["b.txt", "a.txt"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == {"a.txt", "b.txt"}
    assert manifest["files"]["a.txt"]["sha256"] == sha256(out / "a.txt")

    (out / "a.txt").unlink()
    (out / "c.txt").write_text("three")
    write_manifest(str(out), ["c.txt"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == {"b.txt", "c.txt"}


def test_written_report_is_byte_stable(tmp_path):
    config = small_config(n_splits=3)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    write_report(run_experiment(config), str(out1))
    write_report(run_experiment(config), str(out2))
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "rows.csv").read_bytes() == (out2 / "rows.csv").read_bytes()


def test_write_guarantee_report(tmp_path):
    result = validate_guarantee(small_config(n_splits=10))
    out = tmp_path / "g"
    write_guarantee_report(result, str(out))
    names = set(os.listdir(out))
    assert {"guarantee.json", "guarantee.csv", "summary.txt", "manifest.json"} <= names
    text = (out / "summary.txt").read_text()
    assert "PASS" in text or "FAIL" in text
